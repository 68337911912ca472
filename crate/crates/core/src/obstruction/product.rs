use std::collections::HashSet;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};

/// Base groups above this order are not tabulated.
pub const MAX_BASE_ORDER: u64 = 4096;

/// Tuple of base-group elements, each stored as its index in the base group.
pub type ProductElement = Vec<u32>;

/// `base^copies`, with addition in the base group tabulated.
#[derive(Clone, Debug)]
pub struct ProductGroup {
    base: FiniteAbelianGroup,
    copies: usize,
    n: usize,
    add: Vec<u32>,
    neg: Vec<u32>,
    orders: Vec<u64>,
}

impl ProductGroup {
    /// Obstruction searches use an even number of copies; enumeration accepts
    /// any positive count.
    pub fn new(base: FiniteAbelianGroup, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidGroup("product of zero copies".into()));
        }
        let order = base.order();
        if order > MAX_BASE_ORDER {
            return Err(Error::TooLarge(format!("base group of order {order}")));
        }
        if (order as u128).checked_pow(copies as u32).is_none_or(|t| t > u64::MAX as u128) {
            return Err(Error::TooLarge(format!("{order}^{copies} elements")));
        }
        let n = order as usize;
        let elements: Vec<GroupElement> = base.elements().collect();
        let mut add = vec![0u32; n * n];
        for (i, a) in elements.iter().enumerate() {
            for (j, b) in elements.iter().enumerate() {
                add[i * n + j] = base.index_of(&base.add(a, b)) as u32;
            }
        }
        let neg = elements.iter().map(|a| base.index_of(&base.neg(a)) as u32).collect();
        let orders = elements.iter().map(|a| base.element_order(a)).collect();
        Ok(ProductGroup { base, copies, n, add, neg, orders })
    }

    pub fn base(&self) -> &FiniteAbelianGroup {
        &self.base
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn base_order(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u64 {
        (self.n as u64).pow(self.copies as u32)
    }

    pub fn exponent(&self) -> u64 {
        self.base.exponent()
    }

    pub fn zero(&self) -> ProductElement {
        vec![0; self.copies]
    }

    #[inline]
    pub fn add_base(&self, a: u32, b: u32) -> u32 {
        self.add[a as usize * self.n + b as usize]
    }

    #[inline]
    pub fn base_element_order(&self, a: u32) -> u64 {
        self.orders[a as usize]
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> ProductElement {
        a.iter().zip(b).map(|(&x, &y)| self.add_base(x, y)).collect()
    }

    pub fn add_into(&self, acc: &mut [u32], b: &[u32]) {
        for (x, &y) in acc.iter_mut().zip(b) {
            *x = self.add_base(*x, y);
        }
    }

    pub fn neg(&self, a: &[u32]) -> ProductElement {
        a.iter().map(|&x| self.neg[x as usize]).collect()
    }

    pub fn scale(&self, k: u64, a: &[u32]) -> ProductElement {
        let mut acc = self.zero();
        let mut base = a.to_vec();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                self.add_into(&mut acc, &base);
            }
            let b2 = base.clone();
            self.add_into(&mut base, &b2);
            k >>= 1;
        }
        acc
    }

    pub fn element_order(&self, a: &[u32]) -> u64 {
        a.iter().fold(1, |acc, &x| acc.lcm(&self.orders[x as usize]))
    }

    /// Mixed-radix index; index order is lexicographic order.
    pub fn index_of(&self, a: &[u32]) -> u64 {
        a.iter().fold(0u64, |acc, &x| acc * self.n as u64 + x as u64)
    }

    pub fn element_at(&self, mut index: u64) -> ProductElement {
        let mut out = vec![0u32; self.copies];
        for slot in out.iter_mut().rev() {
            *slot = (index % self.n as u64) as u32;
            index /= self.n as u64;
        }
        out
    }

    pub fn to_group_elements(&self, a: &[u32]) -> Vec<GroupElement> {
        a.iter().map(|&x| self.base.element_at(x as usize)).collect()
    }

    pub fn from_group_elements(&self, xs: &[GroupElement]) -> Result<ProductElement> {
        if xs.len() != self.copies {
            return Err(Error::GroupMismatch(format!("{} components, expected {}", xs.len(), self.copies)));
        }
        xs.iter()
            .map(|x| {
                if self.base.contains(x) {
                    Ok(self.base.index_of(x) as u32)
                } else {
                    Err(Error::GroupMismatch(format!("{x} is not in {}", self.base)))
                }
            })
            .collect()
    }

    /// Sorted element list of the subgroup generated by `gens`.
    pub fn span(&self, gens: &[ProductElement]) -> Vec<ProductElement> {
        let mut set: HashSet<ProductElement> = HashSet::new();
        set.insert(self.zero());
        for g in gens {
            let ord = self.element_order(g);
            let current: Vec<ProductElement> = set.iter().cloned().collect();
            for h in current {
                let mut x = h;
                for _ in 1..ord {
                    self.add_into(&mut x, g);
                    set.insert(x.clone());
                }
            }
        }
        let mut out: Vec<ProductElement> = set.into_iter().collect();
        out.sort_unstable();
        out
    }

    /// Multiples `0·g, 1·g, …, (ord-1)·g`.
    pub fn multiples(&self, g: &[u32]) -> Vec<ProductElement> {
        let ord = self.element_order(g);
        let mut out = Vec::with_capacity(ord as usize);
        let mut x = self.zero();
        for _ in 0..ord {
            out.push(x.clone());
            self.add_into(&mut x, g);
        }
        out
    }

    /// True if `g` is lexicographically smallest among its unit multiples.
    pub fn is_canonical_generator(&self, g: &[u32]) -> bool {
        let n = self.element_order(g);
        let mut x = g.to_vec();
        for k in 2..n {
            self.add_into(&mut x, g);
            if k.gcd(&n) == 1 && x.as_slice() < g {
                return false;
            }
        }
        true
    }
}
