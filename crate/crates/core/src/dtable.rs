//! Tables of correction terms indexed by a finite abelian group.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::rational::Rational;

/// A value for every element of `group`. Once `origin_is_spin` is set the
/// labeling is centered: the identity is the conjugation-fixed point and
/// `value(-x) == value(x)` for all `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DTable {
    group: FiniteAbelianGroup,
    values: Vec<Rational>,
    origin_is_spin: bool,
}

impl DTable {
    /// `values` is indexed by [`FiniteAbelianGroup::index_of`].
    pub fn new(group: FiniteAbelianGroup, values: Vec<Rational>) -> Result<Self> {
        if values.len() as u64 != group.order() {
            return Err(Error::GroupMismatch(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        Ok(DTable { group, values, origin_is_spin: false })
    }

    pub fn from_fn(group: FiniteAbelianGroup, mut f: impl FnMut(&GroupElement) -> Rational) -> Self {
        let values = group.elements().map(|x| f(&x)).collect();
        DTable { group, values, origin_is_spin: false }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, x: &GroupElement) -> &Rational {
        &self.values[self.group.index_of(x)]
    }

    pub fn origin_is_spin(&self) -> bool {
        self.origin_is_spin
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values sorted ascending.
    pub fn multiset(&self) -> Vec<Rational> {
        let mut v = self.values.clone();
        v.sort();
        v
    }

    /// Orientation reversal: every value changes sign, labels are kept.
    pub fn negated(&self) -> DTable {
        DTable {
            group: self.group.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            origin_is_spin: self.origin_is_spin,
        }
    }

    /// Table `t'` with `t'(phi(x)) = t(x)`. `phi` must be a bijection of the
    /// group onto itself.
    pub fn relabeled(&self, phi: impl Fn(&GroupElement) -> GroupElement) -> Result<DTable> {
        let mut out: Vec<Option<Rational>> = vec![None; self.values.len()];
        for (i, v) in self.values.iter().enumerate() {
            let y = phi(&self.group.element_at(i));
            if !self.group.contains(&y) {
                return Err(Error::GroupMismatch(format!("image {y} outside the group")));
            }
            let slot = &mut out[self.group.index_of(&y)];
            if slot.is_some() {
                return Err(Error::GroupMismatch("relabeling is not injective".into()));
            }
            *slot = Some(v.clone());
        }
        Ok(DTable {
            group: self.group.clone(),
            values: out.into_iter().map(|v| v.expect("bijection")).collect(),
            origin_is_spin: self.origin_is_spin,
        })
    }

    /// Multiplies every coordinate by a unit of its cyclic factor. Only
    /// available for cyclic groups, where this exhausts the automorphisms.
    pub fn scaled_by_unit(&self, unit: u64) -> Result<DTable> {
        let n = self.group.exponent();
        if !self.group.is_cyclic() || unit.gcd(&n) != 1 {
            return Err(Error::GroupMismatch(format!("{unit} is not a unit of {}", self.group)));
        }
        self.relabeled(|x| self.group.scale(unit as i64, x))
    }

    pub fn is_conjugation_symmetric(&self) -> bool {
        self.group
            .elements()
            .all(|x| self.value(&x) == self.value(&self.group.neg(&x)))
    }

    /// Translates labels so the symmetry center becomes the identity.
    ///
    /// Searches shifts `c` in index order for the first with
    /// `value(x) == value(2c - x)` for every `x`; the new table is
    /// `x ↦ value(x + c)`.
    pub fn canonical_relabel(&self) -> Result<DTable> {
        let g = &self.group;
        // compare small integer ids instead of fractions
        let mut ids: HashMap<&Rational, u32> = HashMap::new();
        let id: Vec<u32> = self
            .values
            .iter()
            .map(|v| {
                let next = ids.len() as u32;
                *ids.entry(v).or_insert(next)
            })
            .collect();
        let elements: Vec<GroupElement> = g.elements().collect();
        let negs: Vec<usize> = elements.iter().map(|x| g.index_of(&g.neg(x))).collect();
        for c in &elements {
            let two_c = g.add(c, c);
            let symmetric = (0..elements.len()).all(|i| {
                let mirror = g.add(&two_c, &elements[negs[i]]);
                id[i] == id[g.index_of(&mirror)]
            });
            if symmetric {
                let values = elements.iter().map(|x| self.value(&g.add(x, c)).clone()).collect();
                return Ok(DTable { group: g.clone(), values, origin_is_spin: true });
            }
        }
        Err(Error::NoSymmetricLabeling)
    }

    /// Least common denominator `D` and the integers `D·value`, in index order.
    pub fn scaled_numerators(&self) -> (BigInt, Vec<BigInt>) {
        let denom = self.values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let nums = self
            .values
            .iter()
            .map(|v| v.numer() * (&denom / v.denom()))
            .collect();
        (denom, nums)
    }

    /// As [`scaled_numerators`](Self::scaled_numerators) but in machine words,
    /// if every numerator times `headroom` fits in an `i64`.
    pub fn scaled_numerators_i64(&self, headroom: u64) -> Option<(i64, Vec<i64>)> {
        let (d, nums) = self.scaled_numerators();
        let d = d.to_i64()?;
        let nums = nums
            .iter()
            .map(|n| n.to_i64().filter(|x| x.checked_mul(headroom as i64).is_some()))
            .collect::<Option<Vec<_>>>()?;
        Some((d, nums))
    }
}
