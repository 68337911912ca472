//! Finite abelian groups in invariant-factor form and their elements.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n).into_iter().fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// `Z_{d1} ⊕ … ⊕ Z_{dk}` with `d1 | d2 | … | dk` and every `di ≥ 2`.
/// The empty presentation is the trivial group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = Error;

    fn try_from(factors: Vec<u64>) -> Result<Self> {
        FiniteAbelianGroup::new(factors)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Self {
        g.factors
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    coords: Vec<u64>,
}

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = factors.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidGroup(format!("invariant factor {bad} < 2")));
        }
        if let Some(w) = factors.windows(2).find(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidGroup(format!("{} does not divide {}", w[0], w[1])));
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new() }
    }

    pub fn cyclic(n: u64) -> Self {
        match n {
            0 => panic!("cyclic group of order 0"),
            1 => Self::trivial(),
            n => FiniteAbelianGroup { factors: vec![n] },
        }
    }

    /// Canonical presentation of `Z_{n1} ⊕ … ⊕ Z_{nk}` for arbitrary positive
    /// orders (ones are absorbed).
    pub fn from_orders(orders: &[u64]) -> Result<Self> {
        if orders.contains(&0) {
            return Err(Error::InvalidGroup("cyclic factor of order 0".into()));
        }
        let mut by_prime: std::collections::BTreeMap<u64, Vec<u32>> = Default::default();
        for &n in orders {
            for (p, e) in factorize(n) {
                by_prime.entry(p).or_default().push(e);
            }
        }
        let rank = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![1u64; rank];
        for (p, mut exps) in by_prime {
            exps.sort_unstable_by(|a, b| b.cmp(a));
            for (k, e) in exps.into_iter().enumerate() {
                factors[rank - 1 - k] *= p.pow(e);
            }
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() <= 1
    }

    pub fn element(&self, coords: Vec<u64>) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::GroupMismatch(format!(
                "{} coordinates for a group of rank {}",
                coords.len(),
                self.factors.len()
            )));
        }
        if let Some((c, d)) = coords.iter().zip(&self.factors).find(|(c, d)| c >= d) {
            return Err(Error::GroupMismatch(format!("residue {c} not reduced mod {d}")));
        }
        Ok(GroupElement { coords })
    }

    /// Reduces arbitrary integers coordinatewise.
    pub fn element_reduced(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.factors.len() {
            return Err(Error::GroupMismatch("wrong number of coordinates".into()));
        }
        Ok(GroupElement {
            coords: coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, &d)| c.rem_euclid(d as i64) as u64)
                .collect(),
        })
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.coords.len() == self.factors.len() && x.coords.iter().zip(&self.factors).all(|(c, d)| c < d)
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { coords: vec![0; self.factors.len()] }
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .zip(&self.factors)
                .map(|((x, y), d)| (x + y) % d)
                .collect(),
        }
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement {
            coords: a.coords.iter().zip(&self.factors).map(|(x, d)| (d - x) % d).collect(),
        }
    }

    /// `k·a` for any integer `k`.
    pub fn scale(&self, k: i64, a: &GroupElement) -> GroupElement {
        GroupElement {
            coords: a
                .coords
                .iter()
                .zip(&self.factors)
                .map(|(&x, &d)| {
                    let km = k.rem_euclid(d as i64) as u128;
                    ((km * x as u128) % d as u128) as u64
                })
                .collect(),
        }
    }

    /// Least `t ≥ 1` with `t·x = 0`.
    pub fn element_order(&self, x: &GroupElement) -> u64 {
        x.coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, &d)| d / c.gcd(&d))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    /// Position of `x` in the mixed-radix enumeration (first coordinate most
    /// significant), so index order is lexicographic order.
    pub fn index_of(&self, x: &GroupElement) -> usize {
        x.coords
            .iter()
            .zip(&self.factors)
            .fold(0usize, |acc, (&c, &d)| acc * d as usize + c as usize)
    }

    pub fn element_at(&self, mut index: usize) -> GroupElement {
        let mut coords = vec![0u64; self.factors.len()];
        for (slot, &d) in coords.iter_mut().zip(&self.factors).rev() {
            *slot = (index % d as usize) as u64;
            index /= d as usize;
        }
        GroupElement { coords }
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z{d}")).collect();
        write!(f, "{}", parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(45), vec![(3, 2), (5, 1)]);
        assert_eq!(factorize(61), vec![(61, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(euler_phi(45), 24);
        assert_eq!(euler_phi(1), 1);
    }

    #[test]
    fn validation() {
        assert!(FiniteAbelianGroup::new(vec![3, 15]).is_ok());
        assert!(FiniteAbelianGroup::new(vec![15, 3]).is_err());
        assert!(FiniteAbelianGroup::new(vec![1, 3]).is_err());
        assert_eq!(FiniteAbelianGroup::new(vec![]).unwrap(), FiniteAbelianGroup::trivial());
    }

    #[test]
    fn from_orders_normalizes() {
        assert_eq!(FiniteAbelianGroup::from_orders(&[3, 5]).unwrap().factors(), &[15]);
        assert_eq!(FiniteAbelianGroup::from_orders(&[15, 3]).unwrap().factors(), &[3, 15]);
        assert_eq!(FiniteAbelianGroup::from_orders(&[9, 3, 1]).unwrap().factors(), &[3, 9]);
        assert!(FiniteAbelianGroup::from_orders(&[1, 1]).unwrap().is_trivial());
    }

    #[test]
    fn element_orders() {
        let g = FiniteAbelianGroup::new(vec![3, 15]).unwrap();
        assert_eq!(g.element_order(&g.zero()), 1);
        assert_eq!(g.element_order(&g.element(vec![1, 0]).unwrap()), 3);
        let h = FiniteAbelianGroup::new(vec![45, 45]).unwrap();
        assert_eq!(h.element_order(&h.element(vec![5, 3]).unwrap()), 45);
        assert_eq!(FiniteAbelianGroup::trivial().element_order(&FiniteAbelianGroup::trivial().zero()), 1);
    }

    #[test]
    fn index_round_trip_is_lexicographic() {
        let g = FiniteAbelianGroup::new(vec![3, 6]).unwrap();
        let els: Vec<_> = g.elements().collect();
        assert_eq!(els.len(), 18);
        for (i, e) in els.iter().enumerate() {
            assert_eq!(g.index_of(e), i);
        }
        assert!(els.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lagrange_by_exhaustion() {
        for n in 1..=200u64 {
            for orders in [vec![n], vec![1, n]] {
                let g = FiniteAbelianGroup::from_orders(&orders).unwrap();
                for x in g.elements() {
                    assert_eq!(g.order() % g.element_order(&x), 0);
                }
            }
        }
        // a few non-cyclic groups of order <= 200
        for factors in [vec![2, 2], vec![3, 3], vec![3, 15], vec![2, 4, 8], vec![5, 10], vec![7, 7], vec![3, 3, 9]] {
            let g = FiniteAbelianGroup::new(factors).unwrap();
            assert!(g.order() <= 200);
            for x in g.elements() {
                let t = g.element_order(&x);
                assert_eq!(g.order() % t, 0);
                assert_eq!(g.scale(t as i64, &x), g.zero());
            }
        }
    }

    #[test]
    fn arithmetic() {
        let g = FiniteAbelianGroup::new(vec![3, 15]).unwrap();
        let a = g.element(vec![2, 7]).unwrap();
        assert_eq!(g.add(&a, &g.neg(&a)), g.zero());
        assert_eq!(g.scale(-1, &a), g.neg(&a));
        assert_eq!(g.scale(3, &a), g.add(&a, &g.add(&a, &a)));
        assert!(g.element(vec![3, 0]).is_err());
        assert_eq!(g.element_reduced(&[-1, 16]).unwrap().coords(), &[2, 1]);
    }
}
