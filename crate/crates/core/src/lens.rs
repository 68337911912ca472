//! Correction terms of lens spaces via the two-term recursion
//!
//! ```text
//! d(-L(p,q), i) = (pq - (2i + 1 - p - q)^2) / (4pq) - d(-L(q, r), j)
//! ```
//!
//! with `r = p mod q`, `j = i mod q`, terminating at `d(-L(1, ·), ·) = 0`.

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::dtable::DTable;
use crate::error::{Error, Result};
use crate::group::FiniteAbelianGroup;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Values exactly as the recursion produces them.
    #[default]
    Positive,
    /// Reversed orientation: every value negated.
    Negative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LensSpace {
    p: u64,
    q: u64,
    orientation: Orientation,
}

impl LensSpace {
    pub fn new(p: u64, q: u64, orientation: Orientation) -> Result<Self> {
        let valid = (p == 1 && q == 0) || (p >= 2 && q >= 1 && q < p);
        if !valid {
            return Err(Error::InvalidLensSpace { p, q });
        }
        if p.gcd(&q) != 1 {
            return Err(Error::NotCoprime { p, q });
        }
        Ok(LensSpace { p, q, orientation })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }
}

fn check_args(p: u64, q: u64, i: u64) -> Result<()> {
    if p == 0 || (q == 0 && p != 1) {
        return Err(Error::InvalidLensSpace { p, q });
    }
    if p.gcd(&q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    if i >= p + q {
        return Err(Error::BadIndex { p, q, i, bound: p + q });
    }
    Ok(())
}

fn leading_term(p: u64, q: u64, i: u64) -> Rational {
    let (p, q, i) = (p as i128, q as i128, i as i128);
    let s = 2 * i + 1 - p - q;
    Rational::new(p * q - s * s, 4 * p * q)
}

/// `d(-L(p,q), i)` for `0 ≤ i < p + q`.
pub fn d_lens(p: u64, q: u64, i: u64) -> Result<Rational> {
    check_args(p, q, i)?;
    Ok(d_lens_plain(p, q, i))
}

fn d_lens_plain(p: u64, q: u64, i: u64) -> Rational {
    if p == 1 {
        return Rational::zero();
    }
    leading_term(p, q, i) - d_lens_plain(q, p % q, i % q)
}

/// Memo over `(p, q, i)` triples, reusable across evaluations.
#[derive(Default, Debug)]
pub struct LensMemo {
    cache: HashMap<(u64, u64, u64), Rational>,
}

impl LensMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn d_lens(&mut self, p: u64, q: u64, i: u64) -> Result<Rational> {
        check_args(p, q, i)?;
        Ok(self.eval(p, q, i))
    }

    fn eval(&mut self, p: u64, q: u64, i: u64) -> Rational {
        if p == 1 {
            return Rational::zero();
        }
        if let Some(v) = self.cache.get(&(p, q, i)) {
            return v.clone();
        }
        let v = leading_term(p, q, i) - self.eval(q, p % q, i % q);
        self.cache.insert((p, q, i), v.clone());
        v
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }
}

/// Number of recursive steps before the recursion reaches `p = 1`.
pub fn recursion_depth(mut p: u64, mut q: u64) -> usize {
    let mut depth = 0;
    while p != 1 {
        let r = p % q;
        p = q;
        q = r;
        depth += 1;
    }
    depth
}

/// Values before relabeling: label `i ∈ [0, p)` carries `d(-L(p,q), i)`,
/// negated for [`Orientation::Negative`].
pub fn raw_table_lens(space: &LensSpace) -> Result<DTable> {
    let mut memo = LensMemo::new();
    let values = (0..space.p)
        .map(|i| {
            let v = memo.d_lens(space.p, space.q, i)?;
            Ok(match space.orientation {
                Orientation::Positive => v,
                Orientation::Negative => -v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DTable::new(FiniteAbelianGroup::cyclic(space.p), values)
}

/// Canonically labeled correction-term table of a lens space.
pub fn d_table_lens(space: &LensSpace) -> Result<DTable> {
    raw_table_lens(space)?.canonical_relabel()
}
