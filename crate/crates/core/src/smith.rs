//! Smith normal form over the integers and cokernels of square forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::matrix::IntMatrix;

/// `left · source · right = diag(diagonal)` with `left`, `right` unimodular and
/// `diagonal[i] | diagonal[i+1]`, all entries non-negative.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub source: IntMatrix,
    pub diagonal: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
    /// Inverse of `left`, maintained alongside it.
    pub left_inv: IntMatrix,
}

impl SmithDecomposition {
    pub fn diagonal_matrix(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.source.rows(), self.source.cols());
        for (i, x) in self.diagonal.iter().enumerate() {
            d.set(i, i, x.clone());
        }
        d
    }
}

fn pick_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            let av = v.abs();
            // strict comparison keeps the lowest (row-major) index on ties
            if best.as_ref().is_none_or(|(b, _, _)| av < *b) {
                best = Some((av, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Smallest-absolute-value pivoting with row and column swaps; ties go to the
/// lowest row-major index, so the transforms are reproducible.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithDecomposition> {
    m.require_square()?;
    let (r, c) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut left = IntMatrix::identity(r);
    let mut left_inv = IntMatrix::identity(r);
    let mut right = IntMatrix::identity(c);

    for t in 0..r.min(c) {
        loop {
            let Some((pi, pj)) = pick_pivot(&a, t) else {
                break;
            };
            a.swap_rows(t, pi);
            left.swap_rows(t, pi);
            left_inv.swap_cols(t, pi);
            a.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let pivot = a.get(t, t).clone();
            let mut clean = true;
            for i in (t + 1)..r {
                let q = a.get(i, t).div_floor(&pivot);
                if !q.is_zero() {
                    let neg_q = -&q;
                    a.add_row_multiple(i, t, &neg_q);
                    left.add_row_multiple(i, t, &neg_q);
                    left_inv.add_col_multiple(t, i, &q);
                }
                clean &= a.get(i, t).is_zero();
            }
            for j in (t + 1)..c {
                let q = a.get(t, j).div_floor(&pivot);
                if !q.is_zero() {
                    let neg_q = -&q;
                    a.add_col_multiple(j, t, &neg_q);
                    right.add_col_multiple(j, t, &neg_q);
                }
                clean &= a.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let offender = ((t + 1)..r)
                .find(|&i| ((t + 1)..c).any(|j| !(a.get(i, j) % &pivot).is_zero()));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    left.add_row_multiple(t, i, &one);
                    left_inv.add_col_multiple(i, t, &-one);
                }
                None => break,
            }
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            left.negate_row(t);
            left_inv.negate_col(t);
        }
    }

    let diagonal = (0..r.min(c)).map(|i| a.get(i, i).clone()).collect();
    Ok(SmithDecomposition { source: m.clone(), diagonal, left, right, left_inv })
}

/// Cokernel of a nonsingular square integer matrix `m`, i.e. `Zⁿ / m·Zⁿ`,
/// presented through its Smith decomposition.
#[derive(Clone, Debug)]
pub struct Cokernel {
    group: FiniteAbelianGroup,
    smith: SmithDecomposition,
    /// Index of the first invariant factor greater than one.
    offset: usize,
}

pub fn cokernel(m: &IntMatrix) -> Result<Cokernel> {
    let smith = smith_normal_form(m)?;
    if smith.diagonal.iter().any(Zero::is_zero) {
        return Err(Error::SingularMatrix);
    }
    let offset = smith.diagonal.iter().take_while(|d| d.is_one()).count();
    let factors = smith.diagonal[offset..]
        .iter()
        .map(|d| d.to_u64().ok_or_else(|| Error::InvalidGroup(format!("invariant factor {d} too large"))))
        .collect::<Result<Vec<_>>>()?;
    let group = FiniteAbelianGroup::new(factors)?;
    Ok(Cokernel { group, smith, offset })
}

impl Cokernel {
    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn smith(&self) -> &SmithDecomposition {
        &self.smith
    }

    /// Class of an integer vector: `(left·u)_k mod d_k` over the nontrivial
    /// invariant factors.
    pub fn class_of(&self, u: &[BigInt]) -> GroupElement {
        let lu = self.smith.left.mul_vec(u);
        let coords: Vec<u64> = lu[self.offset..]
            .iter()
            .zip(self.group.factors())
            .map(|(x, &d)| x.mod_floor(&BigInt::from(d)).to_u64().expect("residue fits"))
            .collect();
        self.group.element(coords).expect("reduced residues")
    }

    /// An integer vector whose class is `x`.
    pub fn representative(&self, x: &GroupElement) -> Vec<BigInt> {
        let n = self.smith.source.rows();
        let mut e = vec![BigInt::zero(); n];
        for (k, &c) in x.coords().iter().enumerate() {
            e[self.offset + k] = BigInt::from(c);
        }
        self.smith.left_inv.mul_vec(&e)
    }
}
