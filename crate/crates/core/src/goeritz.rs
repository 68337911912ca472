//! Goeritz forms of checkerboard white graphs and the correction terms they
//! determine.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtable::DTable;
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::lattice::DefiniteForm;
use crate::matrix::IntMatrix;
use crate::rational::Rational;
use crate::smith::{cokernel, Cokernel, SmithDecomposition};

/// White regions of a checkerboard diagram as vertices, one edge per
/// crossing where two white regions touch. `dropped` is the discarded vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhiteGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub dropped: usize,
}

impl WhiteGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>, dropped: usize) -> Result<Self> {
        let g = WhiteGraph { vertex_count, edges, dropped };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count;
        if n == 0 {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        if self.dropped >= n {
            return Err(Error::InvalidGraph(format!("dropped vertex {} out of range", self.dropped)));
        }
        for &(a, b) in &self.edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("loop at vertex {a}")));
            }
        }
        // connectivity by union-find
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
        let root = find(&mut parent, 0);
        if (1..n).any(|v| find(&mut parent, v) != root) {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(())
    }

    /// Kept vertices in input order.
    pub fn kept(&self) -> Vec<usize> {
        (0..self.vertex_count).filter(|&v| v != self.dropped).collect()
    }

    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| (a == u && b == v) || (a == v && b == u))
            .count()
    }

    /// Goeritz matrix for the given ordering of the kept vertices (input
    /// order when `None`): off-diagonal entries count edges, diagonal entries
    /// are minus the full valence.
    pub fn goeritz_matrix(&self, ordering: Option<&[usize]>) -> Result<IntMatrix> {
        self.validate()?;
        let kept = self.kept();
        let order: Vec<usize> = match ordering {
            None => kept.clone(),
            Some(o) => {
                let mut sorted = o.to_vec();
                sorted.sort_unstable();
                if sorted != kept {
                    return Err(Error::InvalidGraph(
                        "ordering is not a permutation of the kept vertices".into(),
                    ));
                }
                o.to_vec()
            }
        };
        let k = order.len();
        let mut m = IntMatrix::zeros(k, k);
        for (i, &u) in order.iter().enumerate() {
            for (j, &v) in order.iter().enumerate() {
                let e = if i == j { -(self.valence(u) as i64) } else { self.multiplicity(u, v) as i64 };
                m.set(i, j, BigInt::from(e));
            }
        }
        Ok(m)
    }
}

/// Graph of a linear chain with weights `a₁, …, a_k` (all ≥ 2): vertex `i`
/// is joined once to each chain neighbour and to the dropped vertex often
/// enough to have valence `aᵢ`. Its Goeritz matrix is tridiagonal with
/// `-aᵢ` on the diagonal and `1` beside it.
pub fn chain_graph(weights: &[u64]) -> Result<WhiteGraph> {
    let k = weights.len();
    if k == 0 || weights.iter().any(|&a| a < 2) {
        return Err(Error::InvalidGraph("chain weights must be at least 2".into()));
    }
    let dropped = k;
    let mut edges = Vec::new();
    for i in 0..k {
        if i + 1 < k {
            edges.push((i, i + 1));
        }
        let neighbours = usize::from(i > 0) + usize::from(i + 1 < k);
        for _ in 0..(weights[i] as usize - neighbours) {
            edges.push((i, dropped));
        }
    }
    WhiteGraph::new(k + 1, edges, dropped)
}

/// `p/q = a₁ - 1/(a₂ - 1/(…))` with every `aᵢ ≥ 2`, for `p > q ≥ 1`.
pub fn negative_continued_fraction(mut p: u64, mut q: u64) -> Vec<u64> {
    let mut out = Vec::new();
    while q != 0 {
        let a = p.div_ceil(q);
        out.push(a);
        let r = a * q - p;
        p = q;
        q = r;
    }
    out
}

/// Borders `base` by one row and column: zero except a `1` next to the last
/// diagonal entry and `-k` in the new corner.
pub fn extend_twisted(base: &IntMatrix, k: i64) -> Result<IntMatrix> {
    if k < 1 {
        return Err(Error::BadTwistCount(k));
    }
    if !base.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = base.rows();
    let mut m = IntMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, base.get(i, j).clone());
        }
    }
    if n > 0 {
        m.set(n - 1, n, BigInt::from(1));
        m.set(n, n - 1, BigInt::from(1));
    }
    m.set(n, n, BigInt::from(-k));
    Ok(m)
}

/// Exact test: `sign(Δₖ) = (-1)ᵏ` for every leading principal minor.
pub fn is_negative_definite(m: &IntMatrix) -> Result<bool> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let minors = m.leading_principal_minors()?;
    Ok(minors.iter().enumerate().all(|(k, d)| {
        if k % 2 == 0 {
            d.is_negative()
        } else {
            d.is_positive()
        }
    }))
}

/// A symmetric negative-definite integer form with its discriminant group.
#[derive(Clone, Debug)]
pub struct GoeritzForm {
    matrix: IntMatrix,
    coker: Cokernel,
    lattice: DefiniteForm,
}

/// A class of characteristic covectors modulo `2·G(Zⁿ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicClass {
    /// `v₀ + 2u` with `v₀ = diag(G)` and `[u]` the class label.
    pub representative: Vec<BigInt>,
    pub class_label: GroupElement,
}

impl GoeritzForm {
    pub fn new(matrix: IntMatrix) -> Result<Self> {
        matrix.require_square()?;
        if !is_negative_definite(&matrix)? {
            return Err(Error::NotNegativeDefinite);
        }
        let coker = cokernel(&matrix)?;
        let lattice = DefiniteForm::new(&matrix)?;
        Ok(GoeritzForm { matrix, coker, lattice })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn smith(&self) -> &SmithDecomposition {
        self.coker.smith()
    }

    pub fn disc_group(&self) -> &FiniteAbelianGroup {
        self.coker.group()
    }

    pub fn cokernel(&self) -> &Cokernel {
        &self.coker
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn determinant(&self) -> BigInt {
        self.matrix.determinant().expect("square")
    }

    fn base_characteristic(&self) -> Vec<BigInt> {
        (0..self.rank()).map(|i| self.matrix.get(i, i).clone()).collect()
    }

    pub fn is_characteristic(&self, w: &[BigInt]) -> bool {
        let two = BigInt::from(2);
        w.iter()
            .enumerate()
            .all(|(i, x)| ((x - self.matrix.get(i, i)) % &two).is_zero())
    }

    pub fn class_of_characteristic(&self, w: &[BigInt]) -> Option<GroupElement> {
        if !self.is_characteristic(w) {
            return None;
        }
        let v0 = self.base_characteristic();
        let u: Vec<BigInt> = w.iter().zip(&v0).map(|(a, b)| (a - b) / 2).collect();
        Some(self.coker.class_of(&u))
    }
}

pub fn graph_to_goeritz(g: &WhiteGraph, ordering: Option<&[usize]>) -> Result<GoeritzForm> {
    GoeritzForm::new(g.goeritz_matrix(ordering)?)
}

/// One class per element of the discriminant group, in index order.
pub fn characteristic_classes(f: &GoeritzForm) -> Vec<CharacteristicClass> {
    let v0 = f.base_characteristic();
    f.disc_group()
        .elements()
        .map(|x| {
            let u = f.coker.representative(&x);
            let representative = v0.iter().zip(&u).map(|(a, b)| a + BigInt::from(2) * b).collect();
            CharacteristicClass { representative, class_label: x }
        })
        .collect()
}

/// `(max_{w ∈ class} G*(w, w) + rank) / 4`.
pub fn max_square_in_class(f: &GoeritzForm, c: &CharacteristicClass) -> Rational {
    let m = f.lattice.max_over_coset(&c.representative);
    (m.value + Rational::from(f.rank() as i64)) / Rational::from(4)
}

/// Values indexed by the discriminant group before canonical relabeling.
pub fn raw_table_from_goeritz(f: &GoeritzForm) -> Result<DTable> {
    let classes = characteristic_classes(f);
    let values: Vec<Rational> = classes.par_iter().map(|c| max_square_in_class(f, c)).collect();
    DTable::new(f.disc_group().clone(), values)
}

pub fn d_table_from_goeritz(f: &GoeritzForm) -> Result<DTable> {
    raw_table_from_goeritz(f)?.canonical_relabel()
}

/// `|det|` as a machine word.
pub fn determinant_u64(m: &IntMatrix) -> Result<u64> {
    m.determinant()?
        .abs()
        .to_u64()
        .ok_or_else(|| Error::InvalidGroup("determinant too large".into()))
}
