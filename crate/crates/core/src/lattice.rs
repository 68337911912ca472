//! Exact maximization of a negative-definite form over a coset of `2·Zⁿ`.
//!
//! For a negative-definite `G` and a dual vector `w₀`, the quantity
//! `max { wᵀ G⁻¹ w : w ∈ w₀ + 2·G·Zⁿ }` becomes, with `y = G⁻¹ w` and
//! `A = -G`, the minimum of `yᵀ A y` over `y ∈ y₀ + 2·Zⁿ`.
//!
//! A greedy descent supplies an incumbent. A depth-first enumeration over
//! `A = Uᵀ D U` then visits every point whose value could beat it, so the
//! returned optimum is certified. Subtrees that only depend on a few fixed
//! coordinates (banded forms such as linear chains) are memoized.
//!
//! Values are tracked on `Y = det·y`, where `YᵀAY` is an integer. The fast
//! path keeps exact `i128` row contributions of `A` and uses the `UᵀDU`
//! terms, in floating point, only as lower bounds for pruning, with a margin
//! far above rounding error; since true values are integers a pruned branch
//! can never hold an optimum. If anything leaves the safe range the search
//! reruns on big integers, where with `Δᵢ` the leading minors and
//! `L = lcm(Δᵢ₋₁Δᵢ)` level `i` contributes `Kᵢ·Eᵢ²` to `L·YᵀAY`, with
//! `Eᵢ = ΔᵢYᵢ + Σⱼ₍ⱼ>ᵢ₎ NᵢⱼYⱼ` and `Kᵢ = L/(Δᵢ₋₁Δᵢ)`.

use std::collections::HashMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use crate::rational::Rational;

trait Int: Clone + Ord + Sized {
    fn from_big(x: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn int(k: i64) -> Self;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    /// `self / d` rounded half away from zero, for `d > 0`.
    fn div_round(&self, d: &Self) -> Option<i64>;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
}

impl Int for BigInt {
    fn from_big(x: &BigInt) -> Option<Self> {
        Some(x.clone())
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
    fn int(k: i64) -> Self {
        BigInt::from(k)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div_round(&self, d: &Self) -> Option<i64> {
        let twice = self * 2;
        let n = if Signed::is_negative(self) { twice - d } else { twice + d };
        // truncating division
        let q: BigInt = n / (d * 2);
        q.to_i64()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

impl Int for i128 {
    fn from_big(x: &BigInt) -> Option<Self> {
        x.to_i128()
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn int(k: i64) -> Self {
        k as i128
    }
    fn add(&self, o: &Self) -> Option<Self> {
        i128::checked_add(*self, *o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        i128::checked_sub(*self, *o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        i128::checked_mul(*self, *o)
    }
    fn div_round(&self, d: &Self) -> Option<i64> {
        let twice = i128::checked_mul(*self, 2)?;
        let n = if *self < 0 { i128::checked_sub(twice, *d)? } else { i128::checked_add(twice, *d)? };
        i64::try_from(n / i128::checked_mul(*d, 2)?).ok()
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
}

/// Integer data of the decomposition over one integer type.
#[derive(Clone, Debug)]
struct Data<T> {
    a: Vec<Vec<T>>,
    det: T,
    /// `Δᵢ`, the leading principal minor of size `i + 1`.
    delta: Vec<T>,
    /// `Nᵢⱼ = Δᵢ·Uᵢⱼ` for `j > i`, as sparse rows.
    coef: Vec<Vec<(usize, T)>>,
    k: Vec<T>,
    /// `L`, the common scale of level terms.
    scale: T,
}

#[derive(Clone, Debug)]
pub struct DefiniteForm {
    n: usize,
    /// `A = -G`, positive definite.
    a: Vec<Vec<Rational>>,
    d: Vec<Rational>,
    /// Unit upper-triangular factor; only `u[i][j]` with `j > i` are used.
    u: Vec<Vec<Rational>>,
    big: Data<BigInt>,
    fast: Option<Fast>,
    /// Coordinates above level `i` that subtrees at level `i` depend on.
    deps: Vec<Vec<usize>>,
    memo_level: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct Maximum {
    /// `max wᵀ G⁻¹ w` over the coset.
    pub value: Rational,
    /// A maximizer in `y = G⁻¹ w` coordinates.
    pub argmax: Vec<Rational>,
    /// Search-tree nodes expanded during certification.
    pub nodes: u64,
}

/// Coordinates `zᵢ, zᵢ₋₁, …, z₀` of a partial solution, shared between
/// memo entries.
type Coords = Option<Rc<Link>>;

struct Link(i64, Coords);

fn cons(k: i64, rest: Coords) -> Coords {
    Some(Rc::new(Link(k, rest)))
}

/// Coordinates in increasing level order.
fn unwind(mut c: &Coords) -> Vec<i64> {
    let mut out = Vec::new();
    while let Some(node) = c {
        out.push(node.0);
        c = &node.1;
    }
    out.reverse();
    out
}

enum MemoEntry<T> {
    Exact(T, Coords),
    Above(T),
}

struct Overflow;

type Step<T> = std::result::Result<T, Overflow>;

fn ck<T>(x: Option<T>) -> Step<T> {
    x.ok_or(Overflow)
}

struct Search<'a, T> {
    form: &'a DefiniteForm,
    data: &'a Data<T>,
    /// `det·y₀` for the reduced start point.
    tau: Vec<T>,
    z: Vec<i64>,
    /// `Yⱼ = τⱼ + 2·det·zⱼ` for the levels already fixed.
    big_y: Vec<T>,
    memo: HashMap<(usize, Vec<i64>), MemoEntry<T>>,
    nodes: u64,
}

fn to_int(x: &Rational) -> BigInt {
    debug_assert!(x.is_integer());
    x.numer().clone()
}

impl DefiniteForm {
    /// `g` must be symmetric and negative definite.
    pub fn new(g: &IntMatrix) -> Result<Self> {
        if !g.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let n = g.rows();
        let a: Vec<Vec<Rational>> = (0..n)
            .map(|i| (0..n).map(|j| -Rational::from_integer(g.get(i, j).clone())).collect())
            .collect();
        let mut d = vec![Rational::zero(); n];
        let mut u = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            let mut di = a[i][i].clone();
            for k in 0..i {
                if !u[k][i].is_zero() {
                    di -= &(&(&u[k][i] * &u[k][i]) * &d[k]);
                }
            }
            if di <= Rational::zero() {
                return Err(Error::NotNegativeDefinite);
            }
            u[i][i] = Rational::one();
            for j in (i + 1)..n {
                let mut s = a[i][j].clone();
                for k in 0..i {
                    if !u[k][i].is_zero() && !u[k][j].is_zero() {
                        s -= &(&(&u[k][i] * &u[k][j]) * &d[k]);
                    }
                }
                u[i][j] = s / &di;
            }
            d[i] = di;
        }
        let deps: Vec<Vec<usize>> = (0..n)
            .map(|i| ((i + 1)..n).filter(|&j| (0..=i).any(|r| !u[r][j].is_zero())).collect())
            .collect();
        let memo_level = (0..n).map(|i| deps[i].len() < n - 1 - i).collect();

        let mut delta = Vec::with_capacity(n);
        let mut running = Rational::one();
        for di in &d {
            running = &running * di;
            delta.push(to_int(&running));
        }
        let prev = |i: usize| if i == 0 { BigInt::one() } else { delta[i - 1].clone() };
        let scale = (0..n).fold(BigInt::one(), |l, i| l.lcm(&(prev(i) * &delta[i])));
        let k = (0..n).map(|i| &scale / (prev(i) * &delta[i])).collect();
        let coef = (0..n)
            .map(|i| {
                ((i + 1)..n)
                    .filter(|&j| !u[i][j].is_zero())
                    .map(|j| (j, to_int(&(&u[i][j] * &Rational::from_integer(delta[i].clone())))))
                    .collect()
            })
            .collect();
        let big = Data {
            a: a.iter().map(|r| r.iter().map(to_int).collect()).collect(),
            det: delta.last().cloned().unwrap_or_else(BigInt::one),
            delta,
            coef,
            k,
            scale,
        };
        let fast = Fast::new(&big, &d, &u);
        Ok(DefiniteForm { n, a, d, u, big, fast, deps, memo_level })
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    /// `yᵀ A y`.
    pub fn norm(&self, y: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for i in 0..self.n {
            if y[i].is_zero() {
                continue;
            }
            let row: Rational = (0..self.n).map(|j| &self.a[i][j] * &y[j]).sum();
            s += &(&y[i] * &row);
        }
        s
    }

    /// `G⁻¹ w = -(UᵀDU)⁻¹ w`, by substitution.
    pub fn to_primal(&self, w: &[BigInt]) -> Vec<Rational> {
        let n = self.n;
        let u = &self.u;
        let mut x: Vec<Rational> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = -Rational::from_integer(w[i].clone());
            for k in 0..i {
                if !u[k][i].is_zero() && !x[k].is_zero() {
                    s -= &(&u[k][i] * &x[k]);
                }
            }
            x.push(s);
        }
        let mut y = vec![Rational::zero(); n];
        for i in (0..n).rev() {
            let mut s = &x[i] / &self.d[i];
            for j in (i + 1)..n {
                if !u[i][j].is_zero() && !y[j].is_zero() {
                    s -= &(&u[i][j] * &y[j]);
                }
            }
            y[i] = s;
        }
        y
    }

    /// Certified `max wᵀ G⁻¹ w` over `w ∈ w0 + 2·G·Zⁿ`.
    pub fn max_over_coset(&self, w0: &[BigInt]) -> Maximum {
        if self.n == 0 {
            return Maximum { value: Rational::zero(), argmax: Vec::new(), nodes: 0 };
        }
        // det·G⁻¹w0, each coordinate shifted into [-det, det]
        let det = &self.big.det;
        let two_det = det * 2;
        let scaled: Vec<BigInt> = match self.fast.as_ref().and_then(|f| scaled_primal(f, w0)) {
            Some(t) => t.into_iter().map(BigInt::from).collect(),
            None => self
                .to_primal(w0)
                .iter()
                .map(|y| to_int(&(y * &Rational::from_integer(det.clone()))))
                .collect(),
        };
        let tau: Vec<BigInt> = scaled
            .into_iter()
            .map(|t| {
                let k = t.div_round(&two_det).expect("shift fits in i64");
                t - &two_det * k
            })
            .collect();
        if let Some(fast) = &self.fast {
            if let Ok(m) = self.maximize_fast(fast, &tau) {
                return m;
            }
        }
        match self.maximize(&self.big, &tau) {
            Ok(m) => m,
            Err(Overflow) => unreachable!("big integers do not overflow"),
        }
    }

    fn maximize_fast(&self, fast: &Fast, tau: &[BigInt]) -> Step<Maximum> {
        let n = self.n;
        let tau: Vec<i128> = ck(tau.iter().map(|t| t.to_i128()).collect::<Option<_>>())?;
        let mut start = nearest_plane(fast, &tau)?;
        let data = Data {
            a: fast.a.clone(),
            det: fast.det,
            delta: Vec::new(),
            coef: Vec::new(),
            k: Vec::new(),
            scale: 1,
        };
        let incumbent = descend(&data, &mut start)?;
        let mut search = FastSearch {
            form: self,
            fast,
            tau,
            z: vec![0; n],
            big_y: vec![0; n],
            memo: HashMap::new(),
            nodes: 0,
        };
        let (best, zs) = search
            .level(n - 1, incumbent, 0.0, 0.0)?
            .ok_or(Overflow)?;
        let zs = unwind(&zs);
        let det = BigInt::from(fast.det);
        let argmax: Vec<Rational> = search
            .tau
            .iter()
            .zip(&zs)
            .map(|(t, &z)| Rational::new(BigInt::from(*t) + &det * 2 * z, det.clone()))
            .collect();
        let value = Rational::new(best, BigInt::from(fast.det) * fast.det);
        Ok(Maximum { value: -value, argmax, nodes: search.nodes })
    }

    fn maximize<T: Int>(&self, data: &Data<T>, tau: &[BigInt]) -> Step<Maximum> {
        let n = self.n;
        let tau: Vec<T> = ck(tau.iter().map(T::from_big).collect::<Option<_>>())?;
        let mut start = tau.clone();
        let incumbent = ck(descend(data, &mut start)?.mul(&data.scale))?;

        let mut search = Search {
            form: self,
            data,
            tau,
            z: vec![0; n],
            big_y: vec![T::int(0); n],
            memo: HashMap::new(),
            nodes: 0,
        };
        let (best, zs) = search
            .level(n - 1, &incumbent)?
            .expect("the descent point lies inside the search region");
        let zs = unwind(&zs);
        let det = data.det.to_big();
        let argmax: Vec<Rational> = search
            .tau
            .iter()
            .zip(&zs)
            .map(|(t, &z)| Rational::new(t.to_big() + &det * 2 * z, det.clone()))
            .collect();
        let value = Rational::new(best.to_big(), data.scale.to_big() * &det * &det);
        Ok(Maximum { value: -value, argmax, nodes: search.nodes })
    }
}

/// Largest magnitude at which the floating point bounds are trusted.
const FLOAT_LIMIT: f64 = 1e12;

/// Data for the fast path.
#[derive(Clone, Debug)]
struct Fast {
    det: i128,
    diag: Vec<i128>,
    /// `Aᵢⱼ` for `j > i`, nonzero only.
    upper: Vec<Vec<(usize, i128)>>,
    a: Vec<Vec<i128>>,
    d: Vec<f64>,
    u: Vec<Vec<(usize, f64)>>,
    d_exact: Vec<Ratio<i128>>,
    u_exact: Vec<Vec<(usize, Ratio<i128>)>>,
}

impl Fast {
    fn new(big: &Data<BigInt>, d: &[Rational], u: &[Vec<Rational>]) -> Option<Fast> {
        let n = d.len();
        let small = |x: &Rational| Some(Ratio::new_raw(x.numer().to_i128()?, x.denom().to_i128()?));
        let d_exact = d.iter().map(small).collect::<Option<_>>()?;
        let u_exact = (0..n)
            .map(|i| {
                ((i + 1)..n)
                    .filter(|&j| !u[i][j].is_zero())
                    .map(|j| Some((j, small(&u[i][j])?)))
                    .collect::<Option<_>>()
            })
            .collect::<Option<_>>()?;
        let a: Vec<Vec<i128>> = big
            .a
            .iter()
            .map(|r| r.iter().map(|x| x.to_i128().filter(|v| v.unsigned_abs() < 1 << 40)).collect())
            .collect::<Option<_>>()?;
        Some(Fast {
            det: big.det.to_i128().filter(|v| v.unsigned_abs() < 1 << 40)?,
            diag: (0..n).map(|i| a[i][i]).collect(),
            upper: (0..n)
                .map(|i| ((i + 1)..n).filter(|&j| a[i][j] != 0).map(|j| (j, a[i][j])).collect())
                .collect(),
            d: d.iter().map(Rational::to_f64).collect(),
            u: (0..n)
                .map(|i| ((i + 1)..n).filter(|&j| !u[i][j].is_zero()).map(|j| (j, u[i][j].to_f64())).collect())
                .collect(),
            d_exact,
            u_exact,
            a,
        })
    }
}

struct FastSearch<'a> {
    form: &'a DefiniteForm,
    fast: &'a Fast,
    tau: Vec<i128>,
    z: Vec<i64>,
    big_y: Vec<i128>,
    memo: HashMap<(usize, Vec<i64>), MemoEntry<i128>>,
    nodes: u64,
}

/// `det·G⁻¹w`, by substitution in checked machine rationals.
fn scaled_primal(fast: &Fast, w: &[BigInt]) -> Option<Vec<i128>> {
    let n = w.len();
    let mut x: Vec<Ratio<i128>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = Ratio::from_integer(-w[i].to_i128()?);
        for (k, row) in fast.u_exact.iter().enumerate().take(i) {
            if let Some((_, uki)) = row.iter().find(|(j, _)| *j == i) {
                s = s.checked_sub(&uki.checked_mul(&x[k])?)?;
            }
        }
        x.push(s);
    }
    let mut y = vec![Ratio::from_integer(0i128); n];
    for i in (0..n).rev() {
        let mut s = x[i].checked_div(&fast.d_exact[i])?;
        for (j, uij) in &fast.u_exact[i] {
            s = s.checked_sub(&uij.checked_mul(&y[*j])?)?;
        }
        y[i] = s;
    }
    let det = Ratio::from_integer(fast.det);
    y.iter()
        .map(|v| {
            let t = v.checked_mul(&det)?;
            t.is_integer().then(|| t.to_integer())
        })
        .collect()
}

/// Rounds each level to its nearest point, top level first.
fn nearest_plane(fast: &Fast, tau: &[i128]) -> Step<Vec<i128>> {
    let n = tau.len();
    let two_det = 2 * fast.det;
    let mut y = vec![0i128; n];
    for i in (0..n).rev() {
        let shift: f64 = fast.u[i].iter().map(|&(j, uij)| uij * y[j] as f64).sum();
        let k = (-(tau[i] as f64 + shift) / two_det as f64).round();
        if !k.is_finite() || k.abs() > FLOAT_LIMIT {
            return Err(Overflow);
        }
        y[i] = ck(tau[i].checked_add(ck(two_det.checked_mul(k as i128))?))?;
    }
    Ok(y)
}

fn margin(scale: f64) -> f64 {
    1e-3 + 1e-9 * scale
}

impl FastSearch<'_> {
    /// Minimum of the exact contribution `R` of rows `0..=i` of `A` over
    /// completions with `R <= budget`. `carry` is a float value such that
    /// `R ≥ Σ_{k≤i} Tₖ + carry` for the `UᵀDU` terms `Tₖ`, and `mag` bounds
    /// the magnitudes that went into it.
    fn level(&mut self, i: usize, budget: i128, carry: f64, mag: f64) -> Step<Option<(i128, Coords)>> {
        let f = self.form;
        let fast = self.fast;
        let key = if f.memo_level[i] {
            let k = (i, f.deps[i].iter().map(|&j| self.z[j]).collect::<Vec<_>>());
            match self.memo.get(&k) {
                Some(MemoEntry::Exact(m, zs)) => {
                    return Ok((*m <= budget).then(|| (*m, zs.clone())));
                }
                Some(MemoEntry::Above(b)) if budget <= *b => return Ok(None),
                _ => {}
            }
            Some(k)
        } else {
            None
        };
        self.nodes += 1;

        let mut shift = 0.0;
        for &(j, uij) in &fast.u[i] {
            shift += uij * self.big_y[j] as f64;
        }
        let two_det = 2 * fast.det;
        let tau = self.tau[i];
        let base = tau as f64 + shift;
        let di = fast.d[i];
        let term = |k: i64| {
            let c = base + (two_det as f64) * k as f64;
            di * c * c
        };
        let k0f = (-base / two_det as f64).round();
        if !k0f.is_finite() || k0f.abs() > FLOAT_LIMIT {
            return Err(Overflow);
        }
        let k0 = k0f as i64;
        let slack = budget as f64 - carry;
        let m = margin(mag + budget.unsigned_abs() as f64);

        let mut candidates: Vec<(f64, i64)> = Vec::new();
        let v0 = term(k0);
        if v0 <= slack + m {
            candidates.push((v0, k0));
        }
        for dir in [1i64, -1] {
            let mut k = k0 + dir;
            loop {
                let v = term(k);
                if v > slack + m {
                    break;
                }
                candidates.push((v, k));
                k += dir;
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut best: Option<(i128, Coords)> = None;
        for (v, k) in candidates {
            let limit = best.as_ref().map_or(budget, |(b, _)| *b);
            if v > limit as f64 - carry + margin(mag + limit.unsigned_abs() as f64) {
                break;
            }
            let yi = ck(tau.checked_add(ck(two_det.checked_mul(k as i128))?))?;
            // exact row contribution Aᵢᵢ·Yᵢ² + 2·Σⱼ₍ⱼ>ᵢ₎ Aᵢⱼ·Yᵢ·Yⱼ
            let mut cross: i128 = 0;
            for &(j, aij) in &fast.upper[i] {
                cross = ck(cross.checked_add(ck(aij.checked_mul(self.big_y[j]))?))?;
            }
            let r = ck(ck(fast.diag[i].checked_mul(yi))?.checked_add(ck(cross.checked_mul(2))?))?;
            let r = ck(r.checked_mul(yi))?;
            if (r.unsigned_abs() as f64) > FLOAT_LIMIT * FLOAT_LIMIT {
                return Err(Overflow);
            }
            self.z[i] = k;
            self.big_y[i] = yi;
            let found = if i == 0 {
                (r <= limit).then(|| (r, cons(k, None)))
            } else {
                let room = ck(limit.checked_sub(r))?;
                let next_mag = mag + v.abs() + (r.unsigned_abs() as f64);
                match self.level(i - 1, room, carry + v - r as f64, next_mag)? {
                    Some((rest, zs)) => Some((ck(r.checked_add(rest))?, cons(k, zs))),
                    None => None,
                }
            };
            if let Some((total, zs)) = found {
                if best.as_ref().is_none_or(|(b, _)| total < *b) {
                    best = Some((total, zs));
                }
            }
        }
        self.z[i] = 0;
        self.big_y[i] = 0;

        if let Some(k) = key {
            let entry = match &best {
                Some((m, zs)) => MemoEntry::Exact(*m, zs.clone()),
                None => MemoEntry::Above(budget),
            };
            self.memo.insert(k, entry);
        }
        Ok(best)
    }
}

fn quad<T: Int>(a: &[Vec<T>], y: &[T]) -> Step<T> {
    let mut s = T::int(0);
    for i in 0..y.len() {
        if y[i].is_zero() {
            continue;
        }
        let mut row = T::int(0);
        for j in 0..y.len() {
            if !a[i][j].is_zero() && !y[j].is_zero() {
                row = ck(row.add(&ck(a[i][j].mul(&y[j]))?))?;
            }
        }
        s = ck(s.add(&ck(y[i].mul(&row))?))?;
    }
    Ok(s)
}

/// Greedy descent from `Y` in steps of `±2·det·eᵢ`: sweep the indices upward,
/// moving while `YᵀAY` strictly drops, until a sweep changes nothing.
fn descend<T: Int>(data: &Data<T>, y: &mut [T]) -> Step<T> {
    let n = y.len();
    let a = &data.a;
    let mut ay = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = T::int(0);
        for j in 0..n {
            if !a[i][j].is_zero() && !y[j].is_zero() {
                r = ck(r.add(&ck(a[i][j].mul(&y[j]))?))?;
            }
        }
        ay.push(r);
    }
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..n {
            let diag = ck(data.det.mul(&a[i][i]))?;
            for sign in [1i64, -1] {
                loop {
                    // change is 4·det·(s·(AY)ᵢ + det·Aᵢᵢ)
                    let delta = ck(ck(T::int(sign).mul(&ay[i]))?.add(&diag))?;
                    if !delta.is_negative() {
                        break;
                    }
                    let h = ck(T::int(2 * sign).mul(&data.det))?;
                    y[i] = ck(y[i].add(&h))?;
                    for k in 0..n {
                        if !a[k][i].is_zero() {
                            ay[k] = ck(ay[k].add(&ck(h.mul(&a[k][i]))?))?;
                        }
                    }
                    changed = true;
                }
            }
        }
    }
    quad(a, y)
}

impl<T: Int> Search<'_, T> {
    /// Minimum over completions of levels `0..=i` whose partial value is at
    /// most `budget`, with the coordinates `z` used to reach it (levels
    /// `0..=i` only). `None` if no completion fits.
    fn level(&mut self, i: usize, budget: &T) -> Step<Option<(T, Coords)>> {
        let f = self.form;
        let data = self.data;
        let key = if f.memo_level[i] {
            let k = (i, f.deps[i].iter().map(|&j| self.z[j]).collect::<Vec<_>>());
            match self.memo.get(&k) {
                Some(MemoEntry::Exact(m, zs)) => {
                    return Ok((m <= budget).then(|| (m.clone(), zs.clone())));
                }
                Some(MemoEntry::Above(b)) if budget <= b => return Ok(None),
                _ => {}
            }
            Some(k)
        } else {
            None
        };
        self.nodes += 1;

        // Eᵢ(k) = Δᵢ·(τᵢ + 2·det·k) + rest
        let mut rest = ck(data.delta[i].mul(&self.tau[i]))?;
        for (j, c) in &data.coef[i] {
            rest = ck(rest.add(&ck(c.mul(&self.big_y[*j]))?))?;
        }
        let step = ck(ck(data.delta[i].mul(&data.det))?.mul(&T::int(2)))?;
        let ki = &data.k[i];
        let term = |k: i64| -> Step<T> {
            let e = ck(rest.add(&ck(step.mul(&T::int(k)))?))?;
            ck(ki.mul(&ck(e.mul(&e))?))
        };
        let k0 = ck(ck(T::int(0).sub(&rest))?.div_round(&step))?;

        let mut candidates: Vec<(T, i64)> = Vec::new();
        let v0 = term(k0)?;
        if &v0 <= budget {
            candidates.push((v0, k0));
        }
        for dir in [1i64, -1] {
            let mut k = k0 + dir;
            loop {
                let v = term(k)?;
                if &v > budget {
                    break;
                }
                candidates.push((v, k));
                k += dir;
            }
        }
        candidates.sort();

        let two_det = ck(data.det.mul(&T::int(2)))?;
        let mut best: Option<(T, Coords)> = None;
        for (v, k) in candidates {
            let limit = best.as_ref().map_or(budget, |(b, _)| b).clone();
            if v > limit {
                break;
            }
            self.z[i] = k;
            self.big_y[i] = ck(self.tau[i].add(&ck(two_det.mul(&T::int(k)))?))?;
            let found = if i == 0 {
                Some((v, cons(k, None)))
            } else {
                let room = ck(limit.sub(&v))?;
                match self.level(i - 1, &room)? {
                    Some((m, zs)) => Some((ck(v.add(&m))?, cons(k, zs))),
                    None => None,
                }
            };
            if let Some((total, zs)) = found {
                if best.as_ref().is_none_or(|(b, _)| &total < b) {
                    best = Some((total, zs));
                }
            }
        }
        self.z[i] = 0;
        self.big_y[i] = T::int(0);

        if let Some(k) = key {
            let entry = match &best {
                Some((m, zs)) => MemoEntry::Exact(m.clone(), zs.clone()),
                None => MemoEntry::Above(budget.clone()),
            };
            self.memo.insert(k, entry);
        }
        Ok(best)
    }
}
