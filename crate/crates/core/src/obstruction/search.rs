use std::collections::HashMap;
use std::time::{Duration, Instant};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::product::{ProductElement, ProductGroup};
use super::subgroups::{combine_rank_two, SubgroupWitness};
use crate::dtable::DTable;
use crate::error::{Error, Result};
use crate::group::{factorize, FiniteAbelianGroup};

/// Candidate types for a vanishing subgroup of `G^{2m}` when `|G| = det`.
pub fn admissible_subgroup_types(det: u64, m: u32) -> Result<Vec<FiniteAbelianGroup>> {
    if det == 0 || m == 0 {
        return Err(Error::UnsupportedDeterminant(det));
    }
    if det == 1 {
        return Ok(vec![FiniteAbelianGroup::trivial()]);
    }
    let f = factorize(det);
    let squares: Vec<u64> = f.iter().filter(|&&(_, e)| e >= 2).map(|&(p, _)| p).collect();
    let cyclic = FiniteAbelianGroup::cyclic(det);
    match (squares.as_slice(), f.iter().all(|&(_, e)| e <= 2)) {
        ([], _) => Ok(vec![cyclic]),
        ([p], true) => Ok(vec![cyclic, FiniteAbelianGroup::new(vec![*p, det / p])?]),
        _ => Err(Error::UnsupportedDeterminant(det)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    FirstWitness,
    AllWitnesses,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Refuse product groups with more elements than this.
    pub max_product_order: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_product_order: 1 << 42 }
    }
}

/// Statistics for one subgroup type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeSearch {
    pub iso_type: FiniteAbelianGroup,
    pub found: bool,
    /// Elements whose own 2m-sum vanished and were inspected further.
    pub candidates: u64,
    /// Distinct subgroups whose vanishing property was decided.
    pub subgroups_examined: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Obstructed,
    Inconclusive(Box<SubgroupWitness>),
    Unsupported(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Obstructed => "obstructed",
            Verdict::Inconclusive(_) => "inconclusive",
            Verdict::Unsupported(_) => "unsupported",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    pub knot: String,
    pub order: u32,
    pub determinant: u64,
    pub verdict: Verdict,
    /// Set when the table is nonzero at the spin label, which settles the
    /// question without any search.
    pub spin_nonzero: bool,
    pub searches: Vec<TypeSearch>,
    pub elapsed: Duration,
}

impl ObstructionReport {
    pub fn subgroups_examined(&self) -> u64 {
        self.searches.iter().map(|s| s.subgroups_examined).sum()
    }
}

/// Exact integer view of a table plus the half-sum index used to pair up
/// the first and last halves of a product element.
struct Ctx {
    pg: ProductGroup,
    nums: Vec<i64>,
    n: u64,
    lo: usize,
    hi: usize,
    lo_len: u64,
    lo_sums: Vec<i64>,
    lo_orders: Vec<u64>,
    hi_orders: Vec<u64>,
    by_sum: HashMap<i64, Vec<u32>>,
}

const MAX_HALF: u64 = 1 << 26;

impl Ctx {
    fn new(t: &DTable, copies: usize, opts: &SearchOptions) -> Result<Ctx> {
        let pg = ProductGroup::new(t.group().clone(), copies)?;
        if pg.order() > opts.max_product_order {
            return Err(Error::TooLarge(format!("{}^{copies} elements", pg.base_order())));
        }
        let (_, nums) = t
            .scaled_numerators_i64(copies as u64)
            .ok_or_else(|| Error::TooLarge("d-values do not fit in machine integers".into()))?;
        let n = pg.base_order() as u64;
        let lo = copies / 2;
        let hi = copies - lo;
        let (lo_len, hi_len) = (n.pow(lo as u32), n.pow(hi as u32));
        if hi_len > MAX_HALF {
            return Err(Error::TooLarge(format!("{n}^{hi} half-products")));
        }
        let half = |len: u64, width: usize| {
            let mut sums = Vec::with_capacity(len as usize);
            let mut orders = Vec::with_capacity(len as usize);
            for h in 0..len {
                let digits = digits(h, width, n);
                sums.push(digits.iter().map(|&d| nums[d as usize]).sum::<i64>());
                orders.push(digits.iter().fold(1u64, |a, &d| a.lcm(&pg.base_element_order(d))));
            }
            (sums, orders)
        };
        let (lo_sums, lo_orders) = half(lo_len, lo);
        let (hi_sums, hi_orders) = half(hi_len, hi);
        let mut by_sum: HashMap<i64, Vec<u32>> = HashMap::new();
        for (h, s) in hi_sums.iter().enumerate() {
            by_sum.entry(*s).or_default().push(h as u32);
        }
        Ok(Ctx { pg, nums, n, lo, hi, lo_len, lo_sums, lo_orders, hi_orders, by_sum })
    }

    fn spin_value_zero(&self) -> bool {
        self.nums[0] == 0
    }

    fn sum(&self, x: &[u32]) -> i64 {
        x.iter().map(|&i| self.nums[i as usize]).sum()
    }

    fn element(&self, h_lo: u64, h_hi: u64) -> ProductElement {
        let mut g = digits(h_lo, self.lo, self.n);
        g.extend(digits(h_hi, self.hi, self.n));
        g
    }

    /// `None` if `g` is not the canonical generator of its cyclic subgroup,
    /// otherwise whether every multiple has vanishing sum.
    fn classify(&self, g: &[u32], order: u64) -> Option<bool> {
        if !self.pg.is_canonical_generator(g) {
            return None;
        }
        let mut x = g.to_vec();
        for _ in 2..order {
            self.pg.add_into(&mut x, g);
            if self.sum(&x) != 0 {
                return Some(false);
            }
        }
        Some(true)
    }

    /// Scans all `g` with first half `h_lo`, in increasing order.
    fn scan_row(&self, h_lo: u64, order: u64, first_only: bool) -> RowResult {
        let mut out = RowResult::default();
        let Some(list) = self.by_sum.get(&-self.lo_sums[h_lo as usize]) else {
            return out;
        };
        let lo_order = self.lo_orders[h_lo as usize];
        for &h_hi in list {
            if lo_order.lcm(&self.hi_orders[h_hi as usize]) != order {
                continue;
            }
            out.candidates += 1;
            let g = self.element(h_lo, h_hi as u64);
            match self.classify(&g, order) {
                None => {}
                Some(pass) => {
                    out.examined += 1;
                    if pass {
                        out.passing.push(g);
                        if first_only {
                            break;
                        }
                    }
                }
            }
        }
        out
    }

    /// Canonical generators of cyclic subgroups of order `order` whose sums
    /// all vanish, in increasing order.
    fn cyclic(&self, order: u64, mode: SearchMode) -> (Vec<ProductElement>, u64, u64) {
        if !self.spin_value_zero() || !self.pg.exponent().is_multiple_of(order) {
            return (Vec::new(), 0, 0);
        }
        if order == 1 {
            return (vec![self.pg.zero()], 0, 1);
        }
        let first_only = mode == SearchMode::FirstWitness;
        let chunk = (rayon::current_num_threads() as u64 * 16).max(16);
        let (mut passing, mut candidates, mut examined) = (Vec::new(), 0, 0);
        let mut start = 0;
        while start < self.lo_len {
            let end = (start + chunk).min(self.lo_len);
            let rows: Vec<RowResult> = (start..end)
                .into_par_iter()
                .map(|h| self.scan_row(h, order, first_only))
                .collect();
            for row in rows {
                candidates += row.candidates;
                examined += row.examined;
                passing.extend(row.passing);
                if first_only && !passing.is_empty() {
                    return (passing, candidates, examined);
                }
            }
            start = end;
        }
        (passing, candidates, examined)
    }

    fn search(&self, iso_type: &FiniteAbelianGroup, mode: SearchMode) -> Result<(Vec<SubgroupWitness>, TypeSearch)> {
        let (witnesses, candidates, examined) = match iso_type.factors() {
            [] => {
                let found = self.spin_value_zero();
                let w = SubgroupWitness::from_generators(&self.pg, iso_type.clone(), vec![]);
                (if found { vec![w] } else { vec![] }, 0, 1)
            }
            [n] => {
                let (gens, c, e) = self.cyclic(*n, mode);
                let ws = gens
                    .into_iter()
                    .map(|g| SubgroupWitness::from_generators(&self.pg, iso_type.clone(), vec![g]))
                    .collect();
                (ws, c, e)
            }
            [a, b] => {
                let (ys, cy, _) = self.cyclic(*b, SearchMode::AllWitnesses);
                let (xs, cx, _) = if ys.is_empty() {
                    (Vec::new(), 0, 0)
                } else {
                    self.cyclic(*a, SearchMode::AllWitnesses)
                };
                let accept = |els: &[ProductElement]| els.iter().all(|x| self.sum(x) == 0);
                let (ws, e) = combine_rank_two(&self.pg, iso_type, &xs, &ys, accept, mode == SearchMode::FirstWitness);
                (ws, cx + cy, e)
            }
            _ => return Err(Error::UnsupportedType(iso_type.to_string())),
        };
        let stats = TypeSearch {
            iso_type: iso_type.clone(),
            found: !witnesses.is_empty(),
            candidates,
            subgroups_examined: examined,
        };
        Ok((witnesses, stats))
    }
}

#[derive(Default)]
struct RowResult {
    candidates: u64,
    examined: u64,
    passing: Vec<ProductElement>,
}

fn digits(mut h: u64, width: usize, n: u64) -> Vec<u32> {
    let mut out = vec![0u32; width];
    for slot in out.iter_mut().rev() {
        *slot = (h % n) as u32;
        h /= n;
    }
    out
}

fn prepared(t: &DTable) -> Result<DTable> {
    if t.origin_is_spin() {
        Ok(t.clone())
    } else {
        t.canonical_relabel()
    }
}

/// Every subgroup of type `iso_type` in `copies` copies of the table's group
/// on which all sums vanish.
pub fn passing_subgroups(
    t: &DTable,
    copies: usize,
    iso_type: &FiniteAbelianGroup,
) -> Result<Vec<SubgroupWitness>> {
    let t = prepared(t)?;
    let ctx = Ctx::new(&t, copies, &SearchOptions::default())?;
    Ok(ctx.search(iso_type, SearchMode::AllWitnesses)?.0)
}

/// Decides whether the table rules out concordance order `order`.
pub fn obstruct_order(knot: &str, t: &DTable, order: u32, opts: &SearchOptions) -> ObstructionReport {
    let start = Instant::now();
    let determinant = t.group().order();
    let mut report = ObstructionReport {
        knot: knot.to_string(),
        order,
        determinant,
        verdict: Verdict::Obstructed,
        spin_nonzero: false,
        searches: Vec::new(),
        elapsed: Duration::ZERO,
    };
    if let Err(e) = run(t, order, opts, &mut report) {
        report.verdict = Verdict::Unsupported(e.to_string());
    }
    report.elapsed = start.elapsed();
    report
}

fn run(t: &DTable, order: u32, opts: &SearchOptions, report: &mut ObstructionReport) -> Result<()> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(Error::UnsupportedType(format!("order {order} is not even and positive")));
    }
    let types = admissible_subgroup_types(report.determinant, order / 2)?;
    let t = prepared(t)?;
    let ctx = Ctx::new(&t, order as usize, opts)?;
    if !ctx.spin_value_zero() {
        report.spin_nonzero = true;
        return Ok(());
    }
    for ty in &types {
        let (ws, stats) = ctx.search(ty, SearchMode::FirstWitness)?;
        report.searches.push(stats);
        if let Some(w) = ws.into_iter().next() {
            report.verdict = Verdict::Inconclusive(Box::new(w));
            return Ok(());
        }
    }
    Ok(())
}
