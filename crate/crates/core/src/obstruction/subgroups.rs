use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::product::{ProductElement, ProductGroup};
use crate::dtable::DTable;
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::rational::Rational;

/// A subgroup of `base^copies`, given by generators together with its
/// materialized element list (sorted, lexicographic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupWitness {
    pub base: FiniteAbelianGroup,
    pub copies: usize,
    pub iso_type: FiniteAbelianGroup,
    pub generators: Vec<ProductElement>,
    pub elements: Vec<ProductElement>,
}

/// Serialized form: generators as tuples of residue vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub iso_type: FiniteAbelianGroup,
    pub generators: Vec<Vec<GroupElement>>,
}

impl SubgroupWitness {
    pub fn from_generators(
        pg: &ProductGroup,
        iso_type: FiniteAbelianGroup,
        generators: Vec<ProductElement>,
    ) -> Self {
        let elements = pg.span(&generators);
        SubgroupWitness {
            base: pg.base().clone(),
            copies: pg.copies(),
            iso_type,
            generators,
            elements,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generator_elements(&self) -> Vec<Vec<GroupElement>> {
        self.generators
            .iter()
            .map(|g| g.iter().map(|&x| self.base.element_at(x as usize)).collect())
            .collect()
    }

    pub fn record(&self) -> WitnessRecord {
        WitnessRecord { iso_type: self.iso_type.clone(), generators: self.generator_elements() }
    }

    /// Rebuilds the element list from the generators alone and checks that it
    /// agrees with the stored list and the claimed isomorphism type.
    pub fn reverify(&self) -> Result<bool> {
        let pg = ProductGroup::new(self.base.clone(), self.copies)?;
        let span = pg.span(&self.generators);
        if span != self.elements || span.len() as u64 != self.iso_type.order() {
            return Ok(false);
        }
        let orders: Vec<u64> = self.generators.iter().map(|g| pg.element_order(g)).collect();
        let mut claimed = self.iso_type.factors().to_vec();
        let mut got: Vec<u64> = orders.into_iter().filter(|&o| o > 1).collect();
        claimed.sort_unstable();
        got.sort_unstable();
        Ok(claimed == got)
    }
}

/// True if the `copies`-fold sum of `t` vanishes on every element of `w`.
pub fn check_vanishing(w: &SubgroupWitness, t: &DTable) -> Result<bool> {
    if t.group() != &w.base {
        return Err(Error::GroupMismatch(format!(
            "table over {} used with subgroup of {}",
            t.group(),
            w.base
        )));
    }
    let values = t.values();
    Ok(w.elements.iter().all(|x| {
        let s: Rational = x.iter().map(|&i| values[i as usize].clone()).sum();
        s.is_zero()
    }))
}

/// Cyclic subgroups of order `n`, one per subgroup, each given by its
/// lexicographically smallest generator, in increasing generator order.
pub fn enumerate_cyclic_subgroups(
    pg: &ProductGroup,
    n: u64,
) -> impl Iterator<Item = SubgroupWitness> + '_ {
    canonical_generators(pg, n).map(move |g| SubgroupWitness::from_generators(pg, FiniteAbelianGroup::cyclic(n), vec![g]))
}

pub(crate) fn canonical_generators(pg: &ProductGroup, n: u64) -> impl Iterator<Item = ProductElement> + '_ {
    let divides = n >= 1 && pg.exponent().is_multiple_of(n);
    let total = if divides { pg.order() } else { 0 };
    (0..total)
        .map(move |i| pg.element_at(i))
        .filter(move |g| pg.element_order(g) == n && pg.is_canonical_generator(g))
}

/// All subgroups of `pg` isomorphic to `iso_type`. Types of rank at most two
/// are supported.
pub fn enumerate_subgroups_of_type(
    pg: &ProductGroup,
    iso_type: &FiniteAbelianGroup,
) -> Result<Vec<SubgroupWitness>> {
    match iso_type.factors() {
        [] => Ok(vec![SubgroupWitness::from_generators(pg, iso_type.clone(), vec![])]),
        [n] => Ok(enumerate_cyclic_subgroups(pg, *n).collect()),
        [a, b] => {
            let xs: Vec<_> = canonical_generators(pg, *a).collect();
            let ys: Vec<_> = canonical_generators(pg, *b).collect();
            Ok(combine_rank_two(pg, iso_type, &xs, &ys, |_| true, false).0)
        }
        _ => Err(Error::UnsupportedType(iso_type.to_string())),
    }
}

/// Subgroups `<x> ⊕ <y>` with `x` from `xs` (order `a`) and `y` from `ys`
/// (order `b`), deduplicated by element set, in order of first appearance.
/// Returns the accepted subgroups and how many distinct ones were examined.
pub(crate) fn combine_rank_two(
    pg: &ProductGroup,
    iso_type: &FiniteAbelianGroup,
    xs: &[ProductElement],
    ys: &[ProductElement],
    accept: impl Fn(&[ProductElement]) -> bool,
    first_only: bool,
) -> (Vec<SubgroupWitness>, u64) {
    let mut seen: HashSet<Vec<ProductElement>> = HashSet::new();
    let mut out = Vec::new();
    let mut examined = 0u64;
    for y in ys {
        let ymults = pg.multiples(y);
        let yset: HashSet<&ProductElement> = ymults.iter().collect();
        for x in xs {
            let xmults = pg.multiples(x);
            if xmults.iter().skip(1).any(|m| yset.contains(m)) {
                continue;
            }
            let mut elements: Vec<ProductElement> = Vec::with_capacity(xmults.len() * ymults.len());
            for xm in &xmults {
                for ym in &ymults {
                    elements.push(pg.add(xm, ym));
                }
            }
            elements.sort_unstable();
            if seen.contains(&elements) {
                continue;
            }
            examined += 1;
            if accept(&elements) {
                out.push(SubgroupWitness {
                    base: pg.base().clone(),
                    copies: pg.copies(),
                    iso_type: iso_type.clone(),
                    generators: vec![x.clone(), y.clone()],
                    elements: elements.clone(),
                });
                if first_only {
                    return (out, examined);
                }
            }
            seen.insert(elements);
        }
    }
    (out, examined)
}
