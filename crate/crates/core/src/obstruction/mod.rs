mod product;
mod search;
mod subgroups;

pub use product::{ProductElement, ProductGroup};
pub use search::{
    admissible_subgroup_types, obstruct_order, passing_subgroups, ObstructionReport, SearchMode,
    SearchOptions, TypeSearch, Verdict,
};
pub use subgroups::{
    check_vanishing, enumerate_cyclic_subgroups, enumerate_subgroups_of_type, SubgroupWitness,
    WitnessRecord,
};
