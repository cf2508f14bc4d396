//! NSGA-II selection, variation operators and the generational host loop.

mod crowding;
mod cso;
mod run;
mod select;
mod sort;
mod variation;

pub use crowding::{crowding_distance, CrowdingScores};
pub use cso::{cso_step, CSO_PHI};
pub use run::{
    evaluate_candidates, random_decisions, run_moea, run_nsga2, tournament, Cso, GenerationLog, RandomSearch,
    Reproduction, RunOutcome, RunSettings, SbxPm, TrajectorySink,
};
pub use select::{canonical_order, nsga2_select, rank_and_crowding, Selection};
pub use sort::{fast_nondominated_sort, FrontPartition};
pub use variation::{polynomial_mutation, sbx_crossover, VariationConfig};
