//! Pre-evolving (recording teacher runs and training on them) and
//! fine-evolving (PET inside NSGA-II with online updates).

mod collect;
mod dataset;
mod synthetic;
mod train;

pub use collect::{collect_trajectories, collection_seed, CellFailure, ProblemRef, RecordingSink, Teacher};
pub use dataset::{CellInfo, Manifest, TrajectoryDataset, TrajectoryPair, DATASET_VERSION};
pub use synthetic::{
    mean_nearest_sq_distance, one_generation_distance, synthetic_example, synthetic_examples, synthetic_populations,
    DEFAULT_SPREAD,
};
pub use train::{
    check_capacity, fine_evolve_step, mean_loss, pretrain, pretrain_monitored, run_nsga2_pet, FineEvolveConfig,
    LossPoint, PetReproduction, PretrainConfig,
};
