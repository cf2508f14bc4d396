//! The population-to-population transformer: embeddings, encoder, causal
//! decoder with cross-attention, output head, generation and persistence.

mod checkpoint;
mod config;
mod data;
mod generate;
mod model;

pub use checkpoint::{
    from_bytes, load_checkpoint, load_checkpoint_expecting, save_checkpoint, to_bytes, FORMAT_VERSION, MAGIC,
};
pub use config::{OutputHead, PetConfig};
pub use data::{example_from_populations, Example, ObjectiveScaler, OBJECTIVE_CLAMP};
pub use generate::{generate_population, Generated, IncrementalDecoder};
pub use model::PetModel;
