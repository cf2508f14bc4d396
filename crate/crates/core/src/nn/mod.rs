//! Dense tensors, reverse-mode differentiation and the transformer layers
//! built on them. Everything is `f64`.

mod adam;
mod gradcheck;
pub mod kernels;
mod layers;
mod params;
mod tape;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{
    compare_with_finite_differences, gradient_check, gradient_check_params, relative_error, GradCheckReport,
    DENOM_FLOOR, FD_STEP,
};
pub use kernels::AttnShape;
pub use layers::{LayerNorm, Linear, Mlp, MultiHeadAttention};
pub use params::{uniform_init, ParamId, ParamStore};
pub use tape::{Gradients, Tape, Var};
pub use tensor::Tensor;
#[cfg(test)]
mod tests;
