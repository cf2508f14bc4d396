use super::params::ParamStore;
use super::tape::{Tape, Var};
use super::tensor::Tensor;
use crate::error::{contract, Result};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Magnitudes below this are compared absolutely rather than relatively.
pub const DENOM_FLOOR: f64 = 1e-6;

/// `|a − n| / max(|a|, |n|, DENOM_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(DENOM_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(input, element)` of the worst entry.
    pub worst: Option<(usize, usize)>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error <= tolerance
    }
}

/// Compares `analytic` against central differences of `f` around `inputs`,
/// visiting every `stride`-th element.
pub fn compare_with_finite_differences(
    f: impl Fn(&[Tensor]) -> Result<f64>,
    inputs: &[Tensor],
    analytic: &[Tensor],
    h: f64,
    stride: usize,
) -> Result<GradCheckReport> {
    if inputs.len() != analytic.len() || inputs.iter().zip(analytic).any(|(a, b)| a.shape() != b.shape()) {
        return Err(contract("analytic gradients do not match the inputs"));
    }
    let mut work = inputs.to_vec();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for t in 0..work.len() {
        for e in (0..work[t].len()).step_by(stride.max(1)) {
            let orig = work[t].data()[e];
            work[t].data_mut()[e] = orig + h;
            let up = f(&work)?;
            work[t].data_mut()[e] = orig - h;
            let down = f(&work)?;
            work[t].data_mut()[e] = orig;
            let numeric = (up - down) / (2.0 * h);
            let err = relative_error(analytic[t].data()[e], numeric);
            report.checked += 1;
            if report.worst.is_none() || err > report.max_rel_error {
                report.max_rel_error = err;
                report.worst = Some((t, e));
            }
        }
    }
    Ok(report)
}

/// Gradient check of a scalar function built on a tape from differentiable
/// `inputs`.
pub fn gradient_check(build: impl Fn(&mut Tape, &[Var]) -> Result<Var>, inputs: &[Tensor]) -> Result<GradCheckReport> {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    let grads = tape.backward(loss)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .zip(inputs)
        .map(|(v, t)| {
            grads
                .get(*v)
                .cloned()
                .unwrap_or_else(|| Tensor::zeros(t.shape().to_vec()).unwrap())
        })
        .collect();
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = xs.iter().map(|t| tape.constant(t.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        Ok(tape.value(loss).data()[0])
    };
    compare_with_finite_differences(eval, inputs, &analytic, FD_STEP, 1)
}

/// Gradient check of a scalar loss with respect to every parameter in
/// `store`, visiting every `stride`-th element.
pub fn gradient_check_params(
    store: &ParamStore,
    build: impl Fn(&mut Tape) -> Result<Var>,
    stride: usize,
) -> Result<GradCheckReport> {
    let mut tape = Tape::with_params(store);
    let loss = build(&mut tape)?;
    let grads = tape.backward(loss)?;
    let analytic: Vec<Tensor> = (0..store.len())
        .map(|i| {
            grads
                .param(super::params::ParamId(i))
                .cloned()
                .unwrap_or_else(|| Tensor::zeros(store.tensors()[i].shape().to_vec()).unwrap())
        })
        .collect();
    let eval = |xs: &[Tensor]| -> Result<f64> {
        let mut s = store.clone();
        s.tensors_mut().clone_from_slice(xs);
        let mut tape = Tape::with_params(&s);
        let loss = build(&mut tape)?;
        Ok(tape.value(loss).data()[0])
    };
    compare_with_finite_differences(eval, store.tensors(), &analytic, FD_STEP, stride)
}
