use crate::error::{Error, Result};
use crate::problems::ReferenceFront;

/// Inverted generational distance of a solution set against a reference front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgdResult {
    pub value: f64,
    pub reference_size: usize,
    pub solution_size: usize,
}

/// `(1/|R|) Σ_{r∈R} min_{s∈S} ‖r − s‖₂`.
///
/// An empty solution set (no feasible solutions) is an error.
pub fn igd(reference: &ReferenceFront, solutions: &[Vec<f64>]) -> Result<IgdResult> {
    igd_points(reference.points(), solutions)
}

pub fn igd_points(reference: &[Vec<f64>], solutions: &[Vec<f64>]) -> Result<IgdResult> {
    if solutions.is_empty() {
        return Err(Error::EmptySolutionSet);
    }
    if reference.is_empty() {
        return Err(Error::Contract("reference set is empty".into()));
    }
    let m = reference[0].len();
    if let Some(bad) = solutions.iter().chain(reference).find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch {
            what: "objective count in IGD",
            expected: m,
            found: bad.len(),
        });
    }
    let total: f64 = reference
        .iter()
        .map(|r| {
            solutions
                .iter()
                .map(|s| r.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .sum();
    Ok(IgdResult {
        value: total / reference.len() as f64,
        reference_size: reference.len(),
        solution_size: solutions.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let r = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(igd_points(&r, &r).unwrap().value, 0.0);
        assert_eq!(igd_points(&r, &[vec![1.0, 1.0]]).unwrap().value, 1.0);
        assert_eq!(igd_points(&[vec![0.0, 0.0]], &[vec![3.0, 4.0]]).unwrap().value, 5.0);
    }

    #[test]
    fn empty_solutions_is_an_error() {
        assert!(matches!(
            igd_points(&[vec![0.0, 0.0]], &[]),
            Err(Error::EmptySolutionSet)
        ));
        assert!(igd_points(&[vec![0.0, 0.0]], &[vec![1.0]]).is_err());
    }
}
