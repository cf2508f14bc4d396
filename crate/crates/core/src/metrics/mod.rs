//! Quality indicators and statistics.

mod igd;
mod roc;
mod wilcoxon;

pub use igd::{igd, igd_points, IgdResult};
pub use roc::{roc_against_best, roc_percent, round2};
pub use wilcoxon::{exact_p_value, normal_p_value, wilcoxon_rank_sum, Decision, RankSumResult, ALPHA, EXACT_LIMIT};
