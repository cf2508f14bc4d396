/// Relative improvement (%) of `ours` over `baseline`, lower being better:
/// `(baseline − ours) / baseline × 100`.
pub fn roc_percent(baseline: f64, ours: f64) -> f64 {
    (baseline - ours) / baseline * 100.0
}

/// ROC against the best (smallest) finite baseline median, or `None` when
/// no baseline produced a finite value.
pub fn roc_against_best(baselines: &[f64], ours: f64) -> Option<f64> {
    baselines
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .min_by(f64::total_cmp)
        .map(|best| roc_percent(best, ours))
}

/// Rounds to two decimals, the precision of the ROC column.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}
