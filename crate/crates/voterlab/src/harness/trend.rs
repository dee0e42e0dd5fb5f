/// One estimate in a sequence of increasing scales.
#[derive(Debug, Clone, Copy)]
pub struct TrendPoint {
    pub scale: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct TrendOutcome {
    pub pass: bool,
    pub final_gap: f64,
    pub final_tolerance: f64,
    pub detail: String,
}

/// Check that estimates approach `target` as the scale grows: gaps must not
/// increase beyond Monte Carlo slack, and the final gap must fall inside
/// `rel_tol * |target|` plus three standard errors.
pub fn trend_check(points: &[TrendPoint], target: f64, rel_tol: f64) -> TrendOutcome {
    trend_check_each(points, &vec![target; points.len()], rel_tol)
}

/// Like [`trend_check`], but with a scale-dependent target for each point
/// (the gaps to the per-scale targets must shrink).
pub fn trend_check_each(points: &[TrendPoint], targets: &[f64], rel_tol: f64) -> TrendOutcome {
    assert!(points.len() >= 2, "a trend needs at least two scales");
    assert_eq!(points.len(), targets.len());
    let gaps: Vec<f64> = points
        .iter()
        .zip(targets)
        .map(|(p, t)| (p.value - t).abs())
        .collect();
    let mut monotone = true;
    for i in 0..points.len() - 1 {
        let slack = 3.0 * (points[i].std_error + points[i + 1].std_error);
        if gaps[i + 1] > gaps[i] + slack {
            monotone = false;
        }
    }
    let last = points.last().unwrap();
    let target = *targets.last().unwrap();
    let final_gap = gaps[points.len() - 1];
    let final_tolerance = rel_tol * target.abs() + 3.0 * last.std_error;
    let final_ok = final_gap <= final_tolerance;
    let detail = points
        .iter()
        .map(|p| format!("N={} value={:.6} se={:.2e}", p.scale, p.value, p.std_error))
        .collect::<Vec<_>>()
        .join("; ");
    TrendOutcome {
        pass: monotone && final_ok,
        final_gap,
        final_tolerance,
        detail: format!("target={target:.6}; {detail}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(scale: f64, value: f64, se: f64) -> TrendPoint {
        TrendPoint {
            scale,
            value,
            std_error: se,
        }
    }

    #[test]
    fn converging_sequence_passes() {
        let points = [pt(1e2, 0.8, 0.01), pt(1e3, 0.55, 0.01), pt(1e4, 0.51, 0.01)];
        let out = trend_check(&points, 0.5, 0.05);
        assert!(out.pass, "{}", out.detail);
    }

    #[test]
    fn diverging_sequence_fails() {
        let points = [pt(1e2, 0.52, 0.001), pt(1e3, 0.6, 0.001), pt(1e4, 0.7, 0.001)];
        assert!(!trend_check(&points, 0.5, 0.05).pass);
    }

    #[test]
    fn noisy_but_final_off_target_fails() {
        let points = [pt(1e2, 0.6, 0.01), pt(1e3, 0.58, 0.01), pt(1e4, 0.57, 0.01)];
        assert!(!trend_check(&points, 0.5, 0.02).pass);
    }
}
