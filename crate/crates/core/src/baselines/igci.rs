use super::{smaller_score_wins, BaselineDecision, BaselineMethod};
use crate::error::{Error, Result};
use crate::qv::{sort_order, SamplePair};

/// Slope-based IGCI with a uniform reference measure.
///
/// Both variables are rescaled to `[0, 1]`. For `X -> Y` the data is sorted
/// by `x`, rows repeating an earlier `x` value are discarded, and the score
/// is `(1/(N'-1)) * sum log(|dy| / dx)` over consecutive rows, skipping
/// terms with `dy = 0`. The direction with the smaller score is chosen.
pub fn igci_slope(pair: &SamplePair) -> Result<BaselineDecision> {
    let x = rescale_unit(pair.x())?;
    let y = rescale_unit(pair.y())?;
    let score_xy = slope_score(&x, &y)?;
    let score_yx = slope_score(&y, &x)?;
    Ok(BaselineDecision {
        method: BaselineMethod::Igci,
        direction: smaller_score_wins(score_xy, score_yx),
        score_xy,
        score_yx,
        native_confidence: (score_xy - score_yx).abs(),
    })
}

fn rescale_unit(v: &[f64]) -> Result<Vec<f64>> {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    if !(hi > lo) {
        return Err(Error::DegenerateInput("constant variable".into()));
    }
    Ok(v.iter().map(|a| (a - lo) / (hi - lo)).collect())
}

fn slope_score(cause: &[f64], effect: &[f64]) -> Result<f64> {
    let mut rows: Vec<(f64, f64)> = sort_order(cause)
        .into_iter()
        .map(|i| (cause[i], effect[i]))
        .collect();
    rows.dedup_by(|later, earlier| later.0 == earlier.0);
    if rows.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "only {} distinct values in the ordering variable",
            rows.len()
        )));
    }
    let total: f64 = rows
        .windows(2)
        .filter_map(|w| {
            let dx = w[1].0 - w[0].0;
            let dy = (w[1].1 - w[0].1).abs();
            (dy > 0.0).then(|| (dy / dx).ln())
        })
        .sum();
    Ok(total / (rows.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::Direction;

    fn pair(x: &[f64], y: &[f64]) -> SamplePair {
        SamplePair::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn identity_relation_ties() {
        let x = [0.3, 1.7, -2.0, 0.9, 4.2];
        let d = igci_slope(&pair(&x, &x)).unwrap();
        assert!(d.score_xy.abs() < 1e-12);
        assert!(d.score_yx.abs() < 1e-12);
    }

    #[test]
    fn three_point_square() {
        // 1/2 (ln 0.5 + ln 1.5) = 1/2 ln 0.75
        let d = igci_slope(&pair(&[0.0, 0.5, 1.0], &[0.0, 0.25, 1.0])).unwrap();
        let expected = 0.5 * 0.75f64.ln();
        assert!((d.score_xy - expected).abs() < 1e-12);
        assert!((d.score_yx + expected).abs() < 1e-12);
        assert!((d.score_xy + 0.1438).abs() < 1e-4);
        assert_eq!(d.direction, Direction::XtoY);
    }

    #[test]
    fn duplicate_rows_are_ignored() {
        let x = [0.0, 0.2, 0.5, 0.7, 1.0];
        let y = [0.1, 0.0, 0.6, 0.65, 1.0];
        let base = igci_slope(&pair(&x, &y)).unwrap();
        let mut xd = x.to_vec();
        let mut yd = y.to_vec();
        xd.push(0.5);
        yd.push(0.6);
        let dup = igci_slope(&pair(&xd, &yd)).unwrap();
        assert_eq!(base, dup);
    }

    #[test]
    fn too_few_distinct_values() {
        let r = igci_slope(&pair(&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 2.0, 3.0]));
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
        let r = igci_slope(&pair(&[0.0, 1.0, 2.0], &[5.0, 5.0, 5.0]));
        assert!(matches!(r, Err(Error::DegenerateInput(_))));
    }
}
