use super::{smaller_score_wins, BaselineDecision, BaselineMethod};
use crate::error::{Error, Result};
use crate::qv::{standardize, SamplePair};

const MIN_OBSERVATIONS: usize = 8;
const SLOPE_MAGNITUDES: usize = 16;
const OFFSETS: usize = 16;
const MAX_SWEEPS: usize = 200;
const MSE_TOLERANCE: f64 = 1e-8;
const MIN_FEATURE_VARIANCE: f64 = 1e-12;

/// Least-squares fit of `y ~ a + b * logistic(c * x + d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogisticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub mse: f64,
}

impl LogisticFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.a + self.b * logistic(self.c * x + self.d)
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Optimal `(a, b)` for fixed `(c, d)`; `None` when the logistic feature is
/// numerically constant on the data.
fn fit_linear_part(x: &[f64], y: &[f64], c: f64, d: f64) -> Option<LogisticFit> {
    let n = x.len() as f64;
    let u: Vec<f64> = x.iter().map(|&v| logistic(c * v + d)).collect();
    let mu = u.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut suu, mut suy) = (0.0, 0.0);
    for (&ui, &yi) in u.iter().zip(y) {
        suu += (ui - mu) * (ui - mu);
        suy += (ui - mu) * (yi - my);
    }
    if suu / n < MIN_FEATURE_VARIANCE {
        return None;
    }
    let b = suy / suu;
    let a = my - b * mu;
    let mse = u
        .iter()
        .zip(y)
        .map(|(&ui, &yi)| {
            let r = yi - a - b * ui;
            r * r
        })
        .sum::<f64>()
        / n;
    Some(LogisticFit { a, b, c, d, mse })
}

/// Grid search over `(c, d)` followed by coordinate-descent refinement.
pub fn fit_logistic(x: &[f64], y: &[f64]) -> Result<LogisticFit> {
    let mut best: Option<LogisticFit> = None;
    for k in 0..SLOPE_MAGNITUDES {
        let magnitude = 10f64.powf(-1.0 + 2.0 * k as f64 / (SLOPE_MAGNITUDES - 1) as f64);
        for sign in [1.0, -1.0] {
            for l in 0..OFFSETS {
                let d = -3.0 + 6.0 * l as f64 / (OFFSETS - 1) as f64;
                if let Some(fit) = fit_linear_part(x, y, sign * magnitude, d) {
                    if best.is_none_or(|b| fit.mse < b.mse) {
                        best = Some(fit);
                    }
                }
            }
        }
    }
    let mut fit = best.ok_or_else(|| {
        Error::FitFailure("logistic feature is constant at every grid point".into())
    })?;

    let mut steps = [0.1 * fit.c.abs().max(0.1), 0.2];
    for _ in 0..MAX_SWEEPS {
        let before = fit.mse;
        for (coord, step) in steps.iter_mut().enumerate() {
            let mut moved = false;
            for dir in [1.0, -1.0] {
                let (c, d) = match coord {
                    0 => (fit.c + dir * *step, fit.d),
                    _ => (fit.c, fit.d + dir * *step),
                };
                if let Some(trial) = fit_linear_part(x, y, c, d) {
                    if trial.mse < fit.mse {
                        fit = trial;
                        moved = true;
                        break;
                    }
                }
            }
            if moved {
                *step *= 1.5;
            } else {
                *step *= 0.5;
            }
        }
        let small_steps = steps.iter().all(|&s| s < 1e-6);
        if before - fit.mse < MSE_TOLERANCE && small_steps {
            break;
        }
    }
    Ok(fit)
}

/// Regression-error comparison with the 4-parameter logistic class on
/// standardized data; the direction with the smaller mean squared residual
/// is inferred causal.
pub fn reci_logistic(pair: &SamplePair) -> Result<BaselineDecision> {
    if pair.len() < MIN_OBSERVATIONS {
        return Err(Error::InvalidInput(format!(
            "RECI needs at least {MIN_OBSERVATIONS} observations, got {}",
            pair.len()
        )));
    }
    let x = standardize(pair.x())?.values;
    let y = standardize(pair.y())?.values;
    let score_xy = fit_logistic(&x, &y)?.mse;
    let score_yx = fit_logistic(&y, &x)?.mse;
    Ok(BaselineDecision {
        method: BaselineMethod::Reci,
        direction: smaller_score_wins(score_xy, score_yx),
        score_xy,
        score_yx,
        native_confidence: (score_yx - score_xy).abs(),
    })
}
