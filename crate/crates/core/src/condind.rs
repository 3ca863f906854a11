//! Conditional-independence test from reparametrized co-quadratic variation.
//!
//! Under `X ⟂ Y | Z` the conditional covariance of any pair of bounded
//! transforms `f(X), g(Y)` vanishes. We draw `B` random monotone map pairs,
//! estimate `|E Cov(f(X), g(Y) | Z)|` for each, and reject independence when
//! more than `frac_limit` of the draws exceed `threshold`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qv::{co_qv_in_order, sort_order, standardize, Triplet};
use crate::reparam::{sample_map_for, DEFAULT_GRID_SIZE};
use crate::seed::stream;

pub const DEFAULT_THRESHOLD: f64 = 0.15;
pub const DEFAULT_FRAC_LIMIT: f64 = 0.01;
pub const DEFAULT_CI_BIJECTIONS: usize = 1000;
const SMALL_SAMPLE: usize = 50;
const MAP_ATTEMPTS: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondIndOptions {
    pub threshold: f64,
    pub frac_limit: f64,
    pub bijections: usize,
    pub grid_size: usize,
}

impl Default for CondIndOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            frac_limit: DEFAULT_FRAC_LIMIT,
            bijections: DEFAULT_CI_BIJECTIONS,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondIndResult {
    pub independent: bool,
    pub exceed_fraction: f64,
    /// `|co-QV|` for each map pair, in draw order.
    pub values: Vec<f64>,
    pub threshold: f64,
    pub bijection_count: usize,
}

pub fn cond_independence_test(
    t: &Triplet,
    opts: &CondIndOptions,
    seed: u64,
) -> Result<CondIndResult> {
    if opts.bijections == 0 {
        return Err(Error::InvalidInput("need at least one bijection".into()));
    }
    if !(opts.threshold >= 0.0) || !(0.0..=1.0).contains(&opts.frac_limit) {
        return Err(Error::InvalidInput(format!(
            "threshold must be >= 0 and frac_limit in [0, 1], got {} and {}",
            opts.threshold, opts.frac_limit
        )));
    }
    if t.len() < SMALL_SAMPLE {
        log::warn!(
            "conditional independence test on only {} observations; results are unreliable below {SMALL_SAMPLE}",
            t.len()
        );
    }
    let xs = standardize(t.x())?.values;
    let ys = standardize(t.y())?.values;
    let order = sort_order(t.z());

    let values: Vec<f64> = (0..opts.bijections)
        .into_par_iter()
        .map(|b| {
            let mut last_err = None;
            for attempt in 0..MAP_ATTEMPTS {
                let mut rng = stream(seed, &[b as u64, attempt]);
                let maps = sample_map_for(&xs, opts.grid_size, &mut rng)
                    .and_then(|f| Ok((f, sample_map_for(&ys, opts.grid_size, &mut rng)?)));
                match maps {
                    Ok((f, g)) => {
                        return Ok(co_qv_in_order(&order, &f.apply(&xs), &g.apply(&ys))?.abs())
                    }
                    Err(err @ Error::NumericalFailure(_)) => last_err = Some(err),
                    Err(err) => return Err(err),
                }
            }
            Err(last_err.expect("at least one attempt"))
        })
        .collect::<Result<_>>()?;

    let exceeding = values.iter().filter(|&&v| v > opts.threshold).count();
    let exceed_fraction = exceeding as f64 / values.len() as f64;
    Ok(CondIndResult {
        independent: exceed_fraction <= opts.frac_limit,
        exceed_fraction,
        values,
        threshold: opts.threshold,
        bijection_count: opts.bijections,
    })
}
