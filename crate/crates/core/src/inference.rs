//! Monte-Carlo causal decisions from MQV score clouds.
//!
//! Both procedures standardize the pair, estimate its joint density with a
//! KDE and score `m` smoothed-bootstrap resamples. The bijection variant
//! first pushes the data through `M` independent random monotone maps per
//! variable and pools all `m * M` score samples. The decision probability is
//! `p_x = P(C_{X->Y} > C_{Y->X})` estimated over all cross pairs of samples.
//!
//! Randomness comes from one master seed; each bijection and each resample
//! owns a derived stream, so results are identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{fit_kde, zip_points, KdeModel};
use crate::error::{Error, Result};
use crate::qv::{score_columns, standardize, SamplePair};
use crate::reparam::{sample_map_for, DEFAULT_GRID_SIZE};
use crate::seed::stream;

pub const DEFAULT_RESAMPLES: usize = 300;
pub const DEFAULT_BIJECTIONS: usize = 100;
const MAP_ATTEMPTS: u64 = 4;

const TAG_RESAMPLE: u64 = 1;
const TAG_BIJECTION: u64 = 2;

/// Inferred causal direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    XtoY,
    YtoX,
    Undecided,
}

impl Direction {
    /// Decision rule on `p_x`.
    pub fn from_probability(p_x: f64) -> Self {
        if p_x > 0.5 {
            Direction::XtoY
        } else if p_x < 0.5 {
            Direction::YtoX
        } else {
            Direction::Undecided
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::XtoY => Direction::YtoX,
            Direction::YtoX => Direction::XtoY,
            Direction::Undecided => Direction::Undecided,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::XtoY => "XtoY",
            Direction::YtoX => "YtoX",
            Direction::Undecided => "Undecided",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "XtoY" => Ok(Direction::XtoY),
            "YtoX" => Ok(Direction::YtoX),
            "Undecided" => Ok(Direction::Undecided),
            other => Err(Error::InvalidInput(format!("unknown direction {other:?}"))),
        }
    }
}

/// One `(C_{X->Y}, C_{Y->X})` draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreSample {
    pub c_xy: f64,
    pub c_yx: f64,
    pub bijection_index: usize,
    pub resample_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub p_x: f64,
    pub p_y: f64,
    pub direction: Direction,
    pub confidence: f64,
    pub m: usize,
    /// Number of bijections; 0 for the plain resampling procedure.
    #[serde(rename = "M")]
    pub bijections: usize,
    pub seed: u64,
    pub n: usize,
}

impl DecisionRecord {
    pub fn from_probability(p_x: f64, m: usize, bijections: usize, seed: u64, n: usize) -> Self {
        Self {
            p_x,
            p_y: 1.0 - p_x,
            direction: Direction::from_probability(p_x),
            confidence: confidence(p_x),
            m,
            bijections,
            seed,
            n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Inference {
    pub record: DecisionRecord,
    pub samples: Vec<ScoreSample>,
}

/// Settings for the bijection-marginalized procedure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BijectionOptions {
    /// `M`: number of random map pairs.
    pub bijections: usize,
    /// `m`: resamples per map pair.
    pub resamples: usize,
    pub grid_size: usize,
}

impl Default for BijectionOptions {
    fn default() -> Self {
        Self {
            bijections: DEFAULT_BIJECTIONS,
            resamples: DEFAULT_RESAMPLES,
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// `conf = |p_x - 0.5|`.
pub fn confidence(p_x: f64) -> f64 {
    (p_x - 0.5).abs()
}

/// Fraction of all pairs `(i, j)` with `cy[j] < cx[i]`.
///
/// Exact count in `O(K log K)`: sort `cy` once and binary-search each `cx`.
pub fn compare_score_clouds(cx: &[f64], cy: &[f64]) -> f64 {
    if cx.is_empty() || cy.is_empty() {
        return f64::NAN;
    }
    let mut sorted = cy.to_vec();
    sorted.sort_by(f64::total_cmp);
    let below: u64 = cx
        .iter()
        .map(|&c| sorted.partition_point(|&v| v < c) as u64)
        .sum();
    below as f64 / (cx.len() as f64 * cy.len() as f64)
}

fn check_counts(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidInput("need at least one resample (m >= 1)".into()));
    }
    Ok(())
}

fn standardized_points(x: &[f64], y: &[f64]) -> Result<Vec<[f64; 2]>> {
    let xs = standardize(x)?;
    let ys = standardize(y)?;
    Ok(zip_points(&xs.values, &ys.values))
}

fn score_resamples(
    kde: &KdeModel<2>,
    n: usize,
    m: usize,
    seed: u64,
    bijection_index: usize,
    label: &[u64],
) -> Result<Vec<ScoreSample>> {
    (0..m)
        .into_par_iter()
        .map(|i| {
            let mut path = label.to_vec();
            path.push(i as u64);
            let mut rng = stream(seed, &path);
            let draws = kde.resample(n, &mut rng);
            let (xs, ys): (Vec<f64>, Vec<f64>) = draws.iter().map(|p| (p[0], p[1])).unzip();
            let s = score_columns(&xs, &ys)?;
            Ok(ScoreSample {
                c_xy: s.c_xy,
                c_yx: s.c_yx,
                bijection_index,
                resample_index: i,
            })
        })
        .collect()
}

fn summarize(samples: &[ScoreSample], m: usize, bijections: usize, seed: u64, n: usize) -> DecisionRecord {
    let cx: Vec<f64> = samples.iter().map(|s| s.c_xy).collect();
    let cy: Vec<f64> = samples.iter().map(|s| s.c_yx).collect();
    DecisionRecord::from_probability(compare_score_clouds(&cx, &cy), m, bijections, seed, n)
}

/// Smoothed-bootstrap MQV decision without reparametrization.
pub fn infer_no_bijections(pair: &SamplePair, m: usize, seed: u64) -> Result<Inference> {
    check_counts(m)?;
    let n = pair.len();
    let kde = fit_kde(&standardized_points(pair.x(), pair.y())?)?;
    let samples = score_resamples(&kde, n, m, seed, 0, &[TAG_RESAMPLE])?;
    let record = summarize(&samples, m, 0, seed, n);
    Ok(Inference { record, samples })
}

/// MQV decision marginalized over random monotone maps of both variables.
///
/// A map pair whose GP draw fails numerically is redrawn up to three times
/// before the error is returned.
pub fn infer_with_bijections(
    pair: &SamplePair,
    opts: &BijectionOptions,
    seed: u64,
) -> Result<Inference> {
    check_counts(opts.resamples)?;
    if opts.bijections == 0 {
        return Err(Error::InvalidInput(
            "need at least one bijection (M >= 1)".into(),
        ));
    }
    let n = pair.len();
    let xs = standardize(pair.x())?.values;
    let ys = standardize(pair.y())?.values;

    let per_map: Vec<Vec<ScoreSample>> = (0..opts.bijections)
        .into_par_iter()
        .map(|j| {
            let kde = transformed_kde(&xs, &ys, opts.grid_size, seed, j as u64)?;
            score_resamples(
                &kde,
                n,
                opts.resamples,
                seed,
                j,
                &[TAG_BIJECTION, j as u64, TAG_RESAMPLE],
            )
        })
        .collect::<Result<_>>()?;
    let samples: Vec<ScoreSample> = per_map.into_iter().flatten().collect();
    let record = summarize(&samples, opts.resamples, opts.bijections, seed, n);
    Ok(Inference { record, samples })
}

fn transformed_kde(
    xs: &[f64],
    ys: &[f64],
    grid_size: usize,
    seed: u64,
    j: u64,
) -> Result<KdeModel<2>> {
    let mut last_err = None;
    for attempt in 0..MAP_ATTEMPTS {
        let mut rng = stream(seed, &[TAG_BIJECTION, j, attempt]);
        let maps = sample_map_for(xs, grid_size, &mut rng)
            .and_then(|f| Ok((f, sample_map_for(ys, grid_size, &mut rng)?)));
        match maps {
            Ok((f, g)) => {
                return fit_kde(&standardized_points(&f.apply(xs), &g.apply(ys))?);
            }
            Err(err @ Error::NumericalFailure(_)) => {
                log::warn!("bijection {j} attempt {attempt} failed: {err}");
                last_err = Some(err);
            }
            Err(err) => return Err(err),
        }
    }
    Err(last_err.expect("at least one attempt"))
}
