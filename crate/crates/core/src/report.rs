//! Evaluation summaries: confidence-ranked decision curves, weighted
//! accuracy, binomial chance envelopes and decision entropy under random
//! reparametrizations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datasets::LabeledPair;
use crate::error::{Error, Result};
use crate::inference::Direction;
use crate::method::{decide, Method, MethodSettings};
use crate::qv::{standardize, SamplePair};
use crate::reparam::sample_map_for;
use crate::seed::{derive_seed, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub id: String,
    pub method: String,
    pub correct: bool,
    pub confidence: f64,
    pub weight: f64,
}

fn check_rows(rows: &[EvaluationRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("no evaluation rows".into()));
    }
    if let Some(r) = rows.iter().find(|r| !(r.weight > 0.0)) {
        return Err(Error::InvalidInput(format!(
            "row {} has non-positive weight {}",
            r.id, r.weight
        )));
    }
    Ok(())
}

/// `sum w_i * correct_i / sum w_i`.
pub fn weighted_accuracy(rows: &[EvaluationRow]) -> Result<f64> {
    check_rows(rows)?;
    let (hit, total) = rows.iter().fold((0.0, 0.0), |(h, t), r| {
        (h + if r.correct { r.weight } else { 0.0 }, t + r.weight)
    });
    Ok(hit / total)
}

/// Rows ordered by decreasing confidence; ties by id, then method.
pub fn rank_rows(rows: &[EvaluationRow]) -> Vec<&EvaluationRow> {
    let mut ranked: Vec<&EvaluationRow> = rows.iter().collect();
    ranked.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.id.cmp(&b.id))
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.correct.cmp(&b.correct))
    });
    ranked
}

/// Weighted accuracy of the `k` most confident decisions, for `k = 1..=len`.
pub fn decision_curve(rows: &[EvaluationRow]) -> Result<Vec<(usize, f64)>> {
    check_rows(rows)?;
    let mut hit = 0.0;
    let mut total = 0.0;
    Ok(rank_rows(rows)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            total += r.weight;
            if r.correct {
                hit += r.weight;
            }
            (i + 1, hit / total)
        })
        .collect())
}

/// Natural-log entropy of the `XtoY` / `YtoX` frequencies. `Undecided`
/// entries are ignored; an input without decided entries has entropy 0.
pub fn decision_entropy(decisions: &[Direction]) -> f64 {
    let forward = decisions.iter().filter(|&&d| d == Direction::XtoY).count();
    let backward = decisions.iter().filter(|&&d| d == Direction::YtoX).count();
    let total = (forward + backward) as f64;
    [forward, backward]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 / total * (total / c as f64).ln())
        .fold(0.0, |a, b| a + b)
}

/// Smallest `j` with `P(Binomial(k, p) <= j) >= q`.
pub fn binomial_quantile(k: usize, p: f64, q: f64) -> usize {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return k;
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    let mut cdf = 0.0;
    for j in 0..=k {
        if j > 0 {
            log_choose += ((k - j + 1) as f64).ln() - (j as f64).ln();
        }
        cdf += (log_choose + j as f64 * lp + (k - j) as f64 * lq).exp();
        // tolerate rounding when the CDF hits q exactly
        if cdf >= q * (1.0 - 1e-12) {
            return j;
        }
    }
    k
}

/// For `k = 1..=n`, the `q`-quantile of `Binomial(k, p)` divided by `k`:
/// the accuracy a coin-flipping decision maker stays below with probability `q`.
pub fn binomial_envelope(n: usize, p: f64, q: f64) -> Vec<(usize, f64)> {
    (1..=n)
        .map(|k| (k, binomial_quantile(k, p, q) as f64 / k as f64))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessOptions {
    pub bijections: usize,
    pub settings: MethodSettings,
    /// Reuse a single map pair for every repetition (sanity mode: every
    /// method should then report zero entropy).
    pub identical_bijections: bool,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        Self {
            bijections: 20,
            settings: MethodSettings::default(),
            identical_bijections: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub method: Method,
    pub mean_entropy: f64,
    /// Pairs with at least one successful decision.
    pub pairs: usize,
    pub failed_decisions: usize,
    pub entropies: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTable {
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessTable {
    pub fn get(&self, method: Method) -> Option<&RobustnessRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Per pair, applies `bijections` independent random monotone map pairs to
/// the standardized data and records every method's decision; reports the
/// mean over pairs of the per-pair decision entropy.
///
/// MQV procedures reuse one resampling seed per pair across all map pairs so
/// that only the reparametrization varies.
pub fn robustness_study(
    pairs: &[LabeledPair],
    methods: &[Method],
    opts: &RobustnessOptions,
    seed: u64,
) -> Result<RobustnessTable> {
    if opts.bijections == 0 {
        return Err(Error::InvalidInput("need at least one bijection".into()));
    }
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();

    // per pair: for each method, (decisions, failures)
    let per_pair: Vec<Vec<(Vec<Direction>, usize)>> = pairs
        .par_iter()
        .enumerate()
        .map(|(p, lp)| pair_decisions(p as u64, &lp.pair, &methods, opts, seed))
        .collect();

    let rows = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| {
            let mut entropies = Vec::new();
            let mut failed = 0;
            for pair in &per_pair {
                let (decisions, failures) = &pair[k];
                failed += failures;
                if decisions.iter().any(|&d| d != Direction::Undecided) {
                    entropies.push(decision_entropy(decisions));
                }
            }
            if failed > 0 {
                log::warn!("{method}: {failed} decision(s) failed and were excluded");
            }
            let mean_entropy = if entropies.is_empty() {
                f64::NAN
            } else {
                entropies.iter().sum::<f64>() / entropies.len() as f64
            };
            RobustnessRow {
                method,
                mean_entropy,
                pairs: entropies.len(),
                failed_decisions: failed,
                entropies,
            }
        })
        .collect();
    Ok(RobustnessTable { rows })
}

fn pair_decisions(
    index: u64,
    pair: &SamplePair,
    methods: &[Method],
    opts: &RobustnessOptions,
    seed: u64,
) -> Vec<(Vec<Direction>, usize)> {
    let mut out = vec![(Vec::with_capacity(opts.bijections), 0usize); methods.len()];
    let standardized = standardize(pair.x()).and_then(|x| Ok((x.values, standardize(pair.y())?.values)));
    let (xs, ys) = match standardized {
        Ok(v) => v,
        Err(err) => {
            log::warn!("pair {index}: {err}");
            for slot in &mut out {
                slot.1 = opts.bijections;
            }
            return out;
        }
    };
    let method_seed = derive_seed(seed, &[index]);
    for b in 0..opts.bijections {
        let draw = if opts.identical_bijections { 0 } else { b as u64 };
        let mut rng = stream(seed, &[index, draw, 1]);
        let transformed = sample_map_for(&xs, opts.settings.grid_size, &mut rng)
            .and_then(|f| Ok((f, sample_map_for(&ys, opts.settings.grid_size, &mut rng)?)))
            .and_then(|(f, g)| SamplePair::new(f.apply(&xs), g.apply(&ys)));
        let transformed = match transformed {
            Ok(t) => t,
            Err(err) => {
                log::warn!("pair {index}, bijection {b}: {err}");
                for slot in &mut out {
                    slot.1 += 1;
                }
                continue;
            }
        };
        for (slot, &method) in out.iter_mut().zip(methods) {
            match decide(method, &transformed, &opts.settings, method_seed) {
                Ok(d) => slot.0.push(d.direction),
                Err(err) => {
                    log::debug!("pair {index}, bijection {b}, {method}: {err}");
                    slot.1 += 1;
                }
            }
        }
    }
    out
}

/// Mean entropy per method keyed by name, convenient for tabular output.
pub fn entropy_by_method(table: &RobustnessTable) -> BTreeMap<String, f64> {
    table
        .rows
        .iter()
        .map(|r| (r.method.to_string(), r.mean_entropy))
        .collect()
}
