//! Synthetic cause-effect pairs and conditional-independence triplets.
//!
//! The generators produce four qualitative regimes: general additive noise
//! (`SIM`), low noise (`SIM-ln`), a hidden confounder (`SIM-c`) and a
//! Gaussian cause with Gaussian noise (`SIM-G`). Mechanisms are random sums
//! of sinusoids rescaled to unit variance on the sample.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LabeledPair;
use crate::error::{Error, Result};
use crate::inference::Direction;
use crate::qv::{mean_and_std, SamplePair, Triplet};
use crate::seed::stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimKind {
    #[serde(rename = "SIM")]
    Sim,
    #[serde(rename = "SIM-c")]
    SimC,
    #[serde(rename = "SIM-ln")]
    SimLn,
    #[serde(rename = "SIM-G")]
    SimG,
}

impl SimKind {
    pub const ALL: [SimKind; 4] = [SimKind::Sim, SimKind::SimC, SimKind::SimLn, SimKind::SimG];

    pub fn as_str(self) -> &'static str {
        match self {
            SimKind::Sim => "SIM",
            SimKind::SimC => "SIM-c",
            SimKind::SimLn => "SIM-ln",
            SimKind::SimG => "SIM-G",
        }
    }

    fn noise_range(self) -> (f64, f64) {
        match self {
            SimKind::SimLn => (0.01, 0.1),
            _ => (0.2, 0.8),
        }
    }
}

impl std::fmt::Display for SimKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SimKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sim" => Ok(SimKind::Sim),
            "sim-c" => Ok(SimKind::SimC),
            "sim-ln" => Ok(SimKind::SimLn),
            "sim-g" => Ok(SimKind::SimG),
            _ => Err(Error::InvalidInput(format!(
                "unknown simulation kind {s:?} (expected SIM, SIM-c, SIM-ln or SIM-G)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub kind: SimKind,
    pub n: usize,
    pub pairs: usize,
    pub seed: u64,
    /// Weight of the hidden confounder in `SIM-c`.
    pub confounder_weight: f64,
}

impl SimConfig {
    pub fn new(kind: SimKind, pairs: usize, seed: u64) -> Self {
        Self {
            kind,
            n: 1000,
            pairs,
            seed,
            confounder_weight: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 100 {
            return Err(Error::InvalidInput(format!(
                "simulated pairs need n >= 100, got {}",
                self.n
            )));
        }
        if self.pairs == 0 {
            return Err(Error::InvalidInput("need at least one pair".into()));
        }
        Ok(())
    }
}

/// `f(x) = sum_r a_r sin(w_r x + phi_r)` with `a_r ~ N(0, 1/r^2)`,
/// `w_r ~ U(0.5, 3)`, `phi_r ~ U(0, 2 pi)`.
#[derive(Clone, Debug)]
struct SineMechanism {
    terms: Vec<(f64, f64, f64)>,
}

impl SineMechanism {
    const TERMS: usize = 10;

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let terms = (1..=Self::TERMS)
            .map(|r| {
                let a = Normal::new(0.0, 1.0 / r as f64).unwrap().sample(rng);
                (a, rng.random_range(0.5..3.0), rng.random_range(0.0..TAU))
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(a, w, p)| a * (w * x + p).sin()).sum()
    }

    /// Values on `xs`, centered and scaled to unit sample variance.
    /// Redraws the mechanism in the (unlikely) event it is flat on the sample.
    fn apply_unit<R: Rng + ?Sized>(rng: &mut R, xs: &[f64]) -> Vec<f64> {
        loop {
            let f = Self::sample(rng);
            let v: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
            if let Some(s) = unit_scaled(&v) {
                return s;
            }
        }
    }
}

fn unit_scaled(v: &[f64]) -> Option<Vec<f64>> {
    let (mean, std) = mean_and_std(v);
    (std > 1e-9).then(|| v.iter().map(|a| (a - mean) / std).collect())
}

fn normals<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Standardized draw from a random mixture of 1 to 5 Gaussians with means
/// in `U(-2, 2)` and standard deviations in `U(0.5, 1.5)`.
fn mixture_sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let k = rng.random_range(1..=5);
    let components: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.5..1.5)))
        .collect();
    let v: Vec<f64> = (0..n)
        .map(|_| {
            let (mu, sd) = components[rng.random_range(0..k)];
            let e: f64 = StandardNormal.sample(rng);
            mu + sd * e
        })
        .collect();
    unit_scaled(&v).expect("mixture sample with positive component spread")
}

fn add_scaled(base: &mut [f64], term: &[f64], weight: f64) {
    for (b, t) in base.iter_mut().zip(term) {
        *b += weight * t;
    }
}

/// Draws one labeled pair. The id is left empty; [`generate_dataset`] names
/// pairs by index.
pub fn generate_pair<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> LabeledPair {
    let n = cfg.n;
    let (cause, effect) = match cfg.kind {
        SimKind::SimC => {
            let z = normals(rng, n);
            let mut cause = mixture_sample(rng, n);
            let into_cause = SineMechanism::apply_unit(rng, &z);
            add_scaled(&mut cause, &into_cause, cfg.confounder_weight);
            let cause = unit_scaled(&cause).expect("confounded cause has spread");
            let mut effect = SineMechanism::apply_unit(rng, &cause);
            let into_effect = SineMechanism::apply_unit(rng, &z);
            add_scaled(&mut effect, &into_effect, cfg.confounder_weight);
            (cause, effect)
        }
        SimKind::SimG => {
            let cause = normals(rng, n);
            let effect = SineMechanism::apply_unit(rng, &cause);
            (cause, effect)
        }
        SimKind::Sim | SimKind::SimLn => {
            let cause = mixture_sample(rng, n);
            let effect = SineMechanism::apply_unit(rng, &cause);
            (cause, effect)
        }
    };
    finish_pair(cfg, rng, cause, effect)
}

fn finish_pair<R: Rng + ?Sized>(
    cfg: &SimConfig,
    rng: &mut R,
    cause: Vec<f64>,
    mut effect: Vec<f64>,
) -> LabeledPair {
    let (lo, hi) = cfg.kind.noise_range();
    let sigma = rng.random_range(lo..hi);
    let noise = normals(rng, cause.len());
    add_scaled(&mut effect, &noise, sigma);
    let (pair, truth) = if rng.random_bool(0.5) {
        (SamplePair::new(effect, cause), Direction::YtoX)
    } else {
        (SamplePair::new(cause, effect), Direction::XtoY)
    };
    LabeledPair {
        id: String::new(),
        pair: pair.expect("generated columns are finite and equal length"),
        truth,
        weight: 1.0,
    }
}

/// `cfg.pairs` pairs, pair `i` drawn from its own stream of `cfg.seed`.
pub fn generate_dataset(cfg: &SimConfig) -> Result<Vec<LabeledPair>> {
    cfg.validate()?;
    Ok((0..cfg.pairs)
        .map(|i| {
            let mut p = generate_pair(cfg, &mut stream(cfg.seed, &[i as u64]));
            p.id = format!("{:04}", i + 1);
            p
        })
        .collect())
}

/// Settings for `X <- Z -> Y` triplets, optionally with an extra `X - Y` edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CiConfig {
    pub n: usize,
    pub pairs: usize,
    pub with_edge: bool,
    pub noise_range: (f64, f64),
    pub edge_weight: f64,
}

impl CiConfig {
    pub fn new(n: usize, pairs: usize, with_edge: bool) -> Self {
        Self {
            n,
            pairs,
            with_edge,
            noise_range: (0.2, 0.5),
            edge_weight: 0.7,
        }
    }
}

pub fn generate_ci_triplets<R: Rng + ?Sized>(
    n: usize,
    pairs: usize,
    with_edge: bool,
    rng: &mut R,
) -> Result<Vec<Triplet>> {
    generate_ci_triplets_with(&CiConfig::new(n, pairs, with_edge), rng)
}

pub fn generate_ci_triplets_with<R: Rng + ?Sized>(
    cfg: &CiConfig,
    rng: &mut R,
) -> Result<Vec<Triplet>> {
    if cfg.n < 3 {
        return Err(Error::InvalidInput(format!(
            "triplets need n >= 3, got {}",
            cfg.n
        )));
    }
    let (lo, hi) = cfg.noise_range;
    (0..cfg.pairs)
        .map(|_| {
            let z = mixture_sample(rng, cfg.n);
            let branch = |rng: &mut R| {
                let mut v = SineMechanism::apply_unit(rng, &z);
                let sigma = rng.random_range(lo..hi);
                add_scaled(&mut v, &normals(rng, cfg.n), sigma);
                v
            };
            let mut x = branch(rng);
            let mut y = branch(rng);
            if cfg.with_edge {
                if rng.random_bool(0.5) {
                    let g = SineMechanism::apply_unit(rng, &x);
                    add_scaled(&mut y, &g, cfg.edge_weight);
                } else {
                    let g = SineMechanism::apply_unit(rng, &y);
                    add_scaled(&mut x, &g, cfg.edge_weight);
                }
            }
            Triplet::new(x, y, z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kind_names_round_trip() {
        for kind in SimKind::ALL {
            assert_eq!(kind.as_str().parse::<SimKind>().unwrap(), kind);
        }
        assert_eq!("sim_ln".parse::<SimKind>().unwrap(), SimKind::SimLn);
        assert!("SIM-x".parse::<SimKind>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(SimKind::Sim, 3, 0);
        cfg.n = 99;
        assert!(generate_dataset(&cfg).is_err());
        let cfg = SimConfig::new(SimKind::Sim, 0, 0);
        assert!(generate_dataset(&cfg).is_err());
    }

    #[test]
    fn generated_values_are_finite_and_non_constant() {
        for kind in SimKind::ALL {
            let mut cfg = SimConfig::new(kind, 5, 3);
            cfg.n = 200;
            for p in generate_dataset(&cfg).unwrap() {
                assert_eq!(p.pair.len(), 200);
                assert!(p.pair.x().iter().chain(p.pair.y()).all(|v| v.is_finite()));
                assert!(mean_and_std(p.pair.x()).1 > 0.0);
                assert!(mean_and_std(p.pair.y()).1 > 0.0);
            }
        }
    }

    #[test]
    fn dataset_is_deterministic() {
        let mut cfg = SimConfig::new(SimKind::SimC, 4, 77);
        cfg.n = 150;
        assert_eq!(generate_dataset(&cfg).unwrap(), generate_dataset(&cfg).unwrap());
        let mut rng_a = ChaCha8Rng::seed_from_u64(5);
        let mut rng_b = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(
            generate_ci_triplets(120, 3, true, &mut rng_a).unwrap(),
            generate_ci_triplets(120, 3, true, &mut rng_b).unwrap()
        );
    }
}
