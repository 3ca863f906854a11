//! Uniform dispatch over the MQV procedures and the baselines.

use serde::{Deserialize, Serialize};

use crate::baselines::{igci_slope, reci_logistic, strawman, BaselineDecision};
use crate::error::{Error, Result};
use crate::inference::{infer_no_bijections, infer_with_bijections, BijectionOptions, Direction};
use crate::qv::SamplePair;
use crate::seed::stream;

const TAG_COIN: u64 = 0xC017;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "MQV-Alg1")]
    MqvAlg1,
    #[serde(rename = "MQV-Alg2")]
    MqvAlg2,
    #[serde(rename = "IGCI")]
    Igci,
    Strawman,
    #[serde(rename = "RECI")]
    Reci,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::MqvAlg1,
        Method::MqvAlg2,
        Method::Igci,
        Method::Strawman,
        Method::Reci,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::MqvAlg1 => "MQV-Alg1",
            Method::MqvAlg2 => "MQV-Alg2",
            Method::Igci => "IGCI",
            Method::Strawman => "Strawman",
            Method::Reci => "RECI",
        }
    }

    /// Methods whose output does not depend on the seed.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Method::Igci | Method::Reci)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mqv-alg1" | "mqv1" | "alg1" => Ok(Method::MqvAlg1),
            "mqv-alg2" | "mqv2" | "alg2" => Ok(Method::MqvAlg2),
            "igci" => Ok(Method::Igci),
            "strawman" => Ok(Method::Strawman),
            "reci" => Ok(Method::Reci),
            _ => Err(Error::InvalidInput(format!(
                "unknown method {s:?} (expected MQV-Alg1, MQV-Alg2, IGCI, Strawman or RECI)"
            ))),
        }
    }
}

/// Parameters of the MQV procedures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub resamples: usize,
    pub bijections: usize,
    pub grid_size: usize,
}

impl Default for MethodSettings {
    fn default() -> Self {
        let d = BijectionOptions::default();
        Self {
            resamples: d.resamples,
            bijections: d.bijections,
            grid_size: d.grid_size,
        }
    }
}

/// A decision in a method-independent form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodDecision {
    pub method: Method,
    pub direction: Direction,
    pub confidence: f64,
    /// `p_x` for the MQV procedures.
    pub p_x: Option<f64>,
    pub score_xy: Option<f64>,
    pub score_yx: Option<f64>,
}

impl MethodDecision {
    fn from_baseline(method: Method, d: BaselineDecision) -> Self {
        Self {
            method,
            direction: d.direction,
            confidence: d.native_confidence,
            p_x: None,
            score_xy: Some(d.score_xy),
            score_yx: Some(d.score_yx),
        }
    }
}

pub fn decide(
    method: Method,
    pair: &SamplePair,
    settings: &MethodSettings,
    seed: u64,
) -> Result<MethodDecision> {
    let mqv = |record: crate::inference::DecisionRecord| MethodDecision {
        method,
        direction: record.direction,
        confidence: record.confidence,
        p_x: Some(record.p_x),
        score_xy: None,
        score_yx: None,
    };
    match method {
        Method::MqvAlg1 => Ok(mqv(infer_no_bijections(pair, settings.resamples, seed)?.record)),
        Method::MqvAlg2 => {
            let opts = BijectionOptions {
                bijections: settings.bijections,
                resamples: settings.resamples,
                grid_size: settings.grid_size,
            };
            Ok(mqv(infer_with_bijections(pair, &opts, seed)?.record))
        }
        Method::Igci => Ok(MethodDecision::from_baseline(method, igci_slope(pair)?)),
        Method::Strawman => {
            let mut rng = stream(seed, &[TAG_COIN]);
            Ok(MethodDecision::from_baseline(method, strawman(pair, &mut rng)))
        }
        Method::Reci => Ok(MethodDecision::from_baseline(method, reci_logistic(pair)?)),
    }
}
