//! Reference methods: IGCI slope estimator, unique-count strawman and
//! logistic-class RECI.

mod igci;
mod reci;
mod strawman;

pub use igci::igci_slope;
pub use reci::{reci_logistic, LogisticFit};
pub use strawman::{strawman, unique_count};

use serde::{Deserialize, Serialize};

use crate::inference::Direction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineMethod {
    #[serde(rename = "IGCI")]
    Igci,
    Strawman,
    #[serde(rename = "RECI")]
    Reci,
}

/// Decision of a baseline. `direction` is always `XtoY` or `YtoX`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineDecision {
    pub method: BaselineMethod,
    pub direction: Direction,
    pub score_xy: f64,
    pub score_yx: f64,
    pub native_confidence: f64,
}

/// Picks `XtoY` when the forward score is strictly smaller.
pub(crate) fn smaller_score_wins(score_xy: f64, score_yx: f64) -> Direction {
    if score_xy < score_yx {
        Direction::XtoY
    } else {
        Direction::YtoX
    }
}
