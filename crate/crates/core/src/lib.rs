//! Causal direction inference from the minimal quadratic variation of a
//! response ordered by its candidate cause, with random monotone
//! reparametrizations, kernel-density resampling, baseline methods and a
//! conditional-independence test built on co-quadratic variation.

pub mod baselines;
pub mod condind;
pub mod datasets;
pub mod density;
pub mod error;
pub mod inference;
pub mod method;
pub mod qv;
pub mod reparam;
pub mod report;
pub mod seed;

pub use condind::{cond_independence_test, CondIndOptions, CondIndResult};
pub use datasets::LabeledPair;
pub use error::{Error, Result};
pub use inference::{
    compare_score_clouds, infer_no_bijections, infer_with_bijections, BijectionOptions,
    DecisionRecord, Direction, Inference, ScoreSample,
};
pub use method::{decide, Method, MethodDecision, MethodSettings};
pub use qv::{
    co_quadratic_variation, mqv_score, mqv_score_directed, standardize, MqvScore, SamplePair,
    Triplet,
};
pub use reparam::{apply_map, sample_monotone_map, MonotoneMap};
