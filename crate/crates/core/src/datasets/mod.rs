//! Labeled benchmark data: synthetic generators and the cause-effect-pairs
//! text format.

mod cep;
mod sim;

pub use cep::{
    load_cep_directory, load_manifest, read_columns, read_pair_file, write_dataset,
    write_pair_file, DatasetManifest, ManifestEntry, MANIFEST_FILE, META_FILE,
};
pub use sim::{
    generate_ci_triplets, generate_ci_triplets_with, generate_dataset, generate_pair, CiConfig,
    SimConfig, SimKind,
};

use serde::{Deserialize, Serialize};

use crate::inference::Direction;
use crate::qv::SamplePair;

/// A pair with its ground-truth direction and benchmark weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPair {
    pub id: String,
    pub pair: SamplePair,
    pub truth: Direction,
    pub weight: f64,
}
