//! Experiment configuration files.

use std::path::{Path, PathBuf};

use cosetpack::cube::{GraphJson, Wallspace};
use cosetpack::group::Descriptor;
use cosetpack::packing::{LawInstance, Mode};
use cosetpack::relhyp::CampaignConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Inline data or a path to a JSON file holding it, resolved against the
/// directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> Source<T> {
    pub fn load(&self, base: &Path) -> Result<T, CliError> {
        match self {
            Source::Inline(t) => Ok(t.clone()),
            Source::Path(p) => {
                let p = base.join(p);
                let text = std::fs::read_to_string(&p)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// One experiment. Which fields are required depends on `command`; radii
/// never default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<Descriptor>,
    /// Generators of the subgroup `H`.
    #[serde(default, alias = "gens", skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<Vec<String>>,
    /// Generators of a second subgroup `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other: Option<Vec<String>>,
    /// Rank of the ambient free group for `stallings.*` without a backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<String>>,
    #[serde(default, rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, rename = "D_max", skip_serializing_if = "Option::is_none")]
    pub d_max: Option<usize>,
    #[serde(default, rename = "D", skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<usize>,
    #[serde(default, rename = "R_deep", skip_serializing_if = "Option::is_none")]
    pub r_deep: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<LawInstance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub campaign: Option<CampaignConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Source<GraphJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wallspace: Option<Source<Wallspace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sets: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperplanes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Largest dual to build in `cube.dual`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Element budget for ball enumeration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Where `ball` writes its bare fixture.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_out: Option<PathBuf>,
    /// A ball fixture to compare against the recomputed ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_timestamp: Option<bool>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// The fields that determine the result: everything except where the
    /// report goes and whether it is timestamped.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut c = self.clone();
        c.out = None;
        c.no_timestamp = None;
        c.fixture_out = None;
        // `Value` maps are sorted, so the serialization is canonical.
        let v = serde_json::to_value(&c).expect("config serializes");
        let digest = Sha256::digest(serde_json::to_vec(&v).expect("value serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn need<T: Clone>(field: &Option<T>, name: &str, command: &str) -> Result<T, CliError> {
        field
            .clone()
            .ok_or_else(|| CliError::Config(format!("`{command}` requires `{name}`")))
    }
}
