use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything needed to replay a training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Config snapshot in the config file format, seed included.
    pub config: String,
    pub seed: u64,
    /// One digest per stage dataset, over the file bytes.
    pub dataset_sha256: Vec<String>,
    pub dataset_paths: Vec<String>,
    pub model_path: String,
    pub metrics_path: String,
    pub converged: bool,
    pub epochs: usize,
    pub final_accuracy: f64,
    pub final_error: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    #[cfg(test)]
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
