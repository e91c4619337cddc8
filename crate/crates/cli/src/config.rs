//! Run configuration: defaults, overlaid by a TOML file, overlaid by flags.

use std::path::{Path, PathBuf};

use napss_core::assembler::{DecodeParams, Strategy, DEFAULT_BUDGET};
use napss_core::corpus::Split;
use napss_core::remote::{Endpoint, TransportConfig};
use napss_core::summarizer::{TrainParams, DEFAULT_THRESHOLD};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Where first-stage sentence scores come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ScorerChoice {
    /// The trained desk-scale model at `model`.
    Model,
    /// Gold labels from the built dataset.
    Oracle,
    External(Endpoint),
}

impl From<ScorerChoice> for String {
    fn from(s: ScorerChoice) -> String {
        match s {
            ScorerChoice::Model => "model".into(),
            ScorerChoice::Oracle => "oracle".into(),
            ScorerChoice::External(e) => e.to_string(),
        }
    }
}

impl TryFrom<String> for ScorerChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        match s.as_str() {
            "model" => Ok(ScorerChoice::Model),
            "oracle" => Ok(ScorerChoice::Oracle),
            other => other
                .parse::<Endpoint>()
                .map(ScorerChoice::External)
                .map_err(|e| format!("scorer must be model, oracle or an endpoint: {e}")),
        }
    }
}

/// Generation back end: the built-in echo adapter or a remote endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AdapterChoice {
    Echo,
    Remote(Endpoint),
}

impl From<AdapterChoice> for String {
    fn from(a: AdapterChoice) -> String {
        match a {
            AdapterChoice::Echo => "echo".into(),
            AdapterChoice::Remote(e) => e.to_string(),
        }
    }
}

impl TryFrom<String> for AdapterChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        if s == "echo" {
            return Ok(AdapterChoice::Echo);
        }
        s.parse::<Endpoint>()
            .map(AdapterChoice::Remote)
            .map_err(|e| format!("adapter must be echo or an endpoint: {e}"))
    }
}

/// Fully resolved configuration. Serialized as-is into manifests and hashed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub out: PathBuf,
    pub corpus: Option<PathBuf>,
    pub parses: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub split: Split,
    pub seed: u64,
    pub threshold: f64,
    pub budget: usize,
    pub scorer: ScorerChoice,
    pub adapter_url: AdapterChoice,
    pub max_new_tokens: u32,
    pub strategy: Strategy,
    pub top_p: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub timeout_secs: f64,
    pub retries: u32,
    pub max_in_flight: usize,
    /// Optional semantic-similarity scorer consulted by `evaluate`.
    pub semantic_url: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainParams::default();
        let decode = DecodeParams::default();
        let transport = TransportConfig::default();
        RunConfig {
            out: PathBuf::from("napss-out"),
            corpus: None,
            parses: None,
            dataset: None,
            model: None,
            split: Split::Test,
            seed: 42,
            threshold: DEFAULT_THRESHOLD,
            budget: DEFAULT_BUDGET,
            scorer: ScorerChoice::Model,
            adapter_url: AdapterChoice::Echo,
            max_new_tokens: decode.max_new_tokens,
            strategy: decode.strategy,
            top_p: decode.top_p,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            l2: train.l2,
            timeout_secs: transport.timeout.as_secs_f64(),
            retries: transport.retries,
            max_in_flight: 4,
            semantic_url: None,
        }
    }
}

/// Every field optional; used for both the config file and command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub out: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub parses: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub split: Option<Split>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub budget: Option<usize>,
    pub scorer: Option<ScorerChoice>,
    pub adapter_url: Option<AdapterChoice>,
    pub max_new_tokens: Option<u32>,
    pub strategy: Option<Strategy>,
    pub top_p: Option<f64>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub l2: Option<f64>,
    pub timeout_secs: Option<f64>,
    pub retries: Option<u32>,
    pub max_in_flight: Option<usize>,
    pub semantic_url: Option<String>,
}

macro_rules! overlay {
    ($base:expr, $layer:expr; $($field:ident),*) => {
        $(if let Some(v) = $layer.$field { $base.$field = v; })*
    };
}

macro_rules! overlay_opt {
    ($base:expr, $layer:expr; $($field:ident),*) => {
        $(if let Some(v) = $layer.$field { $base.$field = Some(v); })*
    };
}

impl PartialConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn apply(self, base: &mut RunConfig) {
        overlay!(base, self; out, split, seed, threshold, budget, scorer, adapter_url,
            max_new_tokens, strategy, top_p, epochs, learning_rate, l2, timeout_secs, retries,
            max_in_flight);
        overlay_opt!(base, self; corpus, parses, dataset, model, semantic_url);
    }
}

impl RunConfig {
    /// Defaults, then `file`, then `flags`.
    pub fn resolve(file: Option<PartialConfig>, flags: PartialConfig) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::default();
        if let Some(file) = file {
            file.apply(&mut config);
        }
        flags.apply(&mut config);
        config.check_values()?;
        Ok(config)
    }

    fn check_values(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} is outside [0, 1]", self.threshold));
        }
        if self.budget == 0 {
            return bad("budget must be positive".into());
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return bad(format!("top_p {} is outside (0, 1]", self.top_p));
        }
        if !(self.timeout_secs.is_finite() && self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive".into());
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be positive".into());
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || self.l2 < 0.0 {
            return bad("learning_rate must be positive and l2 non-negative".into());
        }
        self.semantic_endpoint()?;
        Ok(())
    }

    /// Errors with exit code 2 if any of `paths` is missing.
    pub fn require_existing<'a>(&self, paths: impl IntoIterator<Item = (&'a str, &'a Path)>) -> Result<(), CliError> {
        for (what, path) in paths {
            if !path.exists() {
                return Err(CliError::Config(format!("{what} {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn corpus_path(&self) -> Result<&Path, CliError> {
        self.corpus
            .as_deref()
            .ok_or_else(|| CliError::Config("no corpus given (use --corpus or `corpus` in the config file)".into()))
    }

    pub fn parses_path(&self) -> Result<&Path, CliError> {
        self.parses
            .as_deref()
            .ok_or_else(|| CliError::Config("no parses given (use --parses or `parses` in the config file)".into()))
    }

    pub fn semantic_endpoint(&self) -> Result<Option<Endpoint>, CliError> {
        self.semantic_url
            .as_deref()
            .map(|s| s.parse::<Endpoint>().map_err(|e| CliError::Config(format!("semantic_url: {e}"))))
            .transpose()
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn dataset_path(&self) -> PathBuf {
        self.dataset.clone().unwrap_or_else(|| self.out_file(crate::files::DATASET))
    }

    pub fn model_path(&self) -> PathBuf {
        self.model.clone().unwrap_or_else(|| self.out_file(crate::files::MODEL))
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            l2: self.l2,
            seed: self.seed,
        }
    }

    pub fn decode_params(&self) -> DecodeParams {
        DecodeParams {
            max_new_tokens: self.max_new_tokens,
            seed: self.seed,
            strategy: self.strategy,
            top_p: self.top_p,
        }
    }

    pub fn transport(&self) -> TransportConfig {
        TransportConfig {
            timeout: std::time::Duration::from_secs_f64(self.timeout_secs),
            retries: self.retries,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex(&Sha256::digest(&json))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let file: PartialConfig = toml::from_str("seed = 7\nthreshold = 0.3\nbudget = 256\n").unwrap();
        let flags = PartialConfig {
            seed: Some(9),
            ..PartialConfig::default()
        };
        let c = RunConfig::resolve(Some(file), flags).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.threshold, 0.3);
        assert_eq!(c.budget, 256);
        assert_eq!(c.max_new_tokens, 512);
    }

    #[test]
    fn choices_parse_from_toml() {
        let file: PartialConfig =
            toml::from_str("scorer = \"oracle\"\nadapter_url = \"http://localhost:9000\"\nsplit = \"dev\"\nstrategy = \"sample\"\n").unwrap();
        let c = RunConfig::resolve(Some(file), PartialConfig::default()).unwrap();
        assert_eq!(c.scorer, ScorerChoice::Oracle);
        assert!(matches!(c.adapter_url, AdapterChoice::Remote(Endpoint::Http { .. })));
        assert_eq!(c.split, Split::Dev);
        assert_eq!(c.strategy, Strategy::Sample);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(toml::from_str::<PartialConfig>("seeed = 1").is_err());
        assert!(toml::from_str::<PartialConfig>("adapter_url = \"ftp://x\"").is_err());
        let flags = PartialConfig {
            threshold: Some(1.5),
            ..PartialConfig::default()
        };
        assert!(matches!(RunConfig::resolve(None, flags), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
