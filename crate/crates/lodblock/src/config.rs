//! TOML run configuration.
//!
//! ```toml
//! mode = "clean-clean"          # or "dirty"
//! algorithm = "token"           # token | attr-cluster | pis | iterative
//! output = "out"
//! seed = 7
//! rr-basis = "aggregate"        # or "distinct"
//! strict = false
//! sample-size = 100
//!
//! [[inputs]]
//! path = "dbpedia.nt"
//! source = "dbpedia"
//!
//! [ground-truth]
//! path = "links.nt"
//! predicate = "owl:sameAs"      # or: format = "tsv"
//!
//! [tokenizer]
//! case-fold = true
//! min-token-length = 1
//!
//! [engine]
//! workers = 4
//! partitions = 8
//! reducers = 16
//! memory-ceiling = 2000000000
//!
//! [iterative]
//! blocks = "token"              # blocking whose blocks are processed
//! oracle = "ground-truth"       # or "similarity"
//! threshold = 0.8
//! order = "size-descending"     # or "key"
//! ```

use std::path::{Path, PathBuf};

use lodblock_core::{BlockOrder, EngineConfig, Mode, RrBasis, TokenizerConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[default]
    Token,
    AttrCluster,
    Pis,
    Iterative,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Token => "token",
            Algorithm::AttrCluster => "attr-cluster",
            Algorithm::Pis => "pis",
            Algorithm::Iterative => "iterative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub path: PathBuf,
    pub source: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundTruthFormat {
    #[default]
    Ntriples,
    Tsv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GroundTruthSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: GroundTruthFormat,
    #[serde(default = "default_predicate")]
    pub predicate: String,
}

fn default_predicate() -> String {
    "owl:sameAs".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct EngineSpec {
    pub workers: usize,
    pub partitions: usize,
    pub reducers: usize,
    pub memory_ceiling: Option<usize>,
}

impl Default for EngineSpec {
    fn default() -> Self {
        let d = EngineConfig::default();
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            partitions: d.partitions,
            reducers: d.reducers,
            memory_ceiling: d.memory_ceiling,
        }
    }
}

impl EngineSpec {
    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig {
            partitions: self.partitions,
            reducers: self.reducers,
            memory_ceiling: self.memory_ceiling,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    #[default]
    GroundTruth,
    Similarity,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderSpec {
    #[default]
    SizeDescending,
    Key,
}

impl From<OrderSpec> for BlockOrder {
    fn from(o: OrderSpec) -> Self {
        match o {
            OrderSpec::SizeDescending => BlockOrder::SizeDescending,
            OrderSpec::Key => BlockOrder::Key,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct IterativeSpec {
    pub blocks: Algorithm,
    pub oracle: OracleKind,
    pub threshold: f64,
    pub order: OrderSpec,
}

impl Default for IterativeSpec {
    fn default() -> Self {
        Self {
            blocks: Algorithm::Token,
            oracle: OracleKind::GroundTruth,
            threshold: 0.8,
            order: OrderSpec::SizeDescending,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub inputs: Vec<InputSpec>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub ground_truth: Option<GroundTruthSpec>,
    #[serde(default)]
    pub tokenizer: TokenizerConfig,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub iterative: IterativeSpec,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rr_basis: RrBasis,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_sample_size")]
    pub sample_size: usize,
    /// Keep only descriptions that take part in a ground-truth pair.
    #[serde(default)]
    pub filter_to_ground_truth: bool,
}

fn default_mode() -> Mode {
    Mode::CleanClean
}

fn default_output() -> PathBuf {
    "lodblock-out".into()
}

fn default_sample_size() -> usize {
    100
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads a config; relative paths inside it resolve against its folder.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for input in &mut config.inputs {
            input.path = base.join(&input.path);
        }
        if let Some(gt) = &mut config.ground_truth {
            gt.path = base.join(&gt.path);
        }
        config.output = base.join(&config.output);
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.into()));
        if self.inputs.is_empty() {
            return invalid("at least one input is required");
        }
        if self.mode == Mode::CleanClean && self.inputs.len() != 2 {
            return invalid("clean-clean mode needs exactly two inputs");
        }
        if self.inputs.iter().any(|i| i.source.is_empty()) {
            return invalid("every input needs a non-empty source tag");
        }
        if self.mode == Mode::CleanClean && self.inputs[0].source == self.inputs[1].source {
            return invalid("the two clean-clean inputs need distinct source tags");
        }
        let needs_clean = |a: Algorithm| a == Algorithm::AttrCluster;
        if self.mode != Mode::CleanClean
            && (needs_clean(self.algorithm)
                || (self.algorithm == Algorithm::Iterative && needs_clean(self.iterative.blocks)))
        {
            return invalid("attr-cluster needs clean-clean mode");
        }
        if self.iterative.blocks == Algorithm::Iterative {
            return invalid("iterative.blocks must name a block-building algorithm");
        }
        if self.algorithm == Algorithm::Iterative {
            if self.iterative.oracle == OracleKind::GroundTruth && self.ground_truth.is_none() {
                return invalid("the ground-truth oracle needs a ground truth");
            }
            if !(0.0..=1.0).contains(&self.iterative.threshold) {
                return invalid("iterative.threshold must lie in [0, 1]");
            }
        }
        if self.tokenizer.min_token_length == 0 {
            return invalid("tokenizer.min-token-length must be at least 1");
        }
        if self.engine.workers == 0 || self.engine.partitions == 0 || self.engine.reducers == 0 {
            return invalid("engine workers, partitions and reducers must be at least 1");
        }
        if let Some(gt) = &self.ground_truth {
            if gt.format == GroundTruthFormat::Ntriples && gt.predicate.is_empty() {
                return invalid("ground-truth.predicate must not be empty");
            }
        }
        Ok(())
    }

    /// The configuration as embedded in reports: everything that can affect
    /// results, so the worker count is left out.
    pub fn resolved(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(engine) = v.get_mut("engine").and_then(|e| e.as_object_mut()) {
            engine.remove("workers");
        }
        v
    }
}
