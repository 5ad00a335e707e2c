//! Experiment configuration files (TOML).
//!
//! Unknown keys are rejected everywhere. The accepted layout is documented in
//! `schema/experiment.schema.json`.

use gpcn::data::{generate_sbm, import_external, load_dataset, read_split_file, Format, GraphDataset, SyntheticSpec};
use gpcn::graph::Symmetrize;
use gpcn::models::ModelConfig;
use gpcn::train::{make_split, GridSpec, Split, SplitProtocol, SweepSpec, TrainConfig};
use gpcn::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalFiles {
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
}

/// Exactly one of `path`, `external` or `synthetic`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSource {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub external: Option<ExternalFiles>,
    pub synthetic: Option<SyntheticSpec>,
    /// Name used in result tables; defaults to the file or generator name.
    pub name: Option<String>,
}

fn default_protocol() -> SplitProtocol {
    SplitProtocol::PerClass602020
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_protocol")]
    pub protocol: SplitProtocol,
    /// One split per seed; each run also uses its split seed for
    /// initialization and dropout.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Split files for the `fixed_file` protocol.
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { protocol: default_protocol(), seeds: default_seeds(), files: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub dataset: DatasetSource,
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub split: SplitConfig,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub symmetrize: Symmetrize,
    /// Divide each feature row by its L1 norm before training.
    #[serde(default)]
    pub row_normalize_features: bool,
    pub grid: Option<GridSpec>,
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = cfg.dataset.path.as_mut() {
            resolve(p);
        }
        if let Some(e) = cfg.dataset.external.as_mut() {
            resolve(&mut e.edges);
            resolve(&mut e.features);
            resolve(&mut e.labels);
        }
        cfg.split.files.iter_mut().for_each(resolve);
        if let Some(p) = cfg.output_dir.as_mut() {
            resolve(p);
        }
        Ok((cfg, text))
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.dataset;
        let sources = [d.path.is_some(), d.external.is_some(), d.synthetic.is_some()];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::Config(
                "dataset needs exactly one of `path`, `external` or `synthetic`".into(),
            ));
        }
        if let Some(s) = &d.synthetic {
            s.validate()?;
        }
        self.model.validate()?;
        self.train.validate()?;
        match self.split.protocol {
            SplitProtocol::FixedFile if self.split.files.is_empty() => {
                return Err(Error::Config("fixed_file protocol needs `split.files`".into()))
            }
            SplitProtocol::FixedFile => {}
            _ if self.split.seeds.is_empty() => {
                return Err(Error::Config("`split.seeds` must not be empty".into()))
            }
            _ => {}
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<GraphDataset> {
        let d = &self.dataset;
        let mut ds = if let Some(p) = &d.path {
            load_dataset(p, d.format.unwrap_or_default())?
        } else if let Some(e) = &d.external {
            import_external(&e.edges, &e.features, &e.labels)?
        } else if let Some(s) = &d.synthetic {
            generate_sbm(s)?
        } else {
            unreachable!("validated above")
        };
        if let Some(name) = &d.name {
            ds.name = name.clone();
        }
        if self.row_normalize_features {
            ds = ds.row_normalized();
        }
        Ok(ds)
    }

    pub fn splits(&self, ds: &GraphDataset) -> Result<Vec<Split>> {
        match self.split.protocol {
            SplitProtocol::FixedFile => self
                .split
                .files
                .iter()
                .enumerate()
                .map(|(i, f)| read_split_file(f, ds.num_nodes(), i as u64))
                .collect(),
            p => self.split.seeds.iter().map(|&s| make_split(&ds.labels, p, s)).collect(),
        }
    }
}
