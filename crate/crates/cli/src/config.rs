//! Run configuration: built-in defaults, overridden by a config file,
//! overridden by command-line flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dialaug_core::bank::LinkSemantics;
use dialaug_core::composer::GrowthLimits;
use dialaug_core::corpus::Eligibility;
use dialaug_core::delex::ClassifyConfig;
use dialaug_core::realizer::{RealizationBudget, RealizationMode};
use dialaug_core::{AugmentConfig, SlotLabel};
use serde::{Deserialize, Serialize};

/// Keys accepted in a config file. Same names as the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub domain: Option<String>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    pub ratio: Option<f64>,
    pub link_semantics: Option<LinkSemantics>,
    pub max_depth: Option<usize>,
    pub max_nodes: Option<usize>,
    pub reuse: Option<usize>,
    pub categorical: Option<CategoricalList>,
    pub tau: Option<f64>,
    pub mode: Option<RealizationMode>,
    pub cap: Option<usize>,
    pub include_seed: Option<bool>,
    pub strict: Option<bool>,
    pub single_domain: Option<bool>,
    pub threads: Option<usize>,
    pub provenance: Option<PathBuf>,
}

/// `categorical` may be a comma list string or an array.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CategoricalList {
    Joined(String),
    List(Vec<String>),
}

impl CategoricalList {
    fn items(&self) -> Vec<String> {
        match self {
            CategoricalList::Joined(s) => split_list(s),
            CategoricalList::List(v) => v.clone(),
        }
    }
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::to_string)
        .collect()
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

/// Effective configuration of an augmentation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub domain: String,
    pub shots: usize,
    pub seed: u64,
    pub ratio: f64,
    pub link_semantics: LinkSemantics,
    pub max_depth: usize,
    pub max_nodes: usize,
    pub reuse: usize,
    pub categorical: Vec<SlotLabel>,
    pub tau: f64,
    pub mode: RealizationMode,
    pub cap: usize,
    pub include_seed: bool,
    pub strict: bool,
    pub single_domain: bool,
}

impl RunConfig {
    /// Layers `flags` over `file` over the defaults.
    pub fn resolve(flags: FileConfig, file: FileConfig) -> Result<Self> {
        let limits = GrowthLimits::default();
        let budget = RealizationBudget::default();
        let classify = ClassifyConfig::default();
        macro_rules! pick {
            ($field:ident) => {
                flags.$field.clone().or(file.$field.clone())
            };
        }
        let Some(input) = pick!(input) else {
            bail!("missing --input");
        };
        let Some(output) = pick!(output) else {
            bail!("missing --output");
        };
        let Some(domain) = pick!(domain) else {
            bail!("missing --domain");
        };
        let categorical = pick!(categorical)
            .map(|c| c.items())
            .unwrap_or_default()
            .iter()
            .map(|s| SlotLabel::parse(s).map_err(anyhow::Error::from))
            .collect::<Result<BTreeSet<_>>>()?
            .into_iter()
            .collect();
        let config = RunConfig {
            input,
            output,
            domain,
            shots: pick!(shots).unwrap_or(5),
            seed: pick!(seed).unwrap_or(0),
            ratio: pick!(ratio).unwrap_or(budget.ratio),
            link_semantics: pick!(link_semantics).unwrap_or_default(),
            max_depth: pick!(max_depth).unwrap_or(limits.max_depth),
            max_nodes: pick!(max_nodes).unwrap_or(limits.max_nodes),
            reuse: pick!(reuse).unwrap_or(limits.reuse),
            categorical,
            tau: pick!(tau).unwrap_or(classify.tau),
            mode: pick!(mode).unwrap_or(budget.mode),
            cap: pick!(cap).unwrap_or(budget.cap),
            include_seed: pick!(include_seed).unwrap_or(false),
            strict: pick!(strict).unwrap_or(false),
            single_domain: pick!(single_domain).unwrap_or(false),
        };
        config.augment_config().budget.check()?;
        config.augment_config().limits.check()?;
        if !(0.0..=1.0).contains(&config.tau) {
            bail!("--tau must lie in [0, 1]");
        }
        Ok(config)
    }

    pub fn augment_config(&self) -> AugmentConfig {
        AugmentConfig {
            domain: self.domain.clone(),
            shots: self.shots,
            eligibility: if self.single_domain {
                Eligibility::SingleDomain
            } else {
                Eligibility::Touching
            },
            link_semantics: self.link_semantics,
            limits: GrowthLimits {
                max_depth: self.max_depth,
                max_nodes: self.max_nodes,
                reuse: self.reuse,
            },
            classify: ClassifyConfig {
                categorical: self.categorical.iter().cloned().collect(),
                tau: self.tau,
            },
            budget: RealizationBudget {
                mode: self.mode,
                cap: self.cap,
                ratio: self.ratio,
                seed: self.seed,
            },
        }
    }
}
