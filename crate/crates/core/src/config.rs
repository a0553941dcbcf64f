//! TOML run configuration.
//!
//! ```toml
//! currencies = ["USD", "EUR", "BRI"]
//! init_policy = "fixed"          # fixed | uniform | resampled
//! init_fractions = [0.2, 0.3, 0.5] # or "uniform"
//! tau_max = 50
//! weight_mode = "direct"         # direct | centrality
//! damping = 0.85
//! pagerank_tol = 1e-10
//! pagerank_max_iter = 10000
//! n_runs = 10000
//! master_seed = 1
//! volume_share_mode = "symmetric" # symmetric | import | export
//! bin_width = 0.1
//!
//! [seed_groups]
//! USD = ["AU", "US", "GB", "CA", "NZ"]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{VolumeShareMode, DEFAULT_BIN_WIDTH};
use crate::dynamics::{CurrencyConfig, RankParams, WeightMode, DEFAULT_TAU_MAX};
use crate::ensemble::{EnsembleSpec, InitPolicy, DEFAULT_RUNS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FractionsSetting {
    Named(String),
    Vector(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitPolicyKind {
    Fixed,
    Uniform,
    Resampled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub currencies: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_groups: Option<BTreeMap<String, Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_fractions: Option<FractionsSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_policy: Option<InitPolicyKind>,
    pub tau_max: usize,
    pub weight_mode: WeightMode,
    pub damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    pub volume_share_mode: VolumeShareMode,
    pub bin_width: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rank = RankParams::default();
        Self {
            currencies: CurrencyConfig::default().currencies,
            seed_groups: None,
            init_fractions: None,
            init_policy: None,
            tau_max: DEFAULT_TAU_MAX,
            weight_mode: WeightMode::Direct,
            damping: rank.damping,
            pagerank_tol: rank.tol,
            pagerank_max_iter: rank.max_iter,
            n_runs: DEFAULT_RUNS,
            master_seed: 0,
            volume_share_mode: VolumeShareMode::Symmetric,
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.currency_config().validate()?;
        self.init_policy()?;
        if self.n_runs == 0 {
            return Err(Error::Config("n_runs must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Config(format!(
                "damping {} must lie in (0, 1)",
                self.damping
            )));
        }
        if self.pagerank_tol.is_nan() || self.pagerank_tol <= 0.0 || self.pagerank_max_iter == 0 {
            return Err(Error::Config(
                "pagerank_tol and pagerank_max_iter must be positive".into(),
            ));
        }
        let bins = 1.0 / self.bin_width;
        if !(self.bin_width > 0.0 && self.bin_width <= 1.0) || (bins - bins.round()).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "bin_width {} must divide 1",
                self.bin_width
            )));
        }
        Ok(())
    }

    /// Seed groups default to the built-in ones only when the currency list
    /// is the built-in one.
    pub fn currency_config(&self) -> CurrencyConfig {
        let default = CurrencyConfig::default();
        let seed_groups = match &self.seed_groups {
            Some(g) => g.clone(),
            None if self.currencies == default.currencies => default.seed_groups,
            None => BTreeMap::new(),
        };
        CurrencyConfig {
            currencies: self.currencies.clone(),
            seed_groups,
            weight_mode: self.weight_mode,
            tau_max: self.tau_max,
        }
    }

    pub fn init_policy(&self) -> Result<InitPolicy> {
        let k = self.currencies.len();
        let vector = match &self.init_fractions {
            None => None,
            Some(FractionsSetting::Named(s)) if s == "uniform" => None,
            Some(FractionsSetting::Named(s)) => {
                return Err(Error::Config(format!(
                    "init_fractions must be \"uniform\" or a list, got \"{s}\""
                )))
            }
            Some(FractionsSetting::Vector(v)) => Some(v.clone()),
        };
        let kind = self.init_policy.unwrap_or(if vector.is_some() {
            InitPolicyKind::Fixed
        } else {
            InitPolicyKind::Uniform
        });
        let policy = match (kind, vector) {
            (InitPolicyKind::Fixed, Some(v)) => InitPolicy::Fixed(v),
            (InitPolicyKind::Fixed, None) => InitPolicy::Fixed(vec![1.0 / k as f64; k]),
            (InitPolicyKind::Uniform, _) => InitPolicy::Uniform,
            (InitPolicyKind::Resampled, _) => InitPolicy::Resampled,
        };
        if let InitPolicy::Fixed(v) = &policy {
            crate::dynamics::InitFractions::Fixed(v.clone())
                .probabilities(k)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(policy)
    }

    pub fn rank_params(&self) -> RankParams {
        RankParams {
            damping: self.damping,
            tol: self.pagerank_tol,
            max_iter: self.pagerank_max_iter,
        }
    }

    pub fn ensemble_spec(&self) -> Result<EnsembleSpec> {
        Ok(EnsembleSpec::new(
            self.n_runs,
            self.master_seed,
            self.init_policy()?,
            self.tau_max,
        ))
    }
}
