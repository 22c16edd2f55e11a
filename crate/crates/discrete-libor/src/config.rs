//! Run configuration: a single JSON document describing the tenor grid,
//! curve, vol surface, driver, pricing job and optional convergence job.
//!
//! The shipped `configs/paper.json` reproduces the reference experiment:
//! eleven annual tenor dates, ten rates, the corrected initial curve, the
//! per-rate vol ladder, a symmetric Bernoulli driver and the eight-strike
//! caplet grid on `L(T_5, T_5)`. `configs/paper_as_printed.json` is the same
//! run with the curve's two apparent misprints (0.23, 0.28) taken literally.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::convergence::{ConvergenceSpec, LabMode};
use crate::curve::MarketCurve;
use crate::driver::{Atom, DriverSpec};
use crate::error::{Error, Result};
use crate::model::DEFAULT_TREE_PATH_LIMIT;
use crate::pricing::{CapletSpec, McParams, ModelChoice, ModelSetup};
use crate::tenor::TenorStructure;
use crate::vol::VolSurface;

pub const PAPER_CURVE: [f64; 10] = [
    0.0207, 0.023, 0.0262, 0.028, 0.0292, 0.0318, 0.0342, 0.0362, 0.0379, 0.04,
];
pub const PAPER_CURVE_AS_PRINTED: [f64; 10] = [
    0.0207, 0.23, 0.0262, 0.28, 0.0292, 0.0318, 0.0342, 0.0362, 0.0379, 0.04,
];
pub const PAPER_VOLS: [f64; 10] = [0.34, 0.32, 0.30, 0.28, 0.26, 0.24, 0.22, 0.20, 0.18, 0.16];
pub const PAPER_STRIKES: [f64; 8] = [0.6, 1.0, 1.4, 1.8, 2.2, 2.6, 3.0, 3.4];

fn default_normalization() -> f64 {
    1.0
}

fn default_tree_limit() -> usize {
    DEFAULT_TREE_PATH_LIMIT
}

fn default_true() -> bool {
    true
}

fn default_ks_cap() -> usize {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenorConfig {
    pub t_star: f64,
    pub n: usize,
    pub p: usize,
    /// Optional; when present it must equal `t_star / (n + 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveConfig {
    pub initial_libors: Vec<f64>,
    #[serde(default = "default_normalization")]
    pub normalization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VolConfig {
    PerRate { per_rate: Vec<f64> },
    Rows { rows: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DriverConfig {
    /// The symmetric pair `{+1: 1/2, -1: 1/2}`.
    Bernoulli,
    /// General finite law.
    Atomic { atoms: Vec<AtomConfig> },
    /// Centered normal.
    Gaussian { variance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub value: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingConfig {
    pub model: ModelChoice,
    pub fixing_index: usize,
    pub strike_mults: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    #[serde(default = "default_tree_limit")]
    pub tree_path_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smile_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence_csv: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabModeConfig {
    #[default]
    Mc,
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub levels: Vec<usize>,
    pub lambda: f64,
    pub strike_mult: f64,
    pub paths: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub mode: LabModeConfig,
    #[serde(default = "default_tree_limit")]
    pub max_paths: usize,
    #[serde(default = "default_true")]
    pub include_gz: bool,
    #[serde(default = "default_ks_cap")]
    pub ks_sample_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tenor: TenorConfig,
    pub curve: CurveConfig,
    pub vol: VolConfig,
    pub driver: DriverConfig,
    pub pricing: PricingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceConfig>,
}

impl RunConfig {
    /// The reference experiment with the corrected curve.
    pub fn paper() -> Self {
        Self {
            tenor: TenorConfig {
                t_star: 11.0,
                n: 10,
                p: 1,
                delta: Some(1.0),
            },
            curve: CurveConfig {
                initial_libors: PAPER_CURVE.to_vec(),
                normalization: 1.0,
            },
            vol: VolConfig::PerRate {
                per_rate: PAPER_VOLS.to_vec(),
            },
            driver: DriverConfig::Bernoulli,
            pricing: PricingConfig {
                model: ModelChoice::BernoulliExact,
                fixing_index: 5,
                strike_mults: PAPER_STRIKES.to_vec(),
                paths: 500_000,
                seed: 42,
                tree_path_limit: DEFAULT_TREE_PATH_LIMIT,
            },
            output: Some(OutputConfig {
                smile_csv: Some("out/smile.csv".into()),
                plot_csv: Some("out/smile_plot.csv".into()),
                convergence_csv: Some("out/convergence.csv".into()),
            }),
            convergence: Some(ConvergenceConfig {
                levels: vec![4, 16, 64],
                lambda: 0.16,
                strike_mult: 2.0,
                paths: 400_000,
                seeds: vec![1, 2, 3, 4, 5],
                mode: LabModeConfig::Mc,
                max_paths: DEFAULT_TREE_PATH_LIMIT,
                include_gz: true,
                ks_sample_cap: default_ks_cap(),
            }),
        }
    }

    /// Same run with the curve's literal printed values.
    pub fn paper_as_printed() -> Self {
        let mut config = Self::paper();
        config.curve.initial_libors = PAPER_CURVE_AS_PRINTED.to_vec();
        config
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form, carried on every output file.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn tenor_structure(&self) -> Result<TenorStructure> {
        let tenor = TenorStructure::new(self.tenor.t_star, self.tenor.n, self.tenor.p)
            .map_err(|e| Error::Config(format!("tenor: {e}")))?;
        if let Some(delta) = self.tenor.delta {
            let implied = tenor.delta();
            if (delta - implied).abs() > 1e-12 * implied.max(1.0) {
                return Err(Error::Config(format!(
                    "tenor.delta: {delta} is inconsistent with t_star/(n+1) = {implied}"
                )));
            }
        }
        Ok(tenor)
    }

    pub fn market_curve(&self) -> Result<MarketCurve> {
        let tenor = self.tenor_structure()?;
        if self.curve.initial_libors.len() != tenor.n() {
            return Err(Error::Config(format!(
                "curve.initial_libors: expected one rate per tenor 1..={}, got {} entries",
                tenor.n(),
                self.curve.initial_libors.len()
            )));
        }
        MarketCurve::new(
            self.curve.initial_libors.clone(),
            tenor.delta(),
            self.curve.normalization,
        )
        .map_err(|e| Error::Config(format!("curve: {e}")))
    }

    pub fn vol_surface(&self) -> Result<VolSurface> {
        let tenor = self.tenor_structure()?;
        match &self.vol {
            VolConfig::PerRate { per_rate } => {
                if per_rate.len() != tenor.n() {
                    let missing = per_rate.len() + 1;
                    return Err(Error::Config(format!(
                        "vol.per_rate: expected one vol per rate 1..={}, got {} entries \
                         (rate {missing} onward missing)",
                        tenor.n(),
                        per_rate.len()
                    )));
                }
                VolSurface::constant_per_rate(per_rate, &tenor)
                    .map_err(|e| Error::Config(format!("vol: {e}")))
            }
            VolConfig::Rows { rows } => VolSurface::from_rows(rows.clone(), &tenor)
                .map_err(|e| Error::Config(format!("vol: {e}"))),
        }
    }

    pub fn driver_spec(&self) -> Result<DriverSpec> {
        match &self.driver {
            DriverConfig::Bernoulli => Ok(DriverSpec::bernoulli()),
            DriverConfig::Atomic { atoms } => DriverSpec::atomic(
                atoms
                    .iter()
                    .map(|a| Atom {
                        value: a.value,
                        prob: a.prob,
                    })
                    .collect(),
            )
            .map_err(|e| Error::Config(format!("driver.atoms: {e}"))),
            DriverConfig::Gaussian { variance } => DriverSpec::gaussian(*variance)
                .map_err(|e| Error::Config(format!("driver.variance: {e}"))),
        }
    }

    pub fn model_setup(&self) -> Result<ModelSetup> {
        Ok(ModelSetup {
            tenor: self.tenor_structure()?,
            curve: self.market_curve()?,
            vols: self.vol_surface()?,
            driver: self.driver_spec()?,
        })
    }

    pub fn caplet_spec(&self) -> CapletSpec {
        CapletSpec {
            fixing_index: self.pricing.fixing_index,
            strike_mults: self.pricing.strike_mults.clone(),
        }
    }

    pub fn mc_params(&self) -> McParams {
        McParams {
            n_paths: self.pricing.paths,
            seed: self.pricing.seed,
        }
    }

    pub fn convergence_spec(&self) -> Result<Option<ConvergenceSpec>> {
        let Some(conv) = &self.convergence else {
            return Ok(None);
        };
        let spec = ConvergenceSpec {
            levels: conv.levels.clone(),
            driver: self.driver_spec()?,
            lambda: conv.lambda,
            strike_mult: conv.strike_mult,
            seeds: conv.seeds.clone(),
            mode: match conv.mode {
                LabModeConfig::Mc => LabMode::MonteCarlo {
                    n_paths: conv.paths,
                },
                LabModeConfig::Exact => LabMode::Exact {
                    max_paths: conv.max_paths,
                },
            },
            include_gz: conv.include_gz,
            ks_sample_cap: conv.ks_sample_cap,
        };
        spec.validate()
            .map_err(|e| Error::Config(format!("convergence: {e}")))?;
        Ok(Some(spec))
    }

    /// Full validation with field-path error messages.
    pub fn validate(&self) -> Result<()> {
        let setup = self.model_setup()?;
        let caplet = self.caplet_spec();
        caplet
            .validate(setup.tenor.n())
            .map_err(|e| Error::Config(format!("pricing: {e}")))?;
        if self.pricing.paths == 0 {
            return Err(Error::Config("pricing.paths: must be >= 1".into()));
        }
        match self.pricing.model {
            ModelChoice::BernoulliExact if !setup.driver.is_atomic() => {
                return Err(Error::Config(
                    "pricing.model: bernoulli-exact needs an atomic driver block".into(),
                ));
            }
            ModelChoice::LognormalMc if setup.driver.is_atomic() => {
                return Err(Error::Config(
                    "pricing.model: lognormal-mc needs a gaussian driver block".into(),
                ));
            }
            _ => {}
        }
        self.convergence_spec()?;
        Ok(())
    }
}
