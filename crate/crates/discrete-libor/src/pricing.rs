//! Caplet valuation on path ensembles and smile construction.
//!
//! Everything is priced under the terminal measure: the forward-measure
//! expectation a caplet needs is produced by reweighting each path with the
//! realized density `dP_{j*+1}/dP_{n+1}` at the fixing time, so one ensemble
//! serves every strike.

use serde::{Deserialize, Serialize};

use crate::black::implied_vol;
use crate::curve::MarketCurve;
use crate::driver::DriverSpec;
use crate::error::{Error, Result};
use crate::gz::GzModel;
use crate::model::{EnsembleKind, LiborModel, PathEnsemble};
use crate::tenor::TenorStructure;
use crate::util::kahan_sum;
use crate::vol::VolSurface;

/// A forward caplet: the rate fixing at `T_{j*}`, paid at `T_{j*+1}`, struck
/// at moneyness multiples of the rate's time-zero value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapletSpec {
    /// Fixing rate index `j*` (1-based).
    pub fixing_index: usize,
    /// Strike multipliers; the strike for multiplier `K` is `K * L(0, T_j*)`.
    pub strike_mults: Vec<f64>,
}

impl CapletSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.fixing_index == 0 || self.fixing_index > n {
            return Err(Error::Invalid(format!(
                "caplet fixing index must be in 1..={n}, got {}",
                self.fixing_index
            )));
        }
        if self.strike_mults.is_empty() {
            return Err(Error::Invalid(
                "caplet needs at least one strike multiplier".into(),
            ));
        }
        for &k in &self.strike_mults {
            if k <= 0.0 || !k.is_finite() {
                return Err(Error::Invalid(format!(
                    "strike multipliers must be > 0, got {k}"
                )));
            }
        }
        Ok(())
    }

    /// Payment tenor index `j* + 1`.
    pub fn payment_index(&self) -> usize {
        self.fixing_index + 1
    }
}

/// One point of a volatility smile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmilePoint {
    pub strike_mult: f64,
    pub price: f64,
    /// `None` when the price sits on the no-arbitrage boundary (e.g. an exact
    /// tree whose every path finishes out of the money); such points are
    /// reported rather than clamped.
    pub implied_vol: Option<f64>,
    /// Monte Carlo standard error of the price; 0 for exact trees.
    pub std_err: f64,
}

/// Price one caplet strike on an ensemble.
///
/// `price = B(0, T_{j*+1}) * delta * E[ max(L(T_j*, T_j*) - K L(0, T_j*), 0)
/// * dP_{j*+1}/dP_{n+1}(T_j*) ]`, the expectation running over path weights.
/// `strike_mult = 0` is allowed here and must reproduce the discounted
/// forward leg by the martingale property.
pub fn caplet_price(
    ensemble: &PathEnsemble,
    tenor: &TenorStructure,
    curve: &MarketCurve,
    fixing_index: usize,
    strike_mult: f64,
) -> Result<(f64, f64)> {
    let n = tenor.n();
    if fixing_index == 0 || fixing_index > n {
        return Err(Error::Invalid(format!(
            "caplet fixing index must be in 1..={n}, got {fixing_index}"
        )));
    }
    if strike_mult < 0.0 || !strike_mult.is_finite() {
        return Err(Error::Invalid(format!(
            "strike multiplier must be >= 0, got {strike_mult}"
        )));
    }
    let fixing_step = tenor.fixing_step(fixing_index);
    if ensemble.horizon < fixing_step {
        return Err(Error::HorizonTooShort {
            needed: fixing_step,
            available: ensemble.horizon,
        });
    }
    let payment = fixing_index + 1;
    let strike = strike_mult * curve.libor(fixing_index);
    let discount = curve.bond(payment);
    let delta = tenor.delta();

    let mut weighted = Vec::with_capacity(ensemble.paths.len());
    for path in &ensemble.paths {
        let state = path.state_at(fixing_step).ok_or(Error::HorizonTooShort {
            needed: fixing_step,
            available: ensemble.horizon,
        })?;
        let density = state.ledger.terminal_density(payment)?;
        let payoff = (state.rate(fixing_index) - strike).max(0.0) * density;
        weighted.push((path.weight, payoff));
    }

    let mean = kahan_sum(weighted.iter().map(|&(w, v)| w * v));
    let price = discount * delta * mean;
    let std_err = match ensemble.kind {
        EnsembleKind::ExactTree => 0.0,
        EnsembleKind::MonteCarlo { n_paths, .. } => {
            let n = n_paths as f64;
            let sum_sq = kahan_sum(weighted.iter().map(|&(_, v)| v * v));
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            discount * delta * (var / n).sqrt()
        }
    };
    Ok((price, std_err))
}

/// Which model produces the ensemble behind a smile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    /// Exact enumeration of an atomic driver.
    BernoulliExact,
    /// Monte Carlo of the Gaussian-driven discrete analogue.
    LognormalMc,
    /// Monte Carlo of the deflated bond-difference scheme.
    GzMc,
}

impl ModelChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelChoice::BernoulliExact => "bernoulli-exact",
            ModelChoice::LognormalMc => "lognormal-mc",
            ModelChoice::GzMc => "gz-mc",
        }
    }
}

impl std::fmt::Display for ModelChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli-exact" => Ok(ModelChoice::BernoulliExact),
            "lognormal-mc" => Ok(ModelChoice::LognormalMc),
            "gz-mc" => Ok(ModelChoice::GzMc),
            other => Err(Error::Config(format!(
                "unknown model '{other}' (expected bernoulli-exact, lognormal-mc or gz-mc)"
            ))),
        }
    }
}

/// Market inputs shared by every model.
#[derive(Debug, Clone)]
pub struct ModelSetup {
    pub tenor: TenorStructure,
    pub curve: MarketCurve,
    pub vols: VolSurface,
    pub driver: DriverSpec,
}

/// Monte Carlo run parameters.
#[derive(Debug, Clone, Copy)]
pub struct McParams {
    pub n_paths: usize,
    pub seed: u64,
}

/// Build the path ensemble a model choice implies, out to `horizon`.
pub fn build_ensemble(
    setup: &ModelSetup,
    choice: ModelChoice,
    horizon: usize,
    mc: McParams,
    tree_path_limit: usize,
) -> Result<PathEnsemble> {
    match choice {
        ModelChoice::BernoulliExact => {
            if !setup.driver.is_atomic() {
                return Err(Error::Invalid(
                    "bernoulli-exact pricing needs an atomic driver".into(),
                ));
            }
            let model = LiborModel::new(
                setup.tenor.clone(),
                setup.curve.clone(),
                setup.vols.clone(),
                setup.driver.clone(),
            )?;
            model.enumerate_tree(horizon, tree_path_limit)
        }
        ModelChoice::LognormalMc => {
            if setup.driver.is_atomic() {
                return Err(Error::Invalid(
                    "lognormal-mc pricing needs a gaussian driver".into(),
                ));
            }
            let model = LiborModel::new(
                setup.tenor.clone(),
                setup.curve.clone(),
                setup.vols.clone(),
                setup.driver.clone(),
            )?;
            model.simulate_paths(horizon, mc.n_paths, mc.seed)
        }
        ModelChoice::GzMc => {
            let model = GzModel::new(setup.tenor.clone(), setup.curve.clone(), setup.vols.clone())?;
            model.simulate(horizon, mc.n_paths, mc.seed)
        }
    }
}

/// Price the full strike grid on one ensemble and invert each point.
///
/// Points whose price does not admit a Black vol (boundary prices) carry
/// `implied_vol: None`; genuine errors propagate.
pub fn build_smile(
    setup: &ModelSetup,
    choice: ModelChoice,
    caplet: &CapletSpec,
    mc: McParams,
    tree_path_limit: usize,
) -> Result<Vec<SmilePoint>> {
    caplet.validate(setup.tenor.n())?;
    let fixing_step = setup.tenor.fixing_step(caplet.fixing_index);
    let ensemble = build_ensemble(setup, choice, fixing_step, mc, tree_path_limit)?;

    let forward = setup.curve.libor(caplet.fixing_index);
    let expiry = setup.tenor.tenor_date(caplet.fixing_index);
    let discount = setup.curve.bond(caplet.payment_index());
    let delta = setup.tenor.delta();

    let mut mults = caplet.strike_mults.clone();
    mults.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));

    let mut points = Vec::with_capacity(mults.len());
    for k in mults {
        let (price, std_err) = caplet_price(
            &ensemble,
            &setup.tenor,
            &setup.curve,
            caplet.fixing_index,
            k,
        )?;
        let iv = match implied_vol(price, forward, k * forward, expiry, discount, delta) {
            Ok(v) => Some(v),
            Err(Error::NoImpliedVol(_)) => None,
            Err(other) => return Err(other),
        };
        points.push(SmilePoint {
            strike_mult: k,
            price,
            implied_vol: iv,
            std_err,
        });
    }
    Ok(points)
}
