//! Grid-refinement experiments against the lognormal limit.
//!
//! The benchmark contract is a caplet on the last rate `L(T_n, T_n)`, priced
//! under the terminal measure — its own forward measure, so no reweighting
//! enters and its drift carries an empty compensator context. That makes the
//! refinement error isolate cleanly: the per-step drift is exact at every
//! mesh, the increments sum to the same total variance at every mesh, and
//! what remains is the distributional gap between the scaled driver sum and
//! the Brownian limit. With Gaussian increments the discrete rate is exactly
//! lognormal at every level and the Black-76 benchmark is reproduced up to
//! Monte Carlo noise; with Bernoulli increments (`+-sqrt(dt)`) the gap closes
//! as the mesh refines.
//!
//! Consistency with the full joint model is pinned by a test: at `p = 1`,
//! with the same seed, the lab's price equals the joint simulation's caplet
//! price.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, LogNormal};

use crate::black::black_caplet;
use crate::curve::MarketCurve;
use crate::drift::{drift, CompensatorContext};
use crate::driver::{path_stream, DriverSpec};
use crate::error::{Error, Result};
use crate::tenor::TenorStructure;
use crate::util::kahan_sum;

/// How each refinement level is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabMode {
    /// Enumerate every atomic path (refused beyond `max_paths`).
    Exact { max_paths: usize },
    /// Monte Carlo with `n_paths` paths per seed.
    MonteCarlo { n_paths: usize },
}

/// One refinement experiment: levels, driver family, constant limit loading
/// for the terminal rate, strike, and evaluation protocol.
#[derive(Debug, Clone)]
pub struct ConvergenceSpec {
    /// Sub-steps per accrual period, e.g. `[4, 16, 64]`.
    pub levels: Vec<usize>,
    /// Unit-time driving law; each level uses it rescaled to its mesh.
    pub driver: DriverSpec,
    /// Constant limit vol `lambda(., T_n)`; each level samples it pointwise.
    pub lambda: f64,
    /// Strike as a multiple of `L(0, T_n)`.
    pub strike_mult: f64,
    /// Master seeds; each produces an independent Monte Carlo estimate.
    pub seeds: Vec<u64>,
    pub mode: LabMode,
    /// Also run the deflated-bond scheme (exactly lognormal for the terminal
    /// rate, so it doubles as a control). Monte Carlo mode only.
    pub include_gz: bool,
    /// At most this many terminal-rate draws enter the KS statistic.
    pub ks_sample_cap: usize,
}

impl ConvergenceSpec {
    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Invalid(
                "convergence run needs at least one level".into(),
            ));
        }
        if self.levels.iter().any(|&p| p == 0) {
            return Err(Error::Invalid("refinement levels must be >= 1".into()));
        }
        if self.lambda <= 0.0 || !self.lambda.is_finite() {
            return Err(Error::Invalid(format!(
                "limit vol must be > 0, got {}",
                self.lambda
            )));
        }
        if self.strike_mult <= 0.0 || !self.strike_mult.is_finite() {
            return Err(Error::Invalid(format!(
                "strike multiplier must be > 0, got {}",
                self.strike_mult
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Invalid(
                "convergence run needs at least one seed".into(),
            ));
        }
        if let LabMode::MonteCarlo { n_paths } = self.mode {
            if n_paths == 0 {
                return Err(Error::Invalid("path count must be >= 1".into()));
            }
        }
        Ok(())
    }
}

/// One evaluated (level, model, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub model: String,
    pub seed: u64,
    pub price: f64,
    pub std_err: f64,
    pub benchmark: f64,
    pub rel_error: f64,
    pub ks_stat: f64,
}

/// Kolmogorov-Smirnov sup-distance between the empirical law of `sample` and
/// a lognormal with the given log-space mean and standard deviation.
pub fn ks_distance(sample: &[f64], log_mean: f64, log_sd: f64) -> Result<f64> {
    let weights = vec![1.0 / sample.len().max(1) as f64; sample.len()];
    ks_distance_weighted(sample, &weights, log_mean, log_sd)
}

/// Weighted variant for exact enumerations (atoms carry path probabilities).
pub fn ks_distance_weighted(
    values: &[f64],
    weights: &[f64],
    log_mean: f64,
    log_sd: f64,
) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Invalid(
            "KS distance needs a non-empty sample".into(),
        ));
    }
    if values.len() != weights.len() {
        return Err(Error::Invalid(
            "KS distance needs one weight per value".into(),
        ));
    }
    let dist = LogNormal::new(log_mean, log_sd)
        .map_err(|e| Error::Domain(format!("bad lognormal benchmark: {e}")))?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite sample"));
    let mut cum = 0.0;
    let mut sup: f64 = 0.0;
    for idx in order {
        let f = dist.cdf(values[idx]);
        sup = sup.max((f - cum).abs());
        cum += weights[idx];
        sup = sup.max((f - cum).abs());
    }
    Ok(sup)
}

fn analogue_name(driver: &DriverSpec) -> &'static str {
    if driver.is_atomic() {
        "bernoulli-analogue"
    } else {
        "gaussian-analogue"
    }
}

/// Per-step growth engines for the terminal rate.
enum TerminalScheme<'a> {
    /// `L *= exp(lambda (x + b))`, atom growths tabulated per step. Draws
    /// consume the stream exactly like [`DriverSpec::sample`], so results
    /// match the joint model bit for bit.
    AtomicAnalogue { probs: Vec<f64>, growths: Vec<f64> },
    /// `L *= exp(lambda (x + b))` with `x` drawn from the scaled driver.
    GaussianAnalogue {
        step_driver: &'a DriverSpec,
        lambda: f64,
        drift: f64,
    },
    /// Deflated-bond update `L *= exp(-lambda^2 dt / 2 + lambda y)`.
    Gz { lambda: f64, dt: f64 },
}

impl<'a> TerminalScheme<'a> {
    fn analogue(step_driver: &'a DriverSpec, lambda: f64, drift: f64) -> Self {
        match step_driver.atoms() {
            Some(atoms) => TerminalScheme::AtomicAnalogue {
                probs: atoms.iter().map(|a| a.prob).collect(),
                growths: atoms
                    .iter()
                    .map(|a| (lambda * (a.value + drift)).exp())
                    .collect(),
            },
            None => TerminalScheme::GaussianAnalogue {
                step_driver,
                lambda,
                drift,
            },
        }
    }

    fn grow(&self, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        match self {
            TerminalScheme::AtomicAnalogue { probs, growths } => {
                let u: f64 = rand::Rng::random(rng);
                let mut acc = 0.0;
                for (i, &p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return growths[i];
                    }
                }
                *growths.last().expect("validated non-empty")
            }
            TerminalScheme::GaussianAnalogue {
                step_driver,
                lambda,
                drift,
            } => {
                let x = step_driver.sample(rng);
                (lambda * (x + drift)).exp()
            }
            TerminalScheme::Gz { lambda, dt } => {
                let y = rand_distr::Distribution::sample(
                    &rand_distr::Normal::new(0.0, dt.sqrt()).expect("positive mesh"),
                    rng,
                );
                (-0.5 * lambda * lambda * dt + lambda * y).exp()
            }
        }
    }
}

/// Run the refinement table for the terminal-rate caplet.
///
/// Returns one row per (level, model, seed) in Monte Carlo mode and one row
/// per (level, model) in exact mode. All rows share the Black-76 benchmark
/// with total variance `lambda^2 * T_n`.
pub fn refine_experiment(
    t_star: f64,
    n: usize,
    curve: &MarketCurve,
    spec: &ConvergenceSpec,
) -> Result<Vec<ConvergenceRow>> {
    spec.validate()?;
    if curve.n() != n {
        return Err(Error::Invalid(format!(
            "curve models {} rates but the experiment asks for {n}",
            curve.n()
        )));
    }
    let forward = curve.libor(n);
    let discount = curve.bond(n + 1);
    let base_delta = t_star / (n + 1) as f64;
    if (curve.delta() - base_delta).abs() > 1e-12 * base_delta {
        return Err(Error::Invalid(format!(
            "curve accrual {} does not match T*/(n+1) = {base_delta}",
            curve.delta()
        )));
    }
    let expiry = t_star * n as f64 / (n + 1) as f64; // T_n
    let strike = spec.strike_mult * forward;
    let benchmark = black_caplet(forward, strike, spec.lambda, expiry, discount, base_delta)?;
    let total_var = spec.lambda * spec.lambda * expiry;
    let log_mean = forward.ln() - 0.5 * total_var;
    let log_sd = total_var.sqrt();

    let mut rows = Vec::new();
    for &p in &spec.levels {
        let tenor = TenorStructure::new(t_star, n, p)?;
        let dt = tenor.dt();
        let steps = tenor.fixing_step(n);
        let step_driver = spec.driver.scaled(dt);
        let b = drift(&step_driver, spec.lambda, &CompensatorContext::empty())?;

        match spec.mode {
            LabMode::Exact { max_paths } => {
                let row = exact_level(
                    &step_driver,
                    spec,
                    p,
                    steps,
                    b,
                    forward,
                    strike,
                    discount,
                    base_delta,
                    benchmark,
                    log_mean,
                    log_sd,
                    max_paths,
                )?;
                rows.push(row);
            }
            LabMode::MonteCarlo { n_paths } => {
                let mut schemes: Vec<(String, TerminalScheme)> = vec![(
                    analogue_name(&spec.driver).to_string(),
                    TerminalScheme::analogue(&step_driver, spec.lambda, b),
                )];
                if spec.include_gz {
                    schemes.push((
                        "gz".to_string(),
                        TerminalScheme::Gz {
                            lambda: spec.lambda,
                            dt,
                        },
                    ));
                }
                for (name, scheme) in &schemes {
                    for &seed in &spec.seeds {
                        let rates: Vec<f64> = (0..n_paths)
                            .into_par_iter()
                            .map(|idx| {
                                let mut rng = path_stream(seed, idx as u64);
                                let mut rate = forward;
                                for _ in 0..steps {
                                    rate *= scheme.grow(&mut rng);
                                }
                                rate
                            })
                            .collect();
                        let w = 1.0 / n_paths as f64;
                        let mean = kahan_sum(rates.iter().map(|&r| w * (r - strike).max(0.0)));
                        let price = discount * base_delta * mean;
                        let sum_sq =
                            kahan_sum(rates.iter().map(|&r| (r - strike).max(0.0)).map(|v| v * v));
                        let nf = n_paths as f64;
                        let var = ((sum_sq - nf * mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
                        let std_err = discount * base_delta * (var / nf).sqrt();
                        let ks_len = spec.ks_sample_cap.min(rates.len()).max(1);
                        let ks_stat = ks_distance(&rates[..ks_len], log_mean, log_sd)?;
                        rows.push(ConvergenceRow {
                            level: p,
                            model: name.clone(),
                            seed,
                            price,
                            std_err,
                            benchmark,
                            rel_error: (price - benchmark) / benchmark,
                            ks_stat,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

#[allow(clippy::too_many_arguments)]
fn exact_level(
    step_driver: &DriverSpec,
    spec: &ConvergenceSpec,
    p: usize,
    steps: usize,
    b: f64,
    forward: f64,
    strike: f64,
    discount: f64,
    delta: f64,
    benchmark: f64,
    log_mean: f64,
    log_sd: f64,
    max_paths: usize,
) -> Result<ConvergenceRow> {
    let atoms = step_driver
        .atoms()
        .ok_or_else(|| Error::Invalid("exact mode needs an atomic driver".into()))?;
    let count = atoms
        .len()
        .checked_pow(steps as u32)
        .filter(|&c| c <= max_paths)
        .ok_or_else(|| {
            Error::TooLarge(format!(
                "exact mode refused: {}^{steps} paths exceed the {max_paths}-path limit",
                atoms.len()
            ))
        })?;
    let growth: Vec<f64> = atoms
        .iter()
        .map(|a| (spec.lambda * (a.value + b)).exp())
        .collect();

    let mut values = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for path in 0..count {
        let mut rate = forward;
        let mut prob = 1.0;
        let mut digits = path;
        for _ in 0..steps {
            let a = digits % atoms.len();
            digits /= atoms.len();
            rate *= growth[a];
            prob *= atoms[a].prob;
        }
        values.push(rate);
        weights.push(prob);
    }
    let mean = kahan_sum(
        values
            .iter()
            .zip(&weights)
            .map(|(&r, &w)| w * (r - strike).max(0.0)),
    );
    let price = discount * delta * mean;
    let ks_stat = ks_distance_weighted(&values, &weights, log_mean, log_sd)?;
    Ok(ConvergenceRow {
        level: p,
        model: format!("{}-exact", analogue_name(&spec.driver)),
        seed: 0,
        price,
        std_err: 0.0,
        benchmark,
        rel_error: (price - benchmark) / benchmark,
        ks_stat,
    })
}
