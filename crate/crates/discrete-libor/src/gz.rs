//! The deflated bond-difference discretization used as the reference scheme.
//!
//! State variables `W_j` (deflated bond differences) evolve lognormally with
//! state-dependent loadings
//!
//! ```text
//! sigma_j(i) = lambda_{ij} + sum_{k=j+1..n} W_k lambda_{ik} / (1 + W_k + ... + W_n),
//! W_j(i)     = W_j(i-1) * exp(-sigma_j^2(i) dt / 2 + sigma_j(i) Y_i),
//! ```
//!
//! with a single standard normal `Y_i` (variance `dt`) per step, evaluated
//! predictably from the previous step's `W`. Rates are read back through
//! `L(t_i, T_j) = W_j / (delta (1 + W_{j+1} + ... + W_n))`; the terminal rate
//! is `W_n` itself (up to `delta`), already a martingale under the terminal
//! measure. Every `W_j` is a terminal-measure martingale by construction, so
//! the scheme is arbitrage-free at the discrete level.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::curve::MarketCurve;
use crate::driver::path_stream;
use crate::error::{Error, Result};
use crate::measure::MeasureLedger;
use crate::model::{EnsembleKind, ModelState, PathEnsemble, PathRecord};
use crate::tenor::TenorStructure;
use crate::vol::VolSurface;

/// Deflated-variable state along one path. Rates that have fixed keep their
/// recorded fixing value; the live ones are implied by the current `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct GzState {
    pub step: usize,
    /// `W_j` at index `j - 1`; frozen once rate `j` is past its fixing.
    pub w: Vec<f64>,
    /// `L(T_j, T_j)` recorded when rate `j` fixed.
    pub fixings: Vec<Option<f64>>,
}

/// Invert the curve into time-zero deflated variables:
/// `W_n = delta L_n`, then backward `W_j = delta L_j (1 + W_{j+1} + ... + W_n)`.
pub fn gz_init(curve: &MarketCurve) -> Vec<f64> {
    let n = curve.n();
    let delta = curve.delta();
    let mut w = vec![0.0; n];
    let mut suffix = 0.0;
    for j in (1..=n).rev() {
        w[j - 1] = delta * curve.libor(j) * (1.0 + suffix);
        suffix += w[j - 1];
    }
    w
}

/// The loadings `sigma_j` for one step, from the previous step's `W` row.
/// Pure so it can be exercised with arbitrary loading rows (a zero row gives
/// zero loadings and a frozen state).
pub fn gz_sigmas(w: &[f64], lambda_row: &[f64]) -> Vec<f64> {
    let n = w.len();
    // suffix[j-1] = W_j + ... + W_n
    let mut suffix = vec![0.0; n + 1];
    for j in (1..=n).rev() {
        suffix[j - 1] = suffix[j] + w[j - 1];
    }
    // tail[j-1] = sum_{k > j} W_k lambda_k / (1 + W_k + ... + W_n)
    let mut sigmas = vec![0.0; n];
    let mut tail = 0.0;
    for j in (1..=n).rev() {
        sigmas[j - 1] = lambda_row[j - 1] + tail;
        tail += w[j - 1] * lambda_row[j - 1] / (1.0 + suffix[j - 1]);
    }
    sigmas
}

#[derive(Debug, Clone)]
pub struct GzModel {
    tenor: TenorStructure,
    curve: MarketCurve,
    vols: VolSurface,
}

impl GzModel {
    pub fn new(tenor: TenorStructure, curve: MarketCurve, vols: VolSurface) -> Result<Self> {
        if curve.n() != tenor.n() || vols.n() != tenor.n() {
            return Err(Error::Invalid(format!(
                "curve ({} rates) and vol surface ({} rates) must match the tenor structure ({})",
                curve.n(),
                vols.n(),
                tenor.n()
            )));
        }
        let delta = tenor.delta();
        if (curve.delta() - delta).abs() > 1e-12 * delta {
            return Err(Error::Invalid(format!(
                "curve accrual {} does not match tenor accrual {delta}",
                curve.delta()
            )));
        }
        Ok(Self { tenor, curve, vols })
    }

    pub fn tenor(&self) -> &TenorStructure {
        &self.tenor
    }

    pub fn curve(&self) -> &MarketCurve {
        &self.curve
    }

    pub fn initial_state(&self) -> GzState {
        GzState {
            step: 0,
            w: gz_init(&self.curve),
            fixings: vec![None; self.curve.n()],
        }
    }

    /// The rate implied by a state: the recorded fixing for dead rates,
    /// otherwise `W_j / (delta (1 + W_{j+1} + ... + W_n))`.
    pub fn rate(&self, state: &GzState, j: usize) -> f64 {
        if let Some(fixed) = state.fixings[j - 1] {
            return fixed;
        }
        let tail: f64 = state.w[j..].iter().sum();
        state.w[j - 1] / (self.tenor.delta() * (1.0 + tail))
    }

    /// One step with increment `y` (a centered normal with variance `dt`).
    /// Loadings are evaluated from the pre-step `W`; dead variables stay put;
    /// a rate fixing at the new step records its value.
    pub fn step(&self, state: &GzState, y: f64) -> Result<GzState> {
        let i = state.step + 1;
        if i > self.tenor.grid_steps() {
            return Err(Error::Sequencing(format!(
                "state is already at the final grid step {}",
                state.step
            )));
        }
        let n = self.tenor.n();
        let dt = self.tenor.dt();
        let first_live = self.tenor.first_live(i);
        let sigmas = gz_sigmas(&state.w, self.vols.row(i));
        let mut w = state.w.clone();
        for j in first_live..=n {
            let s = sigmas[j - 1];
            w[j - 1] *= (-0.5 * s * s * dt + s * y).exp();
        }
        let mut next = GzState {
            step: i,
            w,
            fixings: state.fixings.clone(),
        };
        if i % self.tenor.p() == 0 {
            let j = i / self.tenor.p();
            if j <= n {
                next.fixings[j - 1] = Some(self.rate(&next, j));
            }
        }
        Ok(next)
    }

    /// Re-express a state in the common `ModelState` form so the pricing
    /// layer can treat the scheme like any other ensemble: rates read off
    /// the `W`, ledger ratios rebuilt from the rate levels.
    pub fn to_model_state(&self, state: &GzState) -> ModelState {
        let n = self.tenor.n();
        let delta = self.tenor.delta();
        let mut ledger = MeasureLedger::new(&self.curve);
        let mut rates = vec![0.0; n];
        for j in 1..=n {
            let rate = self.rate(state, j);
            rates[j - 1] = rate;
            ledger.set_ratio(
                j,
                (1.0 + delta * rate) / (1.0 + delta * self.curve.libor(j)),
            );
        }
        ModelState {
            step: state.step,
            rates,
            ledger,
            drifts: vec![None; n],
        }
    }

    /// Monte Carlo ensemble of horizon states, one standard-normal increment
    /// per step per path, per-path deterministic substreams.
    pub fn simulate(&self, horizon: usize, n_paths: usize, seed: u64) -> Result<PathEnsemble> {
        if horizon == 0 || horizon > self.tenor.grid_steps() {
            return Err(Error::Invalid(format!(
                "simulation horizon must be in 1..={}, got {horizon}",
                self.tenor.grid_steps()
            )));
        }
        if n_paths == 0 {
            return Err(Error::Invalid("path count must be >= 1".into()));
        }
        let normal = Normal::new(0.0, self.tenor.dt().sqrt()).expect("positive mesh");
        let weight = 1.0 / n_paths as f64;
        let paths: Result<Vec<PathRecord>> = (0..n_paths)
            .into_par_iter()
            .map(|idx| {
                let mut rng = path_stream(seed, idx as u64);
                let mut state = self.initial_state();
                for _ in 0..horizon {
                    let y = normal.sample(&mut rng);
                    state = self.step(&state, y)?;
                }
                Ok(PathRecord {
                    weight,
                    states: vec![self.to_model_state(&state)],
                })
            })
            .collect();
        Ok(PathEnsemble {
            kind: EnsembleKind::MonteCarlo { n_paths, seed },
            horizon,
            paths: paths?,
        })
    }
}
