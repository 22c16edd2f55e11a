//! Joint evolution of the LIBOR vector under the terminal measure.
//!
//! A single driving increment moves every live rate at each grid step. The
//! drifts for a step are computed backward (`j = n, n-1, ...`) from the
//! state at the previous grid time, before the increment is seen; the rates
//! are then multiplied by `exp(lambda_{ij} (x + b_j))`. Rates past their
//! fixing date are frozen. Two algebraically identical steppers are kept:
//! the exponential form and the difference form `L += L (e^{...} - 1)`.

use rayon::prelude::*;

use crate::curve::{ell, MarketCurve};
use crate::drift::{drift, CompensatorContext, CompensatorFactor};
use crate::driver::{path_stream, DriverSpec};
use crate::error::{Error, Result};
use crate::measure::MeasureLedger;
use crate::tenor::TenorStructure;
use crate::util::kahan_sum;
use crate::vol::VolSurface;

/// Default cap on exact-tree enumeration.
pub const DEFAULT_TREE_PATH_LIMIT: usize = 1 << 16;

/// Which algebraic form advances the rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stepper {
    /// `L_new = L * exp(lambda (x + b))`
    Exponential,
    /// `L_new = L + L * (exp(lambda (x + b)) - 1)`
    Difference,
}

/// The live rates, density ledger and drift record at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    /// Grid step index `i` (0 at time zero).
    pub step: usize,
    /// `L(t_i, T_j)` at index `j - 1`; dead rates hold their fixing values.
    pub rates: Vec<f64>,
    /// Accumulated forward-price ratios since time zero.
    pub ledger: MeasureLedger,
    /// Drifts `b_j` applied on the step into this state (`None` for rates
    /// that were already dead, and at step 0).
    pub drifts: Vec<Option<f64>>,
}

impl ModelState {
    /// `L(t_step, T_j)`, `j = 1..=n`.
    pub fn rate(&self, j: usize) -> f64 {
        self.rates[j - 1]
    }
}

/// Drifts for one upcoming grid step, for rates `first_live..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDrifts {
    step: usize,
    first_live: usize,
    values: Vec<f64>,
}

impl StepDrifts {
    /// The grid step these drifts were computed for.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn first_live(&self) -> usize {
        self.first_live
    }

    /// `b_j` if rate `j` is covered.
    pub fn get(&self, j: usize) -> Option<f64> {
        if j < self.first_live || self.first_live + self.values.len() <= j {
            return None;
        }
        Some(self.values[j - self.first_live])
    }
}

/// How a [`PathEnsemble`] was produced and how its weights read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleKind {
    /// All paths of an atomic driver; weights are exact path probabilities.
    ExactTree,
    /// Monte Carlo draws; every weight is `1 / n_paths`.
    MonteCarlo { n_paths: usize, seed: u64 },
}

/// One realized path: its weight and the recorded states.
///
/// Tree enumeration records the full trajectory (step `0..=horizon`); Monte
/// Carlo paths record only the horizon state, which is all a terminal payoff
/// needs, to keep half a million paths affordable.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub weight: f64,
    pub states: Vec<ModelState>,
}

impl PathRecord {
    pub fn state_at(&self, step: usize) -> Option<&ModelState> {
        self.states.iter().find(|s| s.step == step)
    }

    pub fn last_state(&self) -> &ModelState {
        self.states.last().expect("paths record at least one state")
    }
}

/// A weighted family of paths over the terminal sigma-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub kind: EnsembleKind,
    pub horizon: usize,
    pub paths: Vec<PathRecord>,
}

impl PathEnsemble {
    pub fn is_exact(&self) -> bool {
        matches!(self.kind, EnsembleKind::ExactTree)
    }

    /// Sum of path weights (1 for trees and for Monte Carlo alike).
    pub fn total_weight(&self) -> f64 {
        kahan_sum(self.paths.iter().map(|p| p.weight))
    }
}

/// The discrete LIBOR model: tenor grid, initial curve, vol loadings and the
/// per-step law of the common driving increment.
#[derive(Debug, Clone)]
pub struct LiborModel {
    tenor: TenorStructure,
    curve: MarketCurve,
    vols: VolSurface,
    driver: DriverSpec,
    step_driver: DriverSpec,
}

impl LiborModel {
    /// Assemble and cross-validate the pieces. The configured driver is the
    /// unit-time law; it is rescaled to the grid mesh here (identity on the
    /// reference annual grid). Its exponent bound is set from the vol budget.
    pub fn new(
        tenor: TenorStructure,
        curve: MarketCurve,
        vols: VolSurface,
        driver: DriverSpec,
    ) -> Result<Self> {
        if curve.n() != tenor.n() {
            return Err(Error::Invalid(format!(
                "curve models {} rates but the tenor structure has {}",
                curve.n(),
                tenor.n()
            )));
        }
        if vols.n() != tenor.n() {
            return Err(Error::Invalid(format!(
                "vol surface covers {} rates but the tenor structure has {}",
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
        let bound = 2.0 * vols.lambda_budget();
        let step_driver = driver.scaled(tenor.dt()).with_exponent_bound(bound);
        let driver = driver.with_exponent_bound(bound);
        Ok(Self {
            tenor,
            curve,
            vols,
            driver,
            step_driver,
        })
    }

    pub fn tenor(&self) -> &TenorStructure {
        &self.tenor
    }

    pub fn curve(&self) -> &MarketCurve {
        &self.curve
    }

    pub fn vols(&self) -> &VolSurface {
        &self.vols
    }

    pub fn driver(&self) -> &DriverSpec {
        &self.driver
    }

    /// The driver law actually applied per grid step.
    pub fn step_driver(&self) -> &DriverSpec {
        &self.step_driver
    }

    pub fn initial_state(&self) -> ModelState {
        ModelState {
            step: 0,
            rates: self.curve.libors().to_vec(),
            ledger: MeasureLedger::new(&self.curve),
            drifts: vec![None; self.tenor.n()],
        }
    }

    /// Backward drift recursion for the step out of `state`, entirely from
    /// time-`t_{i-1}` information (the increment is not seen).
    pub fn compute_drifts(&self, state: &ModelState) -> Result<StepDrifts> {
        let i = state.step + 1;
        if i > self.tenor.grid_steps() {
            return Err(Error::Sequencing(format!(
                "state is already at the final grid step {}",
                state.step
            )));
        }
        let n = self.tenor.n();
        let first_live = self.tenor.first_live(i);
        let delta = self.tenor.delta();

        let mut ells = vec![0.0; n + 1];
        for k in first_live..=n {
            ells[k] = ell(state.rate(k), delta)?;
        }

        let mut values = vec![0.0; n - first_live + 1];
        for j in (first_live..=n).rev() {
            let factors: Vec<CompensatorFactor> = (j + 1..=n)
                .map(|k| CompensatorFactor {
                    ell: ells[k],
                    lambda: self.vols.lambda(i, k),
                    drift: values[k - first_live],
                })
                .collect();
            let ctx = CompensatorContext::new(factors)?;
            values[j - first_live] = drift(&self.step_driver, self.vols.lambda(i, j), &ctx)?;
        }
        Ok(StepDrifts {
            step: i,
            first_live,
            values,
        })
    }

    fn step_with(
        &self,
        state: &ModelState,
        x: f64,
        drifts: &StepDrifts,
        stepper: Stepper,
    ) -> Result<ModelState> {
        let i = state.step + 1;
        if i > self.tenor.grid_steps() {
            return Err(Error::Sequencing(format!(
                "state is already at the final grid step {}",
                state.step
            )));
        }
        if drifts.step != i {
            return Err(Error::Sequencing(format!(
                "drifts were computed for step {} but the state steps into {i}",
                drifts.step
            )));
        }
        let n = self.tenor.n();
        let first_live = self.tenor.first_live(i);
        let mut rates = state.rates.clone();
        let mut ledger = state.ledger.clone();
        let mut used = vec![None; n];
        for j in first_live..=n {
            let b = drifts.get(j).ok_or_else(|| {
                Error::Sequencing(format!("missing drift for live rate {j} at step {i}"))
            })?;
            let lambda = self.vols.lambda(i, j);
            let growth = (lambda * (x + b)).exp();
            let prev = rates[j - 1];
            let next = match stepper {
                Stepper::Exponential => prev * growth,
                Stepper::Difference => prev + prev * (growth - 1.0),
            };
            ledger.update(j, next, prev);
            rates[j - 1] = next;
            used[j - 1] = Some(b);
        }
        Ok(ModelState {
            step: i,
            rates,
            ledger,
            drifts: used,
        })
    }

    /// Advance by the exponential form `L * exp(lambda (x + b))`.
    pub fn step_exponential(
        &self,
        state: &ModelState,
        x: f64,
        drifts: &StepDrifts,
    ) -> Result<ModelState> {
        self.step_with(state, x, drifts, Stepper::Exponential)
    }

    /// Advance by the difference form `L + L (exp(lambda (x + b)) - 1)`;
    /// algebraically identical to the exponential form.
    pub fn step_difference(
        &self,
        state: &ModelState,
        x: f64,
        drifts: &StepDrifts,
    ) -> Result<ModelState> {
        self.step_with(state, x, drifts, Stepper::Difference)
    }

    /// Drift recursion plus one step in a single call.
    pub fn advance(&self, state: &ModelState, x: f64, stepper: Stepper) -> Result<ModelState> {
        let drifts = self.compute_drifts(state)?;
        self.step_with(state, x, &drifts, stepper)
    }

    /// Realized `dP_j/dP_{n+1}` at the state's grid time. Every rate in
    /// `j..=n` must still be alive; `j = n + 1` is the terminal measure.
    pub fn terminal_rn_weight(&self, state: &ModelState, j: usize) -> Result<f64> {
        let n = self.tenor.n();
        if j == 0 || j > n + 1 {
            return Err(Error::Domain(format!(
                "measure index must be in 1..={}, got {j}",
                n + 1
            )));
        }
        if j <= n && !self.tenor.is_alive(j, state.step) {
            return Err(Error::Domain(format!(
                "rate {j} is past its fixing at step {}; its forward measure density is frozen",
                state.step
            )));
        }
        state.ledger.terminal_density(j)
    }

    /// Enumerate every path of an atomic driver up to `horizon` with exact
    /// probabilities and full state trajectories.
    pub fn enumerate_tree(&self, horizon: usize, max_paths: usize) -> Result<PathEnsemble> {
        let atoms = self
            .step_driver
            .atoms()
            .ok_or_else(|| Error::Invalid("tree enumeration needs an atomic driver".into()))?
            .to_vec();
        if horizon == 0 || horizon > self.tenor.grid_steps() {
            return Err(Error::Invalid(format!(
                "tree horizon must be in 1..={}, got {horizon}",
                self.tenor.grid_steps()
            )));
        }
        let count = atoms
            .len()
            .checked_pow(horizon as u32)
            .filter(|&c| c <= max_paths)
            .ok_or_else(|| {
                Error::TooLarge(format!(
                    "tree with {} atoms over {horizon} steps exceeds the {max_paths}-path limit",
                    atoms.len()
                ))
            })?;

        let mut paths = Vec::with_capacity(count);
        let mut trajectory = vec![self.initial_state()];
        self.walk_tree(&atoms, horizon, 1.0, &mut trajectory, &mut paths)?;
        Ok(PathEnsemble {
            kind: EnsembleKind::ExactTree,
            horizon,
            paths,
        })
    }

    fn walk_tree(
        &self,
        atoms: &[crate::driver::Atom],
        horizon: usize,
        prob: f64,
        trajectory: &mut Vec<ModelState>,
        out: &mut Vec<PathRecord>,
    ) -> Result<()> {
        let state = trajectory.last().expect("trajectory starts at time zero");
        if state.step == horizon {
            out.push(PathRecord {
                weight: prob,
                states: trajectory.clone(),
            });
            return Ok(());
        }
        let drifts = self.compute_drifts(state)?;
        for atom in atoms {
            let next = self.step_with(
                trajectory.last().expect("non-empty"),
                atom.value,
                &drifts,
                Stepper::Exponential,
            )?;
            trajectory.push(next);
            self.walk_tree(atoms, horizon, prob * atom.prob, trajectory, out)?;
            trajectory.pop();
        }
        Ok(())
    }

    /// Monte Carlo under the terminal measure: `n_paths` independent paths,
    /// one deterministic substream per path, drift recomputed from each
    /// path's own state at every step (no frozen drift). Records the horizon
    /// state per path.
    pub fn simulate_paths(
        &self,
        horizon: usize,
        n_paths: usize,
        seed: u64,
    ) -> Result<PathEnsemble> {
        if horizon == 0 || horizon > self.tenor.grid_steps() {
            return Err(Error::Invalid(format!(
                "simulation horizon must be in 1..={}, got {horizon}",
                self.tenor.grid_steps()
            )));
        }
        if n_paths == 0 {
            return Err(Error::Invalid("path count must be >= 1".into()));
        }
        let weight = 1.0 / n_paths as f64;
        let paths: Result<Vec<PathRecord>> = (0..n_paths)
            .into_par_iter()
            .map(|idx| {
                let mut rng = path_stream(seed, idx as u64);
                let mut state = self.initial_state();
                for _ in 0..horizon {
                    let x = self.step_driver.sample(&mut rng);
                    state = self.advance(&state, x, Stepper::Exponential)?;
                }
                Ok(PathRecord {
                    weight,
                    states: vec![state],
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driver::Atom;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) const PAPER_CURVE: [f64; 10] = [
        0.0207, 0.023, 0.0262, 0.028, 0.0292, 0.0318, 0.0342, 0.0362, 0.0379, 0.04,
    ];
    pub(crate) const PAPER_VOLS: [f64; 10] =
        [0.34, 0.32, 0.30, 0.28, 0.26, 0.24, 0.22, 0.20, 0.18, 0.16];

    pub(crate) fn paper_model(driver: DriverSpec) -> LiborModel {
        let tenor = TenorStructure::new(11.0, 10, 1).unwrap();
        let curve = MarketCurve::new(PAPER_CURVE.to_vec(), tenor.delta(), 1.0).unwrap();
        let vols = VolSurface::constant_per_rate(&PAPER_VOLS, &tenor).unwrap();
        LiborModel::new(tenor, curve, vols, driver).unwrap()
    }

    fn single_rate_model(l0: f64, lambda: f64) -> LiborModel {
        let tenor = TenorStructure::new(2.0, 1, 1).unwrap();
        let curve = MarketCurve::new(vec![l0], tenor.delta(), 1.0).unwrap();
        let vols = VolSurface::constant_per_rate(&[lambda], &tenor).unwrap();
        LiborModel::new(tenor, curve, vols, DriverSpec::bernoulli()).unwrap()
    }

    #[test]
    fn increment_cancelling_the_drift_leaves_the_rate_unchanged() {
        let model = single_rate_model(0.04, 0.16);
        let state = model.initial_state();
        let drifts = model.compute_drifts(&state).unwrap();
        let b = drifts.get(1).unwrap();
        let next = model.step_exponential(&state, -b, &drifts).unwrap();
        assert_eq!(next.rate(1), 0.04);
    }

    #[test]
    fn equal_loadings_and_drifts_scale_rates_identically() {
        let tenor = TenorStructure::new(3.0, 2, 1).unwrap();
        let curve = MarketCurve::new(vec![0.03, 0.05], 1.0, 1.0).unwrap();
        let vols = VolSurface::constant_per_rate(&[0.2, 0.2], &tenor).unwrap();
        let model = LiborModel::new(tenor, curve, vols, DriverSpec::bernoulli()).unwrap();
        let state = model.initial_state();
        // hand-built drifts with a common b isolate the symmetry
        let drifts = StepDrifts {
            step: 1,
            first_live: 1,
            values: vec![-0.05, -0.05],
        };
        let next = model.step_exponential(&state, 1.0, &drifts).unwrap();
        let f1 = next.rate(1) / state.rate(1);
        let f2 = next.rate(2) / state.rate(2);
        assert_eq!(f1, f2);
    }

    #[test]
    fn first_bernoulli_step_of_terminal_rate_matches_hand_computation() {
        let model = paper_model(DriverSpec::bernoulli());
        let state = model.initial_state();
        let drifts = model.compute_drifts(&state).unwrap();
        // terminal rate has an empty context: b = -ln cosh(0.16)/0.16
        let b = drifts.get(10).unwrap();
        assert_relative_eq!(b, -(0.16f64.cosh().ln()) / 0.16, max_relative = 1e-13);
        let up = model.step_exponential(&state, 1.0, &drifts).unwrap();
        let down = model.step_exponential(&state, -1.0, &drifts).unwrap();
        assert_relative_eq!(
            up.rate(10),
            0.04 * (0.16 * (1.0 + b)).exp(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            down.rate(10),
            0.04 * (0.16 * (-1.0 + b)).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn steppers_agree_on_random_single_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let model = paper_model(DriverSpec::bernoulli());
        for _ in 0..10_000 {
            // a random positive state at a random step
            let i = rng.random_range(0..10usize);
            let mut state = model.initial_state();
            state.step = i;
            for r in state.rates.iter_mut() {
                *r *= (rng.random_range(-0.8..0.8f64)).exp();
            }
            let drifts = model.compute_drifts(&state).unwrap();
            let x = rng.random_range(-2.0..2.0);
            let a = model.step_exponential(&state, x, &drifts).unwrap();
            let b = model.step_difference(&state, x, &drifts).unwrap();
            for j in 1..=10 {
                let (ra, rb) = (a.rate(j), b.rate(j));
                assert!(
                    (ra - rb).abs() <= 1e-15 * ra.abs(),
                    "step {i} rate {j}: {ra} vs {rb}"
                );
            }
        }
    }

    #[test]
    fn stepper_equivalence_composes_along_paths() {
        let model = paper_model(DriverSpec::bernoulli());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut exp_state = model.initial_state();
        let mut diff_state = model.initial_state();
        for _ in 0..10 {
            let x = if rng.random::<bool>() { 1.0 } else { -1.0 };
            exp_state = model.advance(&exp_state, x, Stepper::Exponential).unwrap();
            diff_state = model.advance(&diff_state, x, Stepper::Difference).unwrap();
        }
        for j in 1..=10 {
            assert_relative_eq!(exp_state.rate(j), diff_state.rate(j), max_relative = 1e-13);
        }
    }

    #[test]
    fn tree_shapes_and_probabilities() {
        let model = paper_model(DriverSpec::bernoulli());
        let t1 = model.enumerate_tree(1, DEFAULT_TREE_PATH_LIMIT).unwrap();
        assert_eq!(t1.paths.len(), 2);
        assert!(t1.paths.iter().all(|p| p.weight == 0.5));

        let t5 = model.enumerate_tree(5, DEFAULT_TREE_PATH_LIMIT).unwrap();
        assert_eq!(t5.paths.len(), 32);
        assert!((t5.total_weight() - 1.0).abs() <= 1e-14);

        let three = DriverSpec::atomic(vec![
            Atom {
                value: 1.0,
                prob: 0.3,
            },
            Atom {
                value: 0.0,
                prob: 0.3,
            },
            Atom {
                value: -1.0,
                prob: 0.4,
            },
        ])
        .unwrap();
        let model3 = paper_model(three);
        let t2 = model3.enumerate_tree(2, DEFAULT_TREE_PATH_LIMIT).unwrap();
        assert_eq!(t2.paths.len(), 9);
        assert_relative_eq!(t2.paths[0].weight, 0.09, max_relative = 1e-15);
        assert_relative_eq!(t2.paths[8].weight, 0.16, max_relative = 1e-15);
        assert!((t2.total_weight() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn tree_path_limit_enforced() {
        let model = paper_model(DriverSpec::bernoulli());
        assert!(matches!(
            model.enumerate_tree(5, 16),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn tree_needs_atomic_driver() {
        let model = paper_model(DriverSpec::gaussian(1.0).unwrap());
        assert!(model.enumerate_tree(3, 1024).is_err());
    }

    #[test]
    fn dead_rates_freeze_at_their_fixing() {
        let model = paper_model(DriverSpec::bernoulli());
        let tree = model.enumerate_tree(5, DEFAULT_TREE_PATH_LIMIT).unwrap();
        for path in &tree.paths {
            for j in 1..=4usize {
                let at_fixing = path.state_at(j).unwrap().rate(j);
                for later in j + 1..=5 {
                    assert_eq!(path.state_at(later).unwrap().rate(j), at_fixing);
                }
            }
        }
    }

    #[test]
    fn rates_stay_positive_everywhere() {
        let model = paper_model(DriverSpec::bernoulli());
        let tree = model.enumerate_tree(5, DEFAULT_TREE_PATH_LIMIT).unwrap();
        for path in &tree.paths {
            for state in &path.states {
                assert!(state.rates.iter().all(|&r| r > 0.0));
            }
        }
    }

    /// Def-style martingale checks on the exact tree: for every rate and
    /// every grid time, the reweighted average of the rate equals its time-0
    /// value, and the average density itself is 1.
    #[test]
    fn tree_martingale_and_density_identities() {
        let model = paper_model(DriverSpec::bernoulli());
        let horizon = 5;
        let tree = model
            .enumerate_tree(horizon, DEFAULT_TREE_PATH_LIMIT)
            .unwrap();
        for j in 1..=10usize {
            for i in 1..=horizon.min(model.tenor().fixing_step(j)) {
                let mut weighted_rate = 0.0;
                let mut weighted_density = 0.0;
                for path in &tree.paths {
                    let state = path.state_at(i).unwrap();
                    let w = model.terminal_rn_weight(state, j + 1).unwrap();
                    weighted_rate += path.weight * w * state.rate(j);
                    weighted_density += path.weight * w;
                }
                let l0 = model.curve().libor(j);
                assert!(
                    (weighted_rate - l0 * weighted_density).abs() <= 1e-12 * l0,
                    "martingale violated: j={j} i={i}"
                );
                assert!(
                    (weighted_density - 1.0).abs() <= 1e-12,
                    "density mean violated: j={j} i={i}: {weighted_density}"
                );
            }
        }
    }

    #[test]
    fn rn_weight_edge_cases() {
        let model = paper_model(DriverSpec::bernoulli());
        let state = model.initial_state();
        for j in 1..=11 {
            assert_eq!(model.terminal_rn_weight(&state, j).unwrap(), 1.0);
        }
        // single-rate move reproduces the forward ratio
        let single = single_rate_model(0.04, 0.2);
        let mut s = single.initial_state();
        s.rates[0] = 0.05;
        s.ledger.update(1, 0.05, 0.04);
        assert_relative_eq!(
            single.terminal_rn_weight(&s, 1).unwrap(),
            1.05 / 1.04,
            max_relative = 1e-15
        );
        // dead rate rejected
        let tree = model.enumerate_tree(3, DEFAULT_TREE_PATH_LIMIT).unwrap();
        let state = tree.paths[0].state_at(3).unwrap();
        assert!(model.terminal_rn_weight(state, 2).is_err());
        assert!(model.terminal_rn_weight(state, 12).is_err());
    }

    #[test]
    fn same_seed_reproduces_ensembles() {
        let model = paper_model(DriverSpec::gaussian(1.0).unwrap());
        let a = model.simulate_paths(5, 64, 99).unwrap();
        let b = model.simulate_paths(5, 64, 99).unwrap();
        assert_eq!(a, b);
        let c = model.simulate_paths(5, 64, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn single_path_has_unit_weight() {
        let model = paper_model(DriverSpec::bernoulli());
        let e = model.simulate_paths(5, 1, 7).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert_eq!(e.paths[0].weight, 1.0);
        assert_eq!(e.paths[0].last_state().step, 5);
    }

    #[test]
    fn sequencing_errors_are_caught() {
        let model = paper_model(DriverSpec::bernoulli());
        let state = model.initial_state();
        let drifts = model.compute_drifts(&state).unwrap();
        let next = model.step_exponential(&state, 1.0, &drifts).unwrap();
        // stale drifts for the next step
        assert!(matches!(
            model.step_exponential(&next, 1.0, &drifts),
            Err(Error::Sequencing(_))
        ));
        // drifts missing a live rate
        let partial = StepDrifts {
            step: 1,
            first_live: 2,
            values: vec![0.0; 9],
        };
        assert!(matches!(
            model.step_exponential(&state, 1.0, &partial),
            Err(Error::Sequencing(_))
        ));
        // stepping past the horizon
        let mut done = model.initial_state();
        done.step = 11;
        assert!(model.compute_drifts(&done).is_err());
    }
}
