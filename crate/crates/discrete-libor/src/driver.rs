//! Per-step laws of the driving increments under the terminal measure.
//!
//! Two families are supported: atomic laws (finitely many values with
//! probabilities, e.g. the symmetric Bernoulli pair) and centered Gaussians.
//! Both have exponential moments of every order, which is what the drift
//! computation needs; a configurable exponent bound makes the integrability
//! requirement explicit and testable.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Probability-sum slack accepted when validating atomic laws.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// One atom of a discrete driving law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DriverKind {
    /// Finitely many values `x_a` with probabilities `p_a`.
    Atomic(Vec<Atom>),
    /// Centered normal with the given variance.
    Gaussian { variance: f64 },
}

/// Validated per-step law of the driving increment.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverSpec {
    kind: DriverKind,
    exponent_bound: f64,
}

impl DriverSpec {
    /// The symmetric Bernoulli pair `{+1: 1/2, -1: 1/2}`.
    pub fn bernoulli() -> Self {
        Self::atomic(vec![
            Atom {
                value: 1.0,
                prob: 0.5,
            },
            Atom {
                value: -1.0,
                prob: 0.5,
            },
        ])
        .expect("fixed atoms are valid")
    }

    pub fn atomic(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.len() < 2 {
            return Err(Error::Invalid(format!(
                "atomic driver needs at least 2 atoms, got {}",
                atoms.len()
            )));
        }
        let mut total = 0.0;
        for (idx, atom) in atoms.iter().enumerate() {
            if !atom.value.is_finite() {
                return Err(Error::Invalid(format!("atom {idx} has non-finite value")));
            }
            if atom.prob <= 0.0 || !atom.prob.is_finite() {
                return Err(Error::Invalid(format!(
                    "atom {idx} probability must be > 0, got {}",
                    atom.prob
                )));
            }
            total += atom.prob;
        }
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::Invalid(format!(
                "atom probabilities must sum to 1 (tolerance {PROB_SUM_TOL:.0e}), got {total}"
            )));
        }
        Ok(Self {
            kind: DriverKind::Atomic(atoms),
            exponent_bound: f64::INFINITY,
        })
    }

    pub fn gaussian(variance: f64) -> Result<Self> {
        if variance <= 0.0 || !variance.is_finite() {
            return Err(Error::Invalid(format!(
                "gaussian variance must be > 0, got {variance}"
            )));
        }
        Ok(Self {
            kind: DriverKind::Gaussian { variance },
            exponent_bound: f64::INFINITY,
        })
    }

    /// Restrict the exponents [`mgf`](Self::mgf) accepts. Model assembly sets
    /// this from the vol surface so that out-of-budget exponents are caught.
    pub fn with_exponent_bound(mut self, bound: f64) -> Self {
        self.exponent_bound = bound;
        self
    }

    pub fn exponent_bound(&self) -> f64 {
        self.exponent_bound
    }

    pub fn kind(&self) -> &DriverKind {
        &self.kind
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            DriverKind::Atomic(atoms) => Some(atoms),
            DriverKind::Gaussian { .. } => None,
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, DriverKind::Atomic(_))
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            DriverKind::Atomic(atoms) => atoms.iter().map(|a| a.prob * a.value).sum(),
            DriverKind::Gaussian { .. } => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            DriverKind::Atomic(atoms) => {
                let mean = self.mean();
                atoms
                    .iter()
                    .map(|a| a.prob * (a.value - mean) * (a.value - mean))
                    .sum()
            }
            DriverKind::Gaussian { variance } => *variance,
        }
    }

    /// Deviations from the reference normalization (mean 0, variance 1).
    /// These are warnings, not errors: the model is well-defined either way,
    /// the paper-style comparisons just assume the normalization.
    pub fn moment_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        if self.mean().abs() > 1e-12 {
            warnings.push(format!(
                "driver mean is {} (reference setup uses 0)",
                self.mean()
            ));
        }
        if (self.variance() - 1.0).abs() > 1e-9 {
            warnings.push(format!(
                "driver variance is {} (reference setup uses 1)",
                self.variance()
            ));
        }
        warnings
    }

    /// Moment generating function `E[exp(u X)]`.
    pub fn mgf(&self, u: f64) -> Result<f64> {
        if u.abs() > self.exponent_bound {
            return Err(Error::Domain(format!(
                "mgf exponent {u} outside declared bound {}",
                self.exponent_bound
            )));
        }
        Ok(match &self.kind {
            DriverKind::Atomic(atoms) => atoms.iter().map(|a| a.prob * (u * a.value).exp()).sum(),
            DriverKind::Gaussian { variance } => (0.5 * u * u * variance).exp(),
        })
    }

    /// The law for one grid step of size `dt`: atoms scale by `sqrt(dt)`,
    /// Gaussian variance by `dt`. At `dt = 1` this is the identity, so the
    /// reference annual-grid setup uses the configured law unchanged.
    pub fn scaled(&self, dt: f64) -> Self {
        let sqrt_dt = dt.sqrt();
        let kind = match &self.kind {
            DriverKind::Atomic(atoms) => DriverKind::Atomic(
                atoms
                    .iter()
                    .map(|a| Atom {
                        value: a.value * sqrt_dt,
                        prob: a.prob,
                    })
                    .collect(),
            ),
            DriverKind::Gaussian { variance } => DriverKind::Gaussian {
                variance: variance * dt,
            },
        };
        Self {
            kind,
            exponent_bound: self.exponent_bound,
        }
    }

    /// Draw one increment. Atomic laws invert the cumulative table on a
    /// uniform; Gaussians use the `rand_distr` normal sampler. Identical
    /// streams reproduce identical draws bit for bit.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            DriverKind::Atomic(atoms) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for atom in atoms {
                    acc += atom.prob;
                    if u < acc {
                        return atom.value;
                    }
                }
                atoms.last().expect("validated non-empty").value
            }
            DriverKind::Gaussian { variance } => {
                let normal = Normal::new(0.0, variance.sqrt()).expect("validated variance");
                normal.sample(rng)
            }
        }
    }
}

/// The random stream for one Monte Carlo path: stream `path_index` of a
/// ChaCha8 generator seeded with the master seed. Adding paths never
/// reorders the draws of existing paths.
pub fn path_stream(master_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}
