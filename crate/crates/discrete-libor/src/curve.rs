//! Initial curve, bond prices and the `ell` measure-change factor.

use crate::error::{Error, Result};

/// Bond prices implied by a vector of simple forward rates.
///
/// `B(0, T_1)` is pinned to `normalization` (the data fixes no spot rate for
/// `[0, T_1]`, so that level is a convention) and
/// `B(0, T_{j+1}) = B(0, T_j) / (1 + delta * L(0, T_j))`.
///
/// Rates may be zero here (giving flat bonds) but not negative; building a
/// [`MarketCurve`] additionally requires strictly positive rates.
pub fn initial_bonds(rates: &[f64], delta: f64, normalization: f64) -> Result<Vec<f64>> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::Invalid(format!(
            "accrual delta must be > 0, got {delta}"
        )));
    }
    if normalization <= 0.0 || !normalization.is_finite() {
        return Err(Error::Invalid(format!(
            "bond normalization must be > 0, got {normalization}"
        )));
    }
    let mut bonds = Vec::with_capacity(rates.len() + 1);
    bonds.push(normalization);
    for (idx, &rate) in rates.iter().enumerate() {
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::Invalid(format!(
                "initial rate for tenor {} must be >= 0, got {rate}",
                idx + 1
            )));
        }
        let prev = *bonds.last().expect("non-empty");
        bonds.push(prev / (1.0 + delta * rate));
    }
    Ok(bonds)
}

/// The factor `ell(L) = delta * L / (1 + delta * L)`, strictly inside (0, 1)
/// for positive inputs. It carries the state dependence of every forward
/// measure change.
pub fn ell(libor: f64, delta: f64) -> Result<f64> {
    if libor <= 0.0 || !libor.is_finite() {
        return Err(Error::Domain(format!(
            "ell needs a positive rate, got {libor}"
        )));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "ell needs a positive accrual, got {delta}"
        )));
    }
    let dl = delta * libor;
    Ok(dl / (1.0 + dl))
}

/// One-step factor `(1 + delta * L_new) / (1 + delta * L_prev)` of the
/// forward-price ratio; products of these over steps telescope to the
/// end-to-start ratio.
///
/// Both rates are assumed positive (validated where states are built).
pub fn one_step_forward_ratio(l_new: f64, l_prev: f64, delta: f64) -> f64 {
    (1.0 + delta * l_new) / (1.0 + delta * l_prev)
}

/// Initial market data: simple forward rates per tenor and the bonds they
/// imply.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketCurve {
    initial_libors: Vec<f64>,
    initial_bonds: Vec<f64>,
    normalization: f64,
    delta: f64,
}

impl MarketCurve {
    pub fn new(initial_libors: Vec<f64>, delta: f64, normalization: f64) -> Result<Self> {
        if initial_libors.is_empty() {
            return Err(Error::Invalid("curve needs at least one rate".into()));
        }
        for (idx, &rate) in initial_libors.iter().enumerate() {
            if rate <= 0.0 || !rate.is_finite() {
                return Err(Error::Invalid(format!(
                    "curve.initial_libors[{idx}] (tenor {}) must be > 0, got {rate}",
                    idx + 1
                )));
            }
        }
        let initial_bonds = initial_bonds(&initial_libors, delta, normalization)?;
        Ok(Self {
            initial_libors,
            initial_bonds,
            normalization,
            delta,
        })
    }

    /// Number of modeled rates.
    pub fn n(&self) -> usize {
        self.initial_libors.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `L(0, T_j)`, `j = 1..=n`.
    pub fn libor(&self, j: usize) -> f64 {
        self.initial_libors[j - 1]
    }

    /// `B(0, T_j)`, `j = 1..=n+1`.
    pub fn bond(&self, j: usize) -> f64 {
        self.initial_bonds[j - 1]
    }

    pub fn libors(&self) -> &[f64] {
        &self.initial_libors
    }

    pub fn bonds(&self) -> &[f64] {
        &self.initial_bonds
    }
}
