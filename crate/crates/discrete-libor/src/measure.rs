//! Radon-Nikodym bookkeeping between forward measures.
//!
//! The density of the forward measure for tenor `j` with respect to the
//! terminal measure, realized along a path, is the product of forward-price
//! ratios
//!
//! ```text
//! dP_j/dP_{n+1}(t_i) = prod_{l=j..n} (1 + delta L(t_i, T_l)) / (1 + delta L(0, T_l)).
//! ```
//!
//! The ledger accumulates the per-rate ratios one step at a time, so the
//! product over steps telescopes to the end-to-start ratio exactly.

use crate::curve::{one_step_forward_ratio, MarketCurve};
use crate::error::{Error, Result};

/// Per-rate accumulated forward-price ratios along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureLedger {
    ratios: Vec<f64>,
    delta: f64,
}

impl MeasureLedger {
    /// Fresh ledger at time zero: every ratio is 1.
    pub fn new(curve: &MarketCurve) -> Self {
        Self {
            ratios: vec![1.0; curve.n()],
            delta: curve.delta(),
        }
    }

    /// Fold one step of rate `j` (1-based) into the ledger.
    pub fn update(&mut self, j: usize, l_new: f64, l_prev: f64) {
        self.ratios[j - 1] *= one_step_forward_ratio(l_new, l_prev, self.delta);
    }

    /// Accumulated ratio `(1 + delta L(t_i, T_j)) / (1 + delta L(0, T_j))`.
    pub fn ratio(&self, j: usize) -> f64 {
        self.ratios[j - 1]
    }

    /// Realized `dP_j/dP_{n+1}` at the ledger's current time: the product of
    /// the accumulated ratios for `l = j..=n`. `j = n + 1` is the terminal
    /// measure itself and yields 1 (empty product).
    pub fn terminal_density(&self, j: usize) -> Result<f64> {
        let n = self.ratios.len();
        if j == 0 || j > n + 1 {
            return Err(Error::Domain(format!(
                "measure index must be in 1..={}, got {j}",
                n + 1
            )));
        }
        Ok(self.ratios[j - 1..].iter().product())
    }

    /// Overwrite a rate's accumulated ratio (used when states are rebuilt
    /// from another parameterization rather than stepped).
    pub fn set_ratio(&mut self, j: usize, ratio: f64) {
        self.ratios[j - 1] = ratio;
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}
