//! Volatility loadings `lambda_{ij}` per grid step and rate.

use crate::error::{Error, Result};
use crate::tenor::TenorStructure;

/// The loading matrix, one row per grid step `i = 1..=m`, one column per
/// modeled rate `j = 1..=n`. Entries must be strictly positive wherever the
/// rate is still alive; entries past a rate's fixing are never read.
#[derive(Debug, Clone, PartialEq)]
pub struct VolSurface {
    rows: Vec<Vec<f64>>,
    n: usize,
}

impl VolSurface {
    /// Loadings constant in the time index, as in the reference setup.
    pub fn constant_per_rate(per_rate: &[f64], tenor: &TenorStructure) -> Result<Self> {
        let rows = vec![per_rate.to_vec(); tenor.grid_steps()];
        Self::from_rows(rows, tenor)
    }

    /// Fully general matrix; `rows[i - 1][j - 1]` is `lambda_{ij}`.
    pub fn from_rows(rows: Vec<Vec<f64>>, tenor: &TenorStructure) -> Result<Self> {
        let m = tenor.grid_steps();
        let n = tenor.n();
        if rows.len() != m {
            return Err(Error::Invalid(format!(
                "vol surface needs {m} rows (one per grid step), got {}",
                rows.len()
            )));
        }
        for (idx, row) in rows.iter().enumerate() {
            let i = idx + 1;
            if row.len() != n {
                return Err(Error::Invalid(format!(
                    "vol row for step {i} needs {n} entries (one per rate), got {}",
                    row.len()
                )));
            }
            for j in 1..=n {
                let lam = row[j - 1];
                if tenor.is_alive(j, i) && (lam <= 0.0 || !lam.is_finite()) {
                    return Err(Error::Invalid(format!(
                        "vol for rate {j} at step {i} must be > 0 while the rate is alive, got {lam}"
                    )));
                }
            }
        }
        Ok(Self { rows, n })
    }

    /// Sample pointwise from per-rate functions of time, `lambda_{ij} =
    /// f_j(t_i)`; this is how a refinement run inherits its loadings from the
    /// limit model.
    pub fn sampled<F>(fns: &[F], tenor: &TenorStructure) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        if fns.len() != tenor.n() {
            return Err(Error::Invalid(format!(
                "need {} limit vol functions, got {}",
                tenor.n(),
                fns.len()
            )));
        }
        let rows = (1..=tenor.grid_steps())
            .map(|i| fns.iter().map(|f| f(tenor.time(i))).collect())
            .collect();
        Self::from_rows(rows, tenor)
    }

    /// `lambda_{ij}` for grid step `i = 1..=m` and rate `j = 1..=n`.
    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.rows[i - 1][j - 1]
    }

    /// Row of loadings for grid step `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i - 1]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `sum_j max_i lambda_{ij}`, the scale in the driver integrability bound.
    pub fn lambda_budget(&self) -> f64 {
        (1..=self.n)
            .map(|j| {
                self.rows
                    .iter()
                    .map(|r| r[j - 1])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .sum()
    }
}
