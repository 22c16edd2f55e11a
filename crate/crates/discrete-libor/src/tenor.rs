//! Tenor structure and running-time grid.
//!
//! Time runs on a grid of `m = (n + 1) * p` steps `t_i = (i / m) * T*`,
//! `i = 0..=m`, and rates live on the tenor dates `T_j = (j / (n + 1)) * T*`,
//! `j = 1..=n+1`. Every tenor date lies on the grid (`T_j = t_{j p}`), the
//! accrual fraction is `delta = T* / (n + 1)`, and rate `j` is alive up to and
//! including its fixing step `j * p`.

use crate::error::{Error, Result};

/// Grid and tenor-date arithmetic shared by every model in this crate.
///
/// Rate and tenor indices are 1-based throughout (`j = 1..=n` for modeled
/// rates, `n + 1` for the terminal date), grid steps run `i = 0..=m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TenorStructure {
    t_star: f64,
    n: usize,
    p: usize,
}

impl TenorStructure {
    pub fn new(t_star: f64, n: usize, p: usize) -> Result<Self> {
        if !t_star.is_finite() || t_star <= 0.0 {
            return Err(Error::Invalid(format!(
                "tenor horizon must be > 0, got {t_star}"
            )));
        }
        if n == 0 {
            return Err(Error::Invalid(
                "tenor needs at least one modeled rate".into(),
            ));
        }
        if p == 0 {
            return Err(Error::Invalid("sub-steps per period must be >= 1".into()));
        }
        Ok(Self { t_star, n, p })
    }

    /// Time horizon `T*`.
    pub fn t_star(&self) -> f64 {
        self.t_star
    }

    /// Number of modeled LIBOR rates.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sub-steps per accrual period.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of grid steps `m = (n + 1) * p`.
    pub fn grid_steps(&self) -> usize {
        (self.n + 1) * self.p
    }

    /// Accrual fraction `delta = T* / (n + 1)`.
    pub fn delta(&self) -> f64 {
        self.t_star / (self.n + 1) as f64
    }

    /// Grid mesh `T* / m`.
    pub fn dt(&self) -> f64 {
        self.t_star / self.grid_steps() as f64
    }

    /// Grid time `t_i`, `i = 0..=m`.
    pub fn time(&self, i: usize) -> f64 {
        debug_assert!(i <= self.grid_steps());
        (i as f64 / self.grid_steps() as f64) * self.t_star
    }

    /// Tenor date `T_j`, `j = 1..=n+1`.
    pub fn tenor_date(&self, j: usize) -> f64 {
        debug_assert!((1..=self.n + 1).contains(&j));
        (j as f64 / (self.n + 1) as f64) * self.t_star
    }

    /// Grid step at which rate `j` fixes: `T_j = t_{j p}`.
    pub fn fixing_step(&self, j: usize) -> usize {
        j * self.p
    }

    /// Smallest tenor index `u` with `t_i <= T_u`.
    pub fn eta(&self, i: usize) -> usize {
        debug_assert!(i <= self.grid_steps());
        i.div_ceil(self.p).max(1)
    }

    /// Rate `j` is alive at grid step `i` (it fixes at `i = j p`).
    pub fn is_alive(&self, j: usize, i: usize) -> bool {
        i <= self.fixing_step(j)
    }

    /// Smallest live rate index at step `i` (all of `j..=n` are live).
    pub fn first_live(&self, i: usize) -> usize {
        self.eta(i).min(self.n)
    }

    /// All grid times `t_0..=t_m`.
    pub fn grid_times(&self) -> Vec<f64> {
        (0..=self.grid_steps()).map(|i| self.time(i)).collect()
    }

    /// All tenor dates `T_1..=T_{n+1}`.
    pub fn tenor_dates(&self) -> Vec<f64> {
        (1..=self.n + 1).map(|j| self.tenor_date(j)).collect()
    }
}
