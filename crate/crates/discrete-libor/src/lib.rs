//! Arbitrage-free discrete-time LIBOR market models.
//!
//! The model evolves a vector of simple forward rates on a finite grid as
//! exponential martingales under their own forward measures,
//!
//! ```text
//! L(t_i, T_j) = L(0, T_j) * exp( sum_{u<=i} lambda_{uj} (X_{t_u} + b_{t_u}^j) ),
//! ```
//!
//! with a single driving increment per step and state-dependent drifts that
//! restore the martingale property exactly — no frozen-drift approximation.
//! Simulation happens once, under the terminal measure; every forward-measure
//! expectation is recovered by reweighting with realized density products.
//!
//! What's here:
//!
//! - exact lattice enumeration for atomic (e.g. Bernoulli) drivers and Monte
//!   Carlo for Gaussian drivers ([`model`]),
//! - the compensator-product drift engine with an independent
//!   subset-expansion oracle ([`drift`]),
//! - the deflated bond-difference reference scheme ([`gz`]),
//! - caplet pricing, Black-76 inversion and smile tables ([`pricing`],
//!   [`black`]),
//! - grid-refinement convergence experiments against the lognormal limit
//!   ([`convergence`]),
//! - JSON-configured batch runs with CSV emission ([`config`], [`run`]).
//!
//! The `book/` directory of the repository walks through the concepts; its
//! code listings compile and run as doctests of this crate.

pub mod black;
pub mod config;
pub mod convergence;
pub mod curve;
pub mod drift;
pub mod driver;
pub mod error;
pub mod gz;
pub mod measure;
pub mod model;
pub mod pricing;
pub mod run;
pub mod tenor;
pub mod vol;

mod util;

pub use black::{black_caplet, implied_vol};
pub use config::RunConfig;
pub use convergence::{ks_distance, refine_experiment, ConvergenceRow, ConvergenceSpec, LabMode};
pub use curve::{ell, initial_bonds, one_step_forward_ratio, MarketCurve};
pub use drift::{drift, drift_atomic, drift_gaussian, CompensatorContext, CompensatorFactor};
pub use driver::{path_stream, Atom, DriverKind, DriverSpec};
pub use error::{Error, Result};
pub use gz::{gz_init, gz_sigmas, GzModel, GzState};
pub use measure::MeasureLedger;
pub use model::{
    EnsembleKind, LiborModel, ModelState, PathEnsemble, PathRecord, StepDrifts, Stepper,
};
pub use pricing::{
    build_smile, caplet_price, CapletSpec, McParams, ModelChoice, ModelSetup, SmilePoint,
};
pub use run::{run_converge, run_price, ConvergenceRun, RunOverrides, SmileRun};
pub use tenor::TenorStructure;
pub use vol::VolSurface;

// The guide chapters double as doctests so the book can never drift from the
// library (the listings compile against the current API on every test run).
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/tenor-and-curve.md")]
    pub struct TenorAndCurve;
    #[doc = include_str!("../../../book/src/drivers.md")]
    pub struct Drivers;
    #[doc = include_str!("../../../book/src/drift.md")]
    pub struct Drift;
    #[doc = include_str!("../../../book/src/evolution.md")]
    pub struct Evolution;
    #[doc = include_str!("../../../book/src/glasserman-zhao.md")]
    pub struct GlassermanZhao;
    #[doc = include_str!("../../../book/src/pricing.md")]
    pub struct Pricing;
    #[doc = include_str!("../../../book/src/convergence.md")]
    pub struct Convergence;
}
