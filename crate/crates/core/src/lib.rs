//! Kernel density and distribution function estimation for ρ-mixing
//! stationary sequences, with Monte Carlo experiment drivers that check the
//! estimator's limit laws and convergence rates.

pub mod bandwidth;
pub mod blocking;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod format;
pub mod kernels;
pub mod processes;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod stats;

pub use bandwidth::{BandwidthCondition, BandwidthSchedule, ConditionVerdict, SlowlyVarying};
pub use error::{Error, Result};
pub use estimator::{CdfCenter, CurveKind, EstimateCurve, Grid, Strategy};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport, Verdict};
pub use kernels::{KernelFamily, KernelSpec};
pub use processes::{ProcessFamily, ProcessModel, SamplePath};
