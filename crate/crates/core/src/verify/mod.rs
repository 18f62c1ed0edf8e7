//! Numerical experiments: each takes a config, runs a sweep and returns an
//! [`ExperimentReport`] with its measured values, fits and thresholded checks.

pub mod data;
pub mod linear;
pub mod nonlinear;
pub mod report;
pub mod scattering;
pub mod stability;
pub mod strichartz;
pub mod wellposed;

pub use linear::{check_dispersive, check_littlewood_paley, check_propagator, DispersiveConfig, LittlewoodPaleyConfig, PropagatorConfig};
pub use nonlinear::{check_nonlinear_estimate, xy_ratio, NonlinearConfig, ParaConfig};
pub use report::{spread, Check, ExperimentReport, Fit, Relation, Series, Sweep, Verdict};
pub use scattering::{scattering_experiment, ScatteringConfig};
pub use stability::{
    check_lipschitz, check_stability, lipschitz_experiment, stability_experiment, theta_threshold, Hypotheses, LipschitzThresholds,
    PerturbationCase, PerturbationConfig, PerturbationSetup, Regime, StabilityThresholds,
};
pub use strichartz::{check_exotic_strichartz, check_strichartz, default_exotic, StrichartzConfig};
pub use wellposed::{check_solver_agreement, small_data_experiment, AgreementConfig, SmallDataConfig, SolveCase};
