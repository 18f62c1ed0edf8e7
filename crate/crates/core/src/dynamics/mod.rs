//! The nonlinearity, Duhamel integrals, the Picard solver, a split-step
//! reference integrator, norm-based subdivision and scattering states.
//!
//! The integral equation is solved in the form `u = e^{i(t-t0)Delta} u0 + D[f(u)]`,
//! where `D` is [`duhamel_integral`] and already carries the factor `-i`.

mod duhamel;
mod nonlinearity;
mod picard;
mod scattering;
mod split_step;
mod subdivide;

pub use duhamel::duhamel_integral;
pub use nonlinearity::{energy, Hook, NonlinearitySpec, Sign};
pub use picard::{
    picard_solve, sup_l2_gap, LedgerEntry, SolveResult, SolveSummary, SolverConfig, AMPLITUDE_CEILING, BOUNDARY_LIMIT, ETA_0,
};
pub use scattering::{scattering_state, ScatteringReport, ScatteringState};
pub use split_step::split_step_solve;
pub use subdivide::{critical_kind, subdivide_by_norm, Piece, Subdivision};
