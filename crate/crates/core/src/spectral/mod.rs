//! Grids, transforms, the free propagator and Littlewood-Paley projectors.

pub mod bessel;
pub mod bump;
pub mod container;
pub mod field;
pub mod fourier;
pub mod grid;
pub mod ladder;
mod radial;
pub mod trajectory;

pub use bump::{phi, ProjectorKind, BUMP_PROFILE_ID};
pub use field::{relative_l2, Field, Repr};
pub use fourier::{
    fourier_forward, fourier_inverse, fractional_derivative, gradient, gradient_magnitude, laplacian, propagate, radial_transform,
    Direction,
};
pub use grid::{sphere_area, Grid, GridMode, GridSpec};
pub use ladder::{build_ladder, lp_project, Dyadic, DyadicLadder};
pub use trajectory::{time_lattice, Trajectory};
