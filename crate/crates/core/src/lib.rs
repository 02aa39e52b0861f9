//! Two-layer water/air flow in closed circular pipes.
//!
//! A water layer with a free surface and a compressible air layer above it
//! share the pipe section. Both are advanced by a kinetic finite-volume
//! scheme that upwinds the source terms through potential barriers, keeps
//! water height and air mass non-negative, and preserves still states.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kinetic;
pub mod model;
pub mod parallel;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{CrossSection, WaterProfile};
pub use model::{CellState, Flux, Layer, Model, PhysicalConstants};
pub use parallel::Execution;
pub use solver::{
    run, BoundaryProgram, Clamps, Downstream, Mesh, Mode, RunOutput, Scenario, Snapshot, Solver, TimeController,
    Upstream,
};
