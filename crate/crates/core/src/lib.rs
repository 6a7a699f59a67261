//! Simulation, sensitivity analysis and optimal control of a diffuse-interface
//! tumor growth model coupled to a nutrient, discretized with cell-centred
//! finite differences and a stabilized IMEX scheme.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cg;
pub mod cli;
pub mod config;
pub mod error;
pub mod forward;
pub mod grid;
pub mod hypotheses;
pub mod model;
pub mod ode;
pub mod optimizer;
pub mod presets;
pub mod sensitivity;
pub mod snapshot;
pub mod stability;

pub use error::{Error, Result};
pub use forward::{simulate, step, ControlSchedule, StateTrajectory};
pub use grid::{Field, Grid};
pub use model::ModelParams;
