#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod cli;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod ode;
pub mod states;
pub mod tomograms;
pub mod trajectory;

pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use states::{Parity, StateKind, StateSpec, WaveFunction, WignerMap};
pub use tomograms::{ReferenceFrame, Tomogram};
pub use trajectory::{floquet, frequency_squared, solve_epsilon, Floquet, ComplexTrajectory, TrajectorySample, TrapParams};
