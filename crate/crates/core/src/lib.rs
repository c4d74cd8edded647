//! Parisian ruin measured from the running maximum (drawdown) of spectrally
//! negative Lévy risk processes.
//!
//! The crate evaluates the Laplace transform of the Parisian drawdown ruin
//! time and its joint transform with the position at ruin, together with
//! the building blocks they are made of (scale functions, occupation kernels,
//! drawdown exit identities), and ships an independent Monte Carlo engine
//! that simulates the same stopping times path by path.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod kernels;
pub mod levy;
pub mod mc;
pub mod parisian;
pub mod quad;
pub mod scale;
pub mod validation;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use kernels::{KernelQuery, Kernels, TiltedKernels};
pub use levy::{LevyModel, ModelKind, SamplingMode, TransitionDensity};
pub use mc::{McConfig, McEstimate, McMode};
pub use parisian::{DrawdownState, Parisian, ParisianQuery};
pub use quad::QuadOptions;
pub use scale::{Backend, ScaleFunction};
pub use validation::{run_validation_suite, Check, Report};
