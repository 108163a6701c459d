//! Simulation of Brownian semistationary processes with the hybrid scheme.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod exact;
pub mod hybrid;
pub mod kernel;
pub mod quad;
pub mod rbergomi;
pub mod rng;
pub mod specfun;
pub mod stats;
pub mod trajectory;

pub use error::{Error, Result};
pub use hybrid::{b_optimal, BRule, HybridPlan, HybridSimulator, ProcessKind, Volatility};
pub use kernel::{KernelFamily, KernelSpec};
pub use rbergomi::{RBergomiParams, Scheme};
pub use trajectory::{Trajectory, TrajectoryLabel};
