//! Frank-Wolfe Lasso solvers with emulated quantum subroutines, the KP-tree
//! sparse vector, and the hidden-set instances used for lower-bound
//! experiments.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod frank_wolfe;
pub mod kp_tree;
pub mod loss;
pub mod lower_bound;
pub mod quantum;
pub mod rng;
pub mod scaling;

pub use error::{Error, Result};
