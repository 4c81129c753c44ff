//! Convergence thresholds and modified Newton iterations near simple
//! multiple zeros.

mod iterate;
mod rational;

pub use iterate::*;
pub use rational::*;
