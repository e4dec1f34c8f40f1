//! Learned surrogate line-flow constraints for two-stage stochastic unit
//! commitment.
//!
//! The pipeline: sample wind/load operating points and label them by DC
//! optimal power flow ([`dcopf`], [`scenario`]), fit a class-weighted linear
//! SVM ([`svm`]), and solve the unit-commitment MILP with one learned
//! halfspace per scenario-hour in place of the line limits ([`tsuc`]).

pub mod bench;
pub mod dcopf;
pub mod grid;
pub mod lp;
pub mod scenario;
pub mod svm;
pub mod tsuc;
