//! Simultaneous route and departure-time dynamic user equilibrium.
//!
//! The crate couples a path-based link transmission model (cumulative count
//! curves driven by Lax-Hopf demand and supply) with three fixed-point
//! solvers for the variational inequality `<A(h*), h - h*> >= 0`:
//! projected gradient ([`solvers::run_fb`]), Halpern-relaxed
//! forward-backward-forward ([`solvers::run_fbf`]) and its inertial variant
//! with adaptive steps ([`solvers::run_ifbf`]).
//!
//! All numerical code is generic over [`Scalar`]; the aliases below fix the
//! common `f64` and `f32` instantiations.

pub mod dnl;
pub mod error;
pub mod hilbert;
pub mod metrics;
pub mod network;
pub mod operators;
pub mod scalar;
pub mod schedule;
pub mod solvers;

pub use error::{Error, ErrorCategory, Result};
pub use scalar::Scalar;

pub type TimeGrid = hilbert::TimeGrid<f64>;
pub type PathFlowProfile = hilbert::PathField<f64>;
pub type DelayProfile = hilbert::PathField<f64>;
pub type TripTable = hilbert::TripTable<f64>;
pub type Network = network::Network<f64>;
pub type Link = network::Link<f64>;
pub type LoadingResult = dnl::LoadingResult<f64>;
pub type DnlOperator = operators::DnlOperator<f64>;
pub type SolverConfig = solvers::SolverConfig<f64>;
pub type SolveOutcome = solvers::SolveOutcome<f64>;
pub type ConvergenceLog = metrics::ConvergenceLog<f64>;

pub type TimeGridF32 = hilbert::TimeGrid<f32>;
pub type PathFlowProfileF32 = hilbert::PathField<f32>;
pub type NetworkF32 = network::Network<f32>;
pub type SolverConfigF32 = solvers::SolverConfig<f32>;
