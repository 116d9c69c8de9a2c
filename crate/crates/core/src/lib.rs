//! Power-series solutions of evolution equations, constant-coefficient heat
//! equations and the linearized Navier-Stokes vorticity system.
//!
//! Solutions are written as `u = Σ (it)ⁿ/n! · wₙ` where the coefficients
//! `wₙ` come from a recursion on exponential polynomials ([`funcalg`]).
//! [`evolution`] handles the general 1-D evolution equation with a mixed
//! space-time derivative and a power nonlinearity, [`diffusion`] the heat
//! equation and its radial reduction, and [`flow`] assembles vorticity,
//! velocity and pressure for the linearized Navier-Stokes system.
//! [`verify`] checks any of these results with finite differences that
//! only ever evaluate the candidate pointwise.

pub mod diffusion;
pub mod evolution;
pub mod flow;
pub mod funcalg;
pub mod verify;

pub use diffusion::{BallProblem, BallSolution, HeatProblem};
pub use evolution::{
    ClosedForm, ClosedFormKind, EvolutionError, EvolutionProblem, PowersTable, SeriesSolution,
};
pub use flow::{FlowError, FlowProblem, FlowSolution, HarmonicPotential, InverseLaplacianMode};
pub use funcalg::{parse, AlgebraError, Complex64, ExpPoly, LinearForm, Var, VectorField};
pub use verify::{GridSpec, ResidualReport};
