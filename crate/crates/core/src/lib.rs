//! Exact computer algebra and numerical dynamics for the momentum-dependent
//! Hamiltonian family `H_N = p^2 + sum_n g_n (q.p)^n`, whose quadratic member
//! is the classical Zernike system.
//!
//! The crate certifies superintegrability by exact Poisson-bracket
//! identities over a rational coefficient ring, solves for the polynomial
//! bracket algebra closed by the constants of motion, expresses the family on
//! constant-curvature surfaces, and integrates the complexified flow.

pub mod coalgebra;
pub mod dynamics;
pub mod geometry;
pub mod golden;
pub mod linsolve;
pub mod param;
pub mod phase;
pub mod racah;
pub mod rational;
pub mod zernike;

pub use param::{EvalError, ParamMonomial, ParamPolynomial, ParamSym};
pub use phase::{poisson_bracket, CompiledPoly, PhaseMonomial, PhasePolynomial, PhaseVar};
pub use rational::Rational;
pub use zernike::{GammaMode, ModelSpec};
