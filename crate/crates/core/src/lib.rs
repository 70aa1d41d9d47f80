//! Finite-element solvers for the steady 1D advection-diffusion equation
//!
//! ```text
//!     v(x) u'(x) - (k(x) u'(x))' = f(x)   on (x_lo, x_hi)
//! ```
//!
//! Three discretizations with linear elements are provided and cross-checked:
//!
//! * [`Formulation::Galerkin`]: the standard weighted-residual form.
//! * [`Formulation::ArtificialDiffusion`]: Galerkin with the diffusivity raised
//!   by the optimal coefficient `kbar = (v h / 2)(coth Pe - 1/Pe)`.
//! * [`Formulation::WeightedVariational`]: the stationarity condition of
//!   `I(u) = ∫ α (k u'^2 / 2 - u f) dx` with `α = exp(-∫ v/k dx)`. The
//!   advection term disappears, the stiffness matrix is symmetric, and for
//!   constant coefficients the interior difference equation coincides with
//!   the nodally exact optimal-diffusion stencil.
//!
//! The [`verify`] module turns those statements into measurements and the
//! [`cli`] module exposes them through the `advdiff` binary.

pub mod assembly;
pub mod cli;
mod error;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod solve;
pub mod stencils;
pub mod verify;

pub use assembly::{Formulation, TriDiagSystem};
pub use error::{Error, Result};
pub use mesh::Mesh1D;
pub use problem::{BoundaryCondition, BoundaryConditions, Field, Interval, Problem, ProblemSpec, WeightFunction};
pub use solve::{solve, NodalSolution};
pub use stencils::StencilCoeffs;
