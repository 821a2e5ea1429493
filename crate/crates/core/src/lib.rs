//! Numerical laboratory for the self-similar blowup of corotational wave maps.
//!
//! The corotational wave-maps equation into the sphere is rewritten as a
//! radial semilinear wave equation in `n = d + 2` dimensions and then
//! transformed to similarity variables `tau = ln(T/(T-t))`, `rho = r/(T-t)`.
//! In those variables the explicit blowup profile
//! `phi(rho) = (2/rho) arctan(rho/sqrt(d-2))` is a static solution, and
//! stability of blowup becomes decay of perturbations around it.
//!
//! Modules:
//! - [`profiles`]: closed-form profile, potential, nonlinearities, gauge mode.
//! - [`grid`]: uniform radial mesh with 4th-order stencils.
//! - [`state`]: the first-order similarity unknown `(psi1, psi2)`.
//! - [`simvars`]: maps between physical and similarity variables.
//! - [`evolver`]: method-of-lines RK4 integration of the similarity system.
//! - [`spectral`]: Frobenius series, connection mismatch, eigenvalue scan,
//!   resolvent construction.
//! - [`sobolev`]: Hankel transform, fractional radial Sobolev norms and
//!   inequality harnesses.
//! - [`driver`]: end-to-end experiments, config files and CSV output.

pub mod driver;
pub mod error;
pub mod evolver;
pub mod grid;
pub mod profiles;
pub mod simvars;
pub mod sobolev;
pub mod spectral;
pub mod state;

pub use error::{LabError, Result};
