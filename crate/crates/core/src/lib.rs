//! Numerical laboratory for widely degenerate orthotropic functionals
//!
//! ```text
//! F(u) = Σ_i ∫ (|u_{x_i}| - δ_i)_+^{p_i} / p_i dx + ∫ f u dx
//! ```
//!
//! The crate is split along the objects it computes:
//!
//! * [`exponents`]: harmonic means, embedding exponents, the
//!   differentiability recursion `t_{k+1} = p/q + α_k b(t_k)`, its limit
//!   polynomial and the admissibility conditions on `(N, ℓ, p, q)`.
//! * [`grid`] and [`besov`]: sampled fields, directional difference
//!   quotients and Nikol'skii / Besov seminorms with order estimation.
//! * [`integrand`]: the degenerate power profiles `g_i`, their quadratic
//!   regularizations, the `V`-map and the pointwise inequalities they obey.
//! * [`solver`]: staggered finite-difference discretization of the
//!   functional with a certified Euler–Lagrange residual.
//! * [`probe`]: regularity indicators measured on solver output and
//!   compared against the exponent predictions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod besov;
pub mod error;
pub mod exponents;
pub mod grid;
pub mod integrand;
mod linalg;
pub mod probe;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
