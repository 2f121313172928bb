//! Numerical laboratory for the fundamental gap in constant curvature.
//!
//! The centre of the crate is the one-dimensional model operator
//! `d^2/ds^2 - (n-1) tn_K d/ds` on `[-D/2, D/2]` with Dirichlet conditions
//! ([`model`], [`gap`], [`modulus`]). Geodesic balls ([`ball`]) and the
//! embedded space forms ([`geometry`]) give concrete checks in `n` dimensions.

// `!(x > 0.0)` guards reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// 3.14159 is a table diameter, not an approximation of pi.
#![allow(clippy::approx_constant)]

pub mod ball;
pub mod error;
pub mod gap;
pub mod geometry;
pub mod kernels;
pub mod model;
pub mod modulus;
pub mod ode;
pub mod roots;
pub mod tridiag;

pub use error::{GapError, Result};
pub use kernels::{a_of_k, cs, l_fn, m_fn, m_prime, potential, sn, tn, Curvature, ModelParams};
pub use ball::{ball_spectrum, BallSpec, BallSpectrum};
pub use gap::{gap_report, GapReport, Monotonicity, SweepAxis, SweepResult};
pub use geometry::{distance, exp_map, ModelPoint, TangentVec, VariationProbe};
pub use model::{solve_model, EigenPair, Grid, Method, Parity, SolveOptions, SolveReport};
pub use modulus::{log_derivative_profile, LogDerivativeProfile, RatioProfile};
