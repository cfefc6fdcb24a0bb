//! Optimal (Sard-sense) closed-type quadrature rules for the Sobolev space
//! `L2^(m)(0,1)` on the uniform grid `x_b = b/N`.
//!
//! The weights come from a closed form built on the roots of the
//! Euler–Frobenius polynomial `E_{2m-2}`; [`oracle`] solves Sobolev's
//! optimality system in exact rationals so every rule can be certified.
//!
//! ```
//! use sard_quadrature::weights::build_rule;
//!
//! let rule = build_rule(2, 8, 256).unwrap();
//! let sum: f64 = rule.weights_f64().iter().sum();
//! assert!((sum - 1.0).abs() < 1e-15);
//! ```

pub mod engine;
pub mod error;
pub mod euler_frobenius;
pub mod numerics;
pub mod operator;
pub mod oracle;
pub mod weights;

pub use error::{Error, Result};
pub use numerics::{BigFloat, Rational, DEFAULT_PRECISION};
