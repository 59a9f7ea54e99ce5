//! Formal normal forms of perturbations of quasi-homogeneous plane vector
//! fields with a fixed separatrix.
//!
//! The crate is organised bottom-up:
//!
//! - [`grading`]: weighted polynomials and their graded slices;
//! - [`logfields`]: vector fields, the logarithmic basis `(X0, R)` and its
//!   dual forms;
//! - [`milnor`]: Jacobian ideal and monomial Milnor basis;
//! - [`homological`]: the graded solver for `X0(b) = β`, the division lemma
//!   and the connection;
//! - [`prenorm`]: prenormalization loops and conjugacy verification;
//! - [`finalred`]: one-variable normalization and the final reduction.
//!
//! All arithmetic is exact over ℚ.

pub mod error;
pub mod finalred;
pub mod grading;
pub mod homological;
pub mod linalg;
pub mod logfields;
pub mod milnor;
pub mod prenorm;
pub mod series;

pub use error::{Error, Result};
pub use grading::{q, qi, GradedSlice, Mono, Poly, Weights, Q};
pub use logfields::{LogField, LogForm, QHContext, VField};
pub use series::Series;
