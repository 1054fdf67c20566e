//! Exact construction and verification of polynomial Stein operators for
//! products (and sums of products) of independent random variables.

pub mod analytic;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod minimality;
pub mod moments;
pub mod opweyl;
pub mod scalar;
pub mod steinops;
pub mod verify;

pub use error::{Result, SteinError};
pub use exec::Exec;
pub use moments::{MomentSequence, Sampler};
pub use opweyl::{Factor, OperatorPoly, UPoly, XPoly};
pub use scalar::Scalar;
