//! Exact arithmetic for differential modules over non-archimedean
//! differential fields: twisted polynomials, Newton polygons, subsidiary
//! generic radii of convergence and the decomposition of a module by radius.
//!
//! Two concrete fields are supported: `Q(x)` / `Q(x, y)` under the p-adic
//! Gauss valuation with `d/dx` (and `d/dy`), and `Q(z)` under the z-adic
//! valuation with `d/dz` (residue characteristic zero). All absolute values
//! are carried as exact rational log-valuations ([`LogVal`]).

pub mod batch;
pub mod cli;
pub mod corpus;
pub mod diffmod;
pub mod error;
pub mod factorize;
pub mod matrix;
pub mod radii;
pub mod scalarfield;
pub mod taylor;
pub mod text;
pub mod twisted;

pub use diffmod::DiffModule;
pub use error::{Error, Result};
pub use factorize::{Decomposition, PrecisionCtx};
pub use matrix::Matrix;
pub use radii::{MultiRadiusProfile, RadiusProfile};
pub use scalarfield::{FieldSpec, LogVal, Scalar};
pub use twisted::TwistedPoly;

/// Exact rationals used throughout.
pub type Q = num_rational::BigRational;
