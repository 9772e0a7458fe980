//! Concrete valued differential fields: exact rational functions, their
//! valuations and derivations, and finite-precision reduction.

mod approx;
mod field;
mod logval;
mod modp;
pub mod poly;
mod scalar;
pub(crate) mod window;

pub use approx::{reduce, round_abs, ApproxScalar};
pub use field::{FieldConstants, FieldKind, FieldSpec};
pub use logval::{fmt_q, vp_int, vp_q, LogVal};
pub use poly::Poly;
pub use scalar::Scalar;

/// `∂_j^i(x) / i!`.
pub fn taylor_coeff(x: &Scalar, j: usize, i: usize) -> Scalar {
    x.taylor_coeff(j, i)
}

/// Derivative of `x` along derivation `j`.
pub fn derive(x: &Scalar, j: usize) -> Scalar {
    x.derive(j)
}

/// Valuation of `x` in `field`.
pub fn val(field: &FieldSpec, x: &Scalar) -> LogVal {
    field.val(x)
}
