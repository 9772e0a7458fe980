use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::logval::{vp_int, vp_q, LogVal};
use super::poly::Poly;
use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::Q;

/// Which concrete valued differential field we compute over.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    /// `Q(x)` or `Q(x, y)` with the p-adic Gauss valuation at radius one.
    GaussPadic { p: u64 },
    /// `Q(z)` with the z-adic valuation (residue characteristic zero).
    LaurentCharZero,
}

/// A field instance together with the names of its variables. Variable `j`
/// carries the derivation `d/dx_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub vars: Vec<String>,
}

/// Log-scale constants of a field: `ω`, `|∂_j|_sp` and `r(K, ∂_j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldConstants {
    pub lv_omega: LogVal,
    pub lv_dsp: Vec<LogVal>,
    pub lv_rk: Vec<LogVal>,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// Gauss-valued field in `nvars` variables named `x`, `y`.
    pub fn gauss(p: u64, nvars: usize) -> Result<FieldSpec> {
        let names = ["x", "y"];
        if nvars == 0 || nvars > 2 {
            return Err(Error::InvalidInput(format!("unsupported variable count {nvars}")));
        }
        FieldSpec::gauss_named(p, names[..nvars].iter().map(|s| s.to_string()).collect())
    }

    pub fn gauss_named(p: u64, vars: Vec<String>) -> Result<FieldSpec> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if vars.is_empty() || vars.len() > 2 {
            return Err(Error::InvalidInput(format!("unsupported variable count {}", vars.len())));
        }
        Ok(FieldSpec { kind: FieldKind::GaussPadic { p }, vars })
    }

    pub fn laurent() -> FieldSpec {
        FieldSpec::laurent_named("z")
    }

    pub fn laurent_named(var: &str) -> FieldSpec {
        FieldSpec { kind: FieldKind::LaurentCharZero, vars: vec![var.to_string()] }
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn prime(&self) -> Option<u64> {
        match self.kind {
            FieldKind::GaussPadic { p } => Some(p),
            FieldKind::LaurentCharZero => None,
        }
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|s| s.as_str()).collect()
    }

    pub fn fmt_scalar(&self, x: &Scalar) -> String {
        x.fmt_with(&self.var_names())
    }

    pub fn constants(&self) -> FieldConstants {
        let n = self.nvars();
        match self.kind {
            FieldKind::GaussPadic { p } => {
                let om = LogVal::Finite(Q::new(BigInt::from(1), BigInt::from(p - 1)));
                FieldConstants { lv_omega: om.clone(), lv_dsp: vec![LogVal::zero(); n], lv_rk: vec![om; n] }
            }
            FieldKind::LaurentCharZero => FieldConstants {
                lv_omega: LogVal::zero(),
                lv_dsp: vec![LogVal::int(-1); n],
                lv_rk: vec![LogVal::int(1); n],
            },
        }
    }

    pub fn lv_omega(&self) -> Q {
        self.constants().lv_omega.finite().unwrap().clone()
    }

    pub fn lv_dsp(&self, _j: usize) -> Q {
        match self.kind {
            FieldKind::GaussPadic { .. } => Q::zero(),
            FieldKind::LaurentCharZero => Q::from_integer(BigInt::from(-1)),
        }
    }

    pub fn lv_rk(&self, j: usize) -> Q {
        self.lv_omega() - self.lv_dsp(j)
    }

    /// lv of the operator norm of `∂_j` on the field (equal to the spectral
    /// norm for both instances).
    pub fn lv_dnorm(&self, j: usize) -> Q {
        self.lv_dsp(j)
    }

    /// Valuation of a polynomial.
    pub fn val_poly(&self, p: &Poly) -> LogVal {
        if p.is_zero() {
            return LogVal::Infinite;
        }
        match self.kind {
            FieldKind::GaussPadic { p: pr } => {
                let v = p.coeffs().map(|q| vp_q(q, pr).unwrap()).min().unwrap();
                LogVal::int(v)
            }
            FieldKind::LaurentCharZero => LogVal::int(p.order0().unwrap() as i64),
        }
    }

    /// Valuation `lv(x)`; `+∞` for zero.
    pub fn val(&self, x: &Scalar) -> LogVal {
        if x.is_zero() {
            return LogVal::Infinite;
        }
        let a = self.val_poly(x.num());
        let b = self.val_poly(x.den());
        a.minus(b.finite().unwrap())
    }

    /// Valuation of a rational constant (zero in residue characteristic 0).
    pub fn val_q(&self, q: &Q) -> LogVal {
        if q.is_zero() {
            return LogVal::Infinite;
        }
        match self.kind {
            FieldKind::GaussPadic { p } => LogVal::int(vp_q(q, p).unwrap()),
            FieldKind::LaurentCharZero => LogVal::zero(),
        }
    }

    /// `lv(i!)`.
    pub fn val_factorial(&self, i: usize) -> Q {
        match self.kind {
            FieldKind::GaussPadic { p } => {
                let mut v = 0i64;
                for k in 2..=i {
                    v += vp_int(&BigInt::from(k), p);
                }
                Q::from_integer(BigInt::from(v))
            }
            FieldKind::LaurentCharZero => Q::zero(),
        }
    }

    /// Checks that a scalar only uses this field's variables.
    pub fn check_scalar(&self, x: &Scalar) -> Result<()> {
        if self.nvars() < 2 && x.uses_x1() {
            return Err(Error::FieldMismatch("scalar uses a second variable".into()));
        }
        Ok(())
    }

    pub fn check_deriv(&self, j: usize) -> Result<()> {
        if j >= self.nvars() {
            return Err(Error::InvalidInput(format!("derivation index {j} out of range")));
        }
        Ok(())
    }

    /// A short text form, as accepted by the CLI (`gauss:p=5:vars=x`).
    pub fn describe(&self) -> String {
        match self.kind {
            FieldKind::GaussPadic { p } => format!("gauss:p={p}:vars={}", self.vars.join(",")),
            FieldKind::LaurentCharZero => format!("laurent:{}", self.vars[0]),
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn gauss_valuation_examples() {
        let f = FieldSpec::gauss(5, 1).unwrap();
        let x = Scalar::var(0);
        assert_eq!(f.val(&Scalar::one()), LogVal::zero());
        let e = &(&Scalar::int(5) * &x.pow(2)) + &Scalar::int(25);
        assert_eq!(f.val(&e), LogVal::int(1));
        assert_eq!(f.val(&(&x / &Scalar::int(5))), LogVal::int(-1));
        assert_eq!(f.val(&Scalar::zero()), LogVal::Infinite);
    }

    #[test]
    fn laurent_valuation_is_order_at_zero() {
        let f = FieldSpec::laurent();
        let z = Scalar::var(0);
        let e = &(&z.pow(3) + &z.pow(2)) / &(&z + &Scalar::int(7));
        assert_eq!(f.val(&e), LogVal::int(2));
        assert_eq!(f.val(&z.pow(-2)), LogVal::int(-2));
    }

    #[test]
    fn constants() {
        let g = FieldSpec::gauss(5, 2).unwrap();
        let c = g.constants();
        assert_eq!(c.lv_omega, LogVal::Finite(q(1, 4)));
        assert_eq!(c.lv_dsp, vec![LogVal::zero(); 2]);
        assert_eq!(c.lv_rk, vec![LogVal::Finite(q(1, 4)); 2]);
        let l = FieldSpec::laurent().constants();
        assert_eq!((l.lv_omega, l.lv_dsp[0].clone(), l.lv_rk[0].clone()), (LogVal::zero(), LogVal::int(-1), LogVal::int(1)));
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(FieldSpec::gauss(6, 1).is_err());
        assert!(FieldSpec::gauss(5, 3).is_err());
        let f = FieldSpec::gauss(5, 1).unwrap();
        assert!(f.check_scalar(&Scalar::var(1)).is_err());
        assert!(f.check_deriv(1).is_err());
    }

    #[test]
    fn factorial_valuations() {
        let f = FieldSpec::gauss(5, 1).unwrap();
        assert_eq!(f.val_factorial(4), q(0, 1));
        assert_eq!(f.val_factorial(25), q(6, 1));
        assert_eq!(FieldSpec::laurent().val_factorial(25), q(0, 1));
    }

    #[test]
    fn taylor_isometry_on_a_pole() {
        let f = FieldSpec::gauss(5, 1).unwrap();
        let c = (&Scalar::var(0) - &Scalar::int(5)).inv();
        let base = f.val(&c);
        for i in 0..=30 {
            let t = f.val(&c.taylor_coeff(0, i)).plus(&(f.lv_rk(0) * q(i as i64, 1)));
            assert!(t >= base, "i = {i}");
        }
    }
}
