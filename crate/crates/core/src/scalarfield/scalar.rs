use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::Poly;
use crate::Q;

/// Rational function over Q in at most two variables, kept in canonical
/// form: `gcd(num, den) = 1` and `den` has leading coefficient one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl Scalar {
    /// Builds `num / den` in canonical form. Panics if `den` is zero.
    pub fn new(num: Poly, den: Poly) -> Scalar {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Scalar::zero();
        }
        if let Some(c) = den.as_constant() {
            return Scalar { num: num.scale(&c.recip()), den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        let l = den.leading_coeff().unwrap().recip();
        Scalar { num: num.scale(&l), den: den.scale(&l) }
    }

    pub fn from_poly(p: Poly) -> Scalar {
        Scalar { num: p, den: Poly::one() }
    }

    pub fn zero() -> Scalar {
        Scalar { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Scalar {
        Scalar::from_q(Q::one())
    }

    pub fn from_q(q: Q) -> Scalar {
        Scalar::from_poly(Poly::constant(q))
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::from_q(Q::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Scalar {
        Scalar::from_q(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    /// The variable `x_j`.
    pub fn var(j: usize) -> Scalar {
        Scalar::from_poly(Poly::var(j))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<Q> {
        match (self.num.as_constant(), self.den.as_constant()) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        }
    }

    pub fn uses_x1(&self) -> bool {
        self.num.uses_x1() || self.den.uses_x1()
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Scalar {
        assert!(!self.is_zero(), "inverse of zero");
        Scalar::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, o: &Scalar) -> Option<Scalar> {
        if o.is_zero() {
            None
        } else {
            Some(self * &o.inv())
        }
    }

    pub fn pow(&self, e: i32) -> Scalar {
        if e < 0 {
            return self.inv().pow(-e);
        }
        Scalar::new(self.num.pow(e as u32), self.den.pow(e as u32))
    }

    pub fn scale_q(&self, q: &Q) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        Scalar { num: self.num.scale(q), den: self.den.clone() }
    }

    /// Quotient-rule derivative with respect to `x_j`.
    pub fn derive(&self, j: usize) -> Scalar {
        if self.den.is_one() {
            return Scalar::from_poly(self.num.derive(j));
        }
        let dn = self.num.derive(j);
        let dd = self.den.derive(j);
        if dd.is_zero() {
            return Scalar::new(dn, self.den.clone());
        }
        let top = dn.mul(&self.den).sub(&self.num.mul(&dd));
        Scalar::new(top, self.den.mul(&self.den))
    }

    /// `∂_j^i(x) / i!`.
    pub fn taylor_coeff(&self, j: usize, i: usize) -> Scalar {
        let mut d = self.clone();
        let mut fact = BigInt::one();
        for k in 1..=i {
            d = d.derive(j);
            fact *= BigInt::from(k);
            if d.is_zero() {
                return d;
            }
        }
        d.scale_q(&Q::new(BigInt::one(), fact))
    }

    /// Evaluates at a rational point; `None` at a pole.
    pub fn eval(&self, x0: &Q, x1: &Q) -> Option<Q> {
        let d = self.den.eval(x0, x1);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x0, x1) / d)
        }
    }

    /// Total degree of numerator plus denominator in `x0` (a height measure).
    pub fn degree_height(&self) -> usize {
        self.num.deg0().unwrap_or(0).max(self.den.deg0().unwrap_or(0))
            + self.num.deg1().unwrap_or(0).max(self.den.deg1().unwrap_or(0))
    }

    /// Formats with the given variable names.
    pub fn fmt_with(&self, names: &[&str]) -> String {
        if self.den.is_one() {
            let s = fmt_poly(&self.num, names);
            if self.num.terms().count() > 1 {
                return format!("({s})");
            }
            return s;
        }
        // Clear denominators so both parts have integer coefficients.
        let l = self.num.denom_lcm() * self.den.denom_lcm() ;
        let lq = Q::from_integer(l);
        let n = self.num.scale(&lq);
        let d = self.den.scale(&lq);
        format!("({})/({})", fmt_poly(&n, names), fmt_poly(&d, names))
    }
}

fn fmt_poly(p: &Poly, names: &[&str]) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut terms: Vec<(usize, usize, &Q)> = p.terms().collect();
    terms.sort_by(|a, b| (b.0 + b.1, b.1, b.0).cmp(&(a.0 + a.1, a.1, a.0)));
    let mut out = String::new();
    for (k, (e0, e1, q)) in terms.into_iter().enumerate() {
        let neg = q < &Q::zero();
        let mag = if neg { -q.clone() } else { q.clone() };
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mut factors: Vec<String> = Vec::new();
        let is_monomial = e0 + e1 > 0;
        if !mag.is_one() || !is_monomial {
            factors.push(super::logval::fmt_q(&mag));
        }
        for (e, name) in [(e0, names.first().copied().unwrap_or("x")), (e1, names.get(1).copied().unwrap_or("y"))] {
            match e {
                0 => {}
                1 => factors.push(name.to_string()),
                _ => factors.push(format!("{name}^{e}")),
            }
        }
        out.push_str(&factors.join("*"));
    }
    out
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_with(&["x", "y"]))
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            return Scalar::new(self.num.add(&o.num), self.den.clone());
        }
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Scalar::new(num, self.den.mul(&o.den))
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Scalar::from_poly(self.num.mul(&o.num));
        }
        Scalar::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        self * &o.inv()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Scalar {
        Scalar::var(0)
    }

    fn y() -> Scalar {
        Scalar::var(1)
    }

    #[test]
    fn canonical_form_cancels_common_factors() {
        let num = &(&x() * &x()) - &Scalar::one();
        let den = &x() - &Scalar::one();
        assert_eq!(&num / &den, &x() + &Scalar::one());
        let half = Scalar::ratio(1, 2);
        assert_eq!(&(&x() * &half) / &(&x() * &half), Scalar::one());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(x().pow(2).derive(0), &Scalar::int(2) * &x());
        assert_eq!(x().inv().derive(0), -x().pow(-2));
        assert_eq!((&x() * &y()).derive(1), x());
    }

    #[test]
    fn derivations_commute() {
        let f = &(&x().pow(3) * &y()) / &(&(&x() + &y().pow(2)) + &Scalar::int(5));
        assert_eq!(f.derive(0).derive(1), f.derive(1).derive(0));
    }

    #[test]
    fn taylor_coefficients() {
        assert_eq!(x().taylor_coeff(0, 1), Scalar::one());
        assert_eq!(x().pow(2).taylor_coeff(0, 2), Scalar::one());
        assert!(x().pow(2).taylor_coeff(0, 3).is_zero());
    }

    #[test]
    fn display_uses_integer_fractions() {
        let s = &(&x().pow(2) + &Scalar::one()) / &(&Scalar::int(5) * &x());
        assert_eq!(s.to_string(), "(x^2 + 1)/(5*x)");
        assert_eq!(Scalar::ratio(1, 5).to_string(), "1/5");
    }
}
