//! The twisted polynomial ring `K<T>` for one derivation `∂`, with
//! `T·c = c·T + ∂(c)`.
//!
//! Elements are written `Σ q_i T^i` with coefficients on the left. Products are
//! available through the closed convolution formula ([`TwistedPoly::mul`])
//! and through repeated use of the commutation rule
//! ([`TwistedPoly::mul_by_relation`]); the two must agree.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::scalarfield::{FieldSpec, LogVal, Scalar};
use crate::Q;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TwistedPoly {
    coeffs: Vec<Scalar>,
    deriv: usize,
}

fn binomial(n: usize, k: usize) -> Q {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(acc)
}

impl TwistedPoly {
    pub fn new(coeffs: Vec<Scalar>, deriv: usize) -> TwistedPoly {
        let mut p = TwistedPoly { coeffs, deriv };
        p.trim();
        p
    }

    pub fn zero(deriv: usize) -> TwistedPoly {
        TwistedPoly { coeffs: Vec::new(), deriv }
    }

    pub fn one(deriv: usize) -> TwistedPoly {
        TwistedPoly::constant(Scalar::one(), deriv)
    }

    /// The image `i(c)` of a scalar.
    pub fn constant(c: Scalar, deriv: usize) -> TwistedPoly {
        TwistedPoly::new(vec![c], deriv)
    }

    /// The generator `T`.
    pub fn t(deriv: usize) -> TwistedPoly {
        TwistedPoly::monomial(Scalar::one(), 1, deriv)
    }

    /// `c · T^k`.
    pub fn monomial(c: Scalar, k: usize, deriv: usize) -> TwistedPoly {
        let mut v = vec![Scalar::zero(); k + 1];
        v[k] = c;
        TwistedPoly::new(v, deriv)
    }

    /// `T - c`.
    pub fn linear(c: Scalar, deriv: usize) -> TwistedPoly {
        TwistedPoly::new(vec![-c, Scalar::one()], deriv)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn deriv(&self) -> usize {
        self.deriv
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of `T^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&Scalar> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff().is_some_and(|c| c.is_one())
    }

    fn same_deriv(&self, o: &TwistedPoly) {
        assert_eq!(self.deriv, o.deriv, "twisted polynomials over different derivations");
    }

    pub fn add(&self, o: &TwistedPoly) -> TwistedPoly {
        self.same_deriv(o);
        let n = self.coeffs.len().max(o.coeffs.len());
        TwistedPoly::new((0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect(), self.deriv)
    }

    pub fn neg(&self) -> TwistedPoly {
        TwistedPoly { coeffs: self.coeffs.iter().map(|c| -c).collect(), deriv: self.deriv }
    }

    pub fn sub(&self, o: &TwistedPoly) -> TwistedPoly {
        self.add(&o.neg())
    }

    /// Left multiplication by a scalar: `i(c) · P`.
    pub fn left_scale(&self, c: &Scalar) -> TwistedPoly {
        TwistedPoly::new(self.coeffs.iter().map(|q| c * q).collect(), self.deriv)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> TwistedPoly {
        TwistedPoly::new(self.coeffs.iter().map(f).collect(), self.deriv)
    }

    /// Product through the closed formula
    /// `(PQ)_i = Σ_j Σ_{h≥j} p_h C(h,j) ∂^{h-j}(q_{i-j})`.
    pub fn mul(&self, o: &TwistedPoly) -> TwistedPoly {
        self.same_deriv(o);
        if self.is_zero() || o.is_zero() {
            return TwistedPoly::zero(self.deriv);
        }
        let hmax = self.coeffs.len() - 1;
        // derivs[k][s] = ∂^s(q_k)
        let derivs: Vec<Vec<Scalar>> = o
            .coeffs
            .iter()
            .map(|q| {
                let mut v = Vec::with_capacity(hmax + 1);
                let mut cur = q.clone();
                for s in 0..=hmax {
                    if s > 0 {
                        cur = cur.derive(self.deriv);
                    }
                    v.push(cur.clone());
                }
                v
            })
            .collect();
        let mut out = vec![Scalar::zero(); hmax + o.coeffs.len()];
        for (h, ph) in self.coeffs.iter().enumerate() {
            if ph.is_zero() {
                continue;
            }
            for (k, dq) in derivs.iter().enumerate() {
                for j in 0..=h {
                    let d = &dq[h - j];
                    if d.is_zero() {
                        continue;
                    }
                    let term = (ph * d).scale_q(&binomial(h, j));
                    out[j + k] = &out[j + k] + &term;
                }
            }
        }
        TwistedPoly::new(out, self.deriv)
    }

    /// `T · self`, from `T·c = c·T + ∂(c)`.
    pub fn t_times(&self) -> TwistedPoly {
        let mut out = vec![Scalar::zero(); self.coeffs.len() + 1];
        for (k, q) in self.coeffs.iter().enumerate() {
            out[k + 1] = &out[k + 1] + q;
            out[k] = &out[k] + &q.derive(self.deriv);
        }
        TwistedPoly::new(out, self.deriv)
    }

    /// Product by distributing `P = Σ p_h T^h` and applying the commutation
    /// rule `h` times to the right factor.
    pub fn mul_by_relation(&self, o: &TwistedPoly) -> TwistedPoly {
        self.same_deriv(o);
        let mut acc = TwistedPoly::zero(self.deriv);
        let mut th = o.clone();
        for (h, ph) in self.coeffs.iter().enumerate() {
            if h > 0 {
                th = th.t_times();
            }
            if !ph.is_zero() {
                acc = acc.add(&th.left_scale(ph));
            }
        }
        acc
    }

    pub fn pow(&self, e: usize) -> TwistedPoly {
        let mut acc = TwistedPoly::one(self.deriv);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Right division: `self = D·Q + R` with `deg R < deg Q`.
    pub fn divmod_right(&self, q: &TwistedPoly) -> Result<(TwistedPoly, TwistedPoly)> {
        self.same_deriv(q);
        let dq = q.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = q.leading_coeff().unwrap().inv();
        let mut d = TwistedPoly::zero(self.deriv);
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dq {
                break;
            }
            let c = r.leading_coeff().unwrap() * &lc_inv;
            let term = TwistedPoly::monomial(c, dr - dq, self.deriv);
            r = r.sub(&term.mul(q));
            // The leading term cancels exactly; guard against stale zeros.
            r.coeffs.truncate(dr);
            r.trim();
            d = d.add(&term);
        }
        Ok((d, r))
    }

    /// Left division: `self = Q·D + R` with `deg R < deg Q`.
    pub fn divmod_left(&self, q: &TwistedPoly) -> Result<(TwistedPoly, TwistedPoly)> {
        self.same_deriv(q);
        let dq = q.degree().ok_or(Error::DivisionByZero)?;
        let lc_inv = q.leading_coeff().unwrap().inv();
        let mut d = TwistedPoly::zero(self.deriv);
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dq {
                break;
            }
            let c = &lc_inv * r.leading_coeff().unwrap();
            let term = TwistedPoly::monomial(c, dr - dq, self.deriv);
            r = r.sub(&q.mul(&term));
            r.coeffs.truncate(dr);
            r.trim();
            d = d.add(&term);
        }
        Ok((d, r))
    }

    /// Left-scales by the inverse leading coefficient.
    pub fn monicize(&self) -> Result<TwistedPoly> {
        let lc = self.leading_coeff().ok_or(Error::ZeroPolynomial)?;
        Ok(self.left_scale(&lc.inv()))
    }

    /// Formal adjoint `Σ (-T)^i q_i`; reverses products: `(PQ)* = Q* P*`.
    pub fn adjoint(&self) -> TwistedPoly {
        let mut acc = TwistedPoly::zero(self.deriv);
        let minus_t = TwistedPoly::t(self.deriv).neg();
        let mut pw = TwistedPoly::one(self.deriv);
        for (i, q) in self.coeffs.iter().enumerate() {
            if i > 0 {
                pw = pw.mul(&minus_t);
            }
            if !q.is_zero() {
                acc = acc.add(&pw.mul(&TwistedPoly::constant(q.clone(), self.deriv)));
            }
        }
        acc
    }

    /// `(-1)^deg · adjoint`, which is monic when `self` is and still
    /// reverses products of monic polynomials.
    pub fn monic_adjoint(&self) -> TwistedPoly {
        let a = self.adjoint();
        match self.degree() {
            Some(n) if n % 2 == 1 => a.neg(),
            _ => a,
        }
    }

    /// π(t)-norm in log scale: `min_i (lv(i!) + lv(q_i) - i·lv_t)`.
    pub fn pi_norm(&self, field: &FieldSpec, params: &PiNormParams) -> LogVal {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.is_zero())
            .map(|(i, q)| {
                let shift = field.val_factorial(i) - &params.lv_t * Q::from_integer(BigInt::from(i));
                field.val(q).plus(&shift)
            })
            .min()
            .unwrap_or(LogVal::Infinite)
    }

    /// Newton polygon of a monic operator.
    pub fn newton_polygon(&self, field: &FieldSpec) -> Result<NewtonPolygon> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !self.is_monic() {
            return Err(Error::NotMonic);
        }
        Ok(NewtonPolygon::from_points(
            self.coeffs
                .iter()
                .enumerate()
                .filter(|(_, q)| !q.is_zero())
                .map(|(i, q)| (i, field.val(q).finite().unwrap().clone()))
                .collect(),
        ))
    }

    pub fn fmt_with(&self, field: &FieldSpec) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let s = field.fmt_scalar(c);
                let s = if s.starts_with('(') || !s.contains(['+', '-', '/']) { s } else { format!("({s})") };
                match k {
                    0 => s,
                    _ if c.is_one() => t_pow(k),
                    _ => format!("{s}*{}", t_pow(k)),
                }
            })
            .collect();
        parts.join(" + ")
    }
}

fn t_pow(k: usize) -> String {
    if k == 1 {
        "T".into()
    } else {
        format!("T^{k}")
    }
}

impl fmt::Display for TwistedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.coeffs.iter().enumerate().rev().filter(|(_, c)| !c.is_zero()).map(|(k, c)| format!("({c})*T^{k}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Parameters of the geometric sequence `π(t) = (t^i)`, given by `lv_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiNormParams {
    pub lv_t: Q,
}

impl PiNormParams {
    pub fn new(lv_t: Q) -> Self {
        PiNormParams { lv_t }
    }

    /// `π(t)` satisfies the ratio condition iff `t ≤ r(K, ∂)`.
    pub fn is_valid(&self, field: &FieldSpec, deriv: usize) -> bool {
        self.lv_t >= field.lv_rk(deriv)
    }

    /// The first `n` terms `lv(π_i) = i · lv_t`.
    pub fn sequence(&self, n: usize) -> Vec<LogVal> {
        (0..n).map(|i| LogVal::Finite(&self.lv_t * Q::from_integer(BigInt::from(i)))).collect()
    }
}

/// Counts violations of `π_i π_j / (r^h π_0 π_k) ≤ 1` over all
/// `0 ≤ h, j ≤ k ≤ bound` with `i = h + k - j ≤ bound`, in log scale.
pub fn inequality_violations(pi: &[LogVal], lv_rk: &Q, bound: usize) -> usize {
    let mut bad = 0;
    for h in 0..=bound {
        for k in 0..=bound {
            for j in 0..=k {
                let i = h + k - j;
                if i > bound || i >= pi.len() || k >= pi.len() {
                    continue;
                }
                // lv of the left side must be ≥ 0.
                let lhs = (&pi[i] + &pi[j]).minus(&(lv_rk * Q::from_integer(BigInt::from(h))));
                let rhs = &pi[0] + &pi[k];
                let ok = match (&lhs, &rhs) {
                    (_, LogVal::Infinite) => true,
                    (LogVal::Infinite, _) => true,
                    (LogVal::Finite(a), LogVal::Finite(b)) => a >= b,
                };
                if !ok {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Lower convex hull of `{(i, lv(q_i))}` for a monic operator.
///
/// Slopes are reported as root valuations (the negated geometric slope), in
/// ascending order; a root valuation `s` corresponds to a root of absolute
/// value `B^{-s}`. Roots at zero (vanishing low coefficients) are counted in
/// `zero_roots`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub vertices: Vec<(usize, Q)>,
    pub slopes: Vec<(Q, usize)>,
    pub zero_roots: usize,
}

impl NewtonPolygon {
    pub fn from_points(points: Vec<(usize, Q)>) -> NewtonPolygon {
        let mut hull: Vec<(usize, Q)> = Vec::new();
        for pt in points {
            while hull.len() >= 2 {
                let (i1, v1) = &hull[hull.len() - 2];
                let (i2, v2) = &hull[hull.len() - 1];
                // Drop the middle point unless it lies strictly below the chord.
                let lhs = (v2 - v1) * Q::from_integer(BigInt::from(pt.0 - i1));
                let rhs = (&pt.1 - v1) * Q::from_integer(BigInt::from(i2 - i1));
                if lhs >= rhs {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        let zero_roots = hull.first().map_or(0, |p| p.0);
        let mut slopes: Vec<(Q, usize)> = hull
            .windows(2)
            .map(|w| {
                let len = w[1].0 - w[0].0;
                let sigma = (&w[1].1 - &w[0].1) / Q::from_integer(BigInt::from(len));
                (-sigma, len)
            })
            .collect();
        slopes.reverse();
        NewtonPolygon { vertices: hull, slopes, zero_roots }
    }

    /// All roots at zero: `T^n`.
    pub fn is_monomial(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.zero_roots + self.slopes.iter().map(|s| s.1).sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f5() -> FieldSpec {
        FieldSpec::gauss(5, 1).unwrap()
    }

    fn x() -> Scalar {
        Scalar::var(0)
    }

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn tp(c: Vec<Scalar>) -> TwistedPoly {
        TwistedPoly::new(c, 0)
    }

    #[test]
    fn commutation_rule() {
        let c = x().pow(2);
        let prod = TwistedPoly::t(0).mul(&TwistedPoly::constant(c.clone(), 0));
        assert_eq!(prod, tp(vec![c.derive(0), c]));
        assert_eq!(prod, TwistedPoly::t(0).mul_by_relation(&TwistedPoly::constant(x().pow(2), 0)));
    }

    #[test]
    fn square_of_t_minus_x() {
        let p = TwistedPoly::linear(x(), 0);
        let sq = p.mul(&p);
        let expect = tp(vec![&x().pow(2) - &Scalar::one(), &Scalar::int(-2) * &x(), Scalar::one()]);
        assert_eq!(sq, expect);
        assert_eq!(p.mul(&TwistedPoly::one(0)), p);
        assert_eq!(sq.divmod_right(&p).unwrap(), (p.clone(), TwistedPoly::zero(0)));
    }

    #[test]
    fn division_examples() {
        let t = TwistedPoly::t(0);
        assert_eq!(t.pow(2).divmod_right(&t).unwrap(), (t.clone(), TwistedPoly::zero(0)));
        assert_eq!(t.divmod_right(&t.pow(2)).unwrap(), (TwistedPoly::zero(0), t.clone()));
        assert_eq!(t.divmod_right(&TwistedPoly::zero(0)), Err(Error::DivisionByZero));
        let p = tp(vec![x(), Scalar::int(3), x().pow(2), Scalar::ratio(1, 7)]);
        let d = tp(vec![Scalar::one(), x()]);
        let (dq, r) = p.divmod_left(&d).unwrap();
        assert_eq!(d.mul(&dq).add(&r), p);
    }

    #[test]
    fn monicize_examples() {
        let five = tp(vec![Scalar::zero(), x(), Scalar::int(5)]);
        assert_eq!(five.monicize().unwrap(), tp(vec![Scalar::zero(), &x() / &Scalar::int(5), Scalar::one()]));
        let c = tp(vec![Scalar::zero(), x()]);
        assert_eq!(c.monicize().unwrap(), TwistedPoly::t(0));
        let m = tp(vec![Scalar::one(), Scalar::one()]);
        assert_eq!(m.monicize().unwrap(), m);
        assert_eq!(TwistedPoly::zero(0).monicize(), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn adjoint_reverses_products() {
        let a = tp(vec![x(), Scalar::one()]);
        let b = tp(vec![Scalar::ratio(1, 5), x().pow(2), Scalar::one()]);
        assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
        assert_eq!(a.adjoint().adjoint(), a);
        assert!(b.monic_adjoint().is_monic());
    }

    #[test]
    fn pi_norm_examples() {
        let f = f5();
        let params = PiNormParams::new(q(1, 4));
        assert_eq!(TwistedPoly::zero(0).pi_norm(&f, &params), LogVal::Infinite);
        assert_eq!(TwistedPoly::t(0).pi_norm(&f, &params), LogVal::Finite(q(-1, 4)));
        let c = TwistedPoly::constant(Scalar::ratio(1, 25), 0);
        assert_eq!(c.pi_norm(&f, &PiNormParams::new(q(7, 3))), LogVal::int(-2));
        assert!(params.is_valid(&f, 0));
        assert!(!PiNormParams::new(q(0, 1)).is_valid(&f, 0));
    }

    #[test]
    fn newton_polygon_examples() {
        let f = f5();
        let p = TwistedPoly::linear(&Scalar::int(1) / &Scalar::int(5), 0);
        let np = p.newton_polygon(&f).unwrap();
        assert_eq!(np.slopes, vec![(q(-1, 1), 1)]);
        let p = tp(vec![x(), Scalar::ratio(-1, 5), Scalar::one()]);
        let np = p.newton_polygon(&f).unwrap();
        assert_eq!(np.slopes, vec![(q(-1, 1), 1), (q(1, 1), 1)]);
        let np = TwistedPoly::t(0).pow(3).newton_polygon(&f).unwrap();
        assert!(np.is_monomial());
        assert_eq!((np.zero_roots, np.degree()), (3, 3));
        assert_eq!(tp(vec![Scalar::one(), Scalar::int(2)]).newton_polygon(&f), Err(Error::NotMonic));
        assert_eq!(TwistedPoly::zero(0).newton_polygon(&f), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn collinear_points_merge() {
        let np = NewtonPolygon::from_points(vec![(0, q(-2, 1)), (1, q(-1, 1)), (2, q(0, 1))]);
        assert_eq!(np.slopes, vec![(q(-1, 1), 2)]);
        assert_eq!(np.vertices.len(), 2);
    }

    #[test]
    fn inequality_grid_at_the_bound() {
        let lv_rk = q(1, 4);
        let at_bound = PiNormParams::new(lv_rk.clone()).sequence(21);
        assert_eq!(inequality_violations(&at_bound, &lv_rk, 20), 0);
        let too_large = PiNormParams::new(q(0, 1)).sequence(21);
        assert!(inequality_violations(&too_large, &lv_rk, 20) > 0);
    }

    #[test]
    fn text_form() {
        let p = tp(vec![x(), Scalar::ratio(-1, 5), Scalar::one()]);
        assert_eq!(p.fmt_with(&f5()), "T^2 + (-1/5)*T + x");
    }
}
