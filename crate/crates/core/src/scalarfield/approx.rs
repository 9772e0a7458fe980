//! Finite-precision images of scalars.
//!
//! GaussPadic: `x = p^e · u · A/B` with `A`, `B` primitive integer
//! polynomials and `u` a p-adic unit; rounding reduces `u·A` and `B` modulo
//! `p^M`. Both `B` and its rounding are Gauss units, so the error has
//! valuation at least `e + M`. When `B` is congruent to a monomial mod `p`,
//! `1/B` is a Neumann series that terminates mod `p^M` and the rounding has a
//! monomial denominator; this keeps denominators from compounding in
//! iterations.
//!
//! LaurentCharZero: `x = z^e · A/B` with `A(0) B(0) ≠ 0`; rounding keeps the
//! power series of `A/B` below `z^M`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::field::{FieldKind, FieldSpec};
use super::logval::{vp_int, LogVal};
use super::modp::{reduce_ints, Fq};
use super::poly::{Poly, UPoly};
use super::scalar::Scalar;
use crate::error::{Error, Result};
use crate::factorize::PrecisionCtx;
use crate::Q;

/// A scalar known up to an additive error of valuation at least `err`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxScalar {
    pub value: Scalar,
    pub err: LogVal,
}

impl ApproxScalar {
    pub fn exact(value: Scalar) -> Self {
        ApproxScalar { value, err: LogVal::Infinite }
    }
}

fn ceil_q(q: &Q) -> BigInt {
    q.ceil().to_integer()
}

fn to_i64(b: &BigInt) -> i64 {
    b.to_string().parse().unwrap_or(i64::MAX)
}

/// Splits a nonzero polynomial as `c · A` with `A` a primitive integer
/// polynomial and `c` rational.
fn primitive_split(p: &Poly) -> (Q, Poly) {
    let l = p.denom_lcm();
    let cont = p.int_content(&l);
    let c = Q::new(cont, l);
    let a = p.scale(&c.recip());
    (c, a)
}

fn sym_mod(n: &BigInt, m: &BigInt) -> BigInt {
    let r = n.mod_floor(m);
    if &r * 2 > *m {
        r - m
    } else {
        r
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

fn reduce_poly_mod(p: &Poly, s: &BigInt, m: &BigInt) -> Poly {
    Poly::from_terms(p.terms().map(|(e0, e1, q)| {
        debug_assert!(q.is_integer());
        (e0, e1, Q::from_integer(sym_mod(&(q.numer() * s), m)))
    }))
}

/// Rounds `x` to absolute precision `w`: the result `y` has `lv(x - y) ≥ w`.
pub fn round_abs(field: &FieldSpec, x: &Scalar, w: &Q) -> Result<ApproxScalar> {
    if x.is_zero() {
        return Ok(ApproxScalar::exact(Scalar::zero()));
    }
    match field.kind {
        FieldKind::GaussPadic { p } => round_gauss(p, x, w),
        FieldKind::LaurentCharZero => round_laurent(x, w),
    }
}

fn round_gauss(p: u64, x: &Scalar, w: &Q) -> Result<ApproxScalar> {
    let (cn, a) = primitive_split(x.num());
    let (cd, b) = primitive_split(x.den());
    let s = cn / cd;
    let e = vp_int(s.numer(), p) - vp_int(s.denom(), p);
    let m_rel = ceil_q(&(w - Q::from_integer(BigInt::from(e))));
    if !m_rel.is_positive() {
        return Ok(ApproxScalar { value: Scalar::zero(), err: LogVal::Finite(Q::from_integer(BigInt::from(e))) });
    }
    let m_rel = to_i64(&m_rel);
    let pb = BigInt::from(p);
    let modulus = num_traits::pow(pb.clone(), m_rel as usize);
    let unit = &s / pow_q(&pb, e);
    let u = (unit.numer() * mod_inverse(unit.denom(), &modulus)).mod_floor(&modulus);
    let a2 = reduce_poly_mod(&a, &u, &modulus);
    let b2 = reduce_poly_mod(&b, &BigInt::one(), &modulus);
    let scale = pow_q(&pb, e);
    let value = if let Some((inv, den)) = series_inverse(&b2, &pb, &modulus) {
        Scalar::new(reduce_poly_mod(&a2.mul(&inv), &BigInt::one(), &modulus).scale(&scale), den)
    } else if let Some((num, den)) = l_adic_quotient(&a2, &b2, p, &modulus, m_rel as usize) {
        Scalar::new(num.scale(&scale), den)
    } else {
        Scalar::new(a2.scale(&scale), b2)
    };
    Ok(ApproxScalar { value, err: LogVal::int(e + m_rel) })
}

/// Inverse of the integer polynomial `b` modulo `m = p^k` as `S / μ^r` with
/// `μ` a monomial, provided `b` reduces mod `p` to a single term `c·μ`.
fn series_inverse(b: &Poly, p: &BigInt, m: &BigInt) -> Option<(Poly, Poly)> {
    let mut lead = None;
    for (e0, e1, q) in b.terms() {
        if !q.numer().is_multiple_of(p) {
            if lead.is_some() {
                return None;
            }
            lead = Some((e0, e1, q.numer().clone()));
        }
    }
    let (e0, e1, c) = lead?;
    let mono = Poly::from_terms([(e0, e1, Q::one())]);
    let cinv = mod_inverse(&c, m);
    // b = c·μ·(1 + E) with E = rest/(c·μ); the terms of Σ(-E)^k vanish mod m
    // once k reaches the precision.
    let rest = b.sub(&mono.scale(&Q::from_integer(c)));
    let step = reduce_poly_mod(&rest, &cinv, m).neg();
    let mut terms = vec![Poly::one()];
    loop {
        let next = reduce_poly_mod(&terms.last().unwrap().mul(&step), &BigInt::one(), m);
        if next.is_zero() {
            break;
        }
        terms.push(next);
    }
    let r = terms.len();
    let mut sum = Poly::zero();
    for (k, t) in terms.iter().enumerate() {
        sum = sum.add(&t.mul(&mono.pow((r - 1 - k) as u32)));
    }
    Some((reduce_poly_mod(&sum, &cinv, m), mono.pow(r as u32)))
}

type IntPoly = Vec<BigInt>;

fn ip_trim(mut a: IntPoly) -> IntPoly {
    while a.last().is_some_and(Zero::is_zero) {
        a.pop();
    }
    a
}

fn ip_mod(a: &[BigInt], m: &BigInt) -> IntPoly {
    ip_trim(a.iter().map(|c| sym_mod(c, m)).collect())
}

fn ip_mul(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    ip_trim(out)
}

fn ip_add(a: &[BigInt], b: &[BigInt]) -> IntPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    ip_trim((0..n).map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z)).collect())
}

/// Division by a monic integer polynomial.
fn ip_divrem_monic(a: &[BigInt], l: &[BigInt]) -> (IntPoly, IntPoly) {
    let mut r = ip_trim(a.to_vec());
    let dl = l.len() - 1;
    if r.len() <= dl {
        return (Vec::new(), r);
    }
    let mut q = vec![BigInt::zero(); r.len() - dl];
    while r.len() > dl {
        let shift = r.len() - 1 - dl;
        let c = r.pop().unwrap();
        for (i, lc) in l[..dl].iter().enumerate() {
            r[shift + i] -= &c * lc;
        }
        q[shift] = c;
        r = ip_trim(r);
    }
    (ip_trim(q), r)
}

fn ip_of(p: &Poly) -> IntPoly {
    ip_trim(upoly_of(p).iter().map(|c| c.numer().clone()).collect())
}

fn poly_of(a: &[BigInt]) -> Poly {
    Poly::from_upoly(a.iter().map(|c| Q::from_integer(c.clone())).collect())
}

/// `a/b` modulo `p^m` as `N/L^R`, with `L` the monic lift of the radical of
/// `b mod p`. Elements of the completion have `L`-adic expansions
/// `Σ c_i L^i` (`deg c_i < deg L`) whose digits tend to zero, so after
/// dropping the digits that vanish mod `p^m` the power `R` stays bounded.
/// Univariate integer inputs only.
fn l_adic_quotient(a: &Poly, b: &Poly, p: u64, modulus: &BigInt, m: usize) -> Option<(Poly, Poly)> {
    if a.uses_x1() || b.uses_x1() {
        return None;
    }
    let f = Fq::new(p);
    let bi = ip_of(b);
    let bbar = reduce_ints(f, &bi);
    let lbar = f.radical(&bbar);
    if lbar.len() <= 1 {
        return None;
    }
    let mut k = 1;
    let mut lk = lbar.clone();
    while !f.poly_divrem(&lk, &bbar).1.is_empty() {
        lk = f.poly_mul(&lk, &lbar);
        k += 1;
    }
    let cofactor = f.poly_divrem(&lk, &bbar).0;
    let lift = |v: &[u64]| -> IntPoly { ip_trim(v.iter().map(|&c| BigInt::from(f.lift(c))).collect()) };
    let l = lift(&lbar);
    let q0 = lift(&cofactor);
    let mut l_k = vec![BigInt::one()];
    for _ in 0..k {
        l_k = ip_mul(&l_k, &l);
    }
    // b·q0 = L^k - Δ with p | Δ, so 1/b = q0 Σ Δ^i / L^{k(i+1)}.
    let delta = ip_add(&l_k, &ip_mul(&bi, &q0).iter().map(|c| -c).collect::<Vec<_>>());
    let mut terms = Vec::with_capacity(m);
    let mut t = ip_mod(&q0, modulus);
    while !t.is_empty() && terms.len() < m {
        terms.push(t.clone());
        t = ip_mod(&ip_mul(&t, &delta), modulus);
    }
    let mut num: IntPoly = Vec::new();
    for term in &terms {
        num = ip_add(&ip_mod(&ip_mul(&num, &l_k), modulus), term);
    }
    let mut num = ip_mod(&ip_mul(&ip_of(a), &num), modulus);
    let mut r = k * terms.len();
    while r > 0 {
        let (q, rem) = ip_divrem_monic(&num, &l);
        if !ip_mod(&rem, modulus).is_empty() {
            break;
        }
        num = ip_mod(&q, modulus);
        r -= 1;
    }
    Some((poly_of(&num), poly_of(&l).pow(r as u32)))
}

fn pow_signed(b: &BigInt, e: i64) -> BigInt {
    num_traits::pow(b.clone(), e.unsigned_abs() as usize)
}

fn pow_q(b: &BigInt, e: i64) -> Q {
    let m = Q::from_integer(pow_signed(b, e));
    if e < 0 {
        m.recip()
    } else {
        m
    }
}

fn upoly_of(p: &Poly) -> UPoly {
    p.slices().first().cloned().unwrap_or_default()
}

fn round_laurent(x: &Scalar, w: &Q) -> Result<ApproxScalar> {
    if x.uses_x1() {
        return Err(Error::NotExpandable("Laurent window is univariate".into()));
    }
    let a = upoly_of(x.num());
    let b = upoly_of(x.den());
    let oa = a.iter().position(|c| !c.is_zero()).unwrap();
    let ob = b.iter().position(|c| !c.is_zero()).unwrap();
    let e = oa as i64 - ob as i64;
    let m_rel = ceil_q(&(w - Q::from_integer(BigInt::from(e))));
    if !m_rel.is_positive() {
        return Ok(ApproxScalar { value: Scalar::zero(), err: LogVal::int(e) });
    }
    let m = to_i64(&m_rel) as usize;
    let a = &a[oa..];
    let b = &b[ob..];
    // Power series division a / b mod z^m.
    let b0inv = b[0].recip();
    let mut s: Vec<Q> = Vec::with_capacity(m);
    for k in 0..m {
        let mut acc = a.get(k).cloned().unwrap_or_else(Q::zero);
        for i in 1..=k.min(b.len() - 1) {
            acc -= &b[i] * &s[k - i];
        }
        s.push(acc * &b0inv);
    }
    let series = Scalar::from_poly(Poly::from_upoly(s));
    let shift = Scalar::var(0).pow(e as i32);
    Ok(ApproxScalar { value: &series * &shift, err: LogVal::int(e + m as i64) })
}

/// Finite-precision image of `x` at the context's target precision.
pub fn reduce(field: &FieldSpec, x: &Scalar, ctx: &PrecisionCtx) -> Result<ApproxScalar> {
    field.check_scalar(x)?;
    let r = round_abs(field, x, &ctx.n)?;
    let h = r.value.degree_height();
    if h > ctx.d {
        return Err(Error::PrecisionLoss(format!("representation degree {h} exceeds cap {}", ctx.d)));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: i64, d: usize) -> PrecisionCtx {
        PrecisionCtx { n: Q::from_integer(BigInt::from(n)), d, max_iter: 10 }
    }

    #[test]
    fn reduce_units_and_constants() {
        let f = FieldSpec::gauss(5, 1).unwrap();
        let one = reduce(&f, &Scalar::one(), &ctx(3, 4)).unwrap();
        assert_eq!(one.value, Scalar::one());
        let fifth = Scalar::ratio(1, 5);
        let r = reduce(&f, &fifth, &ctx(3, 4)).unwrap();
        assert_eq!(r.value, fifth);
        assert!(r.err >= LogVal::int(3));
    }

    #[test]
    fn rounding_error_meets_target() {
        let f = FieldSpec::gauss(5, 1).unwrap();
        let x = Scalar::var(0);
        let v = &(&Scalar::ratio(7, 3) * &x) / &(&Scalar::one() - &x);
        for n in [1, 2, 5] {
            let r = reduce(&f, &v, &ctx(n, 8)).unwrap();
            assert!(f.val(&(&v - &r.value)) >= LogVal::int(n));
            assert!(r.err >= LogVal::int(n));
        }
    }

    #[test]
    fn laurent_rounding_truncates_series() {
        let f = FieldSpec::laurent();
        let z = Scalar::var(0);
        let v = (&Scalar::one() - &z).inv();
        let r = reduce(&f, &v, &ctx(3, 8)).unwrap();
        assert_eq!(r.value, &(&Scalar::one() + &z) + &z.pow(2));
        assert!(f.val(&(&v - &r.value)) >= LogVal::int(3));
    }

    #[test]
    fn repeated_residual_factors_keep_denominators_bounded() {
        let f = FieldSpec::gauss(5, 1).unwrap();
        let x = Scalar::var(0);
        let one = Scalar::one();
        // Residual denominator x^2 (x + 1)^3, perturbed by multiples of 5.
        let b = &(&x.pow(2) * &(&x + &one).pow(3)) + &(&Scalar::int(10) * &x);
        let v = &(&Scalar::int(3) + &x) / &b;
        let radical = &x * &(&x + &one);
        for n in [2, 4, 8] {
            let r = reduce(&f, &v, &ctx(n, 128)).unwrap();
            assert!(f.val(&(&v - &r.value)) >= LogVal::int(n));
            let den = Scalar::from_poly(r.value.den().clone());
            let k = (0..=3 * n as usize)
                .find(|&k| (&radical.pow(k as i32) / &den).den().as_constant().is_some())
                .unwrap_or_else(|| panic!("denominator {den:?} does not divide a small power of x(x+1)"));
            assert!(k > 0);
        }
    }

    #[test]
    fn degree_cap_and_window_errors() {
        let f = FieldSpec::laurent();
        let z = Scalar::var(0);
        let v = (&Scalar::one() - &z).inv();
        assert!(matches!(reduce(&f, &v, &ctx(6, 2)), Err(Error::PrecisionLoss(_))));
        let g = FieldSpec::gauss(5, 2).unwrap();
        assert!(matches!(round_abs(&f, &Scalar::var(1), &Q::one()), Err(Error::NotExpandable(_))));
        assert!(round_abs(&g, &Scalar::var(1), &Q::one()).is_ok());
    }
}
