//! Dense polynomials over Q in at most two variables.
//!
//! A [`Poly`] is stored as a vector indexed by the degree in the second
//! variable whose entries are dense univariate polynomials in the first
//! variable. GCDs use primitive pseudo-remainder sequences over Z, which keeps
//! coefficient growth in check for the small degrees that show up here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::modp::{reduce_ints, word_primes, Fq};
use crate::Q;

/// Dense univariate polynomial, lowest degree first, no trailing zeros.
pub type UPoly = Vec<Q>;

pub(crate) fn u_trim(a: &mut UPoly) {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

pub(crate) fn u_add(a: &[Q], b: &[Q]) -> UPoly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let s = match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!(),
        };
        out.push(s);
    }
    u_trim(&mut out);
    out
}

pub(crate) fn u_neg(a: &[Q]) -> UPoly {
    a.iter().map(|c| -c).collect()
}

pub(crate) fn u_sub(a: &[Q], b: &[Q]) -> UPoly {
    u_add(a, &u_neg(b))
}

pub(crate) fn u_scale(a: &[Q], s: &Q) -> UPoly {
    if s.is_zero() {
        return Vec::new();
    }
    a.iter().map(|c| c * s).collect()
}

pub(crate) fn u_mul(a: &[Q], b: &[Q]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Multiply over Z after clearing denominators; much cheaper than
    // normalizing a rational at every step.
    let (ai, da) = to_int(a);
    let (bi, db) = to_int(b);
    let mut acc = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in ai.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in bi.iter().enumerate() {
            acc[i + j] += x * y;
        }
    }
    let d = da * db;
    let mut out: UPoly = acc.into_iter().map(|n| Q::new(n, d.clone())).collect();
    u_trim(&mut out);
    out
}

/// Clears denominators: returns integer coefficients and the common denominator.
fn to_int(a: &[Q]) -> (Vec<BigInt>, BigInt) {
    let mut l = BigInt::one();
    for c in a {
        l = l.lcm(c.denom());
    }
    let v = a.iter().map(|c| c.numer() * (&l / c.denom())).collect();
    (v, l)
}

pub(crate) fn u_derive(a: &[Q]) -> UPoly {
    let mut out: UPoly = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Q::from_integer(BigInt::from(i)))
        .collect();
    u_trim(&mut out);
    out
}

/// Division with remainder over Q; `b` must be nonzero.
pub(crate) fn u_divrem(a: &[Q], b: &[Q]) -> (UPoly, UPoly) {
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut r: UPoly = a.to_vec();
    u_trim(&mut r);
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let db = b.len() - 1;
    let lc_inv = b[db].recip();
    let mut q = vec![Q::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let c = r.last().unwrap() * &lc_inv;
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &c * bc;
        }
        q[shift] = c;
        r.pop();
        u_trim(&mut r);
    }
    u_trim(&mut q);
    (q, r)
}

fn int_content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn int_primitive(a: &[BigInt]) -> Vec<BigInt> {
    let c = int_content(a);
    if c.is_zero() || c.is_one() {
        return a.to_vec();
    }
    a.iter().map(|x| x / &c).collect()
}

fn int_trim(a: &mut Vec<BigInt>) {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
}

/// Primitive pseudo-remainder of integer polynomials.
fn int_prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    int_trim(&mut r);
    let db = b.len() - 1;
    let lb = &b[db];
    while r.len() > db && !r.is_empty() {
        let shift = r.len() - 1 - db;
        let lr = r.last().unwrap().clone();
        for c in r.iter_mut() {
            *c *= lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &lr * bc;
        }
        r.pop();
        int_trim(&mut r);
    }
    int_primitive(&r)
}

/// Whether the primitive polynomial `h` divides `x` over Z (equivalently
/// over Q, by Gauss's lemma).
fn int_divides(h: &[BigInt], x: &[BigInt]) -> bool {
    let mut r = x.to_vec();
    int_trim(&mut r);
    let dh = h.len() - 1;
    let lh = &h[dh];
    while r.len() > dh {
        let (c, rem) = r.last().unwrap().div_rem(lh);
        if !rem.is_zero() {
            return false;
        }
        let shift = r.len() - 1 - dh;
        for (i, hc) in h.iter().enumerate() {
            r[shift + i] -= &c * hc;
        }
        int_trim(&mut r);
    }
    r.is_empty()
}

/// Gcd of primitive integer polynomials from images modulo word-sized
/// primes, combined by Chinese remaindering and confirmed by trial division.
/// `None` if the primes run out.
fn int_gcd_modular(x: &[BigInt], y: &[BigInt]) -> Option<Vec<BigInt>> {
    let (lx, ly) = (x.last()?, y.last()?);
    let gamma = lx.gcd(ly);
    let mut deg = usize::MAX;
    let mut acc: Vec<BigInt> = Vec::new();
    let mut modulus = BigInt::one();
    let mut prev: Option<Vec<BigInt>> = None;
    for &q in word_primes() {
        let f = Fq::new(q);
        if f.from_int(lx) == 0 || f.from_int(ly) == 0 {
            continue;
        }
        let g = f.poly_gcd(&reduce_ints(f, x), &reduce_ints(f, y));
        let d = g.len() - 1;
        if d == 0 {
            return Some(vec![BigInt::one()]);
        }
        if d > deg {
            continue;
        }
        let gm = f.from_int(&gamma);
        let img: Vec<u64> = g.iter().map(|&c| f.mul(c, gm)).collect();
        let qb = BigInt::from(q);
        if d < deg {
            deg = d;
            acc = img.iter().map(|&c| BigInt::from(c)).collect();
            modulus = qb;
            prev = None;
        } else {
            let minv = BigInt::from(f.inv(f.from_int(&modulus)));
            for (a, &c) in acc.iter_mut().zip(&img) {
                let t = ((BigInt::from(c) - &*a) * &minv).mod_floor(&qb);
                *a += &modulus * t;
            }
            modulus *= qb;
        }
        let half = &modulus >> 1;
        let cand: Vec<BigInt> = acc.iter().map(|a| if a > &half { a - &modulus } else { a.clone() }).collect();
        if prev.as_ref() == Some(&cand) {
            let h = int_primitive(&cand);
            if int_divides(&h, x) && int_divides(&h, y) {
                return Some(h);
            }
        }
        prev = Some(cand);
    }
    None
}

/// Monic gcd over Q.
pub(crate) fn u_gcd(a: &[Q], b: &[Q]) -> UPoly {
    if a.is_empty() {
        return u_monic(b);
    }
    if b.is_empty() {
        return u_monic(a);
    }
    if a.len() == 1 || b.len() == 1 {
        return vec![Q::one()];
    }
    let mut x = int_primitive(&to_int(a).0);
    let mut y = int_primitive(&to_int(b).0);
    if let Some(g) = int_gcd_modular(&x, &y) {
        let q: UPoly = g.into_iter().map(Q::from_integer).collect();
        return u_monic(&q);
    }
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        let r = int_prem(&x, &y);
        if r.is_empty() {
            break;
        }
        if r.len() == 1 {
            return vec![Q::one()];
        }
        x = y;
        y = r;
    }
    let q: UPoly = y.into_iter().map(Q::from_integer).collect();
    u_monic(&q)
}

pub(crate) fn u_monic(a: &[Q]) -> UPoly {
    match a.last() {
        None => Vec::new(),
        Some(l) => {
            let inv = l.recip();
            a.iter().map(|c| c * &inv).collect()
        }
    }
}

/// Exact quotient; panics in debug builds if the division is not exact.
pub(crate) fn u_exact_div(a: &[Q], b: &[Q]) -> UPoly {
    let (q, r) = u_divrem(a, b);
    debug_assert!(r.is_empty(), "inexact univariate division");
    q
}

/// Polynomial over Q in variables `x0` (inner) and `x1` (outer).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    /// `c[j]` is the coefficient of `x1^j`, a polynomial in `x0`.
    c: Vec<UPoly>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(q: Q) -> Self {
        if q.is_zero() {
            Self::zero()
        } else {
            Poly { c: vec![vec![q]] }
        }
    }

    /// The variable `x_j` (j ∈ {0, 1}).
    pub fn var(j: usize) -> Self {
        match j {
            0 => Poly { c: vec![vec![Q::zero(), Q::one()]] },
            1 => Poly { c: vec![Vec::new(), vec![Q::one()]] },
            _ => panic!("at most two variables are supported"),
        }
    }

    pub fn from_upoly(u: UPoly) -> Self {
        let mut p = Poly { c: vec![u] };
        p.trim();
        p
    }

    /// Builds from `(e0, e1, coeff)` terms.
    pub fn from_terms<I: IntoIterator<Item = (usize, usize, Q)>>(terms: I) -> Self {
        let mut c: Vec<UPoly> = Vec::new();
        for (e0, e1, q) in terms {
            if c.len() <= e1 {
                c.resize(e1 + 1, Vec::new());
            }
            if c[e1].len() <= e0 {
                c[e1].resize(e0 + 1, Q::zero());
            }
            c[e1][e0] += q;
        }
        for u in c.iter_mut() {
            u_trim(u);
        }
        let mut p = Poly { c };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|u| u.is_empty()) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].len() == 1 && self.c[0][0].is_one()
    }

    /// Constant value if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Q> {
        match self.c.len() {
            0 => Some(Q::zero()),
            1 if self.c[0].len() <= 1 => Some(self.c[0].first().cloned().unwrap_or_else(Q::zero)),
            _ => None,
        }
    }

    /// Degree in `x1`, or `None` for zero.
    pub fn deg1(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    /// Degree in `x0`.
    pub fn deg0(&self) -> Option<usize> {
        self.c.iter().filter_map(|u| u.len().checked_sub(1)).max()
    }

    /// Highest number of variables actually used (0, 1 or 2).
    pub fn uses_x1(&self) -> bool {
        self.c.len() > 1
    }

    /// Iterates over `(e0, e1, coeff)` for nonzero coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, &Q)> {
        self.c.iter().enumerate().flat_map(|(e1, u)| {
            u.iter()
                .enumerate()
                .filter(|(_, q)| !q.is_zero())
                .map(move |(e0, q)| (e0, e1, q))
        })
    }

    pub fn coeffs(&self) -> impl Iterator<Item = &Q> {
        self.c.iter().flat_map(|u| u.iter()).filter(|q| !q.is_zero())
    }

    /// The coefficient polynomials in `x0` (index = power of `x1`).
    pub fn slices(&self) -> &[UPoly] {
        &self.c
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let empty: UPoly = Vec::new();
        let c = (0..n)
            .map(|j| u_add(self.c.get(j).unwrap_or(&empty), o.c.get(j).unwrap_or(&empty)))
            .collect();
        let mut p = Poly { c };
        p.trim();
        p
    }

    pub fn neg(&self) -> Poly {
        Poly { c: self.c.iter().map(|u| u_neg(u)).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|u| u_scale(u, s)).collect() }
    }

    fn mul_upoly(&self, u: &[Q]) -> Poly {
        let mut p = Poly { c: self.c.iter().map(|v| u_mul(v, u)).collect() };
        p.trim();
        p
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Vec::new(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if b.is_empty() {
                    continue;
                }
                c[i + j] = u_add(&c[i + j], &u_mul(a, b));
            }
        }
        let mut p = Poly { c };
        p.trim();
        p
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative with respect to `x_j`.
    pub fn derive(&self, j: usize) -> Poly {
        let mut p = match j {
            0 => Poly { c: self.c.iter().map(|u| u_derive(u)).collect() },
            1 => Poly {
                c: self
                    .c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, u)| u_scale(u, &Q::from_integer(BigInt::from(k))))
                    .collect(),
            },
            _ => panic!("at most two variables are supported"),
        };
        p.trim();
        p
    }

    /// Leading coefficient for the order (deg x1, then deg x0).
    pub fn leading_coeff(&self) -> Option<&Q> {
        self.c.last().and_then(|u| u.last())
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.recip()),
        }
    }

    /// Content with respect to `x1`: monic gcd of the `x0`-coefficients.
    fn content1(&self) -> UPoly {
        let mut g: UPoly = Vec::new();
        for u in &self.c {
            if u.is_empty() {
                continue;
            }
            g = u_gcd(&g, u);
            if g.len() == 1 {
                break;
            }
        }
        g
    }

    fn div_upoly(&self, u: &[Q]) -> Poly {
        Poly { c: self.c.iter().map(|v| u_exact_div(v, u)).collect() }
    }

    /// Exact division; the caller guarantees `d` divides `self`.
    pub fn exact_div(&self, d: &Poly) -> Poly {
        assert!(!d.is_zero(), "division by zero polynomial");
        if let Some((a, b)) = d.monomial_exps() {
            let c = d.leading_coeff().unwrap().recip();
            return self.shift_down(a, b).scale(&c);
        }
        if d.c.len() == 1 {
            return self.div_upoly(&d.c[0]);
        }
        let mut r = self.clone();
        let dd = d.c.len() - 1;
        let lc = d.c.last().unwrap().clone();
        let mut q = vec![Vec::new(); r.c.len().saturating_sub(dd)];
        while r.c.len() > dd && !r.is_zero() {
            let shift = r.c.len() - 1 - dd;
            let t = u_exact_div(r.c.last().unwrap(), &lc);
            for (i, dc) in d.c.iter().enumerate() {
                r.c[shift + i] = u_sub(&r.c[shift + i], &u_mul(&t, dc));
            }
            q[shift] = t;
            r.trim();
        }
        debug_assert!(r.is_zero(), "inexact bivariate division");
        let mut p = Poly { c: q };
        p.trim();
        p
    }

    /// Exponents `(e0, e1)` if the polynomial is a single term.
    fn monomial_exps(&self) -> Option<(usize, usize)> {
        let mut it = self.terms();
        let (e0, e1, _) = it.next()?;
        it.next().is_none().then_some((e0, e1))
    }

    /// Lowest exponents of `x0` and `x1` over all terms.
    fn min_exps(&self) -> (usize, usize) {
        self.terms().fold((usize::MAX, usize::MAX), |(a, b), (e0, e1, _)| (a.min(e0), b.min(e1)))
    }

    fn shift_down(&self, a: usize, b: usize) -> Poly {
        Poly::from_terms(self.terms().map(|(e0, e1, q)| (e0 - a, e1 - b, q.clone())))
    }

    /// Monic gcd over Q.
    pub fn gcd(&self, o: &Poly) -> Poly {
        if self.is_zero() {
            return o.monic();
        }
        if o.is_zero() {
            return self.monic();
        }
        for (m, other) in [(self, o), (o, self)] {
            if let Some((a, b)) = m.monomial_exps() {
                let (c, d) = other.min_exps();
                return Poly::from_terms([(a.min(c), b.min(d), Q::one())]);
            }
        }
        if self.c.len() == 1 && o.c.len() == 1 {
            return Poly::from_upoly(u_gcd(&self.c[0], &o.c[0]));
        }
        let ca = self.content1();
        let cb = o.content1();
        let gc = u_gcd(&ca, &cb);
        let mut a = self.div_upoly(&ca);
        let mut b = o.div_upoly(&cb);
        if a.c.len() < b.c.len() {
            std::mem::swap(&mut a, &mut b);
        }
        let g = loop {
            if b.c.len() == 1 {
                // b is primitive and free of x1, hence a unit.
                break Poly::one();
            }
            let r = a.prem1(&b);
            if r.is_zero() {
                break b;
            }
            let rc = r.content1();
            let r = r.div_upoly(&rc);
            a = b;
            b = r;
        };
        g.mul_upoly(&gc).monic()
    }

    /// Pseudo-remainder with respect to `x1`.
    fn prem1(&self, d: &Poly) -> Poly {
        let mut r = self.clone();
        let dd = d.c.len() - 1;
        let lc = d.c.last().unwrap().clone();
        while r.c.len() > dd && !r.is_zero() {
            let shift = r.c.len() - 1 - dd;
            let lr = r.c.last().unwrap().clone();
            r = r.mul_upoly(&lc);
            for (i, dc) in d.c.iter().enumerate() {
                r.c[shift + i] = u_sub(&r.c[shift + i], &u_mul(&lr, dc));
            }
            r.trim();
        }
        r
    }

    /// Evaluates `x0` and `x1` at rationals.
    pub fn eval(&self, x0: &Q, x1: &Q) -> Q {
        let mut acc = Q::zero();
        for u in self.c.iter().rev() {
            let mut inner = Q::zero();
            for q in u.iter().rev() {
                inner = inner * x0 + q;
            }
            acc = acc * x1 + inner;
        }
        acc
    }

    /// Lowest total degree among nonzero terms with respect to `x0` only,
    /// assuming the polynomial does not involve `x1`.
    pub fn order0(&self) -> Option<usize> {
        self.c.first().and_then(|u| u.iter().position(|q| !q.is_zero()))
    }

    /// Least common multiple of coefficient denominators.
    pub fn denom_lcm(&self) -> BigInt {
        self.coeffs().fold(BigInt::one(), |l, q| l.lcm(q.denom()))
    }

    /// Gcd of the integer numerators after clearing denominators with `l`.
    pub fn int_content(&self, l: &BigInt) -> BigInt {
        self.coeffs()
            .fold(BigInt::zero(), |g, q| g.gcd(&(q.numer() * (l / q.denom()))))
            .abs()
    }
}
