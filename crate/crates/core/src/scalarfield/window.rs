//! Truncated arithmetic in the Gauss completion of `Q(x)` restricted to
//! `Z_p⟨x, 1/L⟩[1/p]` for a fixed monic integer polynomial `L`.
//!
//! An element is `p^e · N / L^r` with `N ∈ Z[x]` known modulo `p^(abs - e)`:
//! the represented value is only known up to an error of valuation `≥ abs`.
//! Since `|L| = 1`, the Gauss valuation is exactly `e` when `N ≢ 0 mod p`.
//! Precision is tracked through every operation, so valuations read off a
//! result are certified. Coefficients are machine words, which caps the
//! relative precision at `kmax` digits with `p^kmax < 2^63`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::logval::vp_int;
use super::modp::{reduce_ints, Fq, FqPoly};
use super::poly::Poly;
use super::scalar::Scalar;
use crate::Q;

/// Stand-in for infinite absolute precision.
pub(crate) const EXACT: i64 = i64::MAX / 8;

type MPoly = Vec<u64>;

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn addmod(a: u64, b: u64, m: u64) -> u64 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

fn trim(a: &mut MPoly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn pmod(a: &[u64], m: u64) -> MPoly {
    let mut out: MPoly = a.iter().map(|&c| c % m).collect();
    trim(&mut out);
    out
}

fn padd(a: &[u64], b: &[u64], m: u64) -> MPoly {
    let n = a.len().max(b.len());
    let mut out: MPoly =
        (0..n).map(|i| addmod(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0), m)).collect();
    trim(&mut out);
    out
}

fn pneg(a: &[u64], m: u64) -> MPoly {
    a.iter().map(|&c| if c == 0 { 0 } else { m - c }).collect()
}

fn pscale(a: &[u64], c: u64, m: u64) -> MPoly {
    let mut out: MPoly = a.iter().map(|&x| mulmod(x, c, m)).collect();
    trim(&mut out);
    out
}

fn pmul(a: &[u64], b: &[u64], m: u64) -> MPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut acc = vec![0u128; a.len() + b.len() - 1];
    let m128 = m as u128;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            let s = acc[i + j] + (x as u128) * (y as u128);
            // Products are below 2^126, so one reduction keeps the sum in range.
            acc[i + j] = if s >= 1 << 126 { s % m128 } else { s };
        }
    }
    let mut out: MPoly = acc.into_iter().map(|s| (s % m128) as u64).collect();
    trim(&mut out);
    out
}

fn pderive(a: &[u64], m: u64) -> MPoly {
    let mut out: MPoly = a.iter().enumerate().skip(1).map(|(i, &c)| mulmod(c, i as u64 % m, m)).collect();
    trim(&mut out);
    out
}

/// Division by a monic polynomial modulo `m`.
fn pdivrem_monic(a: &[u64], l: &[u64], m: u64) -> (MPoly, MPoly) {
    let dl = l.len() - 1;
    let mut r = a.to_vec();
    trim(&mut r);
    if r.len() <= dl {
        return (Vec::new(), r);
    }
    let mut q = vec![0u64; r.len() - dl];
    while r.len() > dl {
        let shift = r.len() - 1 - dl;
        let c = r.pop().unwrap();
        if c != 0 {
            for (i, &lc) in l[..dl].iter().enumerate() {
                r[shift + i] = addmod(r[shift + i], m - mulmod(c, lc, m), m);
            }
        }
        q[shift] = c;
    }
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

fn ppow(a: &[u64], k: u32, m: u64) -> MPoly {
    let mut out = pmod(&[1], m);
    for _ in 0..k {
        out = pmul(&out, a, m);
    }
    out
}

/// `p`-adic valuation of a nonzero residue.
fn vp_u64(mut c: u64, p: u64) -> i64 {
    let mut v = 0;
    while c.is_multiple_of(p) {
        c /= p;
        v += 1;
    }
    v
}

/// Element `p^e · n / L^r`, known up to valuation `abs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct WElem {
    e: i64,
    abs: i64,
    r: u32,
    n: MPoly,
}

impl WElem {
    pub fn is_zero(&self) -> bool {
        self.n.is_empty()
    }

    /// Exact valuation, or `None` when the element is zero to precision.
    pub fn val(&self) -> Option<i64> {
        (!self.is_zero()).then_some(self.e)
    }

    /// Valuation if known, else the precision: a lower bound either way.
    pub fn val_bound(&self) -> i64 {
        if self.is_zero() {
            self.abs
        } else {
            self.e
        }
    }

    pub fn abs(&self) -> i64 {
        self.abs
    }
}

/// Arithmetic context: the prime, the base polynomial `L` and the word-size
/// precision limit.
#[derive(Clone, Debug)]
pub(crate) struct Window {
    p: u64,
    kmax: i64,
    pows: Vec<u64>,
    /// `L` with small integer coefficients.
    l_int: Vec<i64>,
    /// `L` and `L'` reduced modulo `p^kmax`.
    l: MPoly,
    dl: MPoly,
    lbar: FqPoly,
}

impl Window {
    /// Window whose base is the monic lift of `lbar` (monic, over `F_p`).
    pub fn new(p: u64, lbar: &[u64]) -> Window {
        let f = Fq::new(p);
        let lbar = if lbar.is_empty() { vec![1] } else { f.monic(lbar) };
        let l_int: Vec<i64> = lbar.iter().map(|&c| f.lift(c)).collect();
        Window::from_int_base(p, l_int)
    }

    fn from_int_base(p: u64, l_int: Vec<i64>) -> Window {
        let mut pows = vec![1u64];
        while let Some(next) = pows.last().unwrap().checked_mul(p).filter(|&v| v < 1 << 63) {
            pows.push(next);
        }
        let kmax = (pows.len() - 1) as i64;
        let big = pows[kmax as usize];
        let l: MPoly = l_int.iter().map(|&c| BigInt::from(c).mod_floor(&BigInt::from(big)).to_u64().unwrap()).collect();
        let dl = pderive(&l, big);
        let lbar = pmod(&l, p);
        Window { p, kmax, pows, l_int, l, dl, lbar }
    }

    /// Window whose base covers the denominators of all `scalars`, which
    /// must be univariate.
    pub fn covering<'a>(p: u64, scalars: impl IntoIterator<Item = &'a Scalar>) -> Option<Window> {
        let f = Fq::new(p);
        let mut prod: FqPoly = vec![1];
        for s in scalars {
            if s.uses_x1() {
                return None;
            }
            if s.is_zero() {
                continue;
            }
            prod = f.poly_mul(&prod, &f.radical(&primitive_image(f, s.den())));
            prod = f.radical(&prod);
        }
        Some(Window::new(p, &prod))
    }

    /// Window whose base also covers the reduction `extra` (nonzero).
    pub fn extended(&self, extra: &[u64]) -> Window {
        let f = Fq::new(self.p);
        let want = f.radical(extra);
        let common = f.poly_gcd(&want, &self.lbar);
        let new = f.poly_divrem(&want, &common).0;
        if new.len() <= 1 {
            return self.clone();
        }
        let c_int: Vec<i64> = f.monic(&new).iter().map(|&c| f.lift(c)).collect();
        let mut l_int = vec![0i64; self.l_int.len() + c_int.len() - 1];
        for (i, a) in self.l_int.iter().enumerate() {
            for (j, b) in c_int.iter().enumerate() {
                l_int[i + j] += a * b;
            }
        }
        Window::from_int_base(self.p, l_int)
    }

    fn l_mod(&self, m: u64) -> MPoly {
        self.l.iter().map(|&c| c % m).collect()
    }

    pub fn zero(&self, abs: i64) -> WElem {
        WElem { e: abs, abs, r: 0, n: Vec::new() }
    }

    /// `1`, exact to the maximal relative precision.
    pub fn one(&self) -> WElem {
        WElem { e: 0, abs: self.kmax, r: 0, n: vec![1] }
    }

    /// Canonical form: reduces modulo `p^(abs - e)`, extracts the content
    /// and cancels factors of `L`.
    fn norm(&self, e: i64, abs: i64, r: u32, n: MPoly) -> WElem {
        let k = abs - e;
        if k <= 0 {
            return self.zero(abs);
        }
        debug_assert!(k <= self.kmax);
        let m = self.pows[k as usize];
        let mut n = pmod(&n, m);
        if n.is_empty() {
            return self.zero(abs);
        }
        let t = n.iter().filter(|&&c| c != 0).map(|&c| vp_u64(c, self.p)).min().unwrap();
        let (e, k) = if t > 0 {
            let d = self.pows[t as usize];
            for c in n.iter_mut() {
                *c /= d;
            }
            (e + t, k - t)
        } else {
            (e, k)
        };
        let m = self.pows[k as usize];
        let mut r = r;
        if self.l.len() > 1 {
            let l = self.l_mod(m);
            while r > 0 {
                let (q, rem) = pdivrem_monic(&n, &l, m);
                if !rem.is_empty() {
                    break;
                }
                n = q;
                r -= 1;
            }
        }
        WElem { e, abs, r, n }
    }

    /// Caps the relative precision at `kmax`.
    fn cap(&self, e: i64, abs: i64) -> i64 {
        abs.min(e.saturating_add(self.kmax))
    }

    pub fn neg(&self, a: &WElem) -> WElem {
        if a.is_zero() {
            return a.clone();
        }
        let m = self.pows[(a.abs - a.e) as usize];
        WElem { n: pneg(&a.n, m), ..a.clone() }
    }

    pub fn add(&self, a: &WElem, b: &WElem) -> WElem {
        let abs = a.abs.min(b.abs);
        if b.is_zero() {
            return self.with_abs(a, abs);
        }
        if a.is_zero() {
            return self.with_abs(b, abs);
        }
        let e = a.e.min(b.e);
        if abs <= e {
            return self.zero(abs);
        }
        let m = self.pows[(abs - e) as usize];
        let r = a.r.max(b.r);
        let lift = |x: &WElem| -> MPoly {
            if x.e - e >= abs - e {
                return Vec::new();
            }
            let s = pscale(&x.n, self.pows[(x.e - e) as usize] % m, m);
            if x.r < r {
                pmul(&s, &ppow(&self.l_mod(m), r - x.r, m), m)
            } else {
                s
            }
        };
        let n = padd(&lift(a), &lift(b), m);
        self.norm(e, abs, r, n)
    }

    fn with_abs(&self, a: &WElem, abs: i64) -> WElem {
        if abs >= a.abs {
            return a.clone();
        }
        self.norm(a.e, abs, a.r, a.n.clone())
    }

    pub fn mul(&self, a: &WElem, b: &WElem) -> WElem {
        let abs = (a.e.saturating_add(b.abs)).min(b.e.saturating_add(a.abs)).min(EXACT);
        if a.is_zero() || b.is_zero() {
            return self.zero(abs);
        }
        let e = a.e + b.e;
        let abs = self.cap(e, abs);
        if abs <= e {
            return self.zero(abs);
        }
        let m = self.pows[(abs - e) as usize];
        self.norm(e, abs, a.r + b.r, pmul(&a.n, &b.n, m))
    }

    /// Multiplication by an integer.
    pub fn scale_int(&self, a: &WElem, c: i64) -> WElem {
        if c == 0 {
            return self.zero(EXACT);
        }
        if a.is_zero() {
            let t = vp_int(&BigInt::from(c), self.p);
            return self.zero(a.abs.saturating_add(t).min(EXACT));
        }
        let t = vp_int(&BigInt::from(c), self.p);
        let unit = c / (self.p as i64).pow(t as u32);
        let k = a.abs - a.e;
        let m = self.pows[k as usize];
        let u = BigInt::from(unit).mod_floor(&BigInt::from(m)).to_u64().unwrap();
        self.norm(a.e + t, a.abs + t, a.r, pscale(&a.n, u, m))
    }

    /// `d/dx`, which does not increase the Gauss norm.
    pub fn derive(&self, a: &WElem) -> WElem {
        if a.is_zero() {
            return a.clone();
        }
        let m = self.pows[(a.abs - a.e) as usize];
        let dn = pderive(&a.n, m);
        if a.r == 0 {
            return self.norm(a.e, a.abs, 0, dn);
        }
        let l = self.l_mod(m);
        let dl: MPoly = self.dl.iter().map(|&c| c % m).collect();
        let t1 = pmul(&dn, &l, m);
        let t2 = pscale(&pmul(&a.n, &dl, m), a.r as u64 % m, m);
        self.norm(a.e, a.abs, a.r + 1, padd(&t1, &pneg(&t2, m), m))
    }

    /// `1/b` for a polynomial `b ≢ 0 mod p` given modulo `p^k`, as
    /// `N / L^R`; `None` unless the reduction of `b` divides a power of `L`.
    fn inv_poly(&self, b: &[u64], k: i64) -> Option<(MPoly, u32)> {
        let f = Fq::new(self.p);
        let m = self.pows[k as usize];
        let bbar = pmod(b, self.p);
        if bbar.is_empty() {
            return None;
        }
        let mut big_k = 0u32;
        let mut lk_bar: FqPoly = vec![1];
        while !f.poly_divrem(&lk_bar, &bbar).1.is_empty() {
            if big_k as usize > bbar.len() || self.lbar.len() <= 1 {
                return None;
            }
            lk_bar = f.poly_mul(&lk_bar, &self.lbar);
            big_k += 1;
        }
        let q0 = pmod(&f.poly_divrem(&lk_bar, &bbar).0, m);
        let lk = ppow(&self.l_mod(m), big_k, m);
        // b·q0 = L^K - Δ with Δ ≡ 0 mod p, so 1/b = q0 Σ Δ^i / L^{K(i+1)}.
        let delta = padd(&lk, &pneg(&pmul(b, &q0, m), m), m);
        let mut terms = Vec::new();
        let mut t = q0;
        while !t.is_empty() {
            terms.push(t.clone());
            t = pmul(&t, &delta, m);
        }
        let mut n: MPoly = Vec::new();
        for term in &terms {
            n = padd(&pmul(&n, &lk, m), term, m);
        }
        Some((n, big_k * terms.len() as u32))
    }

    pub fn inv(&self, a: &WElem) -> Option<WElem> {
        if a.is_zero() {
            return None;
        }
        let k = a.abs - a.e;
        let m = self.pows[k as usize];
        let (n, r) = self.inv_poly(&a.n, k)?;
        let n = if a.r > 0 { pmul(&n, &ppow(&self.l_mod(m), a.r, m), m) } else { n };
        Some(self.norm(-a.e, -a.e + k, r, n))
    }

    /// Image of an integer polynomial's reduction, for base extension.
    pub fn residue(&self, a: &WElem) -> FqPoly {
        pmod(&a.n, self.p)
    }

    /// Image of a univariate scalar, to absolute precision `abs` (capped by
    /// the relative precision limit).
    pub fn from_scalar(&self, s: &Scalar, abs: i64) -> Option<WElem> {
        if s.uses_x1() {
            return None;
        }
        if s.is_zero() {
            return Some(self.zero(abs));
        }
        let (ca, a) = int_primitive(s.num());
        let (cb, b) = int_primitive(s.den());
        let c = ca / cb;
        let e = vp_int(c.numer(), self.p) - vp_int(c.denom(), self.p);
        let abs = self.cap(e, abs);
        if abs <= e {
            return Some(self.zero(abs));
        }
        let k = abs - e;
        let m = self.pows[k as usize];
        let mb = BigInt::from(m);
        let red = |v: &[BigInt]| -> MPoly { pmod(&v.iter().map(|x| x.mod_floor(&mb).to_u64().unwrap()).collect::<Vec<_>>(), m) };
        let pe = BigInt::from(self.p).pow(e.unsigned_abs() as u32);
        let (un, ud) = if e >= 0 {
            (c.numer() / &pe, c.denom().clone())
        } else {
            (c.numer().clone(), c.denom() / &pe)
        };
        let unit = mulmod(
            un.mod_floor(&mb).to_u64().unwrap(),
            mod_inv(ud.mod_floor(&mb).to_u64().unwrap(), m, self.p, k),
            m,
        );
        let (inv, r) = self.inv_poly(&red(&b), k)?;
        let n = pscale(&pmul(&red(&a), &inv, m), unit, m);
        Some(self.norm(e, abs, r, n))
    }

    /// The representative `p^e · N / L^r` with symmetric coefficients.
    pub fn to_scalar(&self, a: &WElem) -> Scalar {
        if a.is_zero() {
            return Scalar::zero();
        }
        let m = self.pows[(a.abs - a.e) as usize];
        let num: Vec<Q> = a
            .n
            .iter()
            .map(|&c| {
                let v = if c > m / 2 { BigInt::from(c) - BigInt::from(m) } else { BigInt::from(c) };
                Q::from_integer(v)
            })
            .collect();
        let scale = if a.e >= 0 {
            Q::from_integer(BigInt::from(self.p).pow(a.e as u32))
        } else {
            Q::new(BigInt::one(), BigInt::from(self.p).pow((-a.e) as u32))
        };
        let num = Poly::from_upoly(num).scale(&scale);
        let l = Poly::from_upoly(self.l_int.iter().map(|&c| Q::from_integer(BigInt::from(c))).collect());
        Scalar::new(num, l.pow(a.r))
    }
}

/// Inverse of a unit modulo `m = p^k`.
fn mod_inv(a: u64, m: u64, p: u64, k: i64) -> u64 {
    // Newton iteration from the inverse modulo p.
    let f = Fq::new(p);
    let mut x = f.inv(a % p);
    let mut prec = 1;
    while prec < k {
        // x ← x (2 - a x)
        let ax = mulmod(a % m, x, m);
        x = mulmod(x, (2 + m - ax) % m, m);
        prec *= 2;
    }
    x % m
}

/// `(c, A)` with `P = c·A` and `A` a primitive integer polynomial.
fn int_primitive(p: &Poly) -> (Q, Vec<BigInt>) {
    let l = p.denom_lcm();
    let cont = p.int_content(&l);
    let c = Q::new(cont.clone(), l.clone());
    let coeffs = p.slices().first().cloned().unwrap_or_default();
    let ints = coeffs.iter().map(|q| (q * Q::from_integer(l.clone())).to_integer() / &cont).collect();
    (c, ints)
}

fn primitive_image(f: Fq, p: &Poly) -> FqPoly {
    reduce_ints(f, &int_primitive(p).1)
}
