//! Dense univariate polynomials over `Z/q` for word-sized primes `q`, used
//! for modular gcds and for reductions modulo the residue characteristic.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};


/// Lowest degree first, no trailing zeros.
pub(crate) type FqPoly = Vec<u64>;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Fq {
    pub q: u64,
}

impl Fq {
    pub fn new(q: u64) -> Fq {
        Fq { q }
    }

    pub fn add(self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.q as u128) as u64
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        self.add(a, self.q - b % self.q)
    }

    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.q;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.q));
        self.pow(a, self.q - 2)
    }

    pub fn from_int(self, n: &BigInt) -> u64 {
        n.mod_floor(&BigInt::from(self.q)).to_u64().unwrap()
    }

    /// Symmetric representative in `(-q/2, q/2]`.
    pub fn lift(self, a: u64) -> i64 {
        if a > self.q / 2 {
            a as i64 - self.q as i64
        } else {
            a as i64
        }
    }

    pub fn trim(self, a: &mut FqPoly) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn poly_mul(self, a: &[u64], b: &[u64]) -> FqPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        self.trim(&mut out);
        out
    }

    pub fn poly_divrem(self, a: &[u64], b: &[u64]) -> (FqPoly, FqPoly) {
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut r = a.to_vec();
        self.trim(&mut r);
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let db = b.len() - 1;
        let li = self.inv(b[db]);
        let mut quo = vec![0u64; r.len() - db];
        while r.len() > db {
            let shift = r.len() - 1 - db;
            let c = self.mul(*r.last().unwrap(), li);
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = self.sub(r[shift + i], self.mul(c, bc));
            }
            quo[shift] = c;
            r.pop();
            self.trim(&mut r);
        }
        self.trim(&mut quo);
        (quo, r)
    }

    pub fn monic(self, a: &[u64]) -> FqPoly {
        match a.last() {
            None => Vec::new(),
            Some(&l) => {
                let li = self.inv(l);
                a.iter().map(|&c| self.mul(c, li)).collect()
            }
        }
    }

    /// Monic gcd.
    pub fn poly_gcd(self, a: &[u64], b: &[u64]) -> FqPoly {
        let (mut x, mut y) = (a.to_vec(), b.to_vec());
        self.trim(&mut x);
        self.trim(&mut y);
        while !y.is_empty() {
            let r = self.poly_divrem(&x, &y).1;
            x = y;
            y = r;
        }
        self.monic(&x)
    }

    pub fn derive(self, a: &[u64]) -> FqPoly {
        let mut out: FqPoly = a.iter().enumerate().skip(1).map(|(i, &c)| self.mul(c, i as u64 % self.q)).collect();
        self.trim(&mut out);
        out
    }

    /// Product of the distinct monic irreducible factors of `a ≠ 0`.
    pub fn radical(self, a: &[u64]) -> FqPoly {
        let a = self.monic(a);
        if a.len() <= 1 {
            return vec![1];
        }
        let d = self.derive(&a);
        if d.is_empty() {
            // a(x) = b(x^q) = b(x)^q over the prime field.
            let b: FqPoly = a.iter().step_by(self.q as usize).copied().collect();
            return self.radical(&b);
        }
        let g = self.poly_gcd(&a, &d);
        if g.len() == 1 {
            return a;
        }
        let free = self.poly_divrem(&a, &g).0;
        let rest = self.radical(&g);
        let common = self.poly_gcd(&free, &rest);
        self.poly_divrem(&self.poly_mul(&free, &rest), &common).0
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let f = Fq::new(n);
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below `2^62`, largest first.
pub(crate) fn word_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::with_capacity(64);
        let mut n = (1u64 << 62) - 1;
        while out.len() < 64 {
            if is_prime(n) {
                out.push(n);
            }
            n -= 2;
        }
        out
    })
}

/// Images of integer coefficients.
pub(crate) fn reduce_ints(f: Fq, a: &[BigInt]) -> FqPoly {
    let mut out: FqPoly = a.iter().map(|c| if c.is_zero() { 0 } else { f.from_int(c) }).collect();
    f.trim(&mut out);
    out
}
