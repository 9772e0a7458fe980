use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::Q;

/// Exact log-scale valuation: `lv(x) = -log_B |x|`, `+∞` for zero.
///
/// Larger values mean smaller absolute values. Radii and norms are carried in
/// this form everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogVal {
    Finite(Q),
    Infinite,
}

impl LogVal {
    pub fn zero() -> Self {
        LogVal::Finite(Q::zero())
    }

    pub fn int(n: i64) -> Self {
        LogVal::Finite(Q::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        LogVal::Finite(Q::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LogVal::Infinite)
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            LogVal::Finite(q) => Some(q),
            LogVal::Infinite => None,
        }
    }

    /// Multiplies by a nonnegative integer (`0 · ∞ = 0`).
    pub fn times(&self, k: usize) -> LogVal {
        match self {
            LogVal::Finite(q) => LogVal::Finite(q * Q::from_integer(BigInt::from(k))),
            LogVal::Infinite if k == 0 => LogVal::zero(),
            LogVal::Infinite => LogVal::Infinite,
        }
    }

    /// Subtracts a finite amount; `∞ - q = ∞`.
    pub fn minus(&self, q: &Q) -> LogVal {
        match self {
            LogVal::Finite(a) => LogVal::Finite(a - q),
            LogVal::Infinite => LogVal::Infinite,
        }
    }

    pub fn plus(&self, q: &Q) -> LogVal {
        match self {
            LogVal::Finite(a) => LogVal::Finite(a + q),
            LogVal::Infinite => LogVal::Infinite,
        }
    }

    /// Parses `"5/4"`, `"-3"` or `"inf"`.
    pub fn parse(s: &str) -> Option<LogVal> {
        let s = s.trim();
        if s == "inf" || s == "+inf" {
            return Some(LogVal::Infinite);
        }
        s.parse::<Q>().ok().map(LogVal::Finite)
    }

    /// Decimal approximation for display only.
    pub fn approx_f64(&self) -> f64 {
        match self {
            LogVal::Finite(q) => {
                let n: f64 = q.numer().to_string().parse().unwrap_or(f64::NAN);
                let d: f64 = q.denom().to_string().parse().unwrap_or(f64::NAN);
                n / d
            }
            LogVal::Infinite => f64::INFINITY,
        }
    }
}

impl Ord for LogVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LogVal::Finite(a), LogVal::Finite(b)) => a.cmp(b),
            (LogVal::Finite(_), LogVal::Infinite) => Ordering::Less,
            (LogVal::Infinite, LogVal::Finite(_)) => Ordering::Greater,
            (LogVal::Infinite, LogVal::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for LogVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &LogVal {
    type Output = LogVal;
    fn add(self, o: &LogVal) -> LogVal {
        match (self, o) {
            (LogVal::Finite(a), LogVal::Finite(b)) => LogVal::Finite(a + b),
            _ => LogVal::Infinite,
        }
    }
}

impl Add for LogVal {
    type Output = LogVal;
    fn add(self, o: LogVal) -> LogVal {
        &self + &o
    }
}

impl Sub<&Q> for &LogVal {
    type Output = LogVal;
    fn sub(self, q: &Q) -> LogVal {
        self.minus(q)
    }
}

impl From<Q> for LogVal {
    fn from(q: Q) -> Self {
        LogVal::Finite(q)
    }
}

impl fmt::Display for LogVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogVal::Finite(q) => write!(f, "{}", fmt_q(q)),
            LogVal::Infinite => write!(f, "inf"),
        }
    }
}

/// Canonical text for a rational (`"5/4"`, `"-3"`).
pub fn fmt_q(q: &Q) -> String {
    if q.denom() == &BigInt::from(1) {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a rational, `None` for zero.
pub fn vp_q(q: &Q, p: u64) -> Option<i64> {
    if q.is_zero() {
        None
    } else {
        Some(vp_int(q.numer(), p) - vp_int(q.denom(), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_and_arithmetic() {
        assert!(LogVal::Infinite > LogVal::int(1000));
        assert!(LogVal::ratio(5, 4) > LogVal::ratio(1, 4));
        assert_eq!(&LogVal::ratio(1, 4) + &LogVal::int(1), LogVal::ratio(5, 4));
        assert_eq!(&LogVal::Infinite + &LogVal::int(1), LogVal::Infinite);
        assert_eq!(LogVal::Infinite.times(0), LogVal::zero());
    }

    #[test]
    fn text_round_trip() {
        for v in [LogVal::ratio(5, 4), LogVal::int(-3), LogVal::Infinite] {
            assert_eq!(LogVal::parse(&v.to_string()), Some(v));
        }
        assert_eq!(LogVal::ratio(9, 4).to_string(), "9/4");
    }

    #[test]
    fn p_adic_orders() {
        assert_eq!(vp_int(&BigInt::from(250), 5), 3);
        assert_eq!(vp_q(&Q::new(BigInt::from(3), BigInt::from(25)), 5), Some(-2));
        assert_eq!(vp_q(&Q::zero(), 5), None);
    }
}
