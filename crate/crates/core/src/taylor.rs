//! Truncated power series in an auxiliary variable `X`: the Taylor map
//! `c ↦ Σ ∂^i(c)/i! X^i`, fundamental solution matrices, Hadamard radius
//! estimates, and the duality pairing with its biduality transform.

use num_bigint::BigInt;
use num_traits::One;
use serde_json::{json, Value};

use crate::diffmod::DiffModule;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalarfield::{fmt_q, FieldSpec, LogVal, Scalar};
use crate::text::parse_scalar;
use crate::Q;

fn inv_factorial(i: usize) -> Scalar {
    let f: BigInt = (1..=i).map(BigInt::from).product();
    Scalar::from_q(Q::new(BigInt::one(), f))
}

/// `a_0 + a_1 X + … + a_N X^N`, known up to order `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    coeffs: Vec<Scalar>,
}

impl TruncSeries {
    /// Series from `a_0..=a_N`; an empty list is the zero series of order 0.
    pub fn new(mut coeffs: Vec<Scalar>) -> TruncSeries {
        if coeffs.is_empty() {
            coeffs.push(Scalar::zero());
        }
        TruncSeries { coeffs }
    }

    pub fn zero(n: usize) -> TruncSeries {
        TruncSeries { coeffs: vec![Scalar::zero(); n + 1] }
    }

    pub fn constant(c: Scalar, n: usize) -> TruncSeries {
        let mut s = TruncSeries::zero(n);
        s.coeffs[0] = c;
        s
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Scalar {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    /// Keeps terms up to order `n` (at most the current order).
    pub fn truncate(&self, n: usize) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs[..=n.min(self.order())].to_vec() }
    }

    pub fn add(&self, o: &TruncSeries) -> TruncSeries {
        let n = self.order().min(o.order());
        TruncSeries { coeffs: (0..=n).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect() }
    }

    pub fn sub(&self, o: &TruncSeries) -> TruncSeries {
        let n = self.order().min(o.order());
        TruncSeries { coeffs: (0..=n).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> TruncSeries {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| c * a).collect() }
    }

    /// Cauchy product, truncated to the smaller order.
    pub fn mul(&self, o: &TruncSeries) -> TruncSeries {
        let n = self.order().min(o.order());
        let coeffs = (0..=n)
            .map(|k| {
                (0..=k)
                    .filter(|&i| !self.coeffs[i].is_zero() && !o.coeffs[k - i].is_zero())
                    .fold(Scalar::zero(), |acc, i| &acc + &(&self.coeffs[i] * &o.coeffs[k - i]))
            })
            .collect();
        TruncSeries { coeffs }
    }

    /// `d/dX`, which lowers the order by one.
    pub fn derive_x(&self) -> TruncSeries {
        if self.order() == 0 {
            return TruncSeries::zero(0);
        }
        let coeffs = (1..=self.order()).map(|i| &Scalar::int(i as i64) * &self.coeffs[i]).collect();
        TruncSeries { coeffs }
    }

    pub fn to_json(&self, field: &FieldSpec) -> Value {
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| field.fmt_scalar(c)).collect();
        json!({"coeffs": coeffs, "N": self.order()})
    }

    pub fn from_json(field: &FieldSpec, v: &Value) -> Result<TruncSeries> {
        let bad = |m: &str| Error::InvalidInput(format!("series JSON: {m}"));
        let arr = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("missing coeffs"))?;
        let n = v.get("N").and_then(Value::as_u64).ok_or_else(|| bad("missing N"))? as usize;
        if arr.len() != n + 1 {
            return Err(bad("coeffs length must be N + 1"));
        }
        let coeffs = arr
            .iter()
            .map(|c| c.as_str().ok_or_else(|| bad("coefficient is not a string")).and_then(|s| parse_scalar(field, s)))
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncSeries { coeffs })
    }
}

/// `(∂_j^i(c)/i!)_{i ≤ n}`.
pub fn taylor_map(c: &Scalar, j: usize, n: usize) -> TruncSeries {
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut d = c.clone();
    for i in 0..=n {
        if i > 0 {
            d = d.derive(j);
        }
        coeffs.push(&d * &inv_factorial(i));
    }
    TruncSeries { coeffs }
}

/// Square matrix of truncated series.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesMatrix {
    dim: usize,
    entries: Vec<TruncSeries>,
}

impl SeriesMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &TruncSeries {
        &self.entries[r * self.dim + c]
    }

    /// Entrywise Taylor image of a scalar matrix.
    pub fn taylor_image(g: &Matrix, j: usize, n: usize) -> SeriesMatrix {
        SeriesMatrix { dim: g.rows(), entries: g.entries().map(|c| taylor_map(c, j, n)).collect() }
    }

    pub fn mul(&self, o: &SeriesMatrix) -> SeriesMatrix {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                let mut acc = self.get(r, 0).mul(o.get(0, c));
                for k in 1..d {
                    acc = acc.add(&self.get(r, k).mul(o.get(k, c)));
                }
                entries.push(acc);
            }
        }
        SeriesMatrix { dim: d, entries }
    }

    pub fn derive_x(&self) -> SeriesMatrix {
        SeriesMatrix { dim: self.dim, entries: self.entries.iter().map(TruncSeries::derive_x).collect() }
    }

    pub fn truncate(&self, n: usize) -> SeriesMatrix {
        SeriesMatrix { dim: self.dim, entries: self.entries.iter().map(|s| s.truncate(n)).collect() }
    }

    /// Smallest valuation among the `i`-th coefficients of all entries.
    pub fn coeff_val(&self, field: &FieldSpec, i: usize) -> LogVal {
        self.entries.iter().map(|s| field.val(s.coeff(i))).min().unwrap_or(LogVal::Infinite)
    }
}

/// `Y = Σ_{k ≤ n} G_k/k! X^k`, the fundamental solution along `∂_j`:
/// `d/dX Y = Y τ(G)` up to order `n - 1`, with `τ` the Taylor map. The
/// factor order follows from `G_{k+1} = Σ_i C(k, i) G_{k-i} ∂^i(G)`.
pub fn solution_matrix(m: &DiffModule, j: usize, n: usize) -> Result<SeriesMatrix> {
    m.field().check_deriv(j)?;
    let d = m.dim();
    let gs = m.iterate_g_all(j, n);
    let facts: Vec<Scalar> = (0..=n).map(inv_factorial).collect();
    let entries = (0..d * d)
        .map(|idx| {
            let (r, c) = (idx / d, idx % d);
            TruncSeries { coeffs: (0..=n).map(|k| gs[k].get(r, c) * &facts[k]).collect() }
        })
        .collect();
    Ok(SeriesMatrix { dim: d, entries })
}

/// Windowed Hadamard estimate `lv = max_{i ∈ window} -val(a_i)/i`, i.e. the
/// lv of `1/limsup |a_i|^{1/i}`, with `spread = max - min` over the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardEstimate {
    pub lv: Q,
    pub spread: Q,
}

impl HadamardEstimate {
    pub fn to_json(&self) -> Value {
        json!({"lv": fmt_q(&self.lv), "spread": fmt_q(&self.spread)})
    }
}

/// Hadamard estimate from coefficient valuations; zero coefficients are
/// skipped. `Err(AllZero)` stands for an infinite radius.
pub fn hadamard_from_vals(vals: &[LogVal], lo: usize, hi: usize) -> Result<HadamardEstimate> {
    if lo == 0 || lo > hi || hi >= vals.len() {
        return Err(Error::InvalidInput(format!("window [{lo}, {hi}] outside [1, {}]", vals.len().saturating_sub(1))));
    }
    let ratios: Vec<Q> = (lo..=hi)
        .filter_map(|i| match &vals[i] {
            LogVal::Finite(v) => Some(-v / Q::from_integer(BigInt::from(i))),
            LogVal::Infinite => None,
        })
        .collect();
    let max = ratios.iter().max().ok_or(Error::AllZero)?.clone();
    let min = ratios.iter().min().unwrap();
    Ok(HadamardEstimate { spread: &max - min, lv: max })
}

pub fn hadamard_radius(field: &FieldSpec, s: &TruncSeries, lo: usize, hi: usize) -> Result<HadamardEstimate> {
    let vals: Vec<LogVal> = s.coeffs.iter().map(|c| field.val(c)).collect();
    hadamard_from_vals(&vals, lo, hi)
}

/// `(⟨s, x⟩_i)_{i ≤ N}` for the pairing `⟨s, x⟩_i = s·(T^i x)/i!`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingVector {
    pub coeffs: Vec<Scalar>,
}

impl PairingVector {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_json(&self, field: &FieldSpec) -> Value {
        let coeffs: Vec<String> = self.coeffs.iter().map(|c| field.fmt_scalar(c)).collect();
        json!({"coeffs": coeffs, "N": self.coeffs.len().saturating_sub(1)})
    }
}

/// Pairs the coordinate vector `x` against the functional `s` through
/// `1/i!·T_j^i`, for `i = 0..=n`.
pub fn dual_pairing(m: &DiffModule, j: usize, x: &[Scalar], s: &[Scalar], n: usize) -> Result<PairingVector> {
    m.field().check_deriv(j)?;
    if x.len() != m.dim() || s.len() != m.dim() {
        return Err(Error::InvalidInput(format!("vectors must have length {}", m.dim())));
    }
    let mut w = x.to_vec();
    let mut coeffs = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if i > 0 {
            w = m.apply_t(j, &w);
        }
        let chi = s.iter().zip(&w).fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b));
        coeffs.push(&chi * &inv_factorial(i));
    }
    Ok(PairingVector { coeffs })
}

/// `v ↦ (Σ_{a+k=i} (-1)^a/k! ∂_j^k v_a)_{i ≤ n}`; an involution.
pub fn biduality_transform(v: &PairingVector, j: usize, n: usize) -> Result<PairingVector> {
    if v.len() < n + 1 {
        return Err(Error::InvalidInput(format!("need {} coefficients, got {}", n + 1, v.len())));
    }
    // derivs[a][k] = ∂^k(v_a)/k!
    let derivs: Vec<Vec<Scalar>> = (0..=n)
        .map(|a| {
            let mut out = Vec::with_capacity(n + 1 - a);
            let mut d = v.coeffs[a].clone();
            for k in 0..=n - a {
                if k > 0 {
                    d = d.derive(j);
                }
                out.push(&d * &inv_factorial(k));
            }
            out
        })
        .collect();
    let coeffs = (0..=n)
        .map(|i| {
            (0..=i).fold(Scalar::zero(), |acc, a| {
                let t = &derivs[a][i - a];
                if a % 2 == 0 {
                    &acc + t
                } else {
                    &acc - t
                }
            })
        })
        .collect();
    Ok(PairingVector { coeffs })
}
