//! The splitting stage of `decompose` over one-variable Gauss fields, run in
//! the truncated arithmetic of [`Window`] instead of exact rational
//! functions. Exact iterates have denominators that grow without bound; in
//! the window every coefficient is `p^e·N/L^r` for one fixed `L`, with
//! word-size coefficients and tracked precision, so residual valuations read
//! off the result are lower bounds for the true ones.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{q_int, PrecisionCtx, STALL_LIMIT};
use crate::error::{Error, Result};
use crate::radii;
use crate::scalarfield::window::{WElem, Window, EXACT};
use crate::scalarfield::{FieldKind, FieldSpec, LogVal, Scalar};
use crate::twisted::{NewtonPolygon, PiNormParams, TwistedPoly};
use crate::Q;

type WPoly = Vec<WElem>;

/// Window base extensions tolerated before giving up.
const MAX_EXTENSIONS: usize = 8;

enum Fail {
    /// An inverse needs the base to cover this residue polynomial.
    Base(Vec<u64>),
    Err(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Err(e)
    }
}

fn binom(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn trim(a: &mut WPoly) {
    while a.last().is_some_and(WElem::is_zero) {
        a.pop();
    }
}

fn coeff(w: &Window, a: &WPoly, i: usize) -> WElem {
    a.get(i).cloned().unwrap_or_else(|| w.zero(EXACT))
}

fn add(w: &Window, a: &WPoly, b: &WPoly) -> WPoly {
    let n = a.len().max(b.len());
    let mut out: WPoly = (0..n).map(|i| w.add(&coeff(w, a, i), &coeff(w, b, i))).collect();
    trim(&mut out);
    out
}

fn neg(w: &Window, a: &WPoly) -> WPoly {
    a.iter().map(|c| w.neg(c)).collect()
}

fn sub(w: &Window, a: &WPoly, b: &WPoly) -> WPoly {
    add(w, a, &neg(w, b))
}

fn left_scale(w: &Window, c: &WElem, a: &WPoly) -> WPoly {
    let mut out: WPoly = a.iter().map(|q| w.mul(c, q)).collect();
    trim(&mut out);
    out
}

/// `(PQ)_i = Σ_j Σ_{h≥j} p_h C(h,j) ∂^{h-j}(q_{i-j})`.
fn mul(w: &Window, a: &WPoly, b: &WPoly) -> WPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let hmax = a.len() - 1;
    let derivs: Vec<Vec<WElem>> = b
        .iter()
        .map(|q| {
            let mut v = vec![q.clone()];
            for s in 1..=hmax {
                let next = w.derive(&v[s - 1]);
                v.push(next);
            }
            v
        })
        .collect();
    let mut out: WPoly = vec![w.zero(EXACT); hmax + b.len()];
    for (h, ph) in a.iter().enumerate() {
        for (k, dq) in derivs.iter().enumerate() {
            for j in 0..=h {
                let term = w.scale_int(&w.mul(ph, &dq[h - j]), binom(h, j));
                out[j + k] = w.add(&out[j + k], &term);
            }
        }
    }
    trim(&mut out);
    out
}

/// `T · a`.
fn t_times(w: &Window, a: &WPoly) -> WPoly {
    let mut out: WPoly = vec![w.zero(EXACT); a.len() + 1];
    for (k, q) in a.iter().enumerate() {
        out[k + 1] = w.add(&out[k + 1], q);
        out[k] = w.add(&out[k], &w.derive(q));
    }
    trim(&mut out);
    out
}

/// Right division by a monic `q`: `a = D·q + R`.
fn divmod_right(w: &Window, a: &WPoly, q: &WPoly) -> (WPoly, WPoly) {
    let dq = q.len() - 1;
    let mut r = a.clone();
    trim(&mut r);
    let mut d: WPoly = vec![w.zero(EXACT); r.len().saturating_sub(dq)];
    while r.len() > dq {
        let dr = r.len() - 1;
        let c = r[dr].clone();
        let mut mono: WPoly = vec![w.zero(EXACT); dr - dq];
        mono.push(c.clone());
        r = sub(w, &r, &mul(w, &mono, q));
        r.truncate(dr);
        trim(&mut r);
        d[dr - dq] = c;
    }
    trim(&mut d);
    (d, r)
}

/// `(-1)^deg · Σ_i (-T)^i a_i`, monic when `a` is.
fn monic_adjoint(w: &Window, a: &WPoly) -> WPoly {
    let deg = a.len() - 1;
    let mut out: WPoly = vec![w.zero(EXACT); a.len()];
    for (i, q) in a.iter().enumerate() {
        // T^i q = Σ_j C(i,j) ∂^{i-j}(q) T^j
        let mut dq = vec![q.clone()];
        for s in 1..=i {
            let next = w.derive(&dq[s - 1]);
            dq.push(next);
        }
        let sign = if (i + deg).is_multiple_of(2) { 1 } else { -1 };
        for j in 0..=i {
            let term = w.scale_int(&dq[i - j], sign * binom(i, j));
            out[j] = w.add(&out[j], &term);
        }
    }
    trim(&mut out);
    out
}

/// Lower bound for the π(t)-norm `min_i (lv(i!) + lv(a_i) - i·lv_t)`.
fn pi_lower_bound(field: &FieldSpec, a: &WPoly, lv_t: &Q) -> LogVal {
    a.iter()
        .enumerate()
        .filter(|(_, c)| c.abs() < EXACT || !c.is_zero())
        .map(|(i, c)| LogVal::Finite(Q::from_integer(BigInt::from(c.val_bound())) + field.val_factorial(i) - lv_t * q_int(i)))
        .min()
        .unwrap_or(LogVal::Infinite)
}

fn polygon(a: &WPoly) -> NewtonPolygon {
    NewtonPolygon::from_points(
        a.iter().enumerate().filter_map(|(i, c)| c.val().map(|v| (i, Q::from_integer(BigInt::from(v))))).collect(),
    )
}

/// Degree of the factor carrying the roots with clipped `lv < lv_break`.
fn low_degree(field: &FieldSpec, a: &WPoly, lv_break: &Q) -> Result<usize> {
    let np = polygon(a);
    let mut low = np.zero_roots;
    let mut high = 0;
    if &field.lv_rk(0) >= lv_break {
        high += np.zero_roots;
        low = 0;
    }
    for (s, len) in &np.slopes {
        if &radii::clipped_lv(field, 0, s).0 >= lv_break {
            high += len;
        } else {
            low += len;
        }
    }
    if low == 0 || high == 0 {
        return Err(Error::NoGap(crate::scalarfield::fmt_q(lv_break)));
    }
    Ok(low)
}

fn invert(w: &Window, a: &WElem) -> std::result::Result<WElem, Fail> {
    if a.is_zero() {
        return Err(Fail::Err(Error::PrecisionLoss("inverting an element that vanishes to precision".into())));
    }
    w.inv(a).ok_or_else(|| Fail::Base(w.residue(a)))
}

struct Split {
    high: WPoly,
    low: WPoly,
    residual: LogVal,
}

/// `p ≈ high · low` with `low` carrying the radii below `lv_break`.
fn slope_split(w: &Window, field: &FieldSpec, p: &WPoly, lv_break: &Q, ctx: &PrecisionCtx) -> std::result::Result<Split, Fail> {
    let ell = low_degree(field, p, lv_break)?;
    let lead_inv = invert(w, &p[ell])?;
    let mut low: WPoly = p[..ell].iter().map(|c| w.mul(&lead_inv, c)).collect();
    low.push(w.one());
    let target = LogVal::Finite(ctx.n.clone());
    let mut u_inv: Option<WElem> = None;
    let mut best: Option<LogVal> = None;
    let mut stall = 0;
    let mut it = 0;
    loop {
        let (high, r) = divmod_right(w, p, &low);
        let res = pi_lower_bound(field, &r, lv_break);
        if res >= target {
            let residual = pi_lower_bound(field, &sub(w, p, &mul(w, &high, &low)), lv_break);
            return Ok(Split { high, low, residual });
        }
        if it >= ctx.max_iter {
            return Err(Fail::Err(Error::IterationBudget(ctx.max_iter)));
        }
        match &best {
            Some(b) if &res <= b => {
                stall += 1;
                if stall >= STALL_LIMIT {
                    return Err(Fail::Err(Error::PrecisionLoss(format!("residual stuck at lv {res}"))));
                }
            }
            _ => {
                stall = 0;
                best = Some(res);
            }
        }
        if u_inv.is_none() {
            u_inv = Some(invert(w, &coeff(w, &high, 0))?);
        }
        low = add(w, &low, &left_scale(w, u_inv.as_ref().unwrap(), &r));
        it += 1;
    }
}

/// Result of the window splitting stage, converted back to exact scalars.
pub(super) struct WindowSplit {
    /// Pure operators, one per radius in the given order.
    pub pure: Vec<TwistedPoly>,
    /// For each radius, coordinates of `T^i·B mod P` (`i < deg A`) in the
    /// basis `1, T, …, T^{n-1}`.
    pub coords: Vec<Vec<Vec<Scalar>>>,
    pub residuals: Vec<LogVal>,
}

fn to_twisted(w: &Window, a: &WPoly, ctx: &PrecisionCtx) -> Result<TwistedPoly> {
    let coeffs: Vec<Scalar> = a.iter().map(|c| w.to_scalar(c)).collect();
    check_height(&coeffs, ctx)?;
    Ok(TwistedPoly::new(coeffs, 0))
}

fn check_height(coeffs: &[Scalar], ctx: &PrecisionCtx) -> Result<()> {
    match coeffs.iter().map(Scalar::degree_height).max() {
        Some(h) if h > ctx.d => Err(Error::PrecisionLoss(format!("coefficient degree {h} exceeds cap {}", ctx.d))),
        _ => Ok(()),
    }
}

/// Splits the cyclic operator `p` by the radii `lvs` (ascending `lv`) and
/// computes the component coordinates. `None` when the window arithmetic
/// does not apply to this field or operator.
pub(super) fn split_and_embed(field: &FieldSpec, p: &TwistedPoly, lvs: &[Q], ctx: &PrecisionCtx) -> Result<Option<WindowSplit>> {
    let prime = match field.kind {
        FieldKind::GaussPadic { p } if field.nvars() == 1 => p,
        _ => return Ok(None),
    };
    let Some(mut w) = Window::covering(prime, p.coeffs()) else {
        return Ok(None);
    };
    // Precision of the input: residuals at every break must clear the target
    // with room for the losses of the iteration.
    let lv_max = lvs.iter().max().unwrap();
    let deficit = lvs
        .iter()
        .filter_map(|lv| p.pi_norm(field, &PiNormParams::new(lv.clone())).finite().map(|v| -v))
        .fold(Q::from_integer(BigInt::from(0)), |a, b| a.max(b));
    let target = &ctx.n + Q::from_integer(BigInt::from(4)) + deficit;
    let abs: Vec<i64> = (0..=p.degree().unwrap())
        .map(|i| (&target - field.val_factorial(i) + lv_max * q_int(i)).ceil().to_integer().to_i64().unwrap())
        .collect();
    for _ in 0..MAX_EXTENSIONS {
        match run(&w, field, p, &abs, lvs, ctx) {
            Ok(out) => return Ok(Some(out)),
            Err(Fail::Base(extra)) => w = w.extended(&extra),
            Err(Fail::Err(e)) => return Err(e),
        }
    }
    Err(Error::PrecisionLoss("window base did not stabilize".into()))
}

fn run(w: &Window, field: &FieldSpec, p: &TwistedPoly, abs: &[i64], lvs: &[Q], ctx: &PrecisionCtx) -> std::result::Result<WindowSplit, Fail> {
    let pw: WPoly = p
        .coeffs()
        .iter()
        .zip(abs)
        .map(|(c, &a)| w.from_scalar(c, a).ok_or_else(|| Fail::Err(Error::NotExpandable("operator coefficient outside the window".into()))))
        .collect::<std::result::Result<_, _>>()?;
    let s = lvs.len();
    let n = pw.len() - 1;
    let mut out = WindowSplit { pure: Vec::new(), coords: Vec::new(), residuals: Vec::new() };
    for k in 0..s {
        let mut residual = LogVal::Infinite;
        let (high, low) = if k == 0 {
            (pw.clone(), vec![w.one()])
        } else {
            let sp = slope_split(w, field, &pw, &lvs[k], ctx)?;
            residual = residual.min(sp.residual);
            (sp.high, sp.low)
        };
        // Peel lvs[k] off the left factor through the adjoint.
        let (pure, middle) = if k + 1 == s {
            (high, vec![w.one()])
        } else {
            let sp = slope_split(w, field, &monic_adjoint(w, &high), &lvs[k + 1], ctx)?;
            residual = residual.min(sp.residual);
            (monic_adjoint(w, &sp.low), monic_adjoint(w, &sp.high))
        };
        let b = mul(w, &middle, &low);
        let dim_a = pure.len() - 1;
        let mut cols = Vec::with_capacity(dim_a);
        let mut tb = b;
        for i in 0..dim_a {
            if i > 0 {
                tb = t_times(w, &tb);
            }
            let (_, r) = divmod_right(w, &tb, &pw);
            let col: Vec<Scalar> = (0..n).map(|c| w.to_scalar(&coeff(w, &r, c))).collect();
            check_height(&col, ctx)?;
            cols.push(col);
        }
        out.pure.push(to_twisted(w, &pure, ctx)?);
        out.coords.push(cols);
        out.residuals.push(residual);
    }
    Ok(out)
}
