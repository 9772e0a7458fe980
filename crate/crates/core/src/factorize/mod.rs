//! Slope factorization of twisted polynomials and decomposition of modules
//! by radius.
//!
//! A monic `P` whose roots split across a radius threshold is factored as
//! `P ≈ H·L`: the right factor `L` carries the larger radii (smaller `lv`),
//! `H` the rest. The factorization is found by a Hensel-type iteration in the
//! π(t)-norm at the threshold: with `P = D·Q + R`, the low factor is updated
//! by `Q ← Q + u⁻¹R`, where `u` is the constant coefficient of the first
//! quotient. Every iterate is rounded to keep coefficient heights bounded,
//! at a precision that keeps the rounding error below the target residual.
//!
//! A module is decomposed through a cyclic presentation `K⟨T⟩/K⟨T⟩·P`: for
//! each radius `ρ`, `P ≈ A·B` with `A` pure of radius `ρ`, and the component
//! is spanned by `T^i·B`, `i < deg A`. All results are certified afterwards by
//! exact checks.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::diffmod::DiffModule;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::radii::{self, MultiRadiusProfile, RadiusProfile};
use crate::scalarfield::{fmt_q, round_abs, FieldSpec, LogVal, Scalar};
use crate::twisted::{PiNormParams, TwistedPoly};
use crate::Q;

pub use crate::scalarfield::ApproxScalar;

mod window;

/// Window end of the brute-force purity check on components.
pub const COMPONENT_BRUTEFORCE_KMAX: usize = 24;

/// Consecutive non-improving steps tolerated before reporting precision loss.
pub(crate) const STALL_LIMIT: usize = 3;

/// Working precision for approximate factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionCtx {
    /// Target log-valuation of the residual.
    pub n: Q,
    /// Cap on the degree height of rounded coefficients.
    pub d: usize,
    /// Hensel step budget.
    pub max_iter: usize,
}

impl PrecisionCtx {
    pub fn new(n: Q, d: usize, max_iter: usize) -> Result<PrecisionCtx> {
        if !n.is_positive() {
            return Err(Error::InvalidInput("precision target must be positive".into()));
        }
        Ok(PrecisionCtx { n, d, max_iter })
    }
}

impl Default for PrecisionCtx {
    fn default() -> Self {
        PrecisionCtx { n: Q::from_integer(BigInt::from(10)), d: 512, max_iter: 100 }
    }
}

pub(crate) fn q_int(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// One split `P ≈ high · low` at a radius threshold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeSplit {
    pub high: TwistedPoly,
    pub low: TwistedPoly,
    /// `lv ‖P - high·low‖` in the π(t)-norm with `lv_t = lv_break`.
    pub residual_lv: LogVal,
    pub iterations: usize,
}

fn round_to(field: &FieldSpec, x: &Scalar, w: &Q, ctx: &PrecisionCtx) -> Result<Scalar> {
    let r = round_abs(field, x, w)?;
    let h = r.value.degree_height();
    if h > ctx.d {
        return Err(Error::PrecisionLoss(format!("coefficient degree {h} exceeds cap {}", ctx.d)));
    }
    Ok(r.value)
}

/// Rounds each coefficient so that the π-norm of the error is at least
/// `target`.
fn round_poly(field: &FieldSpec, p: &TwistedPoly, lv_t: &Q, target: &Q, ctx: &PrecisionCtx) -> Result<TwistedPoly> {
    let deg = p.degree().unwrap_or(0);
    let coeffs = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            // Leading coefficients stay exact so monic stays monic.
            if i == deg {
                return Ok(c.clone());
            }
            let w = target - field.val_factorial(i) + lv_t * q_int(i);
            round_to(field, c, &w, ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwistedPoly::new(coeffs, p.deriv()))
}

/// Number of roots of `p` whose clipped radius has `lv < lv_break`.
fn low_degree(field: &FieldSpec, p: &TwistedPoly, lv_break: &Q) -> Result<usize> {
    let np = p.newton_polygon(field)?;
    let j = p.deriv();
    let mut low = np.zero_roots;
    let mut high = 0;
    if &field.lv_rk(j) >= lv_break {
        high += np.zero_roots;
        low = 0;
    }
    for (s, len) in &np.slopes {
        if &radii::clipped_lv(field, j, s).0 >= lv_break {
            high += len;
        } else {
            low += len;
        }
    }
    if low == 0 || high == 0 {
        return Err(Error::NoGap(fmt_q(lv_break)));
    }
    Ok(low)
}

/// Factors monic `p` as `high · low` where `low` carries the roots with
/// clipped radius `lv < lv_break` and `high` the others, to residual π-norm
/// `lv ≥ ctx.n`.
pub fn slope_factorize(field: &FieldSpec, p: &TwistedPoly, lv_break: &Q, ctx: &PrecisionCtx) -> Result<SlopeSplit> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    let ell = low_degree(field, p, lv_break)?;
    let params = PiNormParams::new(lv_break.clone());
    let deriv = p.deriv();
    let head: Vec<Scalar> = p.coeffs()[..=ell].to_vec();
    let mut low = TwistedPoly::new(head, deriv).monicize()?;
    // Headroom so that rounding errors never dominate the residual.
    let headroom = |norm: &LogVal| -> Q {
        let base = norm.finite().cloned().unwrap_or_else(Q::zero);
        &ctx.n + q_int(2) - base.min(Q::zero())
    };
    let p_norm = p.pi_norm(field, &params);
    low = round_poly(field, &low, lv_break, &headroom(&p_norm), ctx)?;
    let mut u_inv: Option<Scalar> = None;
    let mut best: Option<LogVal> = None;
    let mut stall = 0;
    let mut it = 0;
    loop {
        let (high, r) = p.divmod_right(&low)?;
        let res = r.pi_norm(field, &params);
        if res >= LogVal::Finite(ctx.n.clone()) {
            let target = headroom(&low.pi_norm(field, &params));
            return finish(field, p, high, low, &params, &target, ctx, it);
        }
        if it >= ctx.max_iter {
            return Err(Error::IterationBudget(ctx.max_iter));
        }
        match &best {
            Some(b) if &res <= b => {
                stall += 1;
                if stall >= STALL_LIMIT {
                    return Err(Error::PrecisionLoss(format!("residual stuck at lv {res}")));
                }
            }
            _ => {
                stall = 0;
                best = Some(res.clone());
            }
        }
        if u_inv.is_none() {
            let u = high.coeff(0);
            if u.is_zero() {
                return Err(Error::PrecisionLoss("vanishing constant term in the high factor".into()));
            }
            let inv = u.inv();
            let w = field.val(&inv).finite().unwrap() + &ctx.n;
            u_inv = Some(round_to(field, &inv, &w, ctx)?);
        }
        let step = r.left_scale(u_inv.as_ref().unwrap());
        let target = headroom(&high.pi_norm(field, &params));
        low = round_poly(field, &low.add(&step), lv_break, &target, ctx)?;
        it += 1;
    }
}

/// Rounds the high factor and recomputes the residual exactly.
#[allow(clippy::too_many_arguments)]
fn finish(
    field: &FieldSpec,
    p: &TwistedPoly,
    high: TwistedPoly,
    low: TwistedPoly,
    params: &PiNormParams,
    target: &Q,
    ctx: &PrecisionCtx,
    iterations: usize,
) -> Result<SlopeSplit> {
    let rounded = round_poly(field, &high, &params.lv_t, target, ctx)?;
    let residual = p.sub(&rounded.mul(&low)).pi_norm(field, params);
    let (high, residual) = if residual >= LogVal::Finite(ctx.n.clone()) {
        (rounded, residual)
    } else {
        let exact = p.sub(&high.mul(&low)).pi_norm(field, params);
        (high, exact)
    };
    Ok(SlopeSplit { high, low, residual_lv: residual, iterations })
}

/// Full factorization into factors pure of one clipped radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeFactorization {
    /// `P ≈ factors[0] · factors[1] · …`, in descending `lv`.
    pub factors: Vec<TwistedPoly>,
    /// Radius `lv` of each factor.
    pub lvs: Vec<Q>,
    /// Residual of each split, in order.
    pub residual_lv: Vec<LogVal>,
}

/// Splits off the pure factors of `p` from the smallest radius down.
pub fn factor_by_radius(field: &FieldSpec, p: &TwistedPoly, ctx: &PrecisionCtx) -> Result<SlopeFactorization> {
    let prof = radii::radii_from_polygon(field, p)?;
    let lvs: Vec<Q> = prof.entries().map(|(lv, _)| lv.clone()).collect();
    let mut factors = Vec::new();
    let mut residual_lv = Vec::new();
    let mut rest = p.clone();
    for lv in &lvs[..lvs.len() - 1] {
        let split = slope_factorize(field, &rest, lv, ctx)?;
        factors.push(split.high);
        residual_lv.push(split.residual_lv);
        rest = split.low;
    }
    factors.push(rest);
    Ok(SlopeFactorization { factors, lvs, residual_lv })
}

/// One summand of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Radius `lv` per decomposed derivation.
    pub key: Vec<Q>,
    pub module: DiffModule,
    /// Columns: the component's basis in ambient coordinates.
    pub embedding: Matrix,
    /// Pure operator presenting the component, when one was computed.
    pub operator: Option<TwistedPoly>,
    /// Smallest residual of the factorizations that produced it.
    pub residual_lv: LogVal,
    /// Whether the component was obtained without approximation.
    pub exact: bool,
}

impl Component {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }
}

/// Outcome of the certificate checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub dims_sum: bool,
    pub profile_match: bool,
    pub residual_ok: bool,
    pub fixed_points: bool,
    pub embedding_invertible: bool,
    pub bruteforce_consistent: bool,
    pub marginals_match: bool,
}

impl Certificate {
    fn all_true() -> Certificate {
        Certificate {
            dims_sum: true,
            profile_match: true,
            residual_ok: true,
            fixed_points: true,
            embedding_invertible: true,
            bruteforce_consistent: true,
            marginals_match: true,
        }
    }

    pub fn pass(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn failures(&self) -> Vec<&'static str> {
        [
            (self.dims_sum, "dims_sum"),
            (self.profile_match, "profile_match"),
            (self.residual_ok, "residual_ok"),
            (self.fixed_points, "fixed_points"),
            (self.embedding_invertible, "embedding_invertible"),
            (self.bruteforce_consistent, "bruteforce_consistent"),
            (self.marginals_match, "marginals_match"),
        ]
        .into_iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| name)
        .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dims_sum": self.dims_sum,
            "profile_match": self.profile_match,
            "residual_ok": self.residual_ok,
            "fixed_points": self.fixed_points,
            "embedding_invertible": self.embedding_invertible,
            "bruteforce_consistent": self.bruteforce_consistent,
            "marginals_match": self.marginals_match,
            "pass": self.pass(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    /// Derivations along which keys are taken, in key order.
    pub derivations: Vec<usize>,
    pub components: Vec<Component>,
    pub certificate: Certificate,
}

impl Decomposition {
    /// Component dimensions keyed by radius tuple.
    pub fn keys(&self) -> MultiRadiusProfile {
        MultiRadiusProfile::from_entries(self.components.iter().map(|c| (c.key.clone(), c.dim())))
    }

    /// Checks the certificate, turning failures into an error.
    pub fn verified(self) -> Result<Decomposition> {
        if self.certificate.pass() {
            Ok(self)
        } else {
            Err(Error::CertificateFailure(self.certificate.failures().join(", ")))
        }
    }

    pub fn to_json(&self, field: &FieldSpec) -> Value {
        let comps: Vec<Value> = self
            .components
            .iter()
            .map(|c| {
                json!({
                    "key": c.key.iter().map(fmt_q).collect::<Vec<_>>(),
                    "dim": c.dim(),
                    "operator": c.operator.as_ref().map(|p| p.fmt_with(field)),
                    "exact": c.exact,
                    "residual_lv": c.residual_lv.to_string(),
                })
            })
            .collect();
        let names: Vec<&str> = self.derivations.iter().map(|&j| field.vars[j].as_str()).collect();
        json!({"derivations": names, "components": comps, "certificate": self.certificate.to_json()})
    }
}

/// Coordinates of `q mod P` in the basis `1, T, …, T^{n-1}`.
fn remainder_coords(q: &TwistedPoly, p: &TwistedPoly) -> Result<Vec<Scalar>> {
    let n = p.degree().unwrap();
    let (_, r) = q.divmod_right(p)?;
    Ok((0..n).map(|i| r.coeff(i)).collect())
}

/// Matrices of all derivations on the span of the columns of `e`, which must
/// be stable up to relative error `lv ≥ tol`.
fn restrict_approx(m: &DiffModule, e: &Matrix, tol: &Q, ctx: &PrecisionCtx) -> Result<DiffModule> {
    let rows = e.independent_rows();
    let square = e.select_rows(&rows);
    let field = m.field();
    let mut mats = Vec::with_capacity(m.mats().len());
    for (j, g) in m.mats().iter().enumerate() {
        let w = e.derive(j).add(&g.mul(e));
        let h = square.solve(&w.select_rows(&rows))?;
        let err = e.mul(&h).sub(&w).min_val(field);
        // Relative to the terms of `w`, which may cancel to rounding noise.
        let terms = e.derive(j).min_val(field).min(&g.min_val(field) + &e.min_val(field));
        let scale = terms.finite().cloned().unwrap_or_else(Q::zero);
        if err < LogVal::Finite(scale + tol) {
            return Err(Error::StabilityFailure(j));
        }
        let lv_h = h.min_val(field);
        let h = match lv_h.finite() {
            Some(v) => {
                let w = v + &ctx.n;
                let mut out = Matrix::zeros(h.rows(), h.cols());
                for a in 0..h.rows() {
                    for b in 0..h.cols() {
                        out.set(a, b, round_to(field, h.get(a, b), &w, ctx)?);
                    }
                }
                out
            }
            None => h,
        };
        mats.push(h);
    }
    Ok(DiffModule::from_parts_unchecked(field.clone(), mats))
}

/// Component operators `A_k` and right cofactors `B_k` with `P ≈ A_k·B_k`,
/// one per distinct radius in ascending `lv`.
struct OperatorSplit {
    lvs: Vec<Q>,
    pure: Vec<TwistedPoly>,
    cofactors: Vec<TwistedPoly>,
    residuals: Vec<LogVal>,
}

fn split_operator(field: &FieldSpec, p: &TwistedPoly, lvs: &[Q], ctx: &PrecisionCtx) -> Result<OperatorSplit> {
    let deriv = p.deriv();
    let s = lvs.len();
    let mut out = OperatorSplit { lvs: lvs.to_vec(), pure: Vec::new(), cofactors: Vec::new(), residuals: Vec::new() };
    for k in 0..s {
        let mut residual = LogVal::Infinite;
        let (high, low) = if k == 0 {
            (p.clone(), TwistedPoly::one(deriv))
        } else {
            let split = slope_factorize(field, p, &lvs[k], ctx)?;
            residual = residual.min(split.residual_lv);
            (split.high, split.low)
        };
        // `high` carries lvs[k..]; peel off lvs[k] on the right through the
        // adjoint, which reverses products.
        let (pure, middle) = if k + 1 == s {
            (high, TwistedPoly::one(deriv))
        } else {
            let split = slope_factorize(field, &high.monic_adjoint(), &lvs[k + 1], ctx)?;
            residual = residual.min(split.residual_lv);
            (split.low.monic_adjoint(), split.high.monic_adjoint())
        };
        out.cofactors.push(middle.mul(&low));
        out.pure.push(pure);
        out.residuals.push(residual);
    }
    Ok(out)
}

/// Decomposes `m` along derivation `j` without judging the certificate.
pub fn decompose_unchecked(m: &DiffModule, j: usize, ctx: &PrecisionCtx) -> Result<Decomposition> {
    let field = m.field();
    field.check_deriv(j)?;
    if m.dim() == 0 {
        return Ok(Decomposition { derivations: vec![j], components: Vec::new(), certificate: Certificate::all_true() });
    }
    let (p, basis) = m.cyclic_basis(j)?;
    let prof = radii::radii_from_polygon(field, &p)?;
    let lvs: Vec<Q> = prof.entries().map(|(lv, _)| lv.clone()).rev().collect();
    if lvs.len() == 1 {
        let comp = Component {
            key: lvs.clone(),
            module: m.clone(),
            embedding: Matrix::identity(m.dim()),
            operator: Some(p),
            residual_lv: LogVal::Infinite,
            exact: true,
        };
        return Ok(Decomposition { derivations: vec![j], components: vec![comp], certificate: Certificate::all_true() });
    }
    if let Some(split) = window::split_and_embed(field, &p, &lvs, ctx)? {
        let mut components = Vec::with_capacity(lvs.len());
        for k in 0..lvs.len() {
            let cols: Vec<Vec<Scalar>> = split.coords[k].iter().map(|v| basis.mul_vec(v)).collect();
            let a = &split.pure[k];
            components.push(Component {
                key: vec![lvs[k].clone()],
                module: DiffModule::from_operator(field, a)?,
                embedding: Matrix::from_columns(&cols),
                operator: Some(a.clone()),
                residual_lv: split.residuals[k].clone(),
                exact: false,
            });
        }
        let certificate = certify(m, j, &prof, &components, ctx)?;
        return Ok(Decomposition { derivations: vec![j], components, certificate });
    }
    let split = split_operator(field, &p, &lvs, ctx)?;
    let mut components = Vec::with_capacity(lvs.len());
    for k in 0..lvs.len() {
        let a = &split.pure[k];
        let b = &split.cofactors[k];
        let dim_a = a.degree().unwrap();
        let cols = (0..dim_a)
            .map(|i| remainder_coords(&TwistedPoly::t(j).pow(i).mul(b), &p).map(|v| basis.mul_vec(&v)))
            .collect::<Result<Vec<_>>>()?;
        let embedding = Matrix::from_columns(&cols);
        let module = if field.nvars() == 1 {
            DiffModule::from_operator(field, a)?
        } else {
            restrict_approx(m, &embedding, &stability_tolerance(ctx), ctx)?
        };
        components.push(Component {
            key: vec![split.lvs[k].clone()],
            module,
            embedding,
            operator: Some(a.clone()),
            residual_lv: split.residuals[k].clone(),
            exact: split.residuals[k].is_infinite(),
        });
    }
    let certificate = certify(m, j, &prof, &components, ctx)?;
    Ok(Decomposition { derivations: vec![j], components, certificate })
}

/// Relative accuracy demanded of approximately stable subspaces.
fn stability_tolerance(ctx: &PrecisionCtx) -> Q {
    &ctx.n / q_int(2)
}

fn certify(
    m: &DiffModule,
    j: usize,
    prof: &RadiusProfile,
    components: &[Component],
    ctx: &PrecisionCtx,
) -> Result<Certificate> {
    let mut cert = Certificate::all_true();
    cert.dims_sum = components.iter().map(Component::dim).sum::<usize>() == m.dim();
    let mut union = RadiusProfile::empty();
    for c in components {
        let cp = radii::profile(&c.module, j)?;
        cert.fixed_points &= cp.support_len() == 1 && decompose_unchecked(&c.module, j, ctx)?.components.len() == 1;
        cert.bruteforce_consistent &= c.module.spectral_radius_rounded(j, COMPONENT_BRUTEFORCE_KMAX)?.brackets(&c.key[0]);
        union = union.union(&cp);
        cert.residual_ok &= c.residual_lv >= LogVal::Finite(ctx.n.clone());
    }
    cert.profile_match = &union == prof;
    let full = components.iter().fold(Matrix::zeros(m.dim(), 0), |acc, c| acc.hcat(&c.embedding));
    cert.embedding_invertible = full.cols() == m.dim() && full.rank() == m.dim();
    Ok(cert)
}

/// Decomposes `m` along derivation `j` into summands of one radius each.
pub fn decompose(m: &DiffModule, j: usize, ctx: &PrecisionCtx) -> Result<Decomposition> {
    decompose_unchecked(m, j, ctx)?.verified()
}

/// Decomposition by radius tuples over all derivations, without judging
/// the certificate.
pub fn multi_decompose_unchecked(m: &DiffModule, ctx: &PrecisionCtx) -> Result<Decomposition> {
    let n = m.field().nvars();
    let mut components = Vec::new();
    let mut cert = Certificate::all_true();
    refine(m, 0, Vec::new(), &Matrix::identity(m.dim()), ctx, &mut components, &mut cert)?;
    let keys = MultiRadiusProfile::from_entries(components.iter().map(|c| (c.key.clone(), c.dim())));
    for j in 0..n {
        cert.marginals_match &= keys.marginal(j) == radii::profile(m, j)?;
    }
    cert.dims_sum &= keys.dim() == m.dim();
    let full = components.iter().fold(Matrix::zeros(m.dim(), 0), |acc, c| acc.hcat(&c.embedding));
    cert.embedding_invertible &= full.cols() == m.dim() && full.rank() == m.dim();
    Ok(Decomposition { derivations: (0..n).collect(), components, certificate: cert })
}

fn refine(
    m: &DiffModule,
    j: usize,
    prefix: Vec<Q>,
    ambient: &Matrix,
    ctx: &PrecisionCtx,
    out: &mut Vec<Component>,
    cert: &mut Certificate,
) -> Result<()> {
    if m.dim() == 0 {
        return Ok(());
    }
    let dec = decompose_unchecked(m, j, ctx)?;
    let c = &dec.certificate;
    cert.dims_sum &= c.dims_sum;
    cert.profile_match &= c.profile_match;
    cert.residual_ok &= c.residual_ok;
    cert.fixed_points &= c.fixed_points;
    cert.bruteforce_consistent &= c.bruteforce_consistent;
    cert.embedding_invertible &= c.embedding_invertible;
    for comp in dec.components {
        let mut key = prefix.clone();
        key.extend(comp.key.iter().cloned());
        let embedding = ambient.mul(&comp.embedding);
        if j + 1 < m.field().nvars() {
            refine(&comp.module, j + 1, key, &embedding, ctx, out, cert)?;
        } else {
            out.push(Component { key, embedding, ..comp });
        }
    }
    Ok(())
}

/// Decomposes `m` by radius tuples over all derivations.
pub fn multi_decompose(m: &DiffModule, ctx: &PrecisionCtx) -> Result<Decomposition> {
    multi_decompose_unchecked(m, ctx)?.verified()
}

/// Whether a finite prefix `lv(π_0), lv(π_1), …` has non-decreasing ratios
/// `π_{i+1}/π_i`, all at most `r(K, ∂)`.
pub fn check_condition_c(pi: &[LogVal], lv_rk: &Q) -> bool {
    let Some(vals) = pi.iter().map(|v| v.finite().cloned()).collect::<Option<Vec<Q>>>() else {
        return false;
    };
    let diffs: Vec<Q> = vals.windows(2).map(|w| &w[1] - &w[0]).collect();
    diffs.windows(2).all(|w| w[1] <= w[0]) && diffs.iter().all(|d| d >= lv_rk)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn f5() -> FieldSpec {
        FieldSpec::gauss(5, 1).unwrap()
    }

    fn x() -> Scalar {
        Scalar::var(0)
    }

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::default()
    }

    fn single(lv: Q) -> RadiusProfile {
        RadiusProfile::from_entries([(lv, 1)])
    }

    #[test]
    fn no_gap_on_pure_operator() {
        let p = TwistedPoly::linear(Scalar::ratio(1, 5), 0).mul(&TwistedPoly::linear(Scalar::ratio(2, 5), 0));
        assert!(matches!(slope_factorize(&f5(), &p, &q(5, 4), &ctx()), Err(Error::NoGap(_))));
    }

    #[test]
    fn splits_products_in_both_orders() {
        let f = f5();
        let a = TwistedPoly::linear(x(), 0);
        let b = TwistedPoly::linear(Scalar::ratio(1, 5), 0);
        for p in [a.mul(&b), b.mul(&a)] {
            let s = slope_factorize(&f, &p, &q(5, 4), &ctx()).unwrap();
            assert!(s.residual_lv >= LogVal::int(10));
            assert_eq!(radii::radii_from_polygon(&f, &s.high).unwrap(), single(q(5, 4)));
            assert_eq!(radii::radii_from_polygon(&f, &s.low).unwrap(), single(q(1, 4)));
            let params = PiNormParams::new(q(5, 4));
            assert_eq!(p.sub(&s.high.mul(&s.low)).pi_norm(&f, &params), s.residual_lv);
        }
    }

    #[test]
    fn budget_and_precision_aborts() {
        let f = f5();
        let p = TwistedPoly::linear(x(), 0).mul(&TwistedPoly::linear(Scalar::ratio(1, 5), 0));
        let tight = PrecisionCtx { max_iter: 0, ..ctx() };
        assert_eq!(slope_factorize(&f, &p, &q(5, 4), &tight), Err(Error::IterationBudget(0)));
        let capped = PrecisionCtx { d: 0, ..ctx() };
        assert!(matches!(slope_factorize(&f, &p, &q(5, 4), &capped), Err(Error::PrecisionLoss(_))));
    }

    #[test]
    fn full_factorization_descends_in_lv() {
        let f = f5();
        let p = TwistedPoly::linear(x(), 0)
            .mul(&TwistedPoly::linear(Scalar::ratio(1, 25), 0))
            .mul(&TwistedPoly::linear(Scalar::ratio(1, 5), 0));
        let fac = factor_by_radius(&f, &p, &ctx()).unwrap();
        assert_eq!(fac.lvs, vec![q(9, 4), q(5, 4), q(1, 4)]);
        assert_eq!(fac.factors.len(), 3);
        assert!(fac.residual_lv.iter().all(|r| r >= &LogVal::int(10)));
    }

    #[test]
    fn decomposes_conjugated_sum() {
        let f = f5();
        let m = DiffModule::new(f.clone(), vec![Matrix::diag(&[Scalar::ratio(1, 5), x()])]).unwrap();
        let conj = Matrix::from_rows(vec![vec![Scalar::one(), &x() + &Scalar::int(2)], vec![x(), (&x() + &Scalar::one()).pow(2)]]).unwrap();
        let m = m.change_basis(&conj).unwrap();
        let d = decompose(&m, 0, &ctx()).unwrap();
        assert_eq!(d.components.len(), 2);
        let keys: Vec<Q> = d.components.iter().map(|c| c.key[0].clone()).collect();
        assert_eq!(keys, vec![q(1, 4), q(5, 4)]);
        assert!(d.certificate.pass());
    }

    #[test]
    fn pure_and_empty_modules() {
        let f = f5();
        let m = DiffModule::rank_one(f.clone(), Scalar::ratio(1, 5)).unwrap();
        let d = decompose(&m, 0, &ctx()).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].module, m);
        assert!(decompose(&DiffModule::zero(f), 0, &ctx()).unwrap().components.is_empty());
    }

    #[test]
    fn multi_derivation_keys() {
        let f = FieldSpec::gauss(5, 2).unwrap();
        let z = Scalar::zero();
        let c = Scalar::ratio(1, 5);
        let m = DiffModule::new(f.clone(), vec![Matrix::diag(&[c.clone(), z.clone()]), Matrix::diag(&[z.clone(), c])]).unwrap();
        let d = multi_decompose(&m, &ctx()).unwrap();
        let expect = MultiRadiusProfile::from_entries([(vec![q(5, 4), q(1, 4)], 1), (vec![q(1, 4), q(5, 4)], 1)]);
        assert_eq!(d.keys(), expect);
        let trivial = DiffModule::new(f, vec![Matrix::zeros(2, 2), Matrix::zeros(2, 2)]).unwrap();
        let d = multi_decompose(&trivial, &ctx()).unwrap();
        assert_eq!(d.keys(), MultiRadiusProfile::from_entries([(vec![q(1, 4), q(1, 4)], 2)]));
    }

    #[test]
    fn stability_tolerates_vanishing_restrictions() {
        // One component has G_y = 0 exactly, so its approximate restriction
        // is pure rounding noise.
        let f = FieldSpec::gauss(5, 2).unwrap();
        let z = Scalar::zero();
        let c = Scalar::ratio(1, 5);
        let base = DiffModule::new(f.clone(), vec![Matrix::diag(&[c.clone(), z.clone()]), Matrix::diag(&[z, c])]).unwrap();
        let x = crate::text::parse_matrix(&f, "-4*x^2-6*x-1,2*x+2;-2*x-1,1").unwrap();
        let d = multi_decompose(&base.change_basis(&x).unwrap(), &ctx()).unwrap();
        let expect = MultiRadiusProfile::from_entries([(vec![q(5, 4), q(1, 4)], 1), (vec![q(1, 4), q(5, 4)], 1)]);
        assert_eq!(d.keys(), expect);
    }

    #[test]
    fn condition_c_examples() {
        let lv_rk = q(1, 4);
        assert!(check_condition_c(&PiNormParams::new(q(1, 4)).sequence(10), &lv_rk));
        assert!(!check_condition_c(&PiNormParams::new(q(0, 1)).sequence(10), &lv_rk));
        let bent = vec![LogVal::zero(), LogVal::ratio(1, 2), LogVal::ratio(3, 2)];
        assert!(!check_condition_c(&bent, &lv_rk));
    }
}
