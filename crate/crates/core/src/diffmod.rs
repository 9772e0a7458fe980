//! Matrix-presented differential modules.
//!
//! A module of dimension `m` is given by one `m×m` matrix `G_j` per
//! derivation: `T_j` acts on coordinate vectors by `c ↦ ∂_j(c) + G_j·c`.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalarfield::window::{WElem, Window, EXACT};
use crate::scalarfield::{round_abs, FieldKind, FieldSpec, LogVal, Scalar};
use crate::twisted::TwistedPoly;
use crate::Q;

/// Candidate budget of the cyclic vector search.
pub const CYCLIC_SEARCH_BUDGET: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffModule {
    field: FieldSpec,
    mats: Vec<Matrix>,
    dim: usize,
}

/// A matrix `X` between presentations with `X·G' = G·X + ∂X` for every
/// derivation: the columns of `X` are images of the source basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleMorphism {
    pub matrix: Matrix,
}

/// Windowed brute-force estimate of the generic radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceRadius {
    /// Largest clipped `lv` over the window (the smallest radius seen).
    pub lv_radius: Q,
    /// Spread of the clipped per-step values over the window.
    pub spread: Q,
    /// Clipped estimate from the difference quotient between the window ends.
    pub lv_quotient: Q,
}

impl BruteForceRadius {
    /// Whether `lv` is consistent with the estimate: it must lie between the
    /// window estimate and the difference-quotient estimate, widened by the
    /// spread.
    pub fn brackets(&self, lv: &Q) -> bool {
        let (lo, hi) = if self.lv_radius <= self.lv_quotient {
            (&self.lv_radius, &self.lv_quotient)
        } else {
            (&self.lv_quotient, &self.lv_radius)
        };
        lv >= &(lo - &self.spread) && lv <= &(hi + &self.spread)
    }
}

fn q_int(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Low-height multipliers used to build cyclic vector candidates.
fn multipliers(j: usize) -> Vec<Scalar> {
    let x = Scalar::var(j);
    vec![
        Scalar::one(),
        x.clone(),
        Scalar::int(2),
        &x + &Scalar::one(),
        x.pow(2),
        Scalar::int(3),
        &x - &Scalar::one(),
        &x.pow(2) + &Scalar::one(),
        Scalar::int(-1),
        x.pow(3),
        &Scalar::int(2) * &x,
    ]
}

impl DiffModule {
    /// Builds a module, checking shapes, field membership and integrability.
    pub fn new(field: FieldSpec, mats: Vec<Matrix>) -> Result<DiffModule> {
        if mats.len() != field.nvars() {
            return Err(Error::InvalidInput(format!(
                "expected {} matrices, got {}",
                field.nvars(),
                mats.len()
            )));
        }
        let dim = mats[0].rows();
        for g in &mats {
            if !g.is_square() || g.rows() != dim {
                return Err(Error::InvalidInput("matrices must be square of equal size".into()));
            }
            for x in g.entries() {
                field.check_scalar(x)?;
            }
        }
        let m = DiffModule { field, mats, dim };
        m.check_integrability()?;
        Ok(m)
    }

    /// Builds a module known only to working precision, where
    /// integrability holds approximately.
    pub(crate) fn from_parts_unchecked(field: FieldSpec, mats: Vec<Matrix>) -> DiffModule {
        let dim = mats.first().map_or(0, |g| g.rows());
        DiffModule { field, mats, dim }
    }

    /// The zero module.
    pub fn zero(field: FieldSpec) -> DiffModule {
        let mats = vec![Matrix::zeros(0, 0); field.nvars()];
        DiffModule { field, mats, dim: 0 }
    }

    /// Rank-one module `[c]` over a one-variable field.
    pub fn rank_one(field: FieldSpec, c: Scalar) -> Result<DiffModule> {
        DiffModule::new(field, vec![Matrix::diag(&[c])])
    }

    fn check_integrability(&self) -> Result<()> {
        for a in 0..self.mats.len() {
            for b in (a + 1)..self.mats.len() {
                let (ga, gb) = (&self.mats[a], &self.mats[b]);
                let lhs = ga.derive(b).add(&ga.mul(gb));
                let rhs = gb.derive(a).add(&gb.mul(ga));
                if lhs != rhs {
                    return Err(Error::Integrability(a, b));
                }
            }
        }
        Ok(())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mats(&self) -> &[Matrix] {
        &self.mats
    }

    pub fn matrix(&self, j: usize) -> &Matrix {
        &self.mats[j]
    }

    /// Companion presentation of `K⟨T⟩/K⟨T⟩·P` in the basis `1, T, …,
    /// T^{n-1}`, over a one-variable field.
    pub fn from_operator(field: &FieldSpec, p: &TwistedPoly) -> Result<DiffModule> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !p.is_monic() {
            return Err(Error::NotMonic);
        }
        if field.nvars() != 1 {
            return Err(Error::FieldMismatch("operators need a one-variable field".into()));
        }
        let n = p.degree().unwrap();
        let mut g = Matrix::zeros(n, n);
        for j in 0..n.saturating_sub(1) {
            g.set(j + 1, j, Scalar::one());
        }
        for i in 0..n {
            g.set(i, n - 1, -p.coeff(i));
        }
        DiffModule::new(field.clone(), vec![g])
    }

    /// Applies `T_j` to a coordinate vector.
    pub fn apply_t(&self, j: usize, v: &[Scalar]) -> Vec<Scalar> {
        let gv = self.mats[j].mul_vec(v);
        v.iter().zip(gv).map(|(a, b)| &a.derive(j) + &b).collect()
    }

    /// The vectors `v, T v, …, T^{m} v`.
    fn orbit(&self, j: usize, v: Vec<Scalar>) -> Vec<Vec<Scalar>> {
        let mut out = vec![v];
        for _ in 0..self.dim {
            let next = self.apply_t(j, out.last().unwrap());
            out.push(next);
        }
        out
    }

    /// Cyclic vector candidates in search order: standard basis vectors, then
    /// `e_0` plus low-height multiples of the remaining basis vectors.
    fn candidates(&self, j: usize) -> impl Iterator<Item = Vec<Scalar>> + '_ {
        let m = self.dim;
        let mults = multipliers(j);
        let basis = (0..m).map(move |i| {
            let mut v = vec![Scalar::zero(); m];
            v[i] = Scalar::one();
            v
        });
        let mixed = (0..CYCLIC_SEARCH_BUDGET.saturating_sub(m)).map(move |k| {
            let mut v = vec![Scalar::zero(); m];
            v[0] = Scalar::one();
            for (i, e) in v.iter_mut().enumerate().skip(1) {
                *e = mults[(k + 1 + i * (k / mults.len() + 1)) % mults.len()].clone();
            }
            v
        });
        basis.chain(mixed).take(CYCLIC_SEARCH_BUDGET)
    }

    /// A monic operator `P` of degree `dim` with `M ≅ K⟨T_j⟩/K⟨T_j⟩·P`,
    /// together with the cyclic basis matrix `C` whose columns are
    /// `v, T v, …, T^{m-1} v`.
    pub fn cyclic_basis(&self, j: usize) -> Result<(TwistedPoly, Matrix)> {
        self.field.check_deriv(j)?;
        let m = self.dim;
        if m == 0 {
            return Ok((TwistedPoly::one(j), Matrix::zeros(0, 0)));
        }
        for v in self.candidates(j) {
            let orbit = self.orbit(j, v);
            let c = Matrix::from_columns(&orbit[..m]);
            if c.rank() < m {
                continue;
            }
            let rhs = Matrix::from_columns(&orbit[m..]);
            let a = c.solve(&rhs)?;
            let mut coeffs: Vec<Scalar> = (0..m).map(|i| -a.get(i, 0).clone()).collect();
            coeffs.push(Scalar::one());
            return Ok((TwistedPoly::new(coeffs, j), c));
        }
        Err(Error::SearchExhausted(CYCLIC_SEARCH_BUDGET))
    }

    /// A monic operator presenting the module along derivation `j`.
    pub fn cyclic_vector(&self, j: usize) -> Result<TwistedPoly> {
        Ok(self.cyclic_basis(j)?.0)
    }

    /// `G_k` for `k = 0..=kmax`: the matrices of `T_j^k`.
    pub fn iterate_g_all(&self, j: usize, kmax: usize) -> Vec<Matrix> {
        let g = &self.mats[j];
        let mut out = vec![Matrix::identity(self.dim)];
        for _ in 0..kmax {
            let prev = out.last().unwrap();
            out.push(prev.derive(j).add(&g.mul(prev)));
        }
        out
    }

    /// `G_k`, the matrix of `T_j^k`.
    pub fn iterate_g(&self, j: usize, k: usize) -> Matrix {
        self.iterate_g_all(j, k).pop().unwrap()
    }

    /// Estimates the generic radius from `val(G_k)/k` over `k ∈ [kmax/2,
    /// kmax]`, clipped at `r(K, ∂_j)`.
    pub fn spectral_radius_bruteforce(&self, j: usize, kmax: usize) -> BruteForceRadius {
        let kmax = kmax.max(1);
        let vals: Vec<Option<LogVal>> =
            self.iterate_g_all(j, kmax).iter().map(|g| Some(g.min_val(&self.field))).collect();
        self.summarize_vals(j, kmax, &vals)
    }

    /// Same estimate as [`Self::spectral_radius_bruteforce`], with `G_k`
    /// rounded at each step. Valuations at or above the clipping threshold
    /// `k·(lv_ω - lv_rk)` do not affect the clipped values, so the rounding
    /// only keeps the propagated error above that threshold; each step can
    /// lower the error valuation by at most `max(0, -lv_dsp, -val(G))`, and
    /// the threshold itself falls by `lv_rk - lv_ω` per step.
    pub fn spectral_radius_rounded(&self, j: usize, kmax: usize) -> Result<BruteForceRadius> {
        self.field.check_deriv(j)?;
        let kmax = kmax.max(1);
        if let Some(est) = self.spectral_radius_window(j, kmax) {
            return Ok(est);
        }
        let g = &self.mats[j];
        let zero = Q::from_integer(BigInt::from(0));
        let mut drop = -self.field.lv_dsp(j);
        if let LogVal::Finite(v) = g.min_val(&self.field) {
            drop = drop.max(-v);
        }
        let c0 = self.field.lv_omega() - self.field.lv_rk(j);
        let drop = drop.max(zero).max(-c0.clone());
        let threshold = |k: usize| &c0 * q_int(k);
        let work = |i: usize| threshold(i).max(threshold(kmax) + &drop * q_int(kmax - i));
        let mut vals = vec![Some(LogVal::zero())];
        let mut err = LogVal::Infinite;
        let mut cur = Matrix::identity(self.dim);
        for k in 1..=kmax {
            let next = cur.derive(j).add(&g.mul(&cur));
            err = match err {
                LogVal::Finite(e) => LogVal::Finite(e - &drop),
                inf => inf,
            };
            let w = work(k);
            let mut rounded = Vec::with_capacity(self.dim);
            for r in 0..self.dim {
                let mut row = Vec::with_capacity(self.dim);
                for c in 0..self.dim {
                    let a = round_abs(&self.field, next.get(r, c), &w)?;
                    err = err.min(a.err);
                    row.push(a.value);
                }
                rounded.push(row);
            }
            cur = Matrix::from_rows(rounded)?;
            let v = cur.min_val(&self.field);
            vals.push(if v < err { Some(v) } else { None });
        }
        Ok(self.summarize_vals(j, kmax, &vals))
    }

    /// The rounded estimate in [`Window`] arithmetic, for one-variable Gauss
    /// fields: `val(G_k)` is known when the smallest nonzero entry lies below
    /// the precision of every entry that vanished.
    fn spectral_radius_window(&self, j: usize, kmax: usize) -> Option<BruteForceRadius> {
        let p = match self.field.kind {
            FieldKind::GaussPadic { p } if self.field.nvars() == 1 => p,
            _ => return None,
        };
        let g = &self.mats[j];
        let w = Window::covering(p, g.entries())?;
        let n = self.dim;
        let ge: Vec<Vec<WElem>> =
            (0..n).map(|r| (0..n).map(|c| w.from_scalar(g.get(r, c), EXACT)).collect()).collect::<Option<_>>()?;
        let mut cur: Vec<Vec<WElem>> =
            (0..n).map(|r| (0..n).map(|c| if r == c { w.one() } else { w.zero(EXACT) }).collect()).collect();
        let mut vals = vec![Some(LogVal::zero())];
        for _ in 1..=kmax {
            let next: Vec<Vec<WElem>> = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| (0..n).fold(w.derive(&cur[r][c]), |acc, s| w.add(&acc, &w.mul(&ge[r][s], &cur[s][c]))))
                        .collect()
                })
                .collect();
            let known = next.iter().flatten().filter_map(WElem::val).min();
            let floor = next.iter().flatten().filter(|e| e.is_zero()).map(WElem::abs).min().unwrap_or(EXACT);
            vals.push(known.filter(|&v| v < floor).map(LogVal::int));
            cur = next;
        }
        Some(self.summarize_vals(j, kmax, &vals))
    }

    /// `vals[k]` is `val(G_k)`, or `None` when only known to be at or above
    /// the clipping threshold.
    fn summarize_vals(&self, j: usize, kmax: usize, vals: &[Option<LogVal>]) -> BruteForceRadius {
        let lv_rk = self.field.lv_rk(j);
        let lv_om = self.field.lv_omega();
        let clip = |r: Q| if r > lv_rk { r } else { lv_rk.clone() };
        let clipped = |k: usize| match &vals[k] {
            Some(LogVal::Finite(q)) => clip(&lv_om - q / q_int(k)),
            _ => lv_rk.clone(),
        };
        let lo = (kmax / 2).max(1);
        let window: Vec<Q> = (lo..=kmax).map(clipped).collect();
        let max = window.iter().max().unwrap().clone();
        let min = window.iter().min().unwrap().clone();
        let lv_quotient = match (&vals[kmax], &vals[lo]) {
            (Some(LogVal::Finite(a)), Some(LogVal::Finite(b))) if lo < kmax => {
                clip(&lv_om - (a - b) / q_int(kmax - lo))
            }
            _ => max.clone(),
        };
        BruteForceRadius { spread: &max - &min, lv_radius: max, lv_quotient }
    }

    /// The dual module, with matrices `-G_jᵀ`.
    pub fn dual(&self) -> DiffModule {
        DiffModule {
            field: self.field.clone(),
            mats: self.mats.iter().map(|g| g.transpose().neg()).collect(),
            dim: self.dim,
        }
    }

    pub fn direct_sum(&self, o: &DiffModule) -> Result<DiffModule> {
        if self.field != o.field {
            return Err(Error::FieldMismatch(format!(
                "{} vs {}",
                self.field.describe(),
                o.field.describe()
            )));
        }
        Ok(DiffModule {
            field: self.field.clone(),
            mats: self.mats.iter().zip(&o.mats).map(|(a, b)| a.block_diag(b)).collect(),
            dim: self.dim + o.dim,
        })
    }

    /// The same module in the basis given by the columns of the invertible
    /// matrix `x`: `G' = X⁻¹(G X + ∂X)`.
    pub fn change_basis(&self, x: &Matrix) -> Result<DiffModule> {
        let inv = x.inverse()?;
        let mats = self
            .mats
            .iter()
            .enumerate()
            .map(|(j, g)| inv.mul(&g.mul(x).add(&x.derive(j))))
            .collect();
        Ok(DiffModule { field: self.field.clone(), mats, dim: self.dim })
    }

    /// Matrices of the derivations on the span of the columns of `e`,
    /// assumed stable: solves `E·H_j = ∂_j E + G_j E` on independent rows and
    /// checks the remaining rows. Returns `Err(StabilityFailure(j))` when the
    /// span is not stable under derivation `j`.
    pub fn restrict(&self, e: &Matrix) -> Result<DiffModule> {
        let r = e.cols();
        if r == 0 {
            return Ok(DiffModule::zero(self.field.clone()));
        }
        let rows = e.independent_rows();
        if rows.len() < r {
            return Err(Error::InvalidInput("embedding columns are dependent".into()));
        }
        let square = e.select_rows(&rows);
        let mut mats = Vec::with_capacity(self.mats.len());
        for (j, g) in self.mats.iter().enumerate() {
            let w = e.derive(j).add(&g.mul(e));
            let h = square.solve(&w.select_rows(&rows))?;
            if e.mul(&h) != w {
                return Err(Error::StabilityFailure(j));
            }
            mats.push(h);
        }
        Ok(DiffModule { field: self.field.clone(), mats, dim: r })
    }
}

impl ModuleMorphism {
    /// Wraps `x` after checking `X·G'_j = G_j·X + ∂_j X` for every
    /// derivation, where `source` carries `G'` and `target` carries `G`.
    pub fn new(x: Matrix, source: &DiffModule, target: &DiffModule) -> Result<ModuleMorphism> {
        if x.rows() != target.dim || x.cols() != source.dim {
            return Err(Error::InvalidInput("morphism shape mismatch".into()));
        }
        if source.field != target.field {
            return Err(Error::FieldMismatch("morphism between different fields".into()));
        }
        for j in 0..source.mats.len() {
            let lhs = x.mul(&source.mats[j]);
            let rhs = target.mats[j].mul(&x).add(&x.derive(j));
            if lhs != rhs {
                return Err(Error::InvalidInput(format!("matrix does not intertwine derivation {j}")));
            }
        }
        Ok(ModuleMorphism { matrix: x })
    }
}
