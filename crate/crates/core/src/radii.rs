//! Subsidiary generic radii of convergence.
//!
//! A profile maps `lv(radius)` to a multiplicity. Radii never exceed
//! `r(K, ∂)`, so every entry satisfies `lv ≥ lv_rK`. Profiles are computed
//! from the Newton polygon of a cyclic operator: a root of valuation `s`
//! with `s < lv(|∂|_sp)` contributes `lv_omega - s`; roots no larger than
//! `|∂|_sp` contribute `lv_rK`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde_json::{json, Value};

use crate::diffmod::{BruteForceRadius, DiffModule};
use crate::error::{Error, Result};
use crate::scalarfield::{fmt_q, FieldSpec};
use crate::twisted::TwistedPoly;
use crate::Q;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RadiusProfile {
    entries: BTreeMap<Q, usize>,
    dim: usize,
}

impl RadiusProfile {
    pub fn empty() -> RadiusProfile {
        RadiusProfile::default()
    }

    /// Collects `(lv, mult)` pairs, merging equal `lv`.
    pub fn from_entries(entries: impl IntoIterator<Item = (Q, usize)>) -> RadiusProfile {
        let mut p = RadiusProfile::empty();
        for (lv, m) in entries {
            p.insert(lv, m);
        }
        p
    }

    fn insert(&mut self, lv: Q, mult: usize) {
        if mult == 0 {
            return;
        }
        *self.entries.entry(lv).or_insert(0) += mult;
        self.dim += mult;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entries in descending `lv` (ascending radius).
    pub fn entries(&self) -> impl DoubleEndedIterator<Item = (&Q, usize)> {
        self.entries.iter().rev().map(|(k, v)| (k, *v))
    }

    pub fn mult(&self, lv: &Q) -> usize {
        self.entries.get(lv).copied().unwrap_or(0)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Largest `lv`: the generic radius of the module.
    pub fn max_lv(&self) -> Option<&Q> {
        self.entries.keys().next_back()
    }

    pub fn min_lv(&self) -> Option<&Q> {
        self.entries.keys().next()
    }

    /// Multiset union.
    pub fn union(&self, o: &RadiusProfile) -> RadiusProfile {
        let mut p = self.clone();
        for (lv, m) in &o.entries {
            p.insert(lv.clone(), *m);
        }
        p
    }

    /// Total mass, support bound and `lv ≥ lv_rK`.
    pub fn check_invariants(&self, lv_rk: &Q) -> Result<()> {
        let mass: usize = self.entries.values().sum();
        if mass != self.dim {
            return Err(Error::CertificateFailure(format!("profile mass {mass} != dim {}", self.dim)));
        }
        if self.entries.len() > self.dim {
            return Err(Error::CertificateFailure("profile support exceeds dimension".into()));
        }
        if let Some(lv) = self.min_lv() {
            if lv < lv_rk {
                return Err(Error::CertificateFailure(format!("radius lv {} below lv_rK", fmt_q(lv))));
            }
        }
        Ok(())
    }

    pub fn to_json(&self, derivation: &str) -> Value {
        let entries: Vec<Value> = self.entries().map(|(lv, m)| json!({"lv": fmt_q(lv), "mult": m})).collect();
        json!({"entries": entries, "dim": self.dim, "derivation": derivation})
    }

    /// Reads the JSON form back; the derivation name is returned alongside.
    pub fn from_json(v: &Value) -> Result<(RadiusProfile, String)> {
        let bad = || Error::InvalidInput("malformed profile JSON".into());
        let mut p = RadiusProfile::empty();
        for e in v["entries"].as_array().ok_or_else(bad)? {
            let lv: Q = e["lv"].as_str().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let m = e["mult"].as_u64().ok_or_else(bad)? as usize;
            p.insert(lv, m);
        }
        if v["dim"].as_u64() != Some(p.dim as u64) {
            return Err(bad());
        }
        Ok((p, v["derivation"].as_str().unwrap_or("").to_string()))
    }
}

/// Profile of a cyclic operator together with the number of roots that sit
/// exactly on the clipping threshold `|∂|_sp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolygonRadii {
    pub profile: RadiusProfile,
    pub boundary_hits: usize,
}

/// Radius `lv` of a root of valuation `s`, and whether it hit the threshold.
pub fn clipped_lv(field: &FieldSpec, j: usize, s: &Q) -> (Q, bool) {
    let dsp = field.lv_dsp(j);
    if s < &dsp {
        (field.lv_omega() - s, false)
    } else {
        (field.lv_rk(j), s == &dsp)
    }
}

pub fn polygon_radii(field: &FieldSpec, p: &TwistedPoly) -> Result<PolygonRadii> {
    match p.degree() {
        None => return Err(Error::ZeroPolynomial),
        Some(0) => return Err(Error::ZeroDegree),
        Some(_) => {}
    }
    let j = p.deriv();
    let np = p.newton_polygon(field)?;
    let mut profile = RadiusProfile::empty();
    let mut boundary_hits = 0;
    for (s, len) in &np.slopes {
        let (lv, hit) = clipped_lv(field, j, s);
        if hit {
            boundary_hits += len;
        }
        profile.insert(lv, *len);
    }
    profile.insert(field.lv_rk(j), np.zero_roots);
    Ok(PolygonRadii { profile, boundary_hits })
}

/// Radius profile of `K⟨T⟩/K⟨T⟩·P` for monic `P` of positive degree.
pub fn radii_from_polygon(field: &FieldSpec, p: &TwistedPoly) -> Result<RadiusProfile> {
    Ok(polygon_radii(field, p)?.profile)
}

/// Radius profile of `M` along derivation `j`.
pub fn profile(m: &DiffModule, j: usize) -> Result<RadiusProfile> {
    m.field().check_deriv(j)?;
    if m.dim() == 0 {
        return Ok(RadiusProfile::empty());
    }
    let p = m.cyclic_vector(j)?;
    radii_from_polygon(m.field(), &p)
}

/// Comparison of the polygon profile with the brute-force estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCheck {
    pub profile: RadiusProfile,
    pub bruteforce: BruteForceRadius,
    /// The generic radius (largest `lv`) lies within the brute-force bracket.
    pub agrees: bool,
}

impl OracleCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "polygon_lv": self.profile.max_lv().map(fmt_q),
            "bruteforce_lv": fmt_q(&self.bruteforce.lv_radius),
            "bruteforce_quotient_lv": fmt_q(&self.bruteforce.lv_quotient),
            "spread": fmt_q(&self.bruteforce.spread),
            "agrees": self.agrees,
        })
    }
}

/// Cross-validates `profile(M, j)` against `G_k` growth up to `kmax`.
pub fn cross_validate(m: &DiffModule, j: usize, kmax: usize) -> Result<OracleCheck> {
    let profile = profile(m, j)?;
    let bruteforce = m.spectral_radius_bruteforce(j, kmax);
    let agrees = match profile.max_lv() {
        Some(lv) => bruteforce.brackets(lv),
        None => true,
    };
    Ok(OracleCheck { profile, bruteforce, agrees })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RationalityStatus {
    Pass,
    Fail,
    /// The radius equals `r(K, ∂)`, outside the statement's range.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalityReport {
    pub entries: Vec<(Q, usize, RationalityStatus)>,
}

impl RationalityReport {
    pub fn pass(&self) -> bool {
        self.entries.iter().all(|e| e.2 != RationalityStatus::Fail)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|(lv, m, s)| json!({"lv": fmt_q(lv), "mult": m, "status": format!("{s:?}").to_lowercase()}))
            .collect();
        json!({"pass": self.pass(), "advisory": true, "entries": entries})
    }
}

/// For each radius below `r(K, ∂_j)` with multiplicity `μ`, checks that
/// `μ·(lv - lv_omega)` is an integer.
pub fn check_rationality(field: &FieldSpec, j: usize, prof: &RadiusProfile) -> RationalityReport {
    let lv_rk = field.lv_rk(j);
    let om = field.lv_omega();
    let entries = prof
        .entries()
        .map(|(lv, m)| {
            let status = if lv == &lv_rk {
                RationalityStatus::Skipped
            } else {
                let d = (lv - &om).denom().clone();
                if BigInt::from(m).is_multiple_of(&d) {
                    RationalityStatus::Pass
                } else {
                    RationalityStatus::Fail
                }
            };
            (lv.clone(), m, status)
        })
        .collect();
    RationalityReport { entries }
}

/// Profile keyed by one `lv` per derivation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiRadiusProfile {
    entries: BTreeMap<Vec<Q>, usize>,
    dim: usize,
}

impl MultiRadiusProfile {
    pub fn from_entries(entries: impl IntoIterator<Item = (Vec<Q>, usize)>) -> MultiRadiusProfile {
        let mut p = MultiRadiusProfile::default();
        for (k, m) in entries {
            if m > 0 {
                *p.entries.entry(k).or_insert(0) += m;
                p.dim += m;
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<Q>, usize)> {
        self.entries.iter().rev().map(|(k, v)| (k, *v))
    }

    /// Sum over all coordinates but `j`.
    pub fn marginal(&self, j: usize) -> RadiusProfile {
        RadiusProfile::from_entries(self.entries.iter().map(|(k, m)| (k[j].clone(), *m)))
    }

    pub fn to_json(&self, derivations: &[&str]) -> Value {
        let entries: Vec<Value> = self
            .entries()
            .map(|(k, m)| json!({"lv": k.iter().map(fmt_q).collect::<Vec<_>>(), "mult": m}))
            .collect();
        json!({"entries": entries, "dim": self.dim, "derivations": derivations})
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::scalarfield::Scalar;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn f5() -> FieldSpec {
        FieldSpec::gauss(5, 1).unwrap()
    }

    #[test]
    fn polygon_examples() {
        let f = f5();
        let p = TwistedPoly::linear(Scalar::ratio(1, 5), 0);
        assert_eq!(radii_from_polygon(&f, &p).unwrap(), RadiusProfile::from_entries([(q(5, 4), 1)]));
        let p = TwistedPoly::linear(Scalar::var(0), 0);
        assert_eq!(radii_from_polygon(&f, &p).unwrap(), RadiusProfile::from_entries([(q(1, 4), 1)]));
        let p = TwistedPoly::new(vec![Scalar::var(0), Scalar::ratio(-1, 5), Scalar::one()], 0);
        let r = radii_from_polygon(&f, &p).unwrap();
        assert_eq!(r, RadiusProfile::from_entries([(q(5, 4), 1), (q(1, 4), 1)]));
    }

    #[test]
    fn polygon_errors() {
        let f = f5();
        assert_eq!(radii_from_polygon(&f, &TwistedPoly::one(0)), Err(Error::ZeroDegree));
        let p = TwistedPoly::new(vec![Scalar::one(), Scalar::int(3)], 0);
        assert_eq!(radii_from_polygon(&f, &p), Err(Error::NotMonic));
    }

    #[test]
    fn boundary_hits_are_flagged() {
        let f = f5();
        let r = polygon_radii(&f, &TwistedPoly::linear(Scalar::int(3), 0)).unwrap();
        assert_eq!(r.boundary_hits, 1);
        let l = FieldSpec::laurent();
        let z = Scalar::var(0);
        let r = polygon_radii(&l, &TwistedPoly::linear(z.inv(), 0)).unwrap();
        assert_eq!((r.profile.max_lv().cloned(), r.boundary_hits), (Some(q(1, 1)), 1));
        let r = polygon_radii(&l, &TwistedPoly::linear(z.pow(-3), 0)).unwrap();
        assert_eq!((r.profile.max_lv().cloned(), r.boundary_hits), (Some(q(3, 1)), 0));
    }

    #[test]
    fn module_profiles() {
        let f = f5();
        let m = DiffModule::from_operator(&f, &TwistedPoly::linear(Scalar::ratio(1, 5), 0)).unwrap();
        assert_eq!(profile(&m, 0).unwrap(), RadiusProfile::from_entries([(q(5, 4), 1)]));
        let d = DiffModule::new(f.clone(), vec![Matrix::diag(&[Scalar::ratio(1, 5), Scalar::ratio(1, 25)])]).unwrap();
        assert_eq!(profile(&d, 0).unwrap(), RadiusProfile::from_entries([(q(5, 4), 1), (q(9, 4), 1)]));
        assert_eq!(profile(&DiffModule::zero(f.clone()), 0).unwrap(), RadiusProfile::empty());
        let s = DiffModule::rank_one(f.clone(), Scalar::ratio(1, 5))
            .unwrap()
            .direct_sum(&DiffModule::rank_one(f, Scalar::zero()).unwrap())
            .unwrap();
        assert_eq!(profile(&s, 0).unwrap(), RadiusProfile::from_entries([(q(5, 4), 1), (q(1, 4), 1)]));
    }

    #[test]
    fn cross_validation_agrees_on_blocks() {
        let f = f5();
        let m = DiffModule::new(f, vec![Matrix::diag(&[Scalar::ratio(1, 5), Scalar::zero()])]).unwrap();
        let c = cross_validate(&m, 0, 20).unwrap();
        assert!(c.agrees);
        assert_eq!(c.bruteforce.lv_radius, q(5, 4));
    }

    #[test]
    fn rationality_examples() {
        let f = f5();
        let r = check_rationality(&f, 0, &RadiusProfile::from_entries([(q(5, 4), 1)]));
        assert!(r.pass());
        let r = check_rationality(&f, 0, &RadiusProfile::from_entries([(q(1, 4), 1)]));
        assert_eq!(r.entries[0].2, RationalityStatus::Skipped);
        assert!(check_rationality(&f, 0, &RadiusProfile::empty()).pass());
        let r = check_rationality(&f, 0, &RadiusProfile::from_entries([(q(3, 4), 1)]));
        assert!(!r.pass());
        let r = check_rationality(&f, 0, &RadiusProfile::from_entries([(q(3, 4), 2)]));
        assert!(r.pass());
    }

    #[test]
    fn json_form() {
        let p = RadiusProfile::from_entries([(q(1, 4), 1), (q(5, 4), 1)]);
        let v = p.to_json("x");
        assert_eq!(v.to_string(), r#"{"derivation":"x","dim":2,"entries":[{"lv":"5/4","mult":1},{"lv":"1/4","mult":1}]}"#);
        assert_eq!(RadiusProfile::from_json(&v).unwrap(), (p, "x".to_string()));
    }

    #[test]
    fn invariants_and_marginals() {
        let p = RadiusProfile::from_entries([(q(1, 4), 2), (q(5, 4), 1)]);
        assert!(p.check_invariants(&q(1, 4)).is_ok());
        assert!(p.check_invariants(&q(1, 2)).is_err());
        let m = MultiRadiusProfile::from_entries([(vec![q(5, 4), q(1, 4)], 1), (vec![q(1, 4), q(5, 4)], 1)]);
        assert_eq!(m.marginal(1), RadiusProfile::from_entries([(q(1, 4), 1), (q(5, 4), 1)]));
        assert_eq!(m.dim(), 2);
    }
}
