//! Acceptance suite: ten criteria, one PASS/FAIL line each. Exits non-zero
//! when any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Signed;
use padic_dm::batch;
use padic_dm::corpus::{self, ConjugatedSum};
use padic_dm::diffmod::DiffModule;
use padic_dm::factorize::{check_condition_c, Decomposition};
use padic_dm::radii::{self, RadiusProfile};
use padic_dm::scalarfield::FieldKind;
use padic_dm::taylor::{self, PairingVector};
use padic_dm::twisted::{inequality_violations, PiNormParams, TwistedPoly};
use padic_dm::{FieldSpec, LogVal, Matrix, MultiRadiusProfile, PrecisionCtx, Scalar, Q};

const CORPUS_SIZE: usize = 50;
const CORPUS_SEED: u64 = 2024;
const BRUTEFORCE_KMAX: usize = 60;
const RESIDUAL_TARGET: i64 = 10;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn qi(n: i64) -> Q {
    q(n, 1)
}

/// Radius of the rank-one block `[π^k·u]`, `u` a unit, worked out by hand:
/// the single root has valuation `k`; it is visible iff `k < lv(|∂|_sp)`.
fn block_lv(field: &FieldSpec, k: i64) -> Q {
    match field.kind {
        // ω = p^{-1/(p-1)}, |∂|_sp = 1, r(K,∂) = ω
        FieldKind::GaussPadic { p } => {
            let om = q(1, p as i64 - 1);
            if k < 0 {
                om - qi(k)
            } else {
                om
            }
        }
        // ω = 1, |∂|_sp = e^{1}, r(K,∂) = e^{-1}
        FieldKind::LaurentCharZero => {
            if k < -1 {
                qi(-k)
            } else {
                qi(1)
            }
        }
    }
}

fn expected_profile(field: &FieldSpec, c: &ConjugatedSum) -> RadiusProfile {
    RadiusProfile::from_entries(c.exponents.iter().map(|&k| (block_lv(field, k), 1)))
}

/// Slopes `lv_t` of the norms tested: `lv_rk`, twice and four times it.
fn norm_slopes(field: &FieldSpec) -> Vec<Q> {
    let rk = field.lv_rk(0);
    vec![rk.clone(), &rk * qi(2), &rk * qi(4)]
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Outcome {
        Outcome { pass, detail: detail.into() }
    }
}

fn report(id: &str, o: &Outcome) {
    println!("criterion {id}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

/// Profiles emitted by every suite, for the rationality advisory.
#[derive(Default)]
struct Emitted {
    profiles: Vec<(FieldSpec, usize, RadiusProfile)>,
}

impl Emitted {
    fn push(&mut self, f: &FieldSpec, j: usize, p: &RadiusProfile) {
        self.profiles.push((f.clone(), j, p.clone()));
    }
}

/// The ring structure does not see the valuation, so both fields share this
/// suite; only the seed differs.
fn twisted_suite(seed: u64) -> Outcome {
    let start = Instant::now();
    let mut rng = corpus::rng(seed);
    let pairs: Vec<(TwistedPoly, TwistedPoly)> =
        (0..200).map(|_| (corpus::random_twisted(&mut rng, 0, 5, 10), corpus::random_twisted(&mut rng, 0, 5, 10))).collect();
    let mut bad = 0;
    for (a, b) in &pairs {
        let ab = a.mul(b);
        bad += usize::from(ab != a.mul_by_relation(b));
        let (d, r) = ab.add(a).divmod_right(b).unwrap();
        bad += usize::from(d.mul(b).add(&r) != ab.add(a) || r.degree() >= b.degree());
        let (d, r) = ab.add(b).divmod_left(a).unwrap();
        bad += usize::from(a.mul(&d).add(&r) != ab.add(b) || r.degree() >= a.degree());
    }
    for _ in 0..100 {
        let (a, b, c) = (
            corpus::random_twisted(&mut rng, 0, 5, 10),
            corpus::random_twisted(&mut rng, 0, 5, 10),
            corpus::random_twisted(&mut rng, 0, 5, 10),
        );
        bad += usize::from(a.mul(&b).mul(&c) != a.mul(&b.mul(&c)));
    }
    let t = start.elapsed();
    Outcome::new(bad == 0 && t < Duration::from_secs(60), format!("{bad} mismatches on 200 pairs + 100 triples, {t:.1?}"))
}

fn norm_suite(field: &FieldSpec, seed: u64) -> Outcome {
    let mut rng = corpus::rng(seed);
    let lv_rk = field.lv_rk(0);
    let mut bad = 0;
    let mut grid_bad = 0;
    for lv_t in norm_slopes(field) {
        let params = PiNormParams::new(lv_t);
        let seq = params.sequence(21);
        grid_bad += inequality_violations(&seq, &lv_rk, 20);
        grid_bad += usize::from(!check_condition_c(&seq, &lv_rk));
        for _ in 0..200 {
            let a = corpus::random_twisted(&mut rng, 0, 5, 10);
            let b = corpus::random_twisted(&mut rng, 0, 5, 10);
            let lhs = a.mul(&b).pi_norm(field, &params);
            let rhs = &a.pi_norm(field, &params) + &b.pi_norm(field, &params);
            bad += usize::from(lhs < rhs);
        }
    }
    Outcome::new(bad == 0 && grid_bad == 0, format!("{bad} submultiplicativity and {grid_bad} grid violations"))
}

fn radius_oracle(field: &FieldSpec, corpus: &[ConjugatedSum], profiles: &[RadiusProfile]) -> Outcome {
    let mods: Vec<&DiffModule> = corpus.iter().map(|c| &c.module).collect();
    let estimates = batch::map(&mods, |m| m.spectral_radius_bruteforce(0, BRUTEFORCE_KMAX));
    let mut bad_profile = 0;
    let mut bad_oracle = 0;
    for ((c, prof), est) in corpus.iter().zip(profiles).zip(&estimates) {
        bad_profile += usize::from(prof != &expected_profile(field, c));
        bad_oracle += usize::from(!est.brackets(prof.max_lv().unwrap()));
    }
    Outcome::new(
        corpus.len() >= 50 && bad_profile == 0 && bad_oracle == 0,
        format!("{} modules, {bad_profile} profile and {bad_oracle} brute-force mismatches", corpus.len()),
    )
}

fn decomposition_check(
    field: &FieldSpec,
    corpus: &[ConjugatedSum],
    profiles: &[RadiusProfile],
    ctx: &PrecisionCtx,
    emitted: &mut Emitted,
) -> Outcome {
    let mods: Vec<DiffModule> = corpus.iter().map(|c| c.module.clone()).collect();
    let start = Instant::now();
    let decs: Vec<padic_dm::Result<Decomposition>> = batch::decompose_all(&mods, 0, ctx);
    let t = start.elapsed();
    let target = LogVal::int(RESIDUAL_TARGET);
    let mut failed = Vec::new();
    for (i, (d, prof)) in decs.iter().zip(profiles).enumerate() {
        let d = match d {
            Ok(d) => d,
            Err(e) => {
                failed.push(format!("#{i}: {e}"));
                continue;
            }
        };
        let dims: usize = d.components.iter().map(|c| c.dim()).sum();
        let mut union = RadiusProfile::empty();
        let mut pure = true;
        let mut residual = true;
        for comp in &d.components {
            let p = radii::profile(&comp.module, 0).unwrap();
            emitted.push(field, 0, &p);
            pure &= p.support_len() == 1 && p.max_lv() == Some(&comp.key[0]);
            residual &= comp.residual_lv >= target;
            union = union.union(&p);
        }
        let ok = d.certificate.pass() && dims == mods[i].dim() && &union == prof && pure && residual;
        if !ok {
            failed.push(format!("#{i}: {:?}", d.certificate.failures()));
        }
    }
    let pass = failed.is_empty() && t < Duration::from_secs(300);
    Outcome::new(pass, format!("{}/{} certified in {t:.1?} {}", decs.len() - failed.len(), decs.len(), failed.join("; ")))
}

fn duality_suite(corpus: &[ConjugatedSum], profiles: &[RadiusProfile], emitted: &mut Emitted) -> Outcome {
    let mut bad = 0;
    for (c, prof) in corpus.iter().zip(profiles) {
        let dual = c.module.dual();
        let dp = radii::profile(&dual, 0).unwrap();
        emitted.push(c.module.field(), 0, &dp);
        bad += usize::from(&dp != prof) + usize::from(dual.dual() != c.module);
    }
    Outcome::new(bad == 0, format!("{bad} failures on {} modules", corpus.len()))
}

fn biduality_suite(seed: u64) -> (usize, usize) {
    let mut rng = corpus::rng(seed);
    let n = 8;
    let mut bad = 0;
    for _ in 0..100 {
        let v: PairingVector = corpus::random_pairing_vector(&mut rng, n, 10);
        let w = taylor::biduality_transform(&taylor::biduality_transform(&v, 0, n).unwrap(), 0, n).unwrap();
        bad += usize::from(w.coeffs[..=n] != v.coeffs[..=n]);
    }
    (bad, 100)
}

fn transfer_check(emitted: &mut Emitted) -> Outcome {
    let f = FieldSpec::gauss(5, 1).unwrap();
    let tol = q(1, 20);
    let mut lines = Vec::new();
    let mut pass = true;
    for k in -3..=0 {
        let c = Scalar::from_q(Q::from_integer(BigInt::from(5)).pow(k as i32));
        let m = DiffModule::rank_one(f.clone(), c).unwrap();
        let prof = radii::profile(&m, 0).unwrap();
        emitted.push(&f, 0, &prof);
        let y = taylor::solution_matrix(&m, 0, 40).unwrap();
        let est = taylor::hadamard_radius(&f, y.get(0, 0), 30, 40).unwrap();
        let expected = block_lv(&f, k);
        let err = (&est.lv - &expected).abs();
        let ok = est.spread <= tol && err <= tol && prof.max_lv() == Some(&expected);
        pass &= ok;
        lines.push(format!("k={k}: est {} spread {} expected {}", est.lv, est.spread, expected));
    }
    Outcome::new(pass, lines.join(", "))
}

fn multi_derivation(emitted: &mut Emitted) -> Outcome {
    let f = FieldSpec::gauss(5, 2).unwrap();
    let fifth = Scalar::ratio(1, 5);
    let gx = Matrix::diag(&[fifth.clone(), Scalar::zero()]);
    let gy = Matrix::diag(&[Scalar::zero(), fifth]);
    let base = DiffModule::new(f.clone(), vec![gx, gy]).unwrap();
    let expected = MultiRadiusProfile::from_entries([(vec![q(5, 4), q(1, 4)], 1), (vec![q(1, 4), q(5, 4)], 1)]);
    let mut rng = corpus::rng(8);
    let mut mods = vec![base.clone()];
    for _ in 0..10 {
        mods.push(base.change_basis(&corpus::random_unipotent_conjugator(&mut rng, 2)).unwrap());
    }
    let ctx = PrecisionCtx::default();
    let mut bad = 0;
    for (m, d) in mods.iter().zip(batch::multi_decompose_all(&mods, &ctx)) {
        let Ok(d) = d else {
            bad += 1;
            continue;
        };
        let keys = d.keys();
        let mut ok = d.certificate.pass() && keys == expected;
        for j in 0..2 {
            let prof = radii::profile(m, j).unwrap();
            emitted.push(&f, j, &prof);
            ok &= keys.marginal(j) == prof;
        }
        bad += usize::from(!ok);
    }
    Outcome::new(bad == 0, format!("{bad} failures on {} modules", mods.len()))
}

fn rationality(emitted: &Emitted) -> Outcome {
    let mut interior = 0;
    let mut bad = 0;
    for (f, j, p) in &emitted.profiles {
        let r = radii::check_rationality(f, *j, p);
        interior += r.entries.iter().filter(|e| e.2 != radii::RationalityStatus::Skipped).count();
        bad += usize::from(!r.pass());
    }
    Outcome::new(bad == 0, format!("{interior} interior radii in {} profiles, {bad} failing", emitted.profiles.len()))
}

struct FieldRun {
    twisted: Outcome,
    norms: Outcome,
    oracle: Outcome,
    decomposition: Outcome,
    duality: Outcome,
}

fn field_run(field: &FieldSpec, seed: u64, emitted: &mut Emitted) -> FieldRun {
    let corpus = corpus::block_corpus(field, CORPUS_SIZE, CORPUS_SEED).unwrap();
    let mods: Vec<DiffModule> = corpus.iter().map(|c| c.module.clone()).collect();
    let profiles: Vec<RadiusProfile> = batch::profiles(&mods, 0).into_iter().map(|p| p.unwrap()).collect();
    for p in &profiles {
        emitted.push(field, 0, p);
    }
    FieldRun {
        twisted: twisted_suite(seed),
        norms: norm_suite(field, seed + 1),
        oracle: radius_oracle(field, &corpus, &profiles),
        decomposition: decomposition_check(field, &corpus, &profiles, &PrecisionCtx::default(), emitted),
        duality: duality_suite(&corpus, &profiles, emitted),
    }
}

fn main() {
    let mut emitted = Emitted::default();
    let gauss = FieldSpec::gauss(5, 1).unwrap();
    let laurent = FieldSpec::laurent();
    let mut all = true;
    let mut emit = |id: &str, o: Outcome| {
        report(id, &o);
        all &= o.pass;
    };

    let g = field_run(&gauss, 1, &mut emitted);
    emit("1", g.twisted);
    emit("2", g.norms);
    emit("3", g.oracle);
    emit("4", g.decomposition);
    emit("5", g.duality);

    let (bg, ng) = biduality_suite(6);
    let (bl, nl) = biduality_suite(7);
    emit("6", Outcome::new(bg + bl == 0, format!("{} failures on {} vectors", bg + bl, ng + nl)));
    emit("7", transfer_check(&mut emitted));
    emit("8", multi_derivation(&mut emitted));

    let l = field_run(&laurent, 101, &mut emitted);
    emit("9", rationality(&emitted));
    let parts = [("1", l.twisted), ("2", l.norms), ("3", l.oracle), ("4", l.decomposition), ("5", l.duality)];
    let pass = parts.iter().all(|(_, o)| o.pass) && bl == 0;
    let detail: Vec<String> = parts
        .iter()
        .map(|(id, o)| format!("{id}: {} {}", if o.pass { "ok" } else { "failed" }, o.detail))
        .chain([format!("6: {bl} failures on {nl} vectors")])
        .collect();
    emit("10", Outcome::new(pass, detail.join(" | ")));

    if !all {
        std::process::exit(1);
    }
}
