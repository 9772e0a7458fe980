//! Seeded test corpora: random twisted polynomials, conjugated direct sums
//! of rank-one blocks with known exponents, and random pairing vectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffmod::DiffModule;
use crate::error::Result;
use crate::matrix::Matrix;
use crate::scalarfield::{FieldKind, FieldSpec, Scalar};
use crate::taylor::PairingVector;
use crate::twisted::TwistedPoly;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn int_poly(rng: &mut ChaCha8Rng, var: usize, deg: usize, height: i64) -> Scalar {
    let x = Scalar::var(var);
    (0..=deg).fold(Scalar::zero(), |acc, e| &acc + &(&Scalar::int(rng.gen_range(-height..=height)) * &x.pow(e as i32)))
}

/// Random rational function in `x_var` with integer coefficients of
/// absolute value at most `height`: numerator of degree ≤ 2, denominator
/// either an integer or of degree one.
pub fn random_scalar(rng: &mut ChaCha8Rng, var: usize, height: i64) -> Scalar {
    let num = int_poly(rng, var, 2, height);
    let den = if rng.gen_bool(0.5) {
        Scalar::int(rng.gen_range(1..=height))
    } else {
        loop {
            let d = int_poly(rng, var, 1, height);
            if !d.is_zero() {
                break d;
            }
        }
    };
    &num / &den
}

fn nonzero_scalar(rng: &mut ChaCha8Rng, var: usize, height: i64) -> Scalar {
    loop {
        let s = random_scalar(rng, var, height);
        if !s.is_zero() {
            return s;
        }
    }
}

/// Random operator of degree at most `max_deg` along derivation `j`, with a
/// nonzero leading coefficient.
pub fn random_twisted(rng: &mut ChaCha8Rng, j: usize, max_deg: usize, height: i64) -> TwistedPoly {
    let d = rng.gen_range(0..=max_deg);
    let mut coeffs: Vec<Scalar> = (0..d).map(|_| random_scalar(rng, j, height)).collect();
    coeffs.push(nonzero_scalar(rng, j, height));
    TwistedPoly::new(coeffs, j)
}

/// A module `X⁻¹(⊕ [c_i])` obtained by conjugating a diagonal module.
#[derive(Clone, Debug)]
pub struct ConjugatedSum {
    pub module: DiffModule,
    /// The block coefficients `c_i`.
    pub blocks: Vec<Scalar>,
    /// `k_i` with `c_i = p^{k_i}·u_i` (or `z^{k_i}·u_i`), `u_i` a unit.
    pub exponents: Vec<i64>,
    pub conjugator: Matrix,
}

fn unit(rng: &mut ChaCha8Rng, field: &FieldSpec) -> Scalar {
    let x = Scalar::var(0);
    let one = Scalar::one();
    let units = match field.kind {
        FieldKind::GaussPadic { .. } => vec![
            one.clone(),
            Scalar::int(2),
            Scalar::int(-3),
            x.clone(),
            &x + &one,
            &(&Scalar::int(2) * &x) - &one,
            &x.pow(2) + &one,
        ],
        FieldKind::LaurentCharZero => vec![
            one.clone(),
            Scalar::int(2),
            Scalar::ratio(-1, 3),
            &x + &one,
            &Scalar::int(3) - &x,
            &(&x.pow(2) + &x) + &Scalar::int(2),
        ],
    };
    units.choose(rng).unwrap().clone()
}

fn uniformizer(field: &FieldSpec) -> Scalar {
    match field.kind {
        FieldKind::GaussPadic { p } => Scalar::int(p as i64),
        FieldKind::LaurentCharZero => Scalar::var(0),
    }
}

/// Product of an upper and a lower unipotent matrix with small polynomial
/// entries; its inverse is again polynomial.
pub fn random_unipotent_conjugator(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let mut upper = Matrix::identity(dim);
    let mut lower = Matrix::identity(dim);
    for r in 0..dim {
        for c in r + 1..dim {
            upper.set(r, c, int_poly(rng, 0, 1, 2));
            lower.set(c, r, int_poly(rng, 0, 1, 2));
        }
    }
    upper.mul(&lower)
}

/// A conjugated sum of `dim` rank-one blocks over a univariate field, with
/// exponents drawn from `exponents`.
pub fn conjugated_sum(rng: &mut ChaCha8Rng, field: &FieldSpec, dim: usize, exponents: &[i64]) -> Result<ConjugatedSum> {
    let pi = uniformizer(field);
    let ks: Vec<i64> = (0..dim).map(|_| *exponents.choose(rng).unwrap()).collect();
    let blocks: Vec<Scalar> = ks.iter().map(|&k| &pi.pow(k as i32) * &unit(rng, field)).collect();
    let base = DiffModule::new(field.clone(), vec![Matrix::diag(&blocks)])?;
    let conjugator = random_unipotent_conjugator(rng, dim);
    let module = base.change_basis(&conjugator)?;
    Ok(ConjugatedSum { module, blocks, exponents: ks, conjugator })
}

/// `count` conjugated sums of dimension 2 or 3 with exponents in
/// `-3..=3`, seeded.
pub fn block_corpus(field: &FieldSpec, count: usize, seed: u64) -> Result<Vec<ConjugatedSum>> {
    let mut r = rng(seed);
    let exps: Vec<i64> = (-3..=3).collect();
    (0..count)
        .map(|_| {
            let dim = r.gen_range(2..=3);
            conjugated_sum(&mut r, field, dim, &exps)
        })
        .collect()
}

/// Random pairing vector of length `n + 1` in the first variable.
pub fn random_pairing_vector(rng: &mut ChaCha8Rng, n: usize, height: i64) -> PairingVector {
    PairingVector { coeffs: (0..=n).map(|_| random_scalar(rng, 0, height)).collect() }
}
