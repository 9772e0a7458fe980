//! Property tests for the algebraic invariants of the library.

use num_bigint::BigInt;
use padic_dm::corpus;
use padic_dm::radii;
use padic_dm::taylor::{self, PairingVector};
use padic_dm::text;
use padic_dm::twisted::{PiNormParams, TwistedPoly};
use padic_dm::{DiffModule, FieldSpec, Scalar, Q};
use proptest::prelude::*;

fn gauss() -> FieldSpec {
    FieldSpec::gauss(5, 1).unwrap()
}

fn fields() -> impl Strategy<Value = FieldSpec> {
    prop_oneof![Just(gauss()), Just(FieldSpec::laurent())]
}

fn poly(coeffs: &[i64]) -> Scalar {
    let x = Scalar::var(0);
    coeffs.iter().enumerate().fold(Scalar::zero(), |acc, (e, &c)| &acc + &(&Scalar::int(c) * &x.pow(e as i32)))
}

/// `(a0 + a1 x + a2 x^2) / (b0 + b1 x)` with a nonzero denominator.
fn scalar() -> impl Strategy<Value = Scalar> {
    (prop::collection::vec(-10i64..=10, 3), (-10i64..=10, -10i64..=10))
        .prop_filter("nonzero denominator", |(_, (b0, b1))| *b0 != 0 || *b1 != 0)
        .prop_map(|(a, (b0, b1))| &poly(&a) / &poly(&[b0, b1]))
}

fn nonzero_scalar() -> impl Strategy<Value = Scalar> {
    scalar().prop_filter("nonzero", |s| !s.is_zero())
}

fn twisted(max_deg: usize) -> impl Strategy<Value = TwistedPoly> {
    (prop::collection::vec(scalar(), 0..=max_deg), nonzero_scalar()).prop_map(|(mut c, lead)| {
        c.push(lead);
        TwistedPoly::new(c, 0)
    })
}

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_formula_matches_relation(a in twisted(4), b in twisted(4)) {
        prop_assert_eq!(a.mul(&b), a.mul_by_relation(&b));
    }

    #[test]
    fn multiplication_is_associative(a in twisted(3), b in twisted(3), c in twisted(3)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn right_and_left_division_reconstruct(a in twisted(5), b in twisted(3)) {
        let (d, r) = a.divmod_right(&b).unwrap();
        prop_assert_eq!(d.mul(&b).add(&r), a.clone());
        prop_assert!(r.degree() < b.degree());
        let (d, r) = a.divmod_left(&b).unwrap();
        prop_assert_eq!(b.mul(&d).add(&r), a);
        prop_assert!(r.degree() < b.degree());
    }

    #[test]
    fn adjoint_reverses_products(a in twisted(3), b in twisted(3)) {
        prop_assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn pi_norm_is_submultiplicative(f in fields(), a in twisted(4), b in twisted(4), scale in 1i64..=4) {
        let params = PiNormParams::new(f.lv_rk(0) * Q::from_integer(BigInt::from(scale)));
        let lhs = a.mul(&b).pi_norm(&f, &params);
        prop_assert!(lhs >= &a.pi_norm(&f, &params) + &b.pi_norm(&f, &params));
    }

    #[test]
    fn valuation_laws(f in fields(), a in scalar(), b in scalar()) {
        prop_assert_eq!(f.val(&(&a * &b)), &f.val(&a) + &f.val(&b));
        prop_assert!(f.val(&(&a + &b)) >= f.val(&a).min(f.val(&b)));
        if f.val(&a) != f.val(&b) {
            prop_assert_eq!(f.val(&(&a + &b)), f.val(&a).min(f.val(&b)));
        }
        // |∂a| ≤ |∂|·|a|
        let bound = f.val(&a).plus(&f.lv_dnorm(0));
        prop_assert!(f.val(&a.derive(0)) >= bound);
    }

    #[test]
    fn taylor_map_is_a_ring_homomorphism(a in scalar(), b in scalar()) {
        let n = 6;
        let (ta, tb) = (taylor::taylor_map(&a, 0, n), taylor::taylor_map(&b, 0, n));
        prop_assert_eq!(taylor::taylor_map(&(&a * &b), 0, n), ta.mul(&tb));
        prop_assert_eq!(taylor::taylor_map(&(&a + &b), 0, n), ta.add(&tb));
        // d/dX τ(a) = τ(∂a) up to order n - 1
        prop_assert_eq!(ta.derive_x(), taylor::taylor_map(&a.derive(0), 0, n - 1));
    }

    #[test]
    fn taylor_map_is_isometric_on_gauss(a in scalar()) {
        let f = gauss();
        let t = taylor::taylor_map(&a, 0, 8);
        let lead = f.val(t.coeff(0));
        prop_assert_eq!(lead, f.val(&a));
        // Higher coefficients ∂^i(a)/i! have |·| ≤ |a|.
        for i in 1..=8 {
            prop_assert!(f.val(t.coeff(i)) >= f.val(&a));
        }
    }

    #[test]
    fn biduality_is_an_involution(coeffs in prop::collection::vec(scalar(), 9)) {
        let v = PairingVector { coeffs };
        let w = taylor::biduality_transform(&taylor::biduality_transform(&v, 0, 8).unwrap(), 0, 8).unwrap();
        prop_assert_eq!(w, v);
    }

    #[test]
    fn scalars_and_operators_round_trip_through_text(f in fields(), a in scalar(), p in twisted(3)) {
        prop_assert_eq!(text::parse_scalar(&f, &f.fmt_scalar(&a)).unwrap(), a);
        prop_assert_eq!(text::parse_operator(&f, &p.fmt_with(&f), 0).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn profiles_are_dual_invariant(f in fields(), seed in any::<u64>(), dim in 1usize..=2) {
        let c = corpus::conjugated_sum(&mut corpus::rng(seed), &f, dim, &[-2, -1, 0, 1]).unwrap();
        let dual = c.module.dual();
        prop_assert_eq!(radii::profile(&dual, 0).unwrap(), radii::profile(&c.module, 0).unwrap());
        prop_assert_eq!(dual.dual(), c.module);
    }

    #[test]
    fn operator_profiles_satisfy_invariants(f in fields(), p in twisted(3)) {
        let p = p.monicize().unwrap();
        prop_assume!(p.degree() > Some(0));
        let prof = radii::radii_from_polygon(&f, &p).unwrap();
        prop_assert_eq!(prof.dim(), p.degree().unwrap());
        prop_assert!(prof.check_invariants(&f.lv_rk(0)).is_ok());
        prop_assert!(radii::check_rationality(&f, 0, &prof).pass());
    }

    #[test]
    fn companion_modules_present_their_operator(p in twisted(3)) {
        let f = gauss();
        let p = p.monicize().unwrap();
        prop_assume!(p.degree() > Some(0));
        let m = DiffModule::from_operator(&f, &p).unwrap();
        prop_assert_eq!(radii::profile(&m, 0).unwrap(), radii::radii_from_polygon(&f, &p).unwrap());
    }

    #[test]
    fn rank_one_radius_follows_the_coefficient(k in -3i64..=2, u in prop::sample::select(vec![1i64, 2, 3, -4])) {
        // [5^k·u]: the root has valuation k, visible iff k < 0.
        let f = gauss();
        let c = Scalar::from_q(Q::from_integer(BigInt::from(5)).pow(k as i32) * Q::from_integer(BigInt::from(u)));
        let m = DiffModule::rank_one(f.clone(), c).unwrap();
        let expected = if k < 0 { q(1, 4) - Q::from_integer(BigInt::from(k)) } else { q(1, 4) };
        let prof = radii::profile(&m, 0).unwrap();
        prop_assert_eq!(prof.max_lv(), Some(&expected));
        prop_assert_eq!(prof.min_lv(), Some(&expected));
        let est = m.spectral_radius_bruteforce(0, 24);
        prop_assert!(est.brackets(&expected));
    }
}
