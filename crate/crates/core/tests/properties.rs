mod common;

use proptest::prelude::*;

use stbc::cda::{build_quaternionizer, quaternionize, CyclicAlgebraSpec};
use stbc::codebook::{a4_field_basis, by_name, A4Variant};
use stbc::lattice::{delta_from, volume};
use stbc::linalg::{det, frob_inner, qr_decompose, realify, ComplexMatrix, RealMatrix, C64};
use stbc::numberfield::{change_basis, combine, rat, CyclotomicField};

use common::*;

fn complex_matrix(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(m, n)| {
        prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), m * n).prop_map(move |v| {
            ComplexMatrix::from_vec(m, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap()
        })
    })
}

fn ok(c: Check) -> Result<(), TestCaseError> {
    c.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn realify_is_isometry(x in complex_matrix(6)) {
        let (a, b) = (x.frob_norm(), stbc::linalg::norm(&realify(&x)));
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn frob_inner_is_realified_dot(a in complex_matrix(5), seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = random_complex(a.rows(), a.cols(), &mut r);
        let ip = frob_inner(&a, &b).unwrap();
        let d = stbc::linalg::dot(&realify(&a), &realify(&b));
        prop_assert!((ip - d).abs() <= 1e-12 * a.frob_norm() * b.frob_norm());
    }

    #[test]
    fn qr_diagonal_product_is_abs_det(n in 1usize..9, v in prop::collection::vec(-1.0..1.0f64, 64)) {
        let b = RealMatrix::from_fn(n, n, |i, j| v[i * 8 + j]);
        let qr = qr_decompose(&b).unwrap();
        let prod: f64 = (0..n).map(|i| qr.r[(i, i)].abs()).product();
        let d = b.det().unwrap().abs();
        prop_assert!((prod - d).abs() <= 1e-9 * d.max(prod));
    }

    #[test]
    fn field_axioms_hold(seed in any::<u64>()) {
        ok(field_axioms(seed, 10))?;
    }

    #[test]
    fn embeddings_are_ring_homomorphisms(seed in any::<u64>()) {
        ok(embed_is_homomorphism(seed, 10))?;
    }

    #[test]
    fn change_basis_round_trips(coords in prop::collection::vec(-9i64..=9, 4)) {
        let basis = a4_field_basis(A4Variant::HalfImaginary);
        let x = combine(&coords.iter().map(|c| rat(*c, 1)).collect::<Vec<_>>(), &basis).unwrap();
        let back = change_basis(&x, &basis).unwrap();
        prop_assert_eq!(back, coords.iter().map(|c| rat(*c, 1)).collect::<Vec<_>>());
    }

    #[test]
    fn half_power_of_sigma_is_conjugation(seed in any::<u64>(), m in prop::sample::select(vec![4u32, 5, 7, 8])) {
        ok(half_power_conjugates(m, seed, 5))?;
    }

    #[test]
    fn quaternionize_preserves_spectrum(seed in any::<u64>()) {
        ok(quaternionize_is_similarity(seed, 5))?;
    }

    #[test]
    fn mido_algebra_quaternionizes(seed in any::<u64>()) {
        ok(quaternionized_left_regular_is_alamouti(&CyclicAlgebraSpec::mido(), seed, 3))?;
    }

    #[test]
    fn six_algebra_quaternionizes(seed in any::<u64>()) {
        ok(quaternionized_left_regular_is_alamouti(&CyclicAlgebraSpec::six(), seed, 2))?;
    }

    #[test]
    fn quaternionic_codes_have_alamouti_codewords(
        seed in any::<u64>(),
        name in prop::sample::select(vec!["mido_a4_integral", "mido_a4_half_imag", "code_6x3", "code_6x2"]),
    ) {
        ok(codewords_are_quaternionic(name, seed, 5))?;
    }

    #[test]
    fn c1_determinants_do_not_vanish(seed in any::<u64>()) {
        ok(c1_full_diversity(seed, 200))?;
    }

    #[test]
    fn mask_predicts_r_zeros_on_fresh_channels(
        seed in any::<u64>(),
        name in prop::sample::select(vec!["alamouti", "dort", "mido_a4_half_imag", "mido_c2", "code_6x2"]),
    ) {
        ok(mask_predicts_r_zeros(name, seed, 5))?;
    }

    #[test]
    fn delta_ignores_scale(s in 0.1..20.0f64) {
        let code = by_name("mido_c1").unwrap();
        let base = delta_from(1.0, volume(&code).unwrap(), 4, 16).unwrap();
        let scaled = code.rescaled(s);
        let d = delta_from(s.powi(4), volume(&scaled).unwrap(), 4, 16).unwrap();
        prop_assert!((d - base).abs() < 1e-9);
    }

    #[test]
    fn similarity_keeps_abs_det(seed in any::<u64>(), gnum in 1i64..20, gden in 1i64..10) {
        let mut r = rng(seed);
        let x = random_complex(4, 4, &mut r);
        let q = build_quaternionizer(4, &rat(-gnum, gden)).unwrap();
        let (a, b) = (det(&x).unwrap().norm(), det(&quaternionize(&x, &q).unwrap()).unwrap().norm());
        prop_assert!((a - b).abs() <= 1e-9 * x.frob_norm().powi(4));
    }

    #[test]
    fn a4_determinant_times_nine_cubed_is_integral(g in prop::collection::vec(-3i64..=3, 16)) {
        // The integral variant's basis has exact Z[ζ5] coordinates and γ = −8/9.
        let field = CyclotomicField::new(5).unwrap();
        let alg = CyclicAlgebraSpec::mido();
        let basis = a4_field_basis(A4Variant::Integral);
        let x: Vec<_> = (0..4)
            .map(|j| combine(&g[4 * j..4 * j + 4].iter().map(|c| rat(*c, 1)).collect::<Vec<_>>(), &basis).unwrap())
            .collect();
        prop_assert!(x.iter().all(|e| *e.field() == field));
        let n = stbc::cda::reduced_norm_exact(&alg, &x).unwrap();
        let q = n.as_rational().expect("reduced norm lies in Q");
        let scaled = q * rat(729, 1);
        prop_assert!(scaled.is_integer(), "9^3 det = {}", scaled);
    }
}

#[test]
fn deterministic_checks_at_full_size() {
    isometry(1, 1000).unwrap();
    frob_inner_matches_dot(2, 1000).unwrap();
    qr_det_is_diagonal_product(3, 200).unwrap();
    field_axioms(4, 500).unwrap();
    embed_is_homomorphism(5, 100).unwrap();
    grams_positive_definite().unwrap();
    dimension_rates().unwrap();
    puncturing_never_increases_kappa(6).unwrap();
}

#[test]
fn delta_and_mindet_survive_scaling_and_conjugation() {
    for name in ["alamouti", "mido_a4_integral", "mido_c1"] {
        delta_scale_invariant(name, 7).unwrap();
    }
    mindet_similarity_invariant("mido_a4_integral", 8).unwrap();
    mindet_similarity_invariant("mido_c1", 9).unwrap();
}

#[test]
fn simulation_is_deterministic_across_workers() {
    sim_deterministic("alamouti", 10).unwrap();
    sim_deterministic("mido_a4_half_imag", 11).unwrap();
}

#[test]
fn golden_field_sigma_squared_fixes_i() {
    // ζ ↦ ζ^17 on Q(ζ20) fixes i, so its square cannot be complex conjugation.
    let err = half_power_conjugates(20, 12, 5).unwrap_err();
    assert!(err.contains("zeta_20"));
}

#[test]
fn c2_codewords_leave_quaternion_block_form() {
    assert!(codewords_are_quaternionic("mido_c2", 13, 5).is_err());
}
