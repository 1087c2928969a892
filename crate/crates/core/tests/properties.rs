use cubefreq::arrangements::{chain_counts, complement_resilient, Arrangement};
use cubefreq::cube::{low_degree_masks, naive_wht};
use cubefreq::format::{parse_certificate, parse_sign_table, write_certificate, write_sign_table};
use cubefreq::sampling::gram_extremes;
use cubefreq::witness::{build_fprime, find_sign_witness, find_sign_witness_fast, find_sign_witness_simplex, verify_certificate};
use cubefreq::{
    frequencies_equal, inverse_wht, project_h, wht_full, ExactTable, FloatTable, FunctionTable, Rational, Scalar,
};
use num_traits::Zero;
use proptest::prelude::*;

fn sign_table(p: usize) -> impl Strategy<Value = Vec<i8>> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1 << p)
}

fn rational_table(p: usize) -> impl Strategy<Value = ExactTable> {
    proptest::collection::vec((-30i64..30, 1i64..9), 1 << p)
        .prop_map(move |v| ExactTable::new(p, v.into_iter().map(|(n, d)| Rational::from_ratio(n, d)).collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trips(f in (1usize..=6).prop_flat_map(rational_table)) {
        let spec = wht_full(&f);
        prop_assert_eq!(&spec, &naive_wht(&f));
        prop_assert_eq!(inverse_wht(&spec), f);
    }

    #[test]
    fn projection_is_idempotent_and_kills_low_degrees(
        f in (2usize..=6).prop_flat_map(rational_table),
        d_frac in 0.0f64..1.0,
    ) {
        let p = f.p();
        let d = (d_frac * p as f64) as usize;
        let h = project_h(&f, d).unwrap();
        prop_assert_eq!(project_h(&h, d).unwrap(), h.clone());
        let spec = wht_full(&h);
        for m in low_degree_masks(p, d) {
            prop_assert!(spec.coeff(m).is_zero());
        }
        // f - h carries exactly the low frequencies of f.
        prop_assert!(frequencies_equal(&f, &f.sub(&h).unwrap(), d, &Rational::zero()).unwrap());
    }

    #[test]
    fn witnesses_certify_and_agree_with_pure_simplex(signs in (3usize..=5).prop_flat_map(sign_table), d in 0usize..4) {
        let p = signs.len().trailing_zeros() as usize;
        prop_assume!(d <= p);
        let f = ExactTable::from_signs(p, &signs).unwrap();
        let guided = find_sign_witness(&f, d).unwrap();
        let pure = find_sign_witness_simplex(&f, d).unwrap();
        prop_assert_eq!(guided.is_some(), pure.is_some());
        if let Some(h) = guided {
            let cert = build_fprime(&f, &h, d).unwrap();
            let back: cubefreq::ExactCertificate = parse_certificate(&write_certificate(&cert)).unwrap();
            let report = verify_certificate(&f, &back, d, &Rational::zero()).unwrap();
            prop_assert!(report.accepted, "{:?}", report.failures);
            prop_assert!(frequencies_equal(&f, &cert.fprime, d, &Rational::zero()).unwrap());
        }
    }

    #[test]
    fn double_mode_agrees_with_exact_mode(signs in sign_table(5), d in 0usize..5) {
        let exact = find_sign_witness(&ExactTable::from_signs(5, &signs).unwrap(), d).unwrap().is_some();
        let float_table = FloatTable::from_signs(5, &signs).unwrap();
        let fast = find_sign_witness_fast(&float_table, d).unwrap();
        prop_assert_eq!(exact, fast.is_some());
        if let Some(h) = fast {
            let cert = build_fprime(&float_table, &h, d).unwrap();
            prop_assert!(verify_certificate(&float_table, &cert, d, &f64::tolerance()).unwrap().accepted);
        }
    }

    #[test]
    fn sign_files_round_trip(signs in (1usize..=8).prop_flat_map(sign_table)) {
        let p = signs.len().trailing_zeros() as usize;
        let f = FunctionTable::<f64>::from_signs(p, &signs).unwrap();
        prop_assert_eq!(parse_sign_table::<f64>(&write_sign_table(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn gram_min_eigenvalue_grows_with_the_point_set(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut points: Vec<usize> = (0..64).collect();
        points.shuffle(&mut rng);
        // The unnormalized Gram matrix only gains positive semidefinite terms.
        let small = gram_extremes(6, 1, &points[..20]).unwrap();
        let large = gram_extremes(6, 1, &points[..40]).unwrap();
        prop_assert!(large.lambda_min * 40.0 >= small.lambda_min * 20.0 - 1e-9);
        prop_assert!((small.trace_over_k - 1.0).abs() < 1e-12);
    }
}

#[test]
fn chain_counts_for_coordinate_arrangements() {
    // Coordinate hyperplanes in R^m: 2^m regions and 2^m flats.
    for m in 1..=5usize {
        let normals = (0..m)
            .map(|i| (0..m).map(|j| Rational::from_ratio(i64::from(i == j), 1)).collect())
            .collect();
        let c = chain_counts(&Arrangement::new(m, normals).unwrap()).unwrap();
        assert_eq!((c.regions, c.intersection_subspaces, c.resilient_subsets), (1 << m, 1 << m, 1 << m));
        assert_eq!(c.buck_bound, 1 << m);
    }
}

#[test]
fn complement_of_whole_cube() {
    // With Theta the whole cube the complement is empty, so Theta is
    // resilient exactly when no P_H e_theta vanishes, that is when d < p.
    for p in 2..=7usize {
        let all: Vec<usize> = (0..1 << p).collect();
        for d in 0..p {
            assert!(complement_resilient::<Rational>(p, d, &all).unwrap().resilient, "p={p} d={d}");
        }
        let top = complement_resilient::<Rational>(p, p, &all).unwrap();
        assert!(!top.resilient);
        assert!(top.certificate.unwrap().holds(p, &all));
    }
}
