use hess2_core::matineq::{
    contraction_scalars, expansion_coefficients, inequality_scale, lemma1_evaluate, lemma2_evaluate, m_functional,
    TransformEval,
};
use hess2_core::symmat::{cofactor_s2, elem_sym, newton_comatrix, spectrum, SymmetricMatrix};
use proptest::prelude::*;

fn sym(dim: usize, entries: &[f64]) -> SymmetricMatrix {
    let mut it = entries.iter().copied();
    SymmetricMatrix::from_upper_fn(dim, |_, _| it.next().unwrap()).unwrap()
}

/// `(A, v)` with `A` symmetric of dimension 2..=6 and entries in `[-2, 2]`.
fn matrix_and_vector() -> impl Strategy<Value = (SymmetricMatrix, Vec<f64>)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(-2.0..2.0f64, n * (n + 1) / 2),
            prop::collection::vec(-2.0..2.0f64, n),
        )
            .prop_map(move |(e, v)| (sym(n, &e), v))
    })
}

/// `(MᵀM, v)`: positive semidefinite, rank possibly deficient.
fn gram_and_vector() -> impl Strategy<Value = (SymmetricMatrix, Vec<f64>)> {
    (2usize..=6, 1usize..=6).prop_flat_map(|(n, rank)| {
        (
            prop::collection::vec(-1.5..1.5f64, n * rank),
            prop::collection::vec(-2.0..2.0f64, n),
        )
            .prop_map(move |(m, v)| {
                let a = SymmetricMatrix::from_upper_fn(n, |i, j| (0..rank).map(|k| m[k * n + i] * m[k * n + j]).sum())
                    .unwrap();
                (a, v)
            })
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn low_order_symmetric_functions((a, _) in matrix_and_vector()) {
        let tr = a.trace();
        let tr2 = a.square().trace();
        let scale = 1.0 + a.frobenius_norm().powi(2);
        prop_assert!(close(elem_sym(&a, 1).unwrap(), tr, 1e-12 * scale));
        prop_assert!(close(elem_sym(&a, 2).unwrap(), 0.5 * (tr * tr - tr2), 1e-11 * scale));
    }

    #[test]
    fn spectrum_is_sorted_and_preserves_invariants((a, _) in matrix_and_vector()) {
        let s = spectrum(&a).unwrap();
        prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let sum: f64 = s.eigenvalues.iter().sum();
        let sq: f64 = s.eigenvalues.iter().map(|l| l * l).sum();
        let scale = 1.0 + a.frobenius_norm().powi(2);
        prop_assert!(close(sum, a.trace(), 1e-11 * scale));
        prop_assert!(close(sq, a.frobenius_norm().powi(2), 1e-11 * scale));
    }

    #[test]
    fn comatrix_trace_is_twice_s2((a, _) in matrix_and_vector()) {
        let b = newton_comatrix(&a).unwrap();
        let s2 = elem_sym(&a, 2).unwrap();
        prop_assert!(close(b.trace(), 2.0 * s2, 1e-11 * (1.0 + a.frobenius_norm().powi(2))));
        // S₂ⁱʲ(A) Aⱼᵢ = 2 S₂(A), Euler's relation for a degree-2 form
        let cof = cofactor_s2(&a).unwrap();
        prop_assert!(close(cof.contract(&a), 2.0 * s2, 1e-11 * (1.0 + a.frobenius_norm().powi(2))));
    }

    #[test]
    fn semidefinite_residual_is_nonnegative((a, v) in gram_and_vector()) {
        let rec = lemma1_evaluate(&a, &v).unwrap();
        prop_assert!(rec.check().is_ok(), "{:?}", rec);
        prop_assert!(rec.residual_direct >= -1e-9 * rec.scale);
        let neg = lemma1_evaluate(&a.scaled(-1.0), &v).unwrap();
        prop_assert!(neg.residual_direct <= 1e-9 * neg.scale);
    }

    #[test]
    fn residual_is_odd_cubic_in_a_and_quadratic_in_v((a, v) in matrix_and_vector(), c in 0.25..3.0f64) {
        let base = lemma1_evaluate(&a, &v).unwrap();
        let scaled = lemma1_evaluate(&a.scaled(-c), &v).unwrap();
        prop_assert!(close(scaled.residual_direct, -c.powi(3) * base.residual_direct, 1e-9 * scaled.scale));
        let cv: Vec<f64> = v.iter().map(|x| c * x).collect();
        let stretched = lemma1_evaluate(&a, &cv).unwrap();
        prop_assert!(close(stretched.residual_direct, c * c * base.residual_direct, 1e-9 * stretched.scale));
    }

    #[test]
    fn residual_vanishes_in_three_dimensions(e in prop::collection::vec(-3.0..3.0f64, 6), v in prop::collection::vec(-3.0..3.0f64, 3)) {
        let a = sym(3, &e);
        let rec = lemma1_evaluate(&a, &v).unwrap();
        prop_assert!(rec.residual_direct.abs() <= 1e-10 * rec.scale, "{:?}", rec);
        prop_assert!(m_functional(&a, &v).unwrap().abs() <= 1e-10 * inequality_scale(&a, &v));
    }

    #[test]
    fn contraction_scalars_satisfy_cauchy_schwarz((a, v) in matrix_and_vector()) {
        let c = contraction_scalars(&a, &v).unwrap();
        prop_assert!(c.r >= 0.0 && c.t >= 0.0);
        prop_assert!(c.q * c.q <= c.r * c.t * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn factored_m_matches_direct_m(
        (a, v) in matrix_and_vector(),
        up in prop_oneof![0.1..3.0f64, -3.0..-0.1f64],
        upp in -3.0..3.0f64,
    ) {
        let vv = SymmetricMatrix::outer(&v).unwrap();
        let hess = a.lin_comb(up, &vv, upp);
        let tr = TransformEval::new(-1.0, up, upp).unwrap();
        let rec = lemma2_evaluate(&hess, &v, &tr).unwrap();
        prop_assert!(close(rec.m_direct, rec.m_factored, 1e-8 * rec.scale), "{:?}", rec);
    }

    #[test]
    fn only_the_cubic_coefficient_survives((a, v) in matrix_and_vector()) {
        let c = expansion_coefficients(&a, &v).unwrap();
        let lead = c.m30.abs().max(1.0);
        prop_assert!(c.m21.abs() <= 1e-8 * lead * inequality_scale(&a, &v));
        prop_assert!(c.m12.abs() <= 1e-8 * lead * inequality_scale(&a, &v));
        prop_assert!(c.m03.abs() <= 1e-8 * lead * inequality_scale(&a, &v));
    }
}
