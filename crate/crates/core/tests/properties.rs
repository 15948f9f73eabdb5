use proptest::prelude::*;

use traceineq::funcat::OperatorFunction;
use traceineq::ineq::{self, PsdPair};
use traceineq::sampler::GaussianFactor;
use traceineq::symla::{self, SymMatrix};
use traceineq::uinorm::{self, NormSpec};

const EPS: f64 = 1e-9;

fn gram(dim: usize, rows: usize, entries: Vec<f64>) -> SymMatrix {
    GaussianFactor { rows, dim, entries }.gram()
}

/// A PSD matrix `GᵀG` with `G` of `rows × dim` bounded entries.
fn psd(dim: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=dim).prop_flat_map(move |rows| {
        prop::collection::vec(-2.0f64..2.0, rows * dim).prop_map(move |e| gram(dim, rows, e))
    })
}

fn pair() -> impl Strategy<Value = (SymMatrix, SymMatrix)> {
    (1usize..=5).prop_flat_map(|n| (psd(n), psd(n)))
}

fn symmetric_of(n: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |e| {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| 0.5 * (e[i * n + j] + e[j * n + i])).collect())
            .collect();
        SymMatrix::from_rows(&rows).unwrap()
    })
}

fn symmetric() -> impl Strategy<Value = SymMatrix> {
    (1usize..=6).prop_flat_map(symmetric_of)
}

fn monotone_fn() -> impl Strategy<Value = OperatorFunction> {
    prop_oneof![
        (0.05f64..=1.0).prop_map(|p| OperatorFunction::monotone_power(p).unwrap()),
        Just(OperatorFunction::log1p()),
        (0.1f64..10.0).prop_map(|s| OperatorFunction::atom(s).unwrap()),
    ]
}

fn convex_fn() -> impl Strategy<Value = OperatorFunction> {
    prop_oneof![
        (1.0f64..=2.0).prop_map(|p| OperatorFunction::convex_power(p).unwrap()),
        Just(OperatorFunction::square()),
        (0.1f64..10.0).prop_map(|s| OperatorFunction::convex_atom(s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn spectral_reconstruction(m in symmetric()) {
        let d = symla::jacobi_eigh(&m).unwrap();
        let err = (&d.reconstruct() - &m).frobenius_norm();
        prop_assert!(err <= 1e-10 * m.frobenius_norm().max(1.0));
        prop_assert!(d.orthogonality_error() <= 1e-12);
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn parts_and_absolute_value(m in symmetric()) {
        let p = symla::decompose_parts(&m).unwrap();
        let scale = m.frobenius_norm().max(1.0);
        prop_assert!((&(&p.positive_part - &p.negative_part) - &m).frobenius_norm() <= 1e-10 * scale);
        prop_assert!(symla::trace_product(&p.positive_part, &p.negative_part).unwrap().abs() <= 1e-10 * scale * scale);
        let abs = symla::abs_matrix(&m).unwrap();
        prop_assert!((&abs - &(&p.positive_part + &p.negative_part)).frobenius_norm() <= 1e-10 * scale);
    }

    #[test]
    fn resolvent_identity_and_bounds((b, c) in pair(), s in prop::sample::select(vec![1e-3, 1e-1, 0.7, 10.0, 1e3])) {
        let residual = symla::resolvent_residual(&b, &c, s).unwrap();
        let inv = symla::resolvent(&b, s).unwrap();
        let inv_bc = symla::resolvent(&(&b + &c), s).unwrap();
        // Round-off floor: size of the terms that cancel.
        let (nb, nbc) = (inv.frobenius_norm(), inv_bc.frobenius_norm());
        let terms = nb + nbc + nb * c.frobenius_norm() * nbc;
        prop_assert!(residual <= 1e-12 * terms.max(1.0), "{residual:e} vs terms {terms:e}");
        if s >= 0.1 {
            prop_assert!(residual <= 1e-10 * (b.frobenius_norm() + c.frobenius_norm() + s).max(1.0));
        }
        // (B+s)⁻¹ ≤ 1/s
        let gap = &SymMatrix::identity(b.dim()).scale(1.0 / s) - &inv;
        prop_assert!(symla::jacobi_eigh(&gap).unwrap().min_eigenvalue() >= -1e-10 * (1.0 / s).max(1.0));
    }

    #[test]
    fn monotone_theorem((a, b) in pair(), f in monotone_fn()) {
        let g = ineq::monotone_gap(&a, &b, &f).unwrap();
        prop_assert!(g.relative_gap >= -EPS, "{g:?}");
    }

    #[test]
    fn convex_theorem((a, b) in pair(), f in convex_fn()) {
        let g = ineq::convex_gap(&a, &b, &f).unwrap();
        prop_assert!(g.relative_gap >= -EPS, "{g:?}");
    }

    #[test]
    fn gaps_vanish_on_the_diagonal(a in (1usize..=5).prop_flat_map(psd), f in monotone_fn(), h in convex_fn()) {
        prop_assert!(ineq::monotone_gap(&a, &a, &f).unwrap().gap.abs() <= 1e-10);
        prop_assert!(ineq::convex_gap(&a, &a, &h).unwrap().gap.abs() <= 1e-10);
        for s in [0.0, 0.3, 1.0] {
            let g = ineq::powers_stormer_gap(&a, &a, s).unwrap();
            prop_assert!(g.gap.abs() <= 1e-10 * a.trace().max(1.0));
        }
    }

    #[test]
    fn zee_terms_sum_to_trace((a, b) in pair(), f in monotone_fn()) {
        let pair = PsdPair::new(&a, &b).unwrap();
        let terms = pair.zee_decomposition().unwrap().terms(&pair, &f).unwrap();
        let total = pair.trace_diff_product(&f).unwrap();
        prop_assert!((terms.sum() - total).abs() <= 1e-9 * total.abs().max(1.0));
        let scale = terms.terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
        prop_assert!(terms.terms[1] <= EPS * scale && terms.terms[3] <= EPS * scale, "{terms:?}");
    }

    #[test]
    fn convex_cross_term_signs((a, b) in pair(), f in convex_fn()) {
        let pair = PsdPair::new(&a, &b).unwrap();
        let t = pair.zee_decomposition().unwrap().terms(&pair, &f).unwrap().terms;
        let scale = t.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(t[1] >= -EPS * scale && t[3] >= -EPS * scale, "{t:?}");
    }

    #[test]
    fn ricard_and_chain((a, b) in pair(), p in prop::sample::select(vec![1.2, 1.5, 2.5, 3.0, 4.0])) {
        prop_assert!(ineq::ricard_gap(&a, &b, p).unwrap().relative_gap >= -EPS);
        prop_assert!(ineq::chain_left_gap(&a, &b, p).unwrap().relative_gap >= -EPS);
        if p >= 2.0 {
            let c = ineq::interpolation_chain(&a, &b, p).unwrap();
            prop_assert!(c.left_gap.relative_gap >= -EPS && c.right_gap.relative_gap >= -EPS);
        }
    }

    #[test]
    fn ky_fan_is_monotone_in_k(m in symmetric()) {
        let n = m.dim();
        let norms: Vec<f64> = (1..=n).map(|k| uinorm::ky_fan_norm(&m, k).unwrap()).collect();
        prop_assert!(norms.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let trace = uinorm::norm(&m, NormSpec::trace()).unwrap();
        prop_assert!((norms[n - 1] - trace).abs() <= 1e-10 * trace.max(1.0));
    }

    #[test]
    fn holder_inequality((x, y) in (1usize..=6).prop_flat_map(|n| (symmetric_of(n), symmetric_of(n)))) {
        for (p, q) in [(2.0, 2.0), (3.0, 1.5), (4.0, 4.0 / 3.0)] {
            prop_assert!(uinorm::holder_gap(&x, &y, p, q).unwrap().relative_gap >= -EPS);
        }
    }

    #[test]
    fn conjecture_identity_function_is_equality((a, b) in pair()) {
        let f = OperatorFunction::monotone_power(1.0).unwrap();
        let pair = PsdPair::new(&a, &b).unwrap();
        for g in pair.conjecture_gaps_all_k(&f).unwrap() {
            prop_assert!(g.relative_gap.abs() <= 1e-10, "{g:?}");
        }
    }

    #[test]
    fn ando_trace_and_ky_fan((a, b) in pair(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 3.0])) {
        let pair = PsdPair::new(&a, &b).unwrap();
        prop_assert!(pair.ando_gap(p, NormSpec::trace()).unwrap().relative_gap >= -EPS);
        for k in 1..=pair.dim() {
            prop_assert!(pair.ando_gap(p, NormSpec::KyFan(k)).unwrap().relative_gap >= -EPS);
        }
    }

    #[test]
    fn scalar_power_orientation(a in 0.0f64..10.0, b in 0.0f64..10.0, p in 1.0f64..5.0) {
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        let g = ineq::scalar_power_gap(hi, lo, p).unwrap();
        prop_assert!(g.relative_gap >= -EPS, "{g:?}");
    }

    #[test]
    fn matrix_text_round_trip(m in symmetric()) {
        let back: SymMatrix = m.to_string().parse().unwrap();
        prop_assert_eq!(back, m);
    }
}
