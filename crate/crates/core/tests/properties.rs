mod common;

use common::*;
use evanskit::evans::{circle_points, verify_identity, winding_number, PipelineOptions};
use evanskit::fredholm::det2_matrix;
use evanskit::numerics::{gauss_legendre, inverse, lu_det, matrix_exp, quadrature_grid, ComplexMatrix, C64};
use evanskit::system::spectral_splitting;
use proptest::prelude::*;

fn entry() -> impl Strategy<Value = C64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| c(re, im))
}

fn matrix(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec(entry(), d * d).prop_map(move |v| ComplexMatrix::from_vec(d, d, v))
}

fn near_identity(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(d).prop_map(move |m| &ComplexMatrix::identity(d) + &m.scale_real(0.3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det2_is_similarity_invariant(m in matrix(4), t in near_identity(4)) {
        let conj = t.matmul(&m).matmul(&inverse(&t).unwrap());
        let (a, b) = (det2_matrix(&m), det2_matrix(&conj));
        prop_assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
    }

    #[test]
    fn det2_of_block_diagonal_factors(a in matrix(2), b in matrix(3)) {
        let mut m = ComplexMatrix::zeros(5, 5);
        m.set_block(0, 0, &a);
        m.set_block(2, 2, &b);
        let whole = det2_matrix(&m);
        let parts = det2_matrix(&a) * det2_matrix(&b);
        prop_assert!((whole - parts).norm() <= 1e-11 * (1.0 + whole.norm()));
    }

    #[test]
    fn exponential_inverts(m in matrix(4)) {
        let e = matrix_exp(&m, 1.0).unwrap();
        let back = matrix_exp(&m, -1.0).unwrap();
        prop_assert!(e.matmul(&back).approx_eq(&ComplexMatrix::identity(4), 1e-12, 0.0));
        let det = lu_det(&e);
        prop_assert!((det - m.trace().exp()).norm() <= 1e-11 * det.norm());
    }

    #[test]
    fn splitting_projections_resolve_identity(t in near_identity(4), shift in -0.4..0.4f64) {
        let lam = ComplexMatrix::diag(&[c(-2.0 + shift, 0.3), c(-0.5, -1.0), c(0.7, 0.0), c(1.9 - shift, 0.5)]);
        let a = t.matmul(&lam).matmul(&inverse(&t).unwrap());
        let s = spectral_splitting(&a, 1e-8).unwrap();
        prop_assert_eq!(s.len(), 4);
        prop_assert_eq!(s.k0(), 2);
        let sum = s.sum(1..=s.len());
        prop_assert!(sum.approx_eq(&ComplexMatrix::identity(4), 1e-9, 0.0));
        for (i, p) in s.projections().iter().enumerate() {
            prop_assert!(p.matmul(&a).approx_eq(&a.matmul(p), 1e-9, 0.0));
            for (j, q) in s.projections().iter().enumerate() {
                let want = if i == j { p.clone() } else { ComplexMatrix::zeros(4, 4) };
                prop_assert!(p.matmul(q).approx_eq(&want, 1e-9, 0.0));
            }
        }
    }

    #[test]
    fn gauss_rule_is_exact_for_low_degree(n in 1usize..=16, coeffs in proptest::collection::vec(-1.0..1.0f64, 32)) {
        let (x, w) = gauss_legendre(n);
        let degree = 2 * n - 1;
        let p = |t: f64| coeffs[..=degree].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let exact: f64 = (0..=degree).filter(|k| k % 2 == 0).map(|k| 2.0 * coeffs[k] / (k + 1) as f64).sum();
        let got: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * p(t)).sum();
        prop_assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn composite_weights_sum_to_length(a in -5.0..0.0f64, len in 0.1..10.0f64, panels in 1usize..20, ppp in 1usize..=16) {
        let g = quadrature_grid(a, a + len, panels, ppp).unwrap();
        prop_assert!((g.weights().iter().sum::<f64>() - len).abs() < 1e-12 * len.max(1.0));
    }

    #[test]
    fn winding_counts_enclosed_roots(roots in proptest::collection::vec((0.0..1.8f64, 0.0..std::f64::consts::TAU), 1..5)) {
        let roots: Vec<C64> = roots.iter().map(|&(r, t)| C64::from_polar(r, t)).collect();
        prop_assume!(roots.iter().all(|z| (z.norm() - 1.0).abs() > 0.1));
        let pts = circle_points(c(0.0, 0.0), 1.0, 128);
        let vals: Vec<C64> = pts.iter().map(|z| roots.iter().map(|r| z - r).product()).collect();
        let inside = roots.iter().filter(|z| z.norm() < 1.0).count() as i64;
        prop_assert_eq!(winding_number(&pts, &vals).unwrap(), inside);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn identity_holds_for_random_systems(seed in 0u64..1000, strength in 0.1..0.8f64) {
        let (ctx, fac) = polar_context(random_compact_system(seed, 1.0, strength), 5.0);
        let opts = PipelineOptions { nystrom_nodes: Some(200), ..Default::default() };
        let r = verify_identity(&ctx, &fac, &opts).unwrap();
        prop_assert!(r.identity_residual < 1e-4, "residual {}", r.identity_residual);
    }
}
