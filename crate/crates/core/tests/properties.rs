//! Property tests for the algebraic identities the library relies on.

use cdklab::equilibrium::{band_edges, omega_prime_blend, omega_prime_periodic, Geometry};
use cdklab::kernel::kernel;
use cdklab::params::{dr_diagnostic, make_blend, make_periodic, ParameterModel, PeriodicEnvelope};
use cdklab::poly::{eval_poly_derivative, eval_poly_sequence};
use cdklab::transfer::{associated_product, envelope_n_step, product};
use proptest::prelude::*;
use std::sync::Arc;

fn coefficients(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.1f64..10.0, len),
        prop::collection::vec(-5.0f64..5.0, len),
    )
}

fn envelope(max_period: usize) -> impl Strategy<Value = PeriodicEnvelope> {
    (1..=max_period).prop_flat_map(|n| {
        (
            prop::collection::vec(0.5f64..2.0, n),
            prop::collection::vec(-1.0f64..1.0, n),
        )
            .prop_map(|(a, b)| PeriodicEnvelope::new(a, b).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_residual_vanishes((a, b) in coefficients(64), x in -5.0f64..5.0) {
        let m = ParameterModel::from_values(a.clone(), b.clone()).unwrap();
        let s = eval_poly_sequence(&m, 0, x, 60).unwrap();
        for n in 1..s.values.len().saturating_sub(1) {
            let p = &s.values;
            let lhs = x * p[n];
            let rhs = a[n] * p[n + 1] + b[n] * p[n] + a[n - 1] * p[n - 1];
            let scale = (x.abs() + b[n].abs()) * p[n].abs() + a[n] * p[n + 1].abs() + a[n - 1] * p[n - 1].abs();
            prop_assert!((lhs - rhs).abs() <= 1e-13 * scale, "n={}", n);
        }
    }

    #[test]
    fn transfer_product_matches_associated_polynomials(
        (_, m) in coefficients(40).prop_map(|(a, b)| (a.clone(), ParameterModel::from_values(a, b).unwrap())),
        k in 0usize..10,
        n in 1usize..=20,
        x in -5.0f64..5.0,
    ) {
        let lhs = product(&m, k, n, x).unwrap().to_mat2();
        let rhs = associated_product(&m, k, n, x).unwrap();
        prop_assert!((lhs - rhs).max_abs() <= 1e-10 * lhs.max_abs());
    }

    #[test]
    fn determinant_telescopes((a, b) in coefficients(40), k in 1usize..10, n in 1usize..=20, x in -5.0f64..5.0) {
        let m = ParameterModel::from_values(a.clone(), b).unwrap();
        let det = product(&m, k, n, x).unwrap().det();
        let expect = a[k - 1] / a[k + n - 1];
        prop_assert!((det - expect).abs() <= 1e-12 * expect, "{} vs {}", det, expect);
    }

    #[test]
    fn kernel_is_symmetric_and_positive((a, b) in coefficients(80), n in 1usize..60, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let m = ParameterModel::from_values(a, b).unwrap();
        let kxy = kernel(&m, n, x, y).unwrap();
        let kyx = kernel(&m, n, y, x).unwrap();
        let kxx = kernel(&m, n, x, x).unwrap();
        let kyy = kernel(&m, n, y, y).unwrap();
        prop_assert_eq!(kxy.direct, kyx.direct);
        prop_assert!(kxx.direct >= 1.0 && kyy.direct >= 1.0);
        let scale = (kxx.direct * kyy.direct).sqrt();
        prop_assert!(kxy.direct.abs() <= scale * (1.0 + 1e-12));
        prop_assert!((kxy.direct - kxy.cd).abs() <= 1e-8 * scale);
        prop_assert!((kxx.direct - kxx.cd).abs() <= 1e-8 * kxx.direct);
    }

    #[test]
    fn derivative_matches_central_differences((a, b) in coefficients(32), x in -3.0f64..3.0) {
        let m = ParameterModel::from_values(a, b).unwrap();
        let h = 1e-5;
        let d = eval_poly_derivative(&m, x, 30).unwrap();
        let up = eval_poly_sequence(&m, 0, x + h, 30).unwrap().values;
        let dn = eval_poly_sequence(&m, 0, x - h, 30).unwrap().values;
        for n in 1..=30 {
            let fd = (up[n] - dn[n]) / (2.0 * h);
            let scale = fd.abs().max(up[n].abs().max(dn[n].abs()) * 1e-3).max(1e-12);
            prop_assert!((d.derivs[n] - fd).abs() <= 1e-6 * scale, "n={} {} vs {}", n, d.derivs[n], fd);
        }
    }

    #[test]
    fn shifted_envelope_products_share_the_discriminant(env in envelope(5), x in -4.0f64..4.0) {
        let d0 = envelope_n_step(&env, 0, x).discr();
        for i in 1..env.period() as i64 {
            let di = envelope_n_step(&env, i, x).discr();
            prop_assert!((di - d0).abs() <= 1e-11 * (1.0 + d0.abs()));
        }
    }

    #[test]
    fn density_forms_agree_inside_bands(env in envelope(4), t in 0.02f64..0.98, band in 0usize..4) {
        for geometry in [Geometry::Periodic, Geometry::Blend] {
            let edges = band_edges(&env, geometry);
            let [l, r] = edges[band % edges.len()];
            let x = l + t * (r - l);
            let d = match geometry {
                Geometry::Periodic => omega_prime_periodic(&env, x).unwrap(),
                Geometry::Blend => omega_prime_blend(&env, x).unwrap(),
            };
            prop_assert!(d.trace_form > 0.0);
            prop_assert!((d.sum_form - d.trace_form).abs() <= 1e-10 * d.trace_form);
        }
    }

    #[test]
    fn second_difference_is_the_explicit_stencil(x in prop::collection::vec(-100.0f64..100.0, 4..40)) {
        let d = dr_diagnostic(&x, 2).unwrap();
        // partial sums of |Delta^2 x|^1 recover the stencil term by term
        let s = &d.partial_sums[1];
        for n in 0..x.len() - 2 {
            let term = (x[n + 2] - 2.0 * x[n + 1] + x[n]).abs();
            let got = if n == 0 { s[0] } else { s[n] - s[n - 1] };
            prop_assert!((got - term).abs() <= 1e-9 * (1.0 + term));
        }
    }

    #[test]
    fn blend_keeps_inner_entries_and_inserts_pairs(env in envelope(4), k in 0usize..50) {
        let n = env.period();
        let inner = make_periodic(env.clone());
        let m = make_blend(inner.clone(), Arc::new(|j| (j as f64 + 1.0).sqrt())).unwrap();
        let w = n + 2;
        for i in 0..n {
            prop_assert_eq!(m.a(k * w + i), inner.a(k * n + i));
            prop_assert_eq!(m.b(k * w + i), inner.b(k * n + i));
        }
        prop_assert_eq!(m.a(k * w + n), ((2 * k) as f64 + 1.0).sqrt());
        prop_assert_eq!(m.a(k * w + n + 1), ((2 * k + 1) as f64 + 1.0).sqrt());
        prop_assert_eq!(m.b(k * w + n), 0.0);
        prop_assert_eq!(m.b(k * w + n + 1), 0.0);
    }
}
