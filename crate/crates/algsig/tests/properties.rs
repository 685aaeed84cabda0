use std::sync::Arc;

use algsig::activation::{big_phi, phi, phi_prime, SigmoidParams};
use algsig::certify::{bound_t11, bound_t30, bound_t31_c32, CertifyOptions, FirstOrderVariant, FractionalMode, Mode};
use algsig::density::{
    denominator_bound, denominator_sum, partition_sum, tail_sum, two_sided_tail_bound, OperatorConfig, RateParams,
};
use algsig::fractional::{caputo_left, caputo_right, remark29_bound, Direction, FractionalSpec, QuadratureGrid};
use algsig::operators::a_n;
use algsig::registry::{builtin, Combination};
use algsig::vector::{grid_modulus, modulus_of_continuity, FunctionRef, Interval, NormKind, VectorValue};
use proptest::prelude::*;

fn sp(m: u32) -> SigmoidParams {
    SigmoidParams::new(m).unwrap()
}

fn m_values() -> impl Strategy<Value = u32> {
    prop_oneof![Just(1u32), Just(2), Just(3), Just(5)]
}

fn registry_name() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just("identity"),
        Just("sin"),
        Just("cos"),
        Just("exp"),
        Just("runge"),
        Just("abs:0.3"),
        Just("sincos"),
        Just("affine:-2,1"),
    ]
}

fn scalar(v: VectorValue) -> f64 {
    v.as_scalar().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn density_is_even_positive_and_decaying(m in m_values(), x in -50.0f64..50.0, gap in 1e-3f64..10.0) {
        let p = sp(m);
        let (l, r) = (big_phi(x, p).unwrap(), big_phi(-x, p).unwrap());
        prop_assert!((l - r).abs() <= 1e-15 * l.max(1.0));
        prop_assert!(l > 0.0);
        let x1 = x.abs() + 1e-6;
        prop_assert!(big_phi(x1 + gap, p).unwrap() < big_phi(x1, p).unwrap());
    }

    #[test]
    fn density_upper_envelope(m in m_values(), x in 1.0f64..1e3) {
        let m2 = f64::from(2 * m);
        let env = 0.5 / (1.0 + (x - 1.0).powf(m2)).powf((m2 + 1.0) / m2);
        prop_assert!(big_phi(x, sp(m)).unwrap() < env);
    }

    #[test]
    fn sigmoid_derivative_matches_central_difference(m in m_values(), x in -20.0f64..20.0) {
        let p = sp(m);
        let h = 1e-5;
        let fd = (phi(x + h, p).unwrap() - phi(x - h, p).unwrap()) / (2.0 * h);
        let d = phi_prime(x, p).unwrap();
        // The difference quotient carries about eps/h of cancellation error.
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs() + 1e-10, "{fd} vs {d}");
    }

    #[test]
    fn truncated_partition_of_unity(m in 1u32..=3, radius in 8u64..400, t in -0.5f64..0.5) {
        let x = t * radius as f64;
        let s = partition_sum(x, sp(m), radius).unwrap();
        // Both tails count, so the one-sided majorant is doubled.
        let bound = 1.0 / (2.0 * f64::from(m) * (radius as f64 - 2.0).powi(2 * m as i32)) + 1e-13;
        prop_assert!((s - 1.0).abs() <= bound, "|{s} - 1| > {bound}");
    }

    #[test]
    fn tail_below_two_sided_bound(m in 1u32..=3, n in 8u64..2000, alpha in 0.05f64..0.95, x in -100.0f64..100.0) {
        let Ok(rate) = RateParams::new(alpha, n) else { return Ok(()) };
        prop_assert!(tail_sum(x, rate, sp(m)).unwrap() < two_sided_tail_bound(rate, sp(m)));
    }

    #[test]
    fn denominator_bounded_below(m in 1u32..=5, n in 1u64..3000, a in -50.0f64..50.0, len in 0.01f64..5.0, t in 0.0f64..=1.0) {
        let Ok(cfg) = OperatorConfig::new(a, a + len, n, sp(m)) else { return Ok(()) };
        let x = a + t * len;
        prop_assert!(1.0 / denominator_sum(x, &cfg).unwrap() < denominator_bound(sp(m)));
    }

    #[test]
    fn norm_axioms(
        u in prop::collection::vec(-1e3f64..1e3, 1..6),
        w in prop::collection::vec(-1e3f64..1e3, 6),
        c in -50.0f64..50.0,
    ) {
        let v = VectorValue::new(&u).unwrap();
        let w = VectorValue::new(&w[..u.len()]).unwrap();
        for kind in [NormKind::Sup, NormKind::Euclidean, NormKind::One] {
            let (nv, nw) = (v.norm(kind), w.norm(kind));
            prop_assert!(v.add(&w).norm(kind) <= (nv + nw) * (1.0 + 1e-15));
            prop_assert!((v.scale(c).norm(kind) - c.abs() * nv).abs() <= 1e-13 * nv.max(1.0) * c.abs().max(1.0));
            prop_assert!(nv >= 0.0);
            prop_assert_eq!(nv == 0.0, u.iter().all(|&e| e == 0.0));
        }
    }

    #[test]
    fn constant_reproduction(m in 1u32..=4, n in 1u64..2000, a in -5.0f64..5.0, len in 0.05f64..4.0, t in 0.0f64..=1.0,
                             c in prop::collection::vec(-1e3f64..1e3, 1..4)) {
        let Ok(cfg) = OperatorConfig::new(a, a + len, n, sp(m)) else { return Ok(()) };
        let value = VectorValue::new(&c).unwrap();
        let f = algsig::registry::Constant::new(value.clone());
        let out = a_n(&f, a + t * len, &cfg).unwrap().value;
        let scale = value.norm(NormKind::Euclidean);
        prop_assert!(out.sub(&value).norm(NormKind::Euclidean) <= 1e-13 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn operator_is_monotone(m in 1u32..=3, n in 1u64..500, t in 0.0f64..=1.0, c in 0.0f64..2.0, s in 0.1f64..3.0) {
        let cfg = OperatorConfig::new(-1.0, 2.0, n, sp(m)).unwrap();
        let x = -1.0 + 3.0 * t;
        let f = Combination::new(vec![(s, builtin("sin").unwrap())]).unwrap();
        let g = Combination::new(vec![(s, builtin("sin").unwrap()), (1.0, builtin(&format!("constant:{c}")).unwrap())]).unwrap();
        let fa = scalar(a_n(&f, x, &cfg).unwrap().value);
        let ga = scalar(a_n(&g, x, &cfg).unwrap().value);
        prop_assert!(fa <= ga + 1e-14);
    }

    #[test]
    fn operator_is_stable(name in registry_name(), m in 1u32..=3, n in 1u64..400, t in 0.0f64..=1.0) {
        let f = builtin(name).unwrap();
        let cfg = OperatorConfig::new(-1.0, 1.0, n, sp(m)).unwrap();
        let out = a_n(f.as_ref(), -1.0 + 2.0 * t, &cfg).unwrap().value.norm(NormKind::Euclidean);
        let max_sample = (cfg.k_lo()..=cfg.k_hi())
            .map(|k| f.eval(k as f64 / n as f64).unwrap().norm(NormKind::Euclidean))
            .fold(0.0, f64::max);
        prop_assert!(out <= max_sample * (1.0 + 1e-14));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn grid_modulus_monotone_and_refinable(name in registry_name(), d1 in 1e-3f64..1.0, d2 in 1e-3f64..1.0, k in 8usize..200) {
        let f = builtin(name).unwrap();
        let on = Interval::new(-1.0, 1.0).unwrap();
        let (lo, hi) = (d1.min(d2), d1.max(d2));
        let sample = |points: usize| on.grid(points).map(|x| f.eval(x).unwrap()).collect::<Vec<_>>();
        let (coarse, fine) = (sample(k + 1), sample(2 * k + 1));
        let (hc, hf) = (on.step(k + 1), on.step(2 * k + 1));
        prop_assert!(grid_modulus(&coarse, hc, lo, NormKind::Euclidean) <= grid_modulus(&coarse, hc, hi, NormKind::Euclidean));
        prop_assert!(grid_modulus(&coarse, hc, hi, NormKind::Euclidean) <= grid_modulus(&fine, hf, hi, NormKind::Euclidean));
    }

    #[test]
    fn analytic_moduli_are_subadditive(name in registry_name(), d1 in 1e-4f64..2.0, d2 in 1e-4f64..2.0) {
        let f = builtin(name).unwrap();
        let on = Interval::new(-1.0, 1.0).unwrap();
        let w = |d: f64| f.analytic_modulus(d, &on, NormKind::Euclidean).unwrap();
        prop_assert!(w(d1 + d2) <= (w(d1) + w(d2)) * (1.0 + 1e-14));
    }

    #[test]
    fn lipschitz_grid_modulus(slope in -5.0f64..5.0, delta in 1e-3f64..1.0, points in 2usize..500) {
        let f = builtin("sin").unwrap();
        let g = Combination::new(vec![(slope, f)]).unwrap();
        let on = Interval::new(0.0, 3.0).unwrap();
        let values: Vec<_> = on.grid(points).map(|x| algsig::vector::VectorFunction::eval(&g, x).unwrap()).collect();
        prop_assert!(grid_modulus(&values, on.step(points), delta, NormKind::Euclidean) <= slope.abs() * delta + 1e-12);
    }

    #[test]
    fn caputo_is_linear_and_zero_extended(alpha in 0.05f64..0.95, x in 0.01f64..1.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0) {
        let grid = QuadratureGrid::new(512).unwrap();
        let (f, g) = (builtin("sin").unwrap(), builtin("exp").unwrap());
        let combo: FunctionRef = Arc::new(Combination::new(vec![(c1, f.clone()), (c2, g.clone())]).unwrap());
        let spec = FractionalSpec::new(alpha, 0.0, Direction::Left).unwrap();
        let lhs = scalar(caputo_left(&combo, &spec, x, grid).unwrap());
        let rhs = c1 * scalar(caputo_left(&f, &spec, x, grid).unwrap()) + c2 * scalar(caputo_left(&g, &spec, x, grid).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9);
        prop_assert_eq!(scalar(caputo_left(&f, &spec, -x, grid).unwrap()), 0.0);
        let right = FractionalSpec::new(alpha, 0.0, Direction::Right).unwrap();
        prop_assert_eq!(scalar(caputo_right(&f, &right, x, grid).unwrap()), 0.0);
    }

    #[test]
    fn fractional_caps_dominate(name in prop_oneof![Just("sin"), Just("exp"), Just("identity"), Just("cos")],
                                alpha in 0.1f64..1.9, delta in 1e-3f64..1.0) {
        prop_assume!((alpha - 1.0).abs() > 0.02);
        let f = builtin(name).unwrap();
        let on = Interval::new(0.0, 1.0).unwrap();
        let spec = FractionalSpec::new(alpha, 0.0, Direction::Left).unwrap();
        let caps = remark29_bound(&f, &spec, &on, NormKind::Euclidean).unwrap();
        let grid = QuadratureGrid::new(256).unwrap();
        let values: Vec<_> = on.grid(65).map(|x| caputo_left(&f, &spec, x, grid).unwrap()).collect();
        let sup = values.iter().map(|v| v.norm(NormKind::Euclidean)).fold(0.0, f64::max);
        prop_assert!(grid_modulus(&values, on.step(65), delta, NormKind::Euclidean) <= caps.modulus_cap * (1.0 + 1e-9));
        prop_assert!(sup <= caps.sup_cap * (1.0 + 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn t11_rhs_decreases_in_n(name in registry_name(), m in 1u32..=3, alpha in 0.2f64..0.8, n in 16u64..2000) {
        let n = n.max(4f64.powf(1.0 / (1.0 - alpha)).ceil() as u64);
        let f = builtin(name).unwrap();
        let opts = CertifyOptions { grid_points: 11, ..CertifyOptions::default() };
        let rhs = |n: u64| bound_t11(&f, &OperatorConfig::new(-1.0, 1.0, n, sp(m)).unwrap(), alpha, &opts).unwrap().rhs;
        prop_assert!(rhs(2 * n) <= rhs(n));
    }

    #[test]
    fn first_order_specializations_agree(beta in 0.2f64..0.8, m in 1u32..=2, x in 0.0f64..=1.0) {
        let f = builtin("sin").unwrap();
        let cfg = OperatorConfig::new(0.0, 1.0, 64, sp(m)).unwrap();
        let opts = CertifyOptions { grid_points: 11, table_panels: 128, ..CertifyOptions::default() };
        let t30 = bound_t30(&f, &cfg, beta, 0.5, FractionalMode::Iii, Some(x), &opts).unwrap();
        let t31 = bound_t31_c32(&f, &cfg, beta, FirstOrderVariant::T31 { alpha: 0.5 }, Mode::Point(x), &opts).unwrap();
        prop_assert!((t30.rhs - t31.rhs).abs() <= 1e-12 * t30.rhs.abs().max(f64::MIN_POSITIVE));
    }
}

#[test]
fn density_vanishes_far_out() {
    assert!(big_phi(1e6, sp(1)).unwrap() < 1e-17);
    assert!(big_phi(-1e6, sp(1)).unwrap() < 1e-17);
}

#[test]
fn modulus_reports_provenance() {
    let on = Interval::new(0.0, 1.0).unwrap();
    let sin = builtin("sin").unwrap();
    assert!(modulus_of_continuity(sin.as_ref(), 0.1, &on, 101, NormKind::Euclidean).unwrap().is_analytic);
}
