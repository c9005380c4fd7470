use pnpvamp::denoisers::{svt, DenoiserSpec, DivergenceMode, Fir};
use pnpvamp::linalg::{norm, sub};
use pnpvamp::operators::{build_operator, geometric_spectrum};
use pnpvamp::rng;
use proptest::prelude::*;

fn family(kind: u8, a: f64, b: f64, taps: &[f64]) -> DenoiserSpec {
    match kind % 4 {
        0 => DenoiserSpec::soft_threshold(a),
        1 => DenoiserSpec::bg_mmse(b.clamp(0.02, 0.9), 1.0),
        2 => DenoiserSpec::group_soft_threshold(4, a),
        _ => {
            // a smoothing filter: non-negative taps summing to one
            let l1: f64 = taps.iter().map(|t| t.abs()).sum::<f64>().max(1e-3);
            DenoiserSpec::fir(Fir::centered(taps.iter().map(|t| t.abs() / l1).collect()))
        }
    }
    .unwrap()
}

fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divergence_stays_in_unit_interval(
        kind in 0u8..4,
        a in 0.05..2.0f64,
        b in 0.0..1.0f64,
        taps in prop::collection::vec(-1.0..1.0f64, 3),
        gamma in 0.1..20.0f64,
        r in vec_strategy(64),
    ) {
        let spec = family(kind, a, b, &taps);
        let d = spec.divergence(&r, gamma, 0).unwrap().value;
        prop_assert!((-1e-12..=1.0 + 1e-6).contains(&d), "{} divergence {d}", spec.kind().name());
    }

    #[test]
    fn lipschitz_ratio_is_bounded(
        kind in 0u8..4,
        a in 0.05..2.0f64,
        b in 0.0..1.0f64,
        taps in prop::collection::vec(-1.0..1.0f64, 3),
        gamma in 0.1..20.0f64,
        r1 in vec_strategy(64),
        r2 in vec_strategy(64),
    ) {
        prop_assume!(norm(&sub(&r1, &r2)) > 1e-6);
        let spec = family(kind, a, b, &taps);
        let g1 = spec.denoise(&r1, gamma).unwrap();
        let g2 = spec.denoise(&r2, gamma).unwrap();
        let ratio = norm(&sub(&g1, &g2)) / norm(&sub(&r1, &r2));
        prop_assert!(ratio <= spec.lipschitz_constant(gamma) + 1e-9, "{} ratio {ratio}", spec.kind().name());
    }

    #[test]
    fn analytic_divergence_agrees_with_monte_carlo(
        kind in 0u8..4,
        a in 0.05..2.0f64,
        b in 0.0..1.0f64,
        taps in prop::collection::vec(-1.0..1.0f64, 3),
        gamma in 0.5..5.0f64,
        r in vec_strategy(128),
        seed in any::<u64>(),
    ) {
        let spec = family(kind, a, b, &taps);
        let analytic = spec.divergence(&r, gamma, 0).unwrap().value;
        let mc = spec
            .with_mode(DivergenceMode::MonteCarlo { probes: 256, epsilon: None })
            .unwrap()
            .divergence(&r, gamma, seed)
            .unwrap();
        // loose enough that sampling noise essentially never trips it
        prop_assert!((mc.value - analytic).abs() <= 6.0 * mc.std_error + 1e-9, "{analytic} vs {} ± {}", mc.value, mc.std_error);
    }

    #[test]
    fn svt_is_nonexpansive(
        a in prop::collection::vec(-3.0..3.0f64, 48),
        b in prop::collection::vec(-3.0..3.0f64, 48),
        tau in 0.0..6.0f64,
    ) {
        let d = norm(&sub(&a, &b));
        prop_assume!(d > 1e-9);
        let ratio = norm(&sub(&svt(&a, 6, 8, tau), &svt(&b, 6, 8, tau))) / d;
        prop_assert!(ratio <= 1.0 + 1e-10);
    }

    #[test]
    fn operator_transpose_is_adjoint(
        n in 4usize..40,
        frac in 0.1..1.0f64,
        cond in 1.0..50.0f64,
        seed in any::<u64>(),
    ) {
        let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let op = build_operator(&geometric_spectrum(m, n, cond).unwrap(), m, seed, seed ^ 1).unwrap();
        let mut g = rng::stream(seed, 3);
        let x = rng::gaussian_vec(&mut g, n);
        let y = rng::gaussian_vec(&mut g, m);
        let lhs = pnpvamp::linalg::dot(&op.forward(&x), &y);
        let rhs = pnpvamp::linalg::dot(&x, &op.adjoint(&y));
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}
