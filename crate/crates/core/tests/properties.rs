mod common;

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};

use biphoton_core::coincidence::{estimate_background, normalize_histogram, BackgroundEstimate, CoincidenceHistogram};
use biphoton_core::holograms::{render, wrap_phase, patterns, GratingSpec, PatternParams};
use biphoton_core::oam::{etalon_filter, fork_diffract, run_chain, sfwm_state, InterfaceConfig, Orientation};
use biphoton_core::quantum::{chsh_max, fidelity};
use biphoton_core::tomography::{
    linear_inversion, mle_cost, mle_cost_and_gradient, mle_reconstruct, parametrize, predicted_probabilities,
    MleConfig, ProbabilitySet, SigmaSet, NUM_PARAMS,
};
use biphoton_core::{DensityMatrix, MeasurementSetting};
use proptest::prelude::*;

use common::*;

fn params() -> impl Strategy<Value = [f64; NUM_PARAMS]> {
    prop::array::uniform16(-2.0f64..2.0).prop_filter("non-degenerate", |p| p.iter().map(|x| x * x).sum::<f64>() > 1e-3)
}

fn density() -> impl Strategy<Value = DensityMatrix> {
    (any::<u64>(), 1usize..=4).prop_map(|(seed, rank)| random_density(&mut rng(seed), rank))
}

fn data() -> impl Strategy<Value = (ProbabilitySet, SigmaSet)> {
    (prop::array::uniform16(0.0f64..1.0), prop::array::uniform16(0.005f64..0.1)).prop_filter_map(
        "computational sum",
        |(p, s)| Some((ProbabilitySet::normalized(p).ok()?, SigmaSet::new(s).ok()?)),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parametrized_states_are_physical(p in params()) {
        let rho = parametrize(&p).unwrap();
        prop_assert!(rho.min_eigenvalue() >= -1e-12);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences(p in params(), (probs, sigmas) in data()) {
        let (_, grad) = mle_cost_and_gradient(&p, &probs, &sigmas).unwrap();
        let h = 1e-6;
        let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-3);
        for i in 0..NUM_PARAMS {
            let mut up = p;
            let mut down = p;
            up[i] += h;
            down[i] -= h;
            let cost = |q: &[f64; NUM_PARAMS]| mle_cost(&parametrize(q).unwrap(), &probs, &sigmas);
            let numeric = (cost(&up) - cost(&down)) / (2.0 * h);
            prop_assert!((numeric - grad[i]).abs() / scale < 1e-4, "param {i}: {numeric} vs {}", grad[i]);
        }
    }

    #[test]
    fn linear_inversion_round_trip(rho in density()) {
        let out = linear_inversion(&predicted_probabilities(&rho)).unwrap();
        prop_assert!(out.max_deviation(&rho) < 1e-9);
    }

    #[test]
    fn computational_probabilities_sum_to_one(rho in density()) {
        let p = probabilities(&rho);
        prop_assert!((p[..4].iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_bounded(a in density(), b in density()) {
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-9).contains(&f));
    }

    #[test]
    fn chsh_is_bounded(rho in density()) {
        prop_assert!(chsh_max(&rho) <= 2.0 * SQRT_2 + 1e-9);
    }

    #[test]
    fn mle_never_increases_cost((probs, sigmas) in data()) {
        let r = mle_reconstruct(&probs, &sigmas, &MleConfig { max_iterations: 300, ..MleConfig::default() }).unwrap();
        prop_assert!(r.cost <= r.initial_cost);
        prop_assert!(r.rho.min_eigenvalue() >= -1e-10);
    }

    #[test]
    fn detection_efficiency_cancels(
        counts in prop::collection::vec(0u64..500, 200),
        eta in 1u64..20,
    ) {
        let setting: MeasurementSetting = "HH".parse().unwrap();
        let window = (0, 50);
        let tail = (100, 200);
        let base = CoincidenceHistogram::new(setting, 1.0, counts.clone(), 0.0).unwrap();
        let scaled = CoincidenceHistogram::new(setting, 1.0, counts.iter().map(|c| c * eta).collect(), 0.0).unwrap();
        let bg = |h: &CoincidenceHistogram| BackgroundEstimate {
            per_bin_level: estimate_background(h, tail).unwrap(),
            env_per_bin_level: 0.0,
        };
        let b0 = bg(&base);
        prop_assume!(b0.per_bin_level > 1.0);
        let g0 = normalize_histogram(&base, &b0, window).unwrap();
        let g1 = normalize_histogram(&scaled, &bg(&scaled), window).unwrap();
        prop_assert!((g0 - g1).abs() <= 1e-9 * g0.abs().max(1.0));
    }

    #[test]
    fn chain_is_periodic_in_theta(theta in -10.0f64..10.0, rotated: bool, c1 in 0.1f64..1.0, c0 in -1.0f64..1.0) {
        let c = BTreeMap::from([(0, c0), (1, c1)]);
        let a = run_chain(&c, &InterfaceConfig::new(theta, rotated).unwrap()).unwrap();
        let b = run_chain(&c, &InterfaceConfig::new(theta + TAU, rotated).unwrap()).unwrap();
        for (x, y) in a.ket.amplitudes().iter().zip(b.ket.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-9);
        }
        prop_assert!((a.success_weight - b.success_weight).abs() < 1e-12);
    }

    #[test]
    fn chain_output_is_balanced(theta in -10.0f64..10.0, rotated: bool, c1 in 0.1f64..1.0, c0 in -1.0f64..1.0) {
        let c = BTreeMap::from([(0, c0), (1, c1)]);
        let out = run_chain(&c, &InterfaceConfig::new(theta, rotated).unwrap()).unwrap();
        let w: Vec<f64> = out.ket.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let (diag, off) = if rotated { (w[1], w[2]) } else { (w[0], w[3]) };
        prop_assert!((diag - 0.5).abs() < 1e-12 && (off - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cross_orders_never_survive(coeffs in prop::collection::vec(-1.0f64..1.0, 5), rotated: bool) {
        let c: BTreeMap<u32, f64> = coeffs.iter().enumerate().map(|(l, v)| (l as u32, *v)).collect();
        prop_assume!(c.values().any(|v| v.abs() > 1e-3));
        let k = sfwm_state(&c, 4).unwrap();
        let f = etalon_filter(&fork_diffract(&k, Orientation::from_flag(rotated)));
        let (a, b) = if rotated { (1, 1) } else { (1, -1) };
        prop_assert_eq!(f.path_weight(a, b), 0.0);
        prop_assert_eq!(f.path_weight(-a, -b), 0.0);
    }

    #[test]
    fn orientation_rotation_is_an_involution(rotated: bool) {
        let o = Orientation::from_flag(rotated);
        prop_assert_eq!(o.rotate_180().rotate_180(), o);
        prop_assert_ne!(o.rotate_180(), o);
    }

    #[test]
    fn wrapping_closes_on_the_circle(x in -1e4f64..1e4) {
        let w = wrap_phase(x);
        prop_assert!((0.0..TAU).contains(&w));
        let k = ((x - w) / TAU).round();
        prop_assert!((x - w - k * TAU).abs() < 1e-9);
    }

    #[test]
    fn mask_rotation_is_an_involution(kind in prop::sample::select(vec!["spiral", "blazed", "lh", "ld", "ll", "dual", "dual-rot"]), w in 4usize..24, h in 4usize..24, l in -3i32..=3) {
        let spec = GratingSpec::centered(w, h, 8.0);
        let registry = patterns();
        let mask = render(registry.get(kind).unwrap(), &PatternParams { l_prime: l }, &spec).unwrap();
        let twice = mask.rotate_180().rotate_180();
        prop_assert_eq!(twice.phases(), mask.phases());
        for &p in mask.phases() {
            prop_assert!((0.0..TAU).contains(&p));
        }
    }
}

#[test]
fn dual_rotated_equals_turned_dual() {
    let spec = GratingSpec::centered(32, 32, 8.0);
    let registry = patterns();
    let params = PatternParams::default();
    let dual = render(registry.get("dual").unwrap(), &params, &spec).unwrap();
    let rot = render(registry.get("dual-rot").unwrap(), &params, &spec).unwrap();
    assert_eq!(dual.rotate_180().phases(), rot.phases());
    assert!(dual.phases().iter().all(|&p| p == 0.0 || p == PI));
}
