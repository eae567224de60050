mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use snfcs::optim::{
    alm_optimize, alm_restart, gd_optimize, gd_restart, lp_gradient, lp_objective, project_l1, prox_linf, wrap_angles,
    ChiMode,
};
use snfcs::sampling::{random_uniform, ChiPolicy, Provenance};
use snfcs::sensing::build_matrix;
use snfcs::{AlmConfig, GdConfig, ModeKind, SamplingSet};

fn perturbed(s: &SamplingSet, block: usize, i: usize, h: f64) -> SamplingSet {
    let (mut t, mut p, mut c) = s.clone().into_parts();
    match block {
        0 => t[i] += h,
        1 => p[i] += h,
        _ => c[i] += h,
    }
    SamplingSet::new_keep_chi(t, p, c, Provenance::Random).unwrap()
}

/// Block-wise relative error of the analytic gradient against central differences.
fn gradient_errors(kind: ModeKind, degree: u32, k: usize, seed: u64, p: f64) -> [f64; 3] {
    let s = random_uniform::<f64>(k, seed).unwrap();
    let g = lp_gradient(&s, kind, degree, p).unwrap();
    let h = 1e-6;
    let mut out = [0.0; 3];
    for (block, an) in [&g.theta, &g.phi, &g.chi].into_iter().enumerate() {
        let fd: Vec<f64> = (0..k)
            .map(|i| {
                let up = lp_objective(&perturbed(&s, block, i, h), kind, degree, p).unwrap();
                let dn = lp_objective(&perturbed(&s, block, i, -h), kind, degree, p).unwrap();
                (up - dn) / (2.0 * h)
            })
            .collect();
        let diff: f64 = an.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        out[block] = if scale > 1e-8 { diff / scale } else { diff };
    }
    out
}

#[test]
fn gradient_matches_finite_differences() {
    for kind in [ModeKind::SphericalHarmonics, ModeKind::WignerGeneral, ModeKind::SnfMuPm1] {
        for trial in 0..10u64 {
            let degree = 2 + (trial % 3) as u32;
            let errs = gradient_errors(kind, degree, 20, 100 + trial, 6.0);
            for (b, e) in errs.iter().enumerate() {
                assert!(*e < 1e-4, "{kind:?} N={degree} trial {trial} block {b}: {e}");
            }
        }
    }
}

#[test]
fn harmonic_gradient_ignores_chi() {
    let s = random_uniform::<f64>(20, 4).unwrap();
    let g = lp_gradient(&s, ModeKind::SphericalHarmonics, 4, 6.0).unwrap();
    assert!(g.chi.iter().all(|v| *v == 0.0));
}

#[test]
fn objective_sandwiches_coherence() {
    for seed in 0..20u64 {
        let s = random_uniform::<f64>(15, seed).unwrap();
        let mu = build_matrix(ModeKind::SphericalHarmonics, 3, &s).unwrap().coherence().unwrap().mu;
        let j = (15 * 14 / 2) as f64;
        for p in [2.0, 4.0, 6.0, 12.0] {
            let v = lp_objective(&s, ModeKind::SphericalHarmonics, 3, p).unwrap();
            assert!(mu <= v + 1e-12 && v <= j.powf(1.0 / p) * mu + 1e-12, "p={p}");
        }
    }
    assert!(lp_objective(&random_uniform::<f64>(5, 0).unwrap(), ModeKind::SphericalHarmonics, 2, 1.5).is_err());
}

#[test]
fn common_azimuth_shift_is_invisible() {
    for kind in [ModeKind::SphericalHarmonics, ModeKind::WignerGeneral, ModeKind::SnfMuPm1] {
        let s = random_uniform::<f64>(18, 12).unwrap();
        let (t, p, c) = s.clone().into_parts();
        let shifted = wrap_angles(t, p.iter().map(|v| v + 0.77).collect(), c, Provenance::Random).unwrap();
        let a = lp_objective(&s, kind, 3, 6.0).unwrap();
        let b = lp_objective(&shifted, kind, 3, 6.0).unwrap();
        assert!((a - b).abs() < 1e-10, "{kind:?}");
        let g = lp_gradient(&s, kind, 3, 6.0).unwrap();
        let total: f64 = g.phi.iter().sum();
        assert!(total.abs() < 1e-9, "{kind:?}: {total}");
    }
}

#[test]
fn wrapping_examples() {
    let s = wrap_angles(vec![-0.1], vec![0.2], vec![0.0], Provenance::File).unwrap();
    assert!((s.theta()[0] - 0.1f64).abs() < 1e-15);
    assert!((s.phi()[0] - (0.2 + PI)).abs() < 1e-15);
    let s = wrap_angles(vec![1.0], vec![2.0 * PI + 0.3], vec![-0.5], Provenance::File).unwrap();
    assert!((s.phi()[0] - 0.3).abs() < 1e-12);
    assert!((s.chi()[0] - (2.0 * PI - 0.5)).abs() < 1e-12);
    let valid = random_uniform::<f64>(10, 1).unwrap();
    let (t, p, c) = valid.clone().into_parts();
    assert_eq!(wrap_angles(t, p, c, Provenance::Random).unwrap(), valid);
}

#[test]
fn projection_matches_bisection_oracle() {
    let mut r = common::rng(77);
    use rand::Rng;
    for _ in 0..1000 {
        let n = r.random_range(1..40);
        let v = common::random_complex_vec(&mut r, n);
        let radius = r.random::<f64>() * 3.0 + 1e-3;
        let got = project_l1(&v, radius).unwrap();
        let want = common::project_l1_bisect(&v, radius);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}

#[test]
fn projection_and_prox_examples() {
    let c = |re: f64| common::C::new(re, 0.0);
    assert_eq!(project_l1(&[c(3.0), c(0.0)], 1.0).unwrap(), vec![c(1.0), c(0.0)]);
    assert_eq!(project_l1(&[c(1.0), c(1.0)], 1.0).unwrap(), vec![c(0.5), c(0.5)]);
    let inside = [c(0.2), common::C::new(0.1, -0.3)];
    assert_eq!(project_l1(&inside, 1.0).unwrap(), inside.to_vec());
    assert_eq!(prox_linf(&[c(3.0), c(0.0)], 1.0).unwrap(), vec![c(2.0), c(0.0)]);
    assert!(prox_linf(&inside, 1.0).unwrap().iter().all(|z| z.norm() < 1e-15));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn moreau_decomposition(seed in any::<u64>(), n in 1usize..60, scale in 0.01f64..5.0) {
        let mut r = common::rng(seed);
        let v = common::random_complex_vec(&mut r, n);
        let prox = prox_linf(&v, scale).unwrap();
        let vs: Vec<_> = v.iter().map(|z| z / scale).collect();
        let proj = project_l1(&vs, 1.0).unwrap();
        for i in 0..n {
            prop_assert!((v[i] - prox[i] - proj[i] * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_is_feasible_and_keeps_phase(seed in any::<u64>(), n in 1usize..60, radius in 0.01f64..5.0) {
        let mut r = common::rng(seed);
        let v = common::random_complex_vec(&mut r, n);
        let w = project_l1(&v, radius).unwrap();
        prop_assert!(common::l1(&w) <= radius * (1.0 + 1e-12) + 1e-15);
        for (a, b) in v.iter().zip(&w) {
            prop_assert!(b.norm() <= a.norm() + 1e-15);
            if b.norm() > 1e-12 {
                prop_assert!((a.arg() - b.arg()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn optimizers_never_end_worse_than_their_start() {
    for seed in 0..3u64 {
        let mut g = GdConfig::new(ModeKind::SphericalHarmonics, 3, 12);
        g.iterations = 15;
        g.chi_mode = ChiMode::FixedPolicy(ChiPolicy::Fixed(0.0));
        let init = snfcs::sampling::apply_chi(&random_uniform::<f64>(12, seed).unwrap(), ChiPolicy::Fixed(0.0)).unwrap();
        let mu0 = build_matrix(ModeKind::SphericalHarmonics, 3, &init).unwrap().coherence().unwrap().mu;
        let run = gd_restart(&g, init.clone(), 0).unwrap();
        assert!(run.best_mu <= mu0 + 1e-15);
        assert_eq!(run.rho_trace[0], mu0);

        let mut a = AlmConfig::new(ModeKind::WignerGeneral, 2, 20);
        a.iterations = 10;
        a.inner_iters = 2;
        let init = random_uniform::<f64>(20, seed).unwrap();
        let mu0 = build_matrix(ModeKind::WignerGeneral, 2, &init).unwrap().coherence().unwrap().mu;
        let (run, state) = alm_restart(&a, init, 0).unwrap();
        assert!(run.best_mu <= mu0 + 1e-15);
        let l = 34usize;
        assert_eq!(state.z.len(), l * (l - 1) / 2);
    }
}

#[test]
fn runs_are_deterministic_and_traces_monotone() {
    let mut g = GdConfig::new(ModeKind::SnfMuPm1, 2, 12);
    g.iterations = 20;
    g.restarts = 3;
    g.seed = 9;
    let (r1, r2) = (gd_optimize(&g).unwrap(), gd_optimize(&g).unwrap());
    assert_eq!(r1, r2);
    let mut a = AlmConfig::new(ModeKind::SphericalHarmonics, 3, 10);
    a.iterations = 15;
    a.restarts = 2;
    let (s1, s2) = (alm_optimize(&a).unwrap(), alm_optimize(&a).unwrap());
    assert_eq!(s1, s2);
    for run in [&r1, &s1] {
        assert!(run.rho_trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*run.rho_trace.last().unwrap(), run.best_mu);
        let kind = match &run.config {
            snfcs::optim::OptimizerConfig::Gd(c) => (c.kind, c.degree),
            snfcs::optim::OptimizerConfig::Alm(c) => (c.kind, c.degree),
        };
        let mu = build_matrix(kind.0, kind.1, &run.best_angles).unwrap().coherence().unwrap().mu;
        assert!((mu - run.best_mu).abs() < 1e-12);
        for r in &run.restarts {
            assert!(r.best_mu <= r.init_mu);
        }
    }
}

#[test]
fn alm_shrinks_the_constraint_residual() {
    let mut a = AlmConfig::new(ModeKind::SphericalHarmonics, 4, 20);
    a.iterations = 200;
    a.tau = 1.0;
    let init = snfcs::sampling::apply_chi(&random_uniform::<f64>(20, 3).unwrap(), ChiPolicy::Fixed(0.0)).unwrap();
    let (run, _) = alm_restart(&a, init, 0).unwrap();
    let tr = &run.residual_trace;
    assert_eq!(tr.len(), 200);
    assert!(tr[tr.len() - 1] * 10.0 <= tr[0], "{} -> {}", tr[0], tr[tr.len() - 1]);
}
