mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use snfcs::specfun::{jacobi, jacobi_deriv, sph_harm, wigner_big_d, wigner_d, wigner_d_dtheta, WignerOrder};

fn order(n: i32, mu: i32, m: i32) -> WignerOrder {
    WignerOrder::new(n, mu, m).unwrap()
}

fn any_order(max_n: i32) -> impl Strategy<Value = WignerOrder> {
    (1..=max_n).prop_flat_map(|n| (Just(n), -n..=n, -n..=n)).prop_map(|(n, mu, m)| order(n, mu, m))
}

#[test]
fn kronecker_at_zero() {
    for n in 1..=12 {
        for mu in -n..=n {
            for m in -n..=n {
                let want = if mu == m { 1.0 } else { 0.0 };
                assert!((wigner_d(order(n, mu, m), 0.0f64) - want).abs() < 1e-12, "n={n} mu={mu} m={m}");
            }
        }
    }
}

#[test]
fn rows_are_unit_vectors() {
    for n in 1..=12 {
        for mu in -n..=n {
            for i in 0..50 {
                let t = PI * i as f64 / 49.0;
                let s: f64 = (-n..=n).map(|m| wigner_d(order(n, mu, m), t).powi(2)).sum();
                assert!((s - 1.0).abs() < 1e-10, "n={n} mu={mu} theta={t}: {s}");
            }
        }
    }
}

#[test]
fn factorial_sum_oracle_up_to_degree_ten() {
    for n in 1..=10i32 {
        for mu in -n..=n {
            for m in -n..=n {
                for &t in &[0.2, 0.8, 1.7, 2.9] {
                    let want = common::wigner_d_sum(n as i64, m as i64, mu as i64, t);
                    let got = wigner_d(order(n, mu, m), t);
                    assert!((got - want).abs() < 1e-10, "n={n} mu={mu} m={m} t={t}: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn quadrature_orthogonality() {
    let (x, w) = common::gauss_legendre(2 * 8 + 1);
    for mu in -8i32..=8 {
        for m in -8i32..=8 {
            let lo = mu.abs().max(m.abs()).max(1);
            for n in lo..=8 {
                for n2 in lo..=8 {
                    let s: f64 = x
                        .iter()
                        .zip(&w)
                        .map(|(xi, wi)| {
                            let t = xi.acos();
                            wi * wigner_d(order(n, mu, m), t) * wigner_d(order(n2, mu, m), t)
                        })
                        .sum();
                    let want = if n == n2 { 2.0 / (2 * n + 1) as f64 } else { 0.0 };
                    assert!((s - want).abs() < 1e-9, "n={n} n2={n2} mu={mu} m={m}: {s}");
                }
            }
        }
    }
}

#[test]
fn harmonics_match_wigner_with_zero_mu() {
    let mut r = common::rng(11);
    use rand::Rng;
    for _ in 0..100 {
        let n = r.random_range(1..=9);
        let m = r.random_range(-n..=n);
        let (t, p): (f64, f64) = (r.random::<f64>() * PI, r.random::<f64>() * 2.0 * PI);
        let d = wigner_big_d(order(n, 0, m), t, p, 0.3);
        let y = sph_harm(n, m, t, p).unwrap();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let scaled = y * (sign * (4.0 * PI / (2 * n + 1) as f64).sqrt());
        assert!((d - scaled).norm() < 1e-12, "n={n} m={m}");
    }
}

#[test]
fn jacobi_derivative_matches_differences() {
    let h = 1e-6;
    for deg in 0..=6u32 {
        for a in 0..=3u32 {
            for b in 0..=3u32 {
                for &x in &[-0.7f64, -0.1, 0.35, 0.8] {
                    let fd = (jacobi(deg, a, b, x + h).unwrap() - jacobi(deg, a, b, x - h).unwrap()) / (2.0 * h);
                    let an = jacobi_deriv(deg, a, b, 1, x).unwrap();
                    assert!((an - fd).abs() <= 1e-6 * an.abs().max(1.0), "deg={deg} a={a} b={b} x={x}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn swapping_orders_flips_sign(o in any_order(12), t in 0.0..PI) {
        let sign = if (o.mu() - o.m()).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let a = wigner_d(o, t);
        let b = wigner_d(order(o.n(), o.m(), o.mu()), t);
        prop_assert!((a - sign * b).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_differences(o in any_order(10), t in 0.05..(PI - 0.05)) {
        let h = 1e-6;
        let fd = (wigner_d(o, t + h) - wigner_d(o, t - h)) / (2.0 * h);
        let an = wigner_d_dtheta(o, t);
        // relative where the derivative is sizeable, absolute near its zeros
        prop_assert!((an - fd).abs() <= 1e-5 * an.abs().max(1e-3), "{o:?} t={t}: {an} vs {fd}");
    }

    #[test]
    fn big_d_has_the_small_d_magnitude(o in any_order(8), t in 0.0..PI, p in 0.0..(2.0 * PI), c in 0.0..(2.0 * PI)) {
        prop_assert!((wigner_big_d(o, t, p, c).norm() - wigner_d(o, t).abs()).abs() < 1e-13);
    }

    #[test]
    fn derivative_is_finite_at_poles(o in any_order(10)) {
        prop_assert!(wigner_d_dtheta(o, 0.0f64).is_finite());
        prop_assert!(wigner_d_dtheta(o, PI).is_finite());
    }
}
