//! Jacobi polynomials, Wigner d/D-functions and spherical harmonics.
//!
//! Conventions:
//!
//! * `wigner_d(n, mu, m, theta)` is the real d-function written through a
//!   Jacobi polynomial with `xi = |m - mu|`, `lam = |m + mu|`,
//!   `alpha = n - (xi + lam)/2` and sign `1` for `mu >= m`, `(-1)^(mu - m)`
//!   otherwise.
//! * `wigner_big_d(order, theta, phi, chi) = e^{i m phi} d(theta) e^{i mu chi}`.
//! * `sph_harm(n, m, theta, phi)` is orthonormal on the sphere, carries no
//!   Condon-Shortley phase and uses the azimuthal factor `e^{i m phi}`. With
//!   these choices `D^n_{0m} = (-1)^m sqrt(4 pi / (2n + 1)) Y_n^m`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Clamp margin used when the derivative is requested at a pole.
pub const POLE_EPS: f64 = 1e-7;

const X_TOL: f64 = 1e-12;

/// Degree and orders of a Wigner function; `|mu| <= n`, `|m| <= n`, `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WignerOrder {
    n: i32,
    mu: i32,
    m: i32,
}

impl WignerOrder {
    pub fn new(n: i32, mu: i32, m: i32) -> Result<Self> {
        if n < 1 || mu.abs() > n || m.abs() > n {
            return Err(Error::invalid(format!(
                "invalid Wigner order (n={n}, mu={mu}, m={m})"
            )));
        }
        Ok(Self { n, mu, m })
    }

    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn mu(&self) -> i32 {
        self.mu
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// `|m - mu|`
    pub fn xi(&self) -> u32 {
        (self.m - self.mu).unsigned_abs()
    }

    /// `|m + mu|`
    pub fn lam(&self) -> u32 {
        (self.m + self.mu).unsigned_abs()
    }

    /// Degree of the Jacobi polynomial.
    pub fn alpha(&self) -> u32 {
        // xi + lam = 2 max(|m|, |mu|), so this is n - max(|m|, |mu|) >= 0
        self.n as u32 - (self.xi() + self.lam()) / 2
    }

    fn sign(&self) -> i32 {
        if self.mu >= self.m || (self.mu - self.m) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

/// Angle in radians with the canonical domains used for sampling angles.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Angle<T>(pub T);

impl<T: Real> Angle<T> {
    /// Wraps into `[0, 2 pi)`.
    pub fn azimuthal(self) -> Self {
        let tau = T::two_pi();
        let mut v = self.0 % tau;
        if v < T::zero() {
            v += tau;
        }
        if v >= tau {
            v -= tau;
        }
        Angle(v)
    }

    pub fn radians(self) -> T {
        self.0
    }

    pub fn degrees(self) -> T {
        self.0.to_degrees()
    }
}

/// `ln(k!)`, summed directly; the arguments here never exceed a few hundred.
pub(crate) fn ln_factorial<T: Real>(k: u32) -> T {
    (2..=k).map(|j| T::from_u32(j).unwrap().ln()).sum()
}

/// Jacobi polynomial `P_deg^{(a, b)}(x)` by the three-term recurrence in the degree.
pub fn jacobi<T: Real>(deg: u32, a: u32, b: u32, x: T) -> Result<T> {
    check_unit_interval(x)?;
    Ok(jacobi_unchecked(deg, a, b, x.max(-T::one()).min(T::one())))
}

fn check_unit_interval<T: Real>(x: T) -> Result<()> {
    if !(x.abs() <= T::one() + T::lit(X_TOL)) {
        return Err(Error::domain(format!("Jacobi argument {x} outside [-1, 1]")));
    }
    Ok(())
}

pub(crate) fn jacobi_unchecked<T: Real>(deg: u32, a: u32, b: u32, x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let a = T::from_u32(a).unwrap();
    let b = T::from_u32(b).unwrap();
    let p0 = one;
    if deg == 0 {
        return p0;
    }
    let p1 = (a + one) + (a + b + two) * (x - one) / two;
    if deg == 1 {
        return p1;
    }
    let (mut prev, mut cur) = (p0, p1);
    for k in 2..=deg {
        let k = T::from_u32(k).unwrap();
        let s = two * k + a + b;
        let c1 = two * k * (k + a + b) * (s - two);
        let c2 = (s - one) * (s * (s - two) * x + a * a - b * b);
        let c3 = two * (k + a - one) * (k + b - one) * s;
        let next = (c2 * cur - c3 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

/// `k`-th derivative in `x` of `P_deg^{(a, b)}`.
///
/// Uses `d^k/dx^k P_deg^{(a,b)} = Gamma(a+b+deg+1+k) / (2^k Gamma(a+b+deg+1)) P_{deg-k}^{(a+k, b+k)}`,
/// with the Gamma ratio taken in log space.
pub fn jacobi_deriv<T: Real>(deg: u32, a: u32, b: u32, k: u32, x: T) -> Result<T> {
    check_unit_interval(x)?;
    Ok(jacobi_deriv_unchecked(
        deg,
        a,
        b,
        k,
        x.max(-T::one()).min(T::one()),
    ))
}

pub(crate) fn jacobi_deriv_unchecked<T: Real>(deg: u32, a: u32, b: u32, k: u32, x: T) -> T {
    if k == 0 {
        return jacobi_unchecked(deg, a, b, x);
    }
    if k > deg {
        return T::zero();
    }
    let base = a + b + deg;
    // Gamma(base + 1 + k) / Gamma(base + 1) = (base + k)! / base!
    let ln_ratio = ln_factorial::<T>(base + k)
        - ln_factorial::<T>(base)
        - T::from_u32(k).unwrap() * T::LN_2();
    ln_ratio.exp() * jacobi_unchecked(deg - k, a + k, b + k, x)
}

/// `sqrt(gamma)` of the d-function normalization.
fn sqrt_gamma<T: Real>(alpha: u32, xi: u32, lam: u32) -> T {
    let ln_gamma = ln_factorial::<T>(alpha) + ln_factorial::<T>(alpha + xi + lam)
        - ln_factorial::<T>(alpha + xi)
        - ln_factorial::<T>(alpha + lam);
    (ln_gamma / T::lit(2.0)).exp()
}

/// Wigner d-function `d^n_{mu m}(theta)`.
pub fn wigner_d<T: Real>(order: WignerOrder, theta: T) -> T {
    let (xi, lam, alpha) = (order.xi(), order.lam(), order.alpha());
    let half = theta / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let prefactor = T::from_i32(order.sign()).unwrap() * sqrt_gamma::<T>(alpha, xi, lam);
    prefactor * s.powi(xi as i32) * c.powi(lam as i32) * jacobi_unchecked(alpha, xi, lam, theta.cos())
}

/// Derivative of [`wigner_d`] with respect to `theta`.
///
/// The closed form has `1/(1 -+ cos theta)` factors, so `theta` is clamped to
/// `[POLE_EPS, pi - POLE_EPS]` first; the pole values are those of the clamped
/// point.
pub fn wigner_d_dtheta<T: Real>(order: WignerOrder, theta: T) -> T {
    let eps = T::lit(POLE_EPS);
    let theta = theta.max(eps).min(T::PI() - eps);
    let (xi, lam, alpha) = (order.xi(), order.lam(), order.alpha());
    let two = T::lit(2.0);
    let (s, c) = (theta / two).sin_cos();
    let xi_t = T::from_u32(xi).unwrap();
    let lam_t = T::from_u32(lam).unwrap();

    // xi sin / (2 (1 - cos)) = xi c / (2 s); lam sin / (2 (1 + cos)) = lam s / (2 c)
    let log_slope = xi_t * c / (two * s) - lam_t * s / (two * c);
    let d = wigner_d(order, theta);

    let shifted = if alpha == 0 {
        T::zero()
    } else {
        let prefactor = T::from_i32(order.sign()).unwrap() * sqrt_gamma::<T>(alpha, xi, lam);
        let scale = T::from_u32(xi + lam + alpha + 1).unwrap() / two;
        prefactor
            * scale
            * s.powi(xi as i32)
            * c.powi(lam as i32)
            * jacobi_unchecked(alpha - 1, xi + 1, lam + 1, theta.cos())
    };
    log_slope * d - theta.sin() * shifted
}

/// Wigner D-function `e^{i m phi} d^n_{mu m}(theta) e^{i mu chi}`.
pub fn wigner_big_d<T: Real>(order: WignerOrder, theta: T, phi: T, chi: T) -> Complex<T> {
    let d = wigner_d(order, theta);
    let phase = T::from_i32(order.m).unwrap() * phi + T::from_i32(order.mu).unwrap() * chi;
    Complex::from_polar(d, phase)
}

/// Orthonormal spherical harmonic `Y_n^m(theta, phi)`.
///
/// No Condon-Shortley phase for `m >= 0`; negative orders follow
/// `Y_n^{-m} = (-1)^m conj(Y_n^m)`.
///
/// Evaluated through the normalized associated Legendre recurrence in the
/// degree, independently of the Wigner route.
pub fn sph_harm<T: Real>(n: i32, m: i32, theta: T, phi: T) -> Result<Complex<T>> {
    if n < 0 || m.abs() > n {
        return Err(Error::invalid(format!("invalid harmonic (n={n}, m={m})")));
    }
    let mut p = normalized_legendre(n as u32, m.unsigned_abs(), theta.cos(), theta.sin());
    if m < 0 && m % 2 != 0 {
        p = -p;
    }
    Ok(Complex::from_polar(p, T::from_i32(m).unwrap() * phi))
}

/// `sqrt((2n+1)/(4 pi) (n-m)!/(n+m)!) P_n^m(x)` with `m >= 0` and no
/// Condon-Shortley phase; `sin_theta = sqrt(1 - x^2) >= 0`.
fn normalized_legendre<T: Real>(n: u32, m: u32, x: T, sin_theta: T) -> T {
    if m > n {
        return T::zero();
    }
    let one = T::one();
    let four_pi = T::lit(4.0) * T::PI();
    // P_m^m
    let mut pmm = ((T::from_u32(2 * m + 1).unwrap()) / four_pi).sqrt();
    for k in 1..=m {
        let k = T::from_u32(k).unwrap();
        let two_k = k + k;
        pmm = pmm * ((two_k - one) / two_k).sqrt() * sin_theta;
    }
    if n == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = x * T::from_u32(2 * m + 3).unwrap().sqrt() * pmm;
    let mt = T::from_u32(m).unwrap();
    for l in (m + 2)..=n {
        let lt = T::from_u32(l).unwrap();
        let lm1 = lt - one;
        let four = T::lit(4.0);
        let a = ((four * lt * lt - one) / (lt * lt - mt * mt)).sqrt();
        let b = ((lm1 * lm1 - mt * mt) / (four * lm1 * lm1 - one)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn order(n: i32, mu: i32, m: i32) -> WignerOrder {
        WignerOrder::new(n, mu, m).unwrap()
    }

    fn factorial(k: i64) -> f64 {
        (1..=k).map(|j| j as f64).product()
    }

    fn binom(n: i64, k: i64) -> f64 {
        if k < 0 || k > n {
            0.0
        } else {
            factorial(n) / (factorial(k) * factorial(n - k))
        }
    }

    /// Explicit series `sum_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^(n-s)`.
    fn jacobi_series(n: i64, a: i64, b: i64, x: f64) -> f64 {
        (0..=n)
            .map(|s| {
                binom(n + a, n - s)
                    * binom(n + b, s)
                    * ((x - 1.0) / 2.0).powi(s as i32)
                    * ((x + 1.0) / 2.0).powi((n - s) as i32)
            })
            .sum()
    }

    /// Factorial-sum form of the small-d matrix with first index `mp`, second `m`
    /// (rotation about y); the convention in this module puts `m` first.
    fn wigner_d_factorial_sum(j: i64, mp: i64, m: i64, beta: f64) -> f64 {
        let pre = (factorial(j + mp) * factorial(j - mp) * factorial(j + m) * factorial(j - m)).sqrt();
        let (sb, cb) = (beta / 2.0).sin_cos();
        let mut sum = 0.0;
        for s in 0..=(2 * j) {
            let d = [j + m - s, s, mp - m + s, j - mp - s];
            if d.iter().any(|&v| v < 0) {
                continue;
            }
            let denom: f64 = d.iter().map(|&v| factorial(v)).product();
            let sign = if (mp - m + s) % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * cb.powi((2 * j + m - mp - 2 * s) as i32) * sb.powi((mp - m + 2 * s) as i32) / denom;
        }
        pre * sum
    }

    #[test]
    fn jacobi_constant_and_legendre() {
        assert_eq!(jacobi(0, 2, 5, 0.3).unwrap(), 1.0);
        assert_relative_eq!(jacobi(1, 0, 0, 0.7).unwrap(), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn jacobi_matches_series() {
        // P_2^{(1,1)}(0.5) from the explicit series
        let oracle = jacobi_series(2, 1, 1, 0.5);
        assert_relative_eq!(oracle, 0.1875, epsilon = 1e-14);
        assert_relative_eq!(jacobi(2, 1, 1, 0.5).unwrap(), oracle, epsilon = 1e-14);
        for n in 0..12 {
            for a in 0..5 {
                for b in 0..5 {
                    for &x in &[-1.0, -0.63, 0.0, 0.41, 0.99, 1.0] {
                        let got = jacobi(n, a, b, x).unwrap();
                        let want = jacobi_series(n as i64, a as i64, b as i64, x);
                        assert_relative_eq!(got, want, epsilon = 1e-9, max_relative = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_rejects_outside_interval() {
        assert!(matches!(jacobi(2, 0, 0, 1.1), Err(Error::Domain(_))));
        assert!(jacobi_deriv(2, 0, 0, 1, -1.5f64).is_err());
        assert!(jacobi(2, 0, 0, 1.0 + 1e-14).is_ok());
    }

    #[test]
    fn jacobi_derivatives() {
        assert_relative_eq!(jacobi_deriv(1, 0, 0, 1, 0.2).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(
            jacobi_deriv(3, 2, 1, 0, 0.4).unwrap(),
            jacobi(3, 2, 1, 0.4).unwrap()
        );
        assert_eq!(jacobi_deriv(2, 1, 1, 3, 0.4).unwrap(), 0.0);
        // central differences of P_2(x) = (3x^2 - 1)/2 at 0.3
        let h = 1e-6;
        let fd = (jacobi(2, 0, 0, 0.3 + h).unwrap() - jacobi(2, 0, 0, 0.3 - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(fd, 0.9, epsilon = 1e-8);
        assert_relative_eq!(jacobi_deriv(2, 0, 0, 1, 0.3).unwrap(), fd, epsilon = 1e-8);
        // second derivative by differences of the first
        for &(n, a, b) in &[(5u32, 1u32, 2u32), (7, 0, 3), (4, 2, 2)] {
            let x = 0.37;
            let fd2 = (jacobi_deriv(n, a, b, 1, x + h).unwrap() - jacobi_deriv(n, a, b, 1, x - h).unwrap())
                / (2.0 * h);
            assert_relative_eq!(jacobi_deriv(n, a, b, 2, x).unwrap(), fd2, max_relative = 1e-6);
        }
    }

    #[test]
    fn wigner_small_cases() {
        assert_eq!(wigner_d(order(5, 3, 3), 0.0), 1.0);
        assert_eq!(wigner_d(order(5, 3, 2), 0.0), 0.0);
        assert_relative_eq!(wigner_d(order(1, 0, 0), PI / 3.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(wigner_d(order(1, 1, 0), 0.9), 0.9f64.sin() / 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn wigner_matches_factorial_sum() {
        let want = wigner_d_factorial_sum(2, -1, 1, 0.8);
        assert_relative_eq!(wigner_d(order(2, 1, -1), 0.8), want, epsilon = 1e-14);
        for n in 1..=8 {
            for mu in -n..=n {
                for m in -n..=n {
                    for &t in &[0.0, 0.3, 1.1, 2.0, PI] {
                        let want = wigner_d_factorial_sum(n as i64, m as i64, mu as i64, t);
                        assert_relative_eq!(wigner_d(order(n, mu, m), t), want, epsilon = 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn wigner_derivative_examples() {
        assert_relative_eq!(wigner_d_dtheta(order(1, 0, 0), PI / 2.0), -1.0, epsilon = 1e-12);
        let h = 1e-6;
        let o = order(2, 2, 2);
        let fd = (wigner_d(o, PI / 2.0 + h) - wigner_d(o, PI / 2.0 - h)) / (2.0 * h);
        assert_relative_eq!(wigner_d_dtheta(o, PI / 2.0), fd, max_relative = 1e-6);
        // pole policy: finite, equal to the clamped value
        let o = order(3, 1, 0);
        assert!(wigner_d_dtheta(o, 0.0f64).is_finite());
        assert_eq!(wigner_d_dtheta(o, 0.0), wigner_d_dtheta(o, POLE_EPS));
        assert_eq!(wigner_d_dtheta(o, PI), wigner_d_dtheta(o, PI - POLE_EPS));
    }

    #[test]
    fn wigner_derivative_vanishes_at_extremum() {
        // golden-section search for the interior maximum of |d^3_{1,0}|
        let o = order(3, 1, 0);
        let f = |t: f64| -wigner_d(o, t).abs();
        let (mut a, mut b) = (0.05, 1.4);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = (a + b) / 2.0;
        assert!(wigner_d_dtheta(o, t).abs() < 1e-7);
    }

    #[test]
    fn big_d_phases() {
        let o = order(1, 0, 0);
        let v = wigner_big_d(o, PI / 3.0, 1.7, -0.4);
        assert_relative_eq!(v.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
        let o = order(4, -2, 3);
        let v = wigner_big_d(o, 0.7, 0.0, 0.0);
        assert_eq!(v.im, 0.0);
        assert_eq!(v.re, wigner_d(o, 0.7));
        let w = wigner_big_d(o, 0.7, 2.1, 5.3);
        assert_relative_eq!(w.norm(), wigner_d(o, 0.7f64).abs(), epsilon = 1e-15);
    }

    #[test]
    fn harmonic_examples() {
        let y = sph_harm(1, 0, PI / 2.0, 0.0).unwrap();
        assert!(y.norm() < 1e-16);
        let a = sph_harm(1, 1, 0.8, 0.1).unwrap().norm();
        let b = sph_harm(1, 1, 0.8, 4.2).unwrap().norm();
        assert_relative_eq!(a, b, epsilon = 1e-15);
        assert!(sph_harm::<f64>(2, 3, 0.1, 0.1).is_err());
    }

    #[test]
    fn angle_wrapping() {
        assert_relative_eq!(Angle(2.0 * PI + 0.3).azimuthal().radians(), 0.3, epsilon = 1e-15);
        assert_relative_eq!(Angle(-0.25).azimuthal().radians(), 2.0 * PI - 0.25, epsilon = 1e-15);
        assert!(Angle(-1e-300f64).azimuthal().radians() < 2.0 * PI);
    }

    #[test]
    fn order_validation() {
        assert!(WignerOrder::new(0, 0, 0).is_err());
        assert!(WignerOrder::new(2, 3, 0).is_err());
        assert!(WignerOrder::new(2, 0, -3).is_err());
        let o = order(5, -2, 3);
        assert_eq!((o.xi(), o.lam(), o.alpha()), (5, 1, 2));
    }

    #[test]
    fn works_in_single_precision() {
        let v: f32 = wigner_d(order(3, 1, -2), 1.0f32);
        let w = wigner_d(order(3, 1, -2), 1.0f64);
        assert!((v as f64 - w).abs() < 1e-5);
    }
}
