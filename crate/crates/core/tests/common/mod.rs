//! Test-only oracles, written independently of the library code paths.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn factorial(k: i64) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Small-d matrix element with first index `mp` and second `m`, from the
/// explicit factorial sum.
pub fn wigner_d_sum(j: i64, mp: i64, m: i64, beta: f64) -> f64 {
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

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (z * p - p0) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Euclidean projection onto the ℓ1 ball by bisection on the threshold.
pub fn project_l1_bisect(v: &[C], radius: f64) -> Vec<C> {
    let l1: f64 = v.iter().map(|z| z.norm()).sum();
    if l1 <= radius {
        return v.to_vec();
    }
    let mass = |t: f64| v.iter().map(|z| (z.norm() - t).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, v.iter().map(|z| z.norm()).fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    v.iter()
        .map(|z| {
            let a = z.norm();
            if a > t {
                z * ((a - t) / a)
            } else {
                C::new(0.0, 0.0)
            }
        })
        .collect()
}

pub fn gaussian_complex<R: Rng>(r: &mut R) -> C {
    // Box–Muller, kept local so the oracle does not share the library's sampler.
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    let rad = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    C::new(rad * c, rad * s) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_complex_vec<R: Rng>(r: &mut R, n: usize) -> Vec<C> {
    (0..n).map(|_| gaussian_complex(r)).collect()
}

pub fn norm2(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn l1(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Solves a small complex system by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].norm().partial_cmp(&a[j][col].norm()).unwrap()).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// Brute-force pairwise coherence of the columns of a row-major matrix.
pub fn brute_coherence(a: &ndarray::Array2<C>) -> f64 {
    let l = a.ncols();
    let col = |q: usize| a.column(q).to_vec();
    let mut best = 0.0f64;
    for q in 0..l {
        for r in 0..q {
            let (x, y) = (col(q), col(r));
            let dot: C = x.iter().zip(&y).map(|(u, v)| u.conj() * v).sum();
            best = best.max(dot.norm() / (norm2(&x) * norm2(&y)));
        }
    }
    best
}
