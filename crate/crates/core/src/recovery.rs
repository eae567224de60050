//! Complex basis pursuit: `min ‖x‖₁` subject to `A x = y`.
//!
//! Solved with ADMM on the splitting `x = z`, where the `x` block is the
//! Euclidean projection onto the affine set `{A x = y}` and the `z` block is
//! complex soft-thresholding. The projection operator depends only on `A`,
//! so [`BpSolver`] builds it once and reuses it for any number of
//! right-hand sides. A converged run is finished by an exact fit on the
//! support of the sparse iterate whenever that fit is feasible and no
//! larger in ℓ1.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjoint, matmul, matvec, norm2, Cholesky};
use crate::scalar::Real;

/// ADMM stopping rule and penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BpOptions<T: Real> {
    pub tol_primal: T,
    pub tol_dual: T,
    pub max_iters: usize,
    /// Initial ADMM penalty; adapted by residual balancing.
    pub rho: T,
}

impl<T: Real> Default for BpOptions<T> {
    fn default() -> Self {
        Self { tol_primal: T::lit(1e-6), tol_dual: T::lit(1e-6), max_iters: 2000, rho: T::one() }
    }
}

impl<T: Real> BpOptions<T> {
    fn validate(&self) -> Result<()> {
        if !(self.tol_primal > T::zero() && self.tol_dual > T::zero()) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        if !(self.rho > T::zero()) {
            return Err(Error::invalid("penalty must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RecoveryProblem<T: Real> {
    pub a: Array2<Complex<T>>,
    pub y: Array1<Complex<T>>,
    #[serde(flatten)]
    pub options: BpOptions<T>,
}

impl<T: Real> RecoveryProblem<T> {
    pub fn new(a: Array2<Complex<T>>, y: Array1<Complex<T>>) -> Self {
        Self { a, y, options: BpOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RecoveryResult<T: Real> {
    pub x_hat: Array1<Complex<T>>,
    /// `‖A x̂ − y‖₂`.
    pub residual_norm: T,
    pub l1_value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Basis-pursuit solver bound to one matrix.
#[derive(Clone, Debug)]
pub struct BpSolver<T: Real> {
    a: Array2<Complex<T>>,
    /// `x ↦ P x`, the projector onto the null space of `A` (zero when `A`
    /// has full column rank).
    proj: Option<Array2<Complex<T>>>,
    /// Minimum-norm (or least-squares) right inverse: `x₀ = pinv · y`.
    pinv: Array2<Complex<T>>,
}

impl<T: Real> BpSolver<T> {
    pub fn new(a: ArrayView2<Complex<T>>) -> Result<Self> {
        let (k, l) = a.dim();
        if k == 0 || l == 0 {
            return Err(Error::dims(format!("empty {k}x{l} matrix")));
        }
        let ah = adjoint(a);
        if k < l {
            let gram = matmul(a, ah.view());
            let chol = Cholesky::factor_regularized(gram.view())?;
            // M = (A Aᴴ)⁻¹ A, so pinv = Mᴴ and P = I − Aᴴ M.
            let m = chol.solve_columns(a);
            let mut proj = matmul(ah.view(), m.view()).mapv(|z| -z);
            for i in 0..l {
                proj[[i, i]] += Complex::new(T::one(), T::zero());
            }
            Ok(Self { a: a.to_owned(), proj: Some(proj), pinv: adjoint(m.view()) })
        } else {
            let gram = matmul(ah.view(), a);
            let chol = Cholesky::factor_regularized(gram.view())?;
            let pinv = chol.solve_columns(ah.view());
            Ok(Self { a: a.to_owned(), proj: None, pinv })
        }
    }

    pub fn matrix(&self) -> ArrayView2<'_, Complex<T>> {
        self.a.view()
    }

    pub fn solve(&self, y: &[Complex<T>], opts: &BpOptions<T>) -> Result<RecoveryResult<T>> {
        opts.validate()?;
        let (k, l) = self.a.dim();
        if y.len() != k {
            return Err(Error::dims(format!("y has length {}, matrix has {k} rows", y.len())));
        }
        let zero = Complex::new(T::zero(), T::zero());
        let y_norm = norm2(y);
        if y_norm == T::zero() {
            return Ok(RecoveryResult {
                x_hat: Array1::from_elem(l, zero),
                residual_norm: T::zero(),
                l1_value: T::zero(),
                iterations: 0,
                converged: true,
            });
        }
        let yn: Vec<_> = y.iter().map(|v| *v / y_norm).collect();
        let mut x0 = vec![zero; l];
        matvec(self.pinv.view(), &yn, &mut x0);

        let (x, iterations, converged) = match &self.proj {
            None => (x0, 0, true),
            Some(p) => {
                let (x, z, it, conv) = admm(p.view(), &x0, opts);
                let x = if conv { self.polish(&z, &yn, opts.tol_primal).filter(|c| l1(c) <= l1(&x)).unwrap_or(x) } else { x };
                (x, it, conv)
            }
        };
        let x_hat: Array1<_> = x.iter().map(|v| *v * y_norm).collect();
        let mut ax = vec![zero; k];
        matvec(self.a.view(), x_hat.as_slice().unwrap(), &mut ax);
        let residual_norm = residual(&ax, y);
        let l1_value = l1(x_hat.as_slice().unwrap());
        Ok(RecoveryResult { x_hat, residual_norm, l1_value, iterations, converged })
    }
}

impl<T: Real> BpSolver<T> {
    /// Exact solve of `A x = y` restricted to the support of `z`, if that
    /// support is small enough to determine it and the fit is feasible.
    fn polish(&self, z: &[Complex<T>], y: &[Complex<T>], tol: T) -> Option<Vec<Complex<T>>> {
        let (k, l) = self.a.dim();
        let support: Vec<usize> = (0..l).filter(|&i| z[i] != Complex::new(T::zero(), T::zero())).collect();
        if support.is_empty() || support.len() > k {
            return None;
        }
        let sub = self.a.select(Axis(1), &support);
        let sub_h = adjoint(sub.view());
        let chol = Cholesky::factor(matmul(sub_h.view(), sub.view()).view()).ok()?;
        let mut rhs = vec![Complex::new(T::zero(), T::zero()); support.len()];
        matvec(sub_h.view(), y, &mut rhs);
        chol.solve_in_place(&mut rhs);
        let mut x = vec![Complex::new(T::zero(), T::zero()); l];
        for (i, c) in support.iter().zip(&rhs) {
            x[*i] = *c;
        }
        let mut ax = vec![Complex::new(T::zero(), T::zero()); k];
        matvec(self.a.view(), &x, &mut ax);
        (residual(&ax, y) <= tol * norm2(y) && x.iter().all(|v| v.re.is_finite() && v.im.is_finite())).then_some(x)
    }
}

fn l1<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|v| v.norm()).fold(T::zero(), |s, v| s + v)
}

fn residual<T: Real>(ax: &[Complex<T>], y: &[Complex<T>]) -> T {
    ax.iter().zip(y).map(|(u, v)| (*u - *v).norm_sqr()).fold(T::zero(), |s, v| s + v).sqrt()
}

/// Complex soft-threshold `v · max(1 − κ/|v|, 0)`.
pub fn shrink<T: Real>(v: Complex<T>, kappa: T) -> Complex<T> {
    let r = v.norm();
    if r <= kappa {
        Complex::new(T::zero(), T::zero())
    } else {
        v * ((r - kappa) / r)
    }
}

/// Scaled-form ADMM with `x ∈ {x₀ + P v}` and `z = shrink(x + w, 1/ρ)`.
fn admm<T: Real>(
    p: ArrayView2<Complex<T>>,
    x0: &[Complex<T>],
    opts: &BpOptions<T>,
) -> (Vec<Complex<T>>, Vec<Complex<T>>, usize, bool) {
    let l = x0.len();
    let zero = Complex::new(T::zero(), T::zero());
    let two = T::lit(2.0);
    let balance = T::lit(10.0);
    let mut rho = opts.rho;
    let mut x = x0.to_vec();
    let mut z: Vec<_> = x0.iter().map(|v| shrink(*v, T::one() / rho)).collect();
    let mut w = vec![zero; l];
    let mut v = vec![zero; l];
    let mut z_old = vec![zero; l];
    for it in 1..=opts.max_iters {
        for i in 0..l {
            v[i] = z[i] - w[i] - x0[i];
        }
        matvec(p, &v, &mut x);
        for i in 0..l {
            x[i] += x0[i];
        }
        z_old.copy_from_slice(&z);
        let kappa = T::one() / rho;
        for i in 0..l {
            z[i] = shrink(x[i] + w[i], kappa);
            w[i] += x[i] - z[i];
        }
        let mut r2 = T::zero();
        let mut s2 = T::zero();
        for i in 0..l {
            r2 += (x[i] - z[i]).norm_sqr();
            s2 += (z[i] - z_old[i]).norm_sqr();
        }
        let r = r2.sqrt();
        let s = rho * s2.sqrt();
        let scale_p = norm2(&x).max(norm2(&z));
        let scale_d = rho * norm2(&w);
        if r <= opts.tol_primal * scale_p && s <= opts.tol_dual * scale_d.max(T::epsilon()) {
            return (x, z, it, true);
        }
        if r > balance * s {
            rho *= two;
            w.iter_mut().for_each(|c| *c = *c / two);
        } else if s > balance * r {
            rho /= two;
            w.iter_mut().for_each(|c| *c = *c * two);
        }
    }
    (x, z, opts.max_iters, false)
}

/// One-shot solve of `problem`.
pub fn bp_solve<T: Real>(problem: &RecoveryProblem<T>) -> Result<RecoveryResult<T>> {
    if problem.y.len() != problem.a.nrows() {
        return Err(Error::dims(format!("y has length {}, matrix has {} rows", problem.y.len(), problem.a.nrows())));
    }
    let solver = BpSolver::new(problem.a.view())?;
    solver.solve(&problem.y.to_vec(), &problem.options)
}

/// `‖x̂ − x‖₂ / ‖x‖₂ < rel_tol`.
pub fn support_recovery_success<T: Real>(x_hat: &[Complex<T>], x_true: &[Complex<T>], rel_tol: T) -> Result<bool> {
    if x_hat.len() != x_true.len() {
        return Err(Error::dims(format!("lengths {} and {}", x_hat.len(), x_true.len())));
    }
    let denom = norm2(x_true);
    if denom == T::zero() {
        return Err(Error::invalid("x_true is zero"));
    }
    Ok(residual(x_hat, x_true) / denom < rel_tol)
}
