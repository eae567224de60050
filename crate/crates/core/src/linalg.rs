//! Small dense complex linear algebra: Hermitian Cholesky and Gram products.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular factor `L` with `A = L Lᴴ` of a Hermitian positive
/// definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T: Real> {
    l: Array2<Complex<T>>,
    shift: T,
}

impl<T: Real> Cholesky<T> {
    /// Factors `a`; only the lower triangle is read.
    pub fn factor(a: ArrayView2<Complex<T>>) -> Result<Self> {
        Self::factor_shifted(a, T::zero())
    }

    /// Factors `a + shift·I`.
    pub fn factor_shifted(a: ArrayView2<Complex<T>>, shift: T) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::dims(format!("cholesky of a {}x{} matrix", n, a.ncols())));
        }
        let mut l = Array2::<Complex<T>>::zeros((n, n));
        for j in 0..n {
            let mut d = a[[j, j]].re + shift;
            for k in 0..j {
                d -= l[[j, k]].norm_sqr();
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::domain(format!("matrix is not positive definite at pivot {j}")));
            }
            let djj = d.sqrt();
            l[[j, j]] = Complex::new(djj, T::zero());
            for i in (j + 1)..n {
                let mut s = a[[i, j]];
                for k in 0..j {
                    s -= l[[i, k]] * l[[j, k]].conj();
                }
                l[[i, j]] = s / djj;
            }
        }
        Ok(Self { l, shift })
    }

    /// Factors `a`, retrying with a growing diagonal shift relative to the
    /// mean diagonal when `a` is singular to working precision.
    pub fn factor_regularized(a: ArrayView2<Complex<T>>) -> Result<Self> {
        if let Ok(c) = Self::factor(a) {
            return Ok(c);
        }
        let n = a.nrows().max(1);
        let scale = a.diag().iter().map(|z| z.re.abs()).fold(T::zero(), |s, v| s + v) / T::from_usize(n).unwrap();
        let scale = if scale > T::zero() { scale } else { T::one() };
        let mut rel = T::epsilon().sqrt() * T::lit(1e-4);
        let mut last = None;
        while rel <= T::lit(1e-2) {
            match Self::factor_shifted(a, rel * scale) {
                Ok(c) => return Ok(c),
                Err(e) => last = Some(e),
            }
            rel *= T::lit(100.0);
        }
        Err(last.unwrap_or_else(|| Error::domain("regularized cholesky failed")))
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Diagonal shift that was added before factoring.
    pub fn shift(&self) -> T {
        self.shift
    }

    /// Solves `(L Lᴴ) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex<T>]) {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let l = &self.l;
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= l[[i, k]] * b[k];
            }
            b[i] = s / l[[i, i]].re;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s -= l[[k, i]].conj() * b[k];
            }
            b[i] = s / l[[i, i]].re;
        }
    }

    pub fn solve(&self, b: ArrayView1<Complex<T>>) -> Array1<Complex<T>> {
        let mut x = b.to_owned();
        self.solve_in_place(x.as_slice_mut().unwrap());
        x
    }

    /// Solves for every column of `b`.
    pub fn solve_columns(&self, b: ArrayView2<Complex<T>>) -> Array2<Complex<T>> {
        let mut x = b.to_owned();
        let mut col = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        for mut c in x.axis_iter_mut(Axis(1)) {
            col.iter_mut().zip(c.iter()).for_each(|(d, s)| *d = *s);
            self.solve_in_place(&mut col);
            c.iter_mut().zip(col.iter()).for_each(|(d, s)| *d = *s);
        }
        x
    }
}

/// Conjugate transpose.
pub fn adjoint<T: Real>(a: ArrayView2<Complex<T>>) -> Array2<Complex<T>> {
    a.t().mapv(|z| z.conj())
}

/// `a · b` for complex matrices.
pub fn matmul<T: Real>(a: ArrayView2<Complex<T>>, b: ArrayView2<Complex<T>>) -> Array2<Complex<T>> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions");
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = Array2::<Complex<T>>::zeros((n, m));
    for i in 0..n {
        for p in 0..k {
            let aip = a[[i, p]];
            if aip.re == T::zero() && aip.im == T::zero() {
                continue;
            }
            let brow = b.row(p);
            let mut orow = out.row_mut(i);
            for (o, bv) in orow.iter_mut().zip(brow.iter()) {
                *o += aip * *bv;
            }
        }
    }
    out
}

/// `a · x` for a complex matrix and vector.
pub fn matvec<T: Real>(a: ArrayView2<Complex<T>>, x: &[Complex<T>], out: &mut [Complex<T>]) {
    assert_eq!(a.ncols(), x.len(), "matvec input length");
    assert_eq!(a.nrows(), out.len(), "matvec output length");
    for (o, row) in out.iter_mut().zip(a.rows()) {
        let mut s = Complex::new(T::zero(), T::zero());
        for (av, xv) in row.iter().zip(x) {
            s += *av * *xv;
        }
        *o = s;
    }
}

/// Euclidean norm of a complex slice.
pub fn norm2<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt()
}
