//! Sensing matrices, mutual coherence and the Welch bound.

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{mode_table, Mode, ModeKind, ModeTable};
use crate::sampling::SamplingSet;
use crate::scalar::Real;
use crate::specfun::{sph_harm, wigner_big_d, wigner_d, wigner_d_dtheta, WignerOrder};

/// Value of a basis function and its partial derivatives at one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisJet<T: Real> {
    pub value: Complex<T>,
    pub d_theta: Complex<T>,
    pub d_phi: Complex<T>,
    pub d_chi: Complex<T>,
}

fn order(n: i32, mu: i32, m: i32) -> WignerOrder {
    WignerOrder::new(n, mu, m).expect("mode table produces valid orders")
}

/// `(-1)^m sqrt((2n+1)/(4 pi))`, mapping `D^n_{0m}` to `Y_n^m`.
fn harmonic_factor<T: Real>(n: i32, m: i32) -> T {
    let sign = if m % 2 == 0 { T::one() } else { -T::one() };
    sign * (T::from_i32(2 * n + 1).unwrap() / (T::lit(4.0) * T::PI())).sqrt()
}

/// Basis function of `mode` at one sample.
pub fn basis_value<T: Real>(mode: Mode, theta: T, phi: T, chi: T) -> Complex<T> {
    match mode {
        Mode::Wigner { n, m, mu } => wigner_big_d(order(n, mu, m), theta, phi, chi),
        Mode::Harmonic { n, m } => sph_harm(n, m, theta, phi).expect("valid harmonic"),
        Mode::Probe { block, n, m } => {
            let plus = wigner_big_d(order(n, 1, m), theta, phi, chi);
            let minus = wigner_big_d(order(n, -1, m), theta, phi, chi);
            if block == 1 {
                plus + minus
            } else {
                plus - minus
            }
        }
    }
}

/// Basis function of `mode` and its angle derivatives at one sample.
pub fn basis_jet<T: Real>(mode: Mode, theta: T, phi: T, chi: T) -> BasisJet<T> {
    let i = Complex::<T>::i();
    match mode {
        Mode::Wigner { n, m, mu } => {
            let o = order(n, mu, m);
            let phase = Complex::from_polar(T::one(), T::from_i32(m).unwrap() * phi + T::from_i32(mu).unwrap() * chi);
            let value = phase * wigner_d(o, theta);
            BasisJet {
                value,
                d_theta: phase * wigner_d_dtheta(o, theta),
                d_phi: i * value * T::from_i32(m).unwrap(),
                d_chi: i * value * T::from_i32(mu).unwrap(),
            }
        }
        Mode::Harmonic { n, m } => {
            let value = sph_harm(n, m, theta, phi).expect("valid harmonic");
            let phase = Complex::from_polar(T::one(), T::from_i32(m).unwrap() * phi);
            BasisJet {
                value,
                d_theta: phase * (harmonic_factor::<T>(n, m) * wigner_d_dtheta(order(n, 0, m), theta)),
                d_phi: i * value * T::from_i32(m).unwrap(),
                d_chi: Complex::new(T::zero(), T::zero()),
            }
        }
        Mode::Probe { block, n, m } => {
            let mt = T::from_i32(m).unwrap();
            let (op, om) = (order(n, 1, m), order(n, -1, m));
            let ep = Complex::from_polar(T::one(), mt * phi + chi);
            let em = Complex::from_polar(T::one(), mt * phi - chi);
            let (vp, vm) = (ep * wigner_d(op, theta), em * wigner_d(om, theta));
            let (tp, tm) = (ep * wigner_d_dtheta(op, theta), em * wigner_d_dtheta(om, theta));
            let sgn = if block == 1 { T::one() } else { -T::one() };
            let value = vp + vm * sgn;
            BasisJet {
                value,
                d_theta: tp + tm * sgn,
                d_phi: i * value * mt,
                // d/dchi of e^{+-i chi} is +-i
                d_chi: i * (vp - vm * sgn),
            }
        }
    }
}

/// Complex `K x L` matrix of sampled basis functions.
#[derive(Clone, Debug, PartialEq)]
pub struct SensingMatrix<T: Real> {
    kind: ModeKind,
    degree: u32,
    data: Array2<Complex<T>>,
    column_norms: Vec<T>,
}

/// Builds `A[i, q] = basis_q(theta_i, phi_i, chi_i)` in the canonical column order.
pub fn build_matrix<T: Real>(kind: ModeKind, degree: u32, samples: &SamplingSet<T>) -> Result<SensingMatrix<T>> {
    let table = mode_table(kind, degree)?;
    build_with_table(&table, samples)
}

pub fn build_with_table<T: Real>(table: &ModeTable, samples: &SamplingSet<T>) -> Result<SensingMatrix<T>> {
    if samples.is_empty() {
        return Err(Error::invalid("cannot build a matrix from zero samples"));
    }
    let k = samples.len();
    let l = table.len();
    let mut data = Array2::from_elem((k, l), Complex::new(T::zero(), T::zero()));
    for i in 0..k {
        let (t, p, c) = samples.sample(i);
        for (q, mode) in table.modes().iter().enumerate() {
            data[[i, q]] = basis_value(*mode, t, p, c);
        }
    }
    let column_norms = column_norms(data.view());
    Ok(SensingMatrix {
        kind: table.kind(),
        degree: table.degree(),
        data,
        column_norms,
    })
}

pub fn column_norms<T: Real>(a: ArrayView2<Complex<T>>) -> Vec<T> {
    a.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt())
        .collect()
}

impl<T: Real> SensingMatrix<T> {
    /// Wraps an existing matrix; `kind`/`degree` are checked against its width.
    pub fn from_parts(kind: ModeKind, degree: u32, data: Array2<Complex<T>>) -> Result<Self> {
        let l = crate::modes::mode_count(kind, degree)?;
        if data.ncols() != l || data.nrows() == 0 {
            return Err(Error::dims(format!(
                "{}x{} matrix for {kind} with degree {degree} (expected {l} columns)",
                data.nrows(),
                data.ncols()
            )));
        }
        let column_norms = column_norms(data.view());
        Ok(Self { kind, degree, data, column_norms })
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<Complex<T>> {
        &self.data
    }

    pub fn view(&self) -> ArrayView2<'_, Complex<T>> {
        self.data.view()
    }

    pub fn into_data(self) -> Array2<Complex<T>> {
        self.data
    }

    pub fn column_norms(&self) -> &[T] {
        &self.column_norms
    }

    /// Columns that vanish at every sample.
    pub fn degenerate_columns(&self) -> Vec<usize> {
        self.column_norms
            .iter()
            .enumerate()
            .filter(|(_, n)| **n == T::zero())
            .map(|(q, _)| q)
            .collect()
    }

    pub fn coherence(&self) -> Result<CoherenceReport<T>> {
        coherence(self.data.view())
    }
}

/// Normalized inner product `<a_q, a_r> / (|a_q| |a_r|)` with `<u, v> = sum u_i conj(v_i)`.
pub fn column_pair_corr<T: Real>(a: ArrayView2<Complex<T>>, q: usize, r: usize) -> Result<Complex<T>> {
    let l = a.ncols();
    if q >= l || r >= l {
        return Err(Error::invalid(format!("column pair ({q}, {r}) outside 0..{l}")));
    }
    let (cq, cr) = (a.column(q), a.column(r));
    let nq = cq.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    let nr = cr.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if nq == T::zero() {
        return Err(Error::DegenerateColumn { column: q });
    }
    if nr == T::zero() {
        return Err(Error::DegenerateColumn { column: r });
    }
    let dot: Complex<T> = cq.iter().zip(cr.iter()).map(|(x, y)| x * y.conj()).sum();
    Ok(dot / (nq * nr))
}

/// Mutual coherence with the maximizing pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CoherenceReport<T: Real> {
    pub mu: T,
    /// `(q, r)` with `r < q`; ties go to the lexicographically smallest pair.
    pub argmax_pair: (usize, usize),
    pub welch: T,
    pub pair_count: usize,
}

/// Column-normalized copy of `a`; errors on an all-zero column.
pub fn normalize_columns<T: Real>(a: ArrayView2<Complex<T>>) -> Result<(Array2<Complex<T>>, Vec<T>)> {
    let norms = column_norms(a);
    if let Some(q) = norms.iter().position(|n| *n == T::zero() || !n.is_finite()) {
        return Err(Error::DegenerateColumn { column: q });
    }
    let mut b = a.to_owned();
    for (mut col, n) in b.axis_iter_mut(Axis(1)).zip(&norms) {
        col.mapv_inplace(|z| z / *n);
    }
    Ok((b, norms))
}

/// Gram matrix `B^H B` of already-normalized columns; entry `[r, q]` is `g_{q,r}`.
pub fn normalized_gram<T: Real>(b: ArrayView2<Complex<T>>) -> Array2<Complex<T>> {
    let bh = b.t().mapv(|z| z.conj());
    bh.dot(&b)
}

/// Largest `|g_{q,r}|` over the strict upper triangle of a normalized Gram matrix.
pub(crate) fn max_offdiag<T: Real>(gram: &Array2<Complex<T>>) -> (T, (usize, usize)) {
    let l = gram.ncols();
    let mut best = T::neg_infinity();
    let mut pair = (1, 0);
    for q in 1..l {
        for r in 0..q {
            let v = gram[[r, q]].norm();
            if v > best {
                best = v;
                pair = (q, r);
            }
        }
    }
    (best, pair)
}

pub fn coherence<T: Real>(a: ArrayView2<Complex<T>>) -> Result<CoherenceReport<T>> {
    let (k, l) = a.dim();
    if l < 2 {
        return Err(Error::invalid("coherence needs at least two columns"));
    }
    let (b, _) = normalize_columns(a)?;
    let gram = normalized_gram(b.view());
    let (mu, argmax_pair) = max_offdiag(&gram);
    Ok(CoherenceReport {
        mu,
        argmax_pair,
        welch: welch_bound(k, l)?,
        pair_count: l * (l - 1) / 2,
    })
}

/// `sqrt((L - K) / (K (L - 1)))`, or zero once `K >= L`.
pub fn welch_bound<T: Real>(k: usize, l: usize) -> Result<T> {
    if l < 2 {
        return Err(Error::invalid("the Welch bound needs L >= 2"));
    }
    if k == 0 {
        return Err(Error::invalid("the Welch bound needs K >= 1"));
    }
    if k >= l {
        return Ok(T::zero());
    }
    let (kt, lt) = (T::from_usize(k).unwrap(), T::from_usize(l).unwrap());
    Ok(((lt - kt) / (kt * (lt - T::one()))).sqrt())
}
