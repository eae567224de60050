//! Smoothed coherence objective and its analytic angle gradient.
//!
//! With `B` the column-normalized matrix and `C = Bᴴ B`, every objective used
//! by the optimizers is a function of the strict upper triangle of `C`. Its
//! differential is written `dF = Σ_{r<q} Re(conj(M_rq) dC_rq)` for a
//! Hermitian weight matrix `M` with zero diagonal; [`backprop`] maps `M` to
//! the gradient over the sample angles through the column normalization and
//! the basis-function jets.

use ndarray::{Array2, ArrayView2, Axis, Zip};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{mode_table, ModeKind, ModeTable};
use crate::sampling::SamplingSet;
use crate::scalar::Real;
use crate::sensing::{basis_jet, build_with_table, max_offdiag, normalize_columns, normalized_gram};

/// Gradient with respect to every angle coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AngleGradient<T: Real> {
    pub theta: Vec<T>,
    pub phi: Vec<T>,
    pub chi: Vec<T>,
}

impl<T: Real> AngleGradient<T> {
    pub fn zeros(k: usize) -> Self {
        Self { theta: vec![T::zero(); k], phi: vec![T::zero(); k], chi: vec![T::zero(); k] }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Squared Euclidean norm over all three blocks.
    pub fn norm_sqr(&self) -> T {
        self.theta.iter().chain(&self.phi).chain(&self.chi).map(|g| *g * *g).sum()
    }
}

/// Column-normalized matrix with its Gram matrix and coherence.
#[derive(Clone, Debug)]
pub(crate) struct Frame<T: Real> {
    pub b: Array2<Complex<T>>,
    pub norms: Vec<T>,
    pub gram: Array2<Complex<T>>,
    pub mu: T,
}

impl<T: Real> Frame<T> {
    pub fn new(table: &ModeTable, samples: &SamplingSet<T>) -> Result<Self> {
        let a = build_with_table(table, samples)?;
        Self::from_matrix(a.view())
    }

    pub fn from_matrix(a: ArrayView2<Complex<T>>) -> Result<Self> {
        if a.ncols() < 2 {
            return Err(Error::invalid("coherence needs at least two columns"));
        }
        let (b, norms) = normalize_columns(a)?;
        let gram = normalized_gram(b.view());
        let (mu, _) = max_offdiag(&gram);
        Ok(Self { b, norms, gram, mu })
    }
}

/// Partial derivatives of every matrix entry with respect to its row's angles.
pub(crate) struct Jets<T: Real> {
    pub d_theta: Array2<Complex<T>>,
    pub d_phi: Array2<Complex<T>>,
    pub d_chi: Array2<Complex<T>>,
}

impl<T: Real> Jets<T> {
    pub fn new(table: &ModeTable, samples: &SamplingSet<T>) -> Self {
        let (k, l) = (samples.len(), table.len());
        let zero = Complex::new(T::zero(), T::zero());
        let mut d_theta = Array2::from_elem((k, l), zero);
        let mut d_phi = d_theta.clone();
        let mut d_chi = d_theta.clone();
        for i in 0..k {
            let (t, p, c) = samples.sample(i);
            for (q, mode) in table.modes().iter().enumerate() {
                let j = basis_jet(*mode, t, p, c);
                d_theta[[i, q]] = j.d_theta;
                d_phi[[i, q]] = j.d_phi;
                d_chi[[i, q]] = j.d_chi;
            }
        }
        Self { d_theta, d_phi, d_chi }
    }
}

/// Gradient over the angles of an objective whose differential in `C` is
/// described by the Hermitian weight matrix `m`.
pub(crate) fn backprop<T: Real>(frame: &Frame<T>, jets: &Jets<T>, m: &Array2<Complex<T>>) -> AngleGradient<T> {
    // dF = Re Σ_iq conj(Γ_iq) db_iq with Γ = B M; the normalization b = a/|a|
    // turns this into Re Σ conj(Ψ_iq) da_iq with Ψ = (Γ − s b)/|a|.
    let mut psi = frame.b.dot(m);
    for ((mut g, b), n) in psi.axis_iter_mut(Axis(1)).zip(frame.b.axis_iter(Axis(1))).zip(&frame.norms) {
        let s: T = g.iter().zip(b.iter()).map(|(gv, bv)| (gv.conj() * *bv).re).sum();
        Zip::from(&mut g).and(&b).for_each(|gv, bv| *gv = (*gv - *bv * s) / *n);
    }
    let contract = |d: &Array2<Complex<T>>| -> Vec<T> {
        psi.outer_iter()
            .zip(d.outer_iter())
            .map(|(pr, dr)| pr.iter().zip(dr.iter()).map(|(p, dv)| (p.conj() * *dv).re).sum())
            .collect()
    };
    AngleGradient { theta: contract(&jets.d_theta), phi: contract(&jets.d_phi), chi: contract(&jets.d_chi) }
}

/// `(Σ_{r<q} |C_rq|^p)^{1/p}`.
pub(crate) fn lp_value<T: Real>(gram: &Array2<Complex<T>>, p: T) -> T {
    let l = gram.ncols();
    let mut sum = T::zero();
    for q in 1..l {
        for r in 0..q {
            sum += gram[[r, q]].norm().powf(p);
        }
    }
    sum.powf(T::one() / p)
}

/// Weight matrix of the ℓp objective: `M_rq = F^{1−p} |C_rq|^{p−2} C_rq`.
pub(crate) fn lp_weights<T: Real>(gram: &Array2<Complex<T>>, p: T) -> (T, Array2<Complex<T>>) {
    let f = lp_value(gram, p);
    let l = gram.ncols();
    let mut m = Array2::from_elem((l, l), Complex::new(T::zero(), T::zero()));
    let scale = f.powf(T::one() - p);
    let two = T::lit(2.0);
    for q in 1..l {
        for r in 0..q {
            let c = gram[[r, q]];
            let a = c.norm();
            if a > T::zero() {
                let w = c * (scale * a.powf(p - two));
                m[[r, q]] = w;
                m[[q, r]] = w.conj();
            }
        }
    }
    (f, m)
}

fn check_p<T: Real>(p: T) -> Result<()> {
    if !(p >= T::lit(2.0)) || !p.is_finite() {
        return Err(Error::invalid(format!("smoothing exponent must be finite and >= 2, got {p}")));
    }
    Ok(())
}

/// ℓp smoothing of the coherence over all column pairs.
pub fn lp_objective<T: Real>(samples: &SamplingSet<T>, kind: ModeKind, degree: u32, p: T) -> Result<T> {
    check_p(p)?;
    let table = mode_table(kind, degree)?;
    let frame = Frame::new(&table, samples)?;
    Ok(lp_value(&frame.gram, p))
}

/// Analytic gradient of [`lp_objective`].
pub fn lp_gradient<T: Real>(samples: &SamplingSet<T>, kind: ModeKind, degree: u32, p: T) -> Result<AngleGradient<T>> {
    check_p(p)?;
    let table = mode_table(kind, degree)?;
    let frame = Frame::new(&table, samples)?;
    let jets = Jets::new(&table, samples);
    let (_, m) = lp_weights(&frame.gram, p);
    Ok(backprop(&frame, &jets, &m))
}
