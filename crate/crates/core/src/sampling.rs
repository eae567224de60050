//! Sampling sets on the rotation group and baseline generators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;
use crate::specfun::Angle;

/// Where a sampling set came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Random,
    Spiral,
    Hammersley,
    Equiangular,
    OptimizedGd,
    OptimizedAlm,
    File,
}

/// `K` measurement angles `(theta, phi, chi)`.
///
/// `theta` lies in `[0, pi]`, `phi` and `chi` in `[0, 2 pi)`. Constructors
/// wrap their inputs into these domains (see [`SamplingSet::wrapped`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SamplingSet<T: Real> {
    theta: Vec<T>,
    phi: Vec<T>,
    chi: Vec<T>,
    provenance: Provenance,
}

impl<T: Real> SamplingSet<T> {
    /// Validates lengths and finiteness, then wraps into the canonical domains.
    pub fn new(theta: Vec<T>, phi: Vec<T>, chi: Vec<T>, provenance: Provenance) -> Result<Self> {
        Self::check_raw(&theta, &phi, &chi)?;
        let (theta, phi, chi) = wrap_triplets(theta, phi, chi, true);
        Ok(Self { theta, phi, chi, provenance })
    }

    /// Like [`SamplingSet::new`] but a `theta` reflection leaves `chi` alone.
    ///
    /// The reflection `(theta, phi, chi) -> (-theta, phi + pi, chi + pi)` is an
    /// identity of the rotation group; keeping `chi` fixed instead is only
    /// exact up to a row sign for the first-order probe basis, which is what
    /// frozen-polarization optimizers rely on.
    pub fn new_keep_chi(theta: Vec<T>, phi: Vec<T>, chi: Vec<T>, provenance: Provenance) -> Result<Self> {
        Self::check_raw(&theta, &phi, &chi)?;
        let (theta, phi, chi) = wrap_triplets(theta, phi, chi, false);
        Ok(Self { theta, phi, chi, provenance })
    }

    fn check_raw(theta: &[T], phi: &[T], chi: &[T]) -> Result<()> {
        if theta.is_empty() {
            return Err(Error::invalid("a sampling set needs at least one sample"));
        }
        if theta.len() != phi.len() || theta.len() != chi.len() {
            return Err(Error::dims(format!(
                "angle vectors have lengths {}, {}, {}",
                theta.len(),
                phi.len(),
                chi.len()
            )));
        }
        if theta.iter().chain(phi).chain(chi).any(|v| !v.is_finite()) {
            return Err(Error::domain("non-finite sampling angle"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub fn chi(&self) -> &[T] {
        &self.chi
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn sample(&self, i: usize) -> (T, T, T) {
        (self.theta[i], self.phi[i], self.chi[i])
    }

    /// Unit vector of sample `i` on the sphere.
    pub fn direction(&self, i: usize) -> [T; 3] {
        let (st, ct) = self.theta[i].sin_cos();
        let (sp, cp) = self.phi[i].sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>, Vec<T>) {
        (self.theta, self.phi, self.chi)
    }

    /// Repeats every sample twice in place (`p0, p0, p1, p1, ...`), the layout
    /// [`ChiPolicy::AlternatePair`] expects.
    pub fn duplicate_pairs(&self) -> Self {
        let twice = |v: &[T]| v.iter().flat_map(|&x| [x, x]).collect::<Vec<_>>();
        Self {
            theta: twice(&self.theta),
            phi: twice(&self.phi),
            chi: twice(&self.chi),
            provenance: self.provenance,
        }
    }

    /// Indices `(i, j)`, `i < j`, of samples with identical angles up to `tol`.
    pub fn repeated_samples(&self, tol: T) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j in 0..self.len() {
            for i in 0..j {
                let close = |a: T, b: T| (a - b).abs() <= tol;
                if close(self.theta[i], self.theta[j]) && close(self.phi[i], self.phi[j]) && close(self.chi[i], self.chi[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Canonical wrapping of raw angle vectors.
///
/// `phi` and `chi` are taken mod `2 pi`; `theta` is reflected into `[0, pi]`
/// (`theta < 0 -> -theta`, `theta > pi -> 2 pi - theta`, with `phi += pi`
/// and, when `shift_chi`, `chi += pi`).
pub fn wrap_triplets<T: Real>(
    mut theta: Vec<T>,
    mut phi: Vec<T>,
    mut chi: Vec<T>,
    shift_chi: bool,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let pi = T::PI();
    let tau = T::two_pi();
    for i in 0..theta.len() {
        let mut t = theta[i] % tau;
        if t < T::zero() {
            t += tau;
        }
        // t in [0, 2 pi): values above pi are reflections
        if t > pi {
            t = tau - t;
            phi[i] += pi;
            if shift_chi {
                chi[i] += pi;
            }
        }
        // theta_raw < 0 with |theta_raw| < pi lands in (pi, 2 pi) above and is
        // reflected exactly once there, matching theta -> -theta.
        theta[i] = t.max(T::zero()).min(pi);
        phi[i] = Angle(phi[i]).azimuthal().radians();
        chi[i] = Angle(chi[i]).azimuthal().radians();
    }
    (theta, phi, chi)
}

/// How polarization angles are assigned to a set of spatial points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "")]
pub enum ChiPolicy<T: Real> {
    /// `chi_i = 2 pi i / K`.
    EvenSpread,
    /// `chi = 0` on even rows and `pi/2` on odd rows; the set must hold
    /// each spatial point twice in consecutive rows.
    AlternatePair,
    Fixed(T),
    /// Leave `chi` untouched.
    Free,
}

impl<T: Real> fmt::Display for ChiPolicy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChiPolicy::EvenSpread => f.write_str("even_spread"),
            ChiPolicy::AlternatePair => f.write_str("alternate_pair"),
            ChiPolicy::Fixed(v) => write!(f, "fixed:{v}"),
            ChiPolicy::Free => f.write_str("free"),
        }
    }
}

impl<T: Real> FromStr for ChiPolicy<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        if let Some(v) = s.strip_prefix("fixed:") {
            let v: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad fixed chi value '{v}'")))?;
            return Ok(ChiPolicy::Fixed(T::lit(v)));
        }
        match s.as_str() {
            "even_spread" | "even" => Ok(ChiPolicy::EvenSpread),
            "alternate_pair" | "alternate" | "pair" => Ok(ChiPolicy::AlternatePair),
            "free" => Ok(ChiPolicy::Free),
            other => Err(Error::Parse(format!("unknown chi policy '{other}'"))),
        }
    }
}

/// Assigns polarization angles; spatial angles are unchanged.
pub fn apply_chi<T: Real>(samples: &SamplingSet<T>, policy: ChiPolicy<T>) -> Result<SamplingSet<T>> {
    let k = samples.len();
    let chi: Vec<T> = match policy {
        ChiPolicy::EvenSpread => (0..k)
            .map(|i| T::two_pi() * T::from_usize(i).unwrap() / T::from_usize(k).unwrap())
            .collect(),
        ChiPolicy::AlternatePair => {
            if k % 2 != 0 {
                return Err(Error::invalid(format!(
                    "alternate-pair polarization needs an even sample count, got {k}"
                )));
            }
            (0..k)
                .map(|i| if i % 2 == 0 { T::zero() } else { T::FRAC_PI_2() })
                .collect()
        }
        ChiPolicy::Fixed(v) => vec![Angle(v).azimuthal().radians(); k],
        ChiPolicy::Free => samples.chi.clone(),
    };
    Ok(SamplingSet {
        theta: samples.theta.clone(),
        phi: samples.phi.clone(),
        chi,
        provenance: samples.provenance,
    })
}

/// Generalized spiral points; `chi = 0`.
pub fn spiral<T: Real>(k: usize) -> Result<SamplingSet<T>> {
    if k < 2 {
        return Err(Error::invalid("the spiral needs at least two points"));
    }
    let one = T::one();
    let kt = T::from_usize(k).unwrap();
    let step = T::lit(3.6) / kt.sqrt();
    let tau = T::two_pi();
    let mut theta = Vec::with_capacity(k);
    let mut phi = Vec::with_capacity(k);
    let mut prev_phi = T::zero();
    for i in 0..k {
        let h = -one + T::lit(2.0) * T::from_usize(i).unwrap() / (kt - one);
        let h = h.max(-one).min(one);
        theta.push(h.acos());
        let p = if i == 0 || i == k - 1 {
            T::zero()
        } else {
            (prev_phi + step / (one - h * h).sqrt()) % tau
        };
        phi.push(p);
        prev_phi = p;
    }
    SamplingSet::new(theta, phi, vec![T::zero(); k], Provenance::Spiral)
}

fn radical_inverse_base2(mut i: u64) -> f64 {
    let mut inv = 0.0;
    let mut f = 0.5;
    while i > 0 {
        if i & 1 == 1 {
            inv += f;
        }
        i >>= 1;
        f *= 0.5;
    }
    inv
}

/// Hammersley points with the equal-area map `cos theta = 1 - 2 v`; `chi = 0`.
pub fn hammersley<T: Real>(k: usize) -> Result<SamplingSet<T>> {
    if k < 1 {
        return Err(Error::invalid("hammersley needs at least one point"));
    }
    let kt = T::from_usize(k).unwrap();
    let mut theta = Vec::with_capacity(k);
    let mut phi = Vec::with_capacity(k);
    for i in 0..k {
        let u = T::from_usize(i).unwrap() / kt;
        let v = T::lit(radical_inverse_base2(i as u64));
        phi.push(T::two_pi() * u);
        theta.push((T::one() - T::lit(2.0) * v).max(-T::one()).min(T::one()).acos());
    }
    SamplingSet::new(theta, phi, vec![T::zero(); k], Provenance::Hammersley)
}

/// Uniform points on the sphere with uniform polarization; deterministic in `seed`.
pub fn random_uniform<T: Real>(k: usize, seed: u64) -> Result<SamplingSet<T>> {
    let mut r = rng::stream(seed, &[rng::tag::SAMPLES]);
    random_uniform_with(k, &mut r)
}

pub(crate) fn random_uniform_with<T: Real, R: Rng + ?Sized>(k: usize, r: &mut R) -> Result<SamplingSet<T>> {
    if k < 1 {
        return Err(Error::invalid("random sampling needs at least one point"));
    }
    let mut theta = Vec::with_capacity(k);
    let mut phi = Vec::with_capacity(k);
    let mut chi = Vec::with_capacity(k);
    for _ in 0..k {
        let u: f64 = r.random();
        let a: f64 = r.random();
        let c: f64 = r.random();
        theta.push(T::lit((1.0 - 2.0 * u).clamp(-1.0, 1.0).acos()));
        phi.push(T::lit(std::f64::consts::TAU * a));
        chi.push(T::lit(std::f64::consts::TAU * c));
    }
    SamplingSet::new(theta, phi, chi, Provenance::Random)
}

/// Tensor grid with `theta` in `0..=180` and `phi` in `0..360` degrees; `chi = 0`.
pub fn equiangular<T: Real>(step_deg: u32) -> Result<SamplingSet<T>> {
    if step_deg == 0 || 180 % step_deg != 0 {
        return Err(Error::invalid(format!("step {step_deg} deg does not divide 180")));
    }
    let n_theta = 180 / step_deg + 1;
    let n_phi = 360 / step_deg;
    let mut theta = Vec::new();
    let mut phi = Vec::new();
    for it in 0..n_theta {
        for ip in 0..n_phi {
            theta.push(T::from_u32(it * step_deg).unwrap().to_radians());
            phi.push(T::from_u32(ip * step_deg).unwrap().to_radians());
        }
    }
    let k = theta.len();
    SamplingSet::new(theta, phi, vec![T::zero(); k], Provenance::Equiangular)
}
