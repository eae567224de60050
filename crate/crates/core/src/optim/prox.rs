//! Euclidean projection onto the complex ℓ1 ball and the ℓ∞ proximal map.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Projection of `v` onto `{w : Σ|w_j| ≤ radius}`.
///
/// Magnitudes are soft-thresholded by the water-filling level found from
/// the sorted magnitudes; phases are kept.
pub fn project_l1<T: Real>(v: &[Complex<T>], radius: T) -> Result<Vec<Complex<T>>> {
    if !(radius > T::zero()) {
        return Err(Error::invalid(format!("l1 radius must be positive, got {radius}")));
    }
    let total: T = v.iter().map(|z| z.norm()).sum();
    if total <= radius {
        return Ok(v.to_vec());
    }
    let mut mags: Vec<T> = v.iter().map(|z| z.norm()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = T::zero();
    let mut level = T::zero();
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / T::from_usize(j + 1).unwrap();
        if m > candidate {
            level = candidate;
        } else {
            break;
        }
    }
    Ok(v.iter().map(|z| crate::recovery::shrink(*z, level)).collect())
}

/// Proximal map of `scale·‖·‖∞`: `v − scale·project_l1(v / scale, 1)`.
pub fn prox_linf<T: Real>(v: &[Complex<T>], scale: T) -> Result<Vec<Complex<T>>> {
    if !(scale > T::zero()) {
        return Err(Error::invalid(format!("prox scale must be positive, got {scale}")));
    }
    let scaled: Vec<_> = v.iter().map(|z| *z / scale).collect();
    let p = project_l1(&scaled, T::one())?;
    Ok(v.iter().zip(p).map(|(a, b)| *a - b * scale).collect())
}
