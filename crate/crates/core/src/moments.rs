//! Precomputed neighborhood moments for constant-time evaluation of the
//! neighborhood color distance.
//!
//! The distance between pixel `p` and a cluster color `F` is the weighted
//! sum over the `(2n+1)` window `P(p)` of `(F_q - F)^2 w(p, q)`, with
//! `w(p, q) ∝ exp(-|F_p - F_q|^2 / (2 sigma^2))` normalized to sum to one.
//! Expanding the square gives `f2(p) + F^2 - 2 F f1(p)` where
//! `f1 = Σ w F_q` and `f2 = Σ w F_q^2` depend only on the image.

use rayon::prelude::*;

use crate::error::{Result, ScalpError};
use crate::types::{Dims, LabImage};

/// Per-pixel weighted first and second moments of the neighborhood colors.
#[derive(Debug, Clone)]
pub struct MomentImages {
    dims: Dims,
    f1: Vec<[f64; 3]>,
    f2: Vec<[f64; 3]>,
    // f2 - f1^2 per channel, the weighted neighborhood variance.
    spread: Vec<[f64; 3]>,
    n: usize,
    sigma: f64,
}

/// Builds the moment images of a planar Lab image.
pub fn precompute_moments(image: &LabImage, n: usize, sigma: f64) -> Result<MomentImages> {
    MomentImages::compute(image.dims(), image.pixels(), n, sigma)
}

/// Neighborhood color distance between pixel `(x, y)` and a cluster color.
#[inline]
pub fn color_distance_o1(moments: &MomentImages, x: usize, y: usize, cluster_feature: &[f64; 3]) -> f64 {
    moments.distance_at(moments.dims.index(x, y, 0), cluster_feature)
}

impl MomentImages {
    /// Works on planar images and volumes alike; windows are `(2n+1)^3` when
    /// `dims.depth > 1`. Windows are truncated at the grid border and the
    /// weights renormalized over the in-bounds pixels.
    pub fn compute(dims: Dims, features: &[[f64; 3]], n: usize, sigma: f64) -> Result<Self> {
        dims.check_nonempty()?;
        if features.len() != dims.len() {
            return Err(ScalpError::dims(dims.len(), features.len()));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ScalpError::param(format!("sigma = {sigma} must be positive")));
        }
        let mut f1 = vec![[0.0; 3]; dims.len()];
        let mut f2 = vec![[0.0; 3]; dims.len()];
        if n == 0 {
            for (i, f) in features.iter().enumerate() {
                f1[i] = *f;
                f2[i] = f.map(|v| v * v);
            }
            return Ok(Self::assemble(dims, f1, f2, n, sigma));
        }

        let inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
        let nz = if dims.is_volume() { n } else { 0 };
        let w = dims.width;
        f1.par_chunks_mut(w)
            .zip(f2.par_chunks_mut(w))
            .enumerate()
            .for_each(|(row, (r1, r2))| {
                let y = row % dims.height;
                let z = row / dims.height;
                let y0 = y.saturating_sub(n);
                let y1 = (y + n).min(dims.height - 1);
                let z0 = z.saturating_sub(nz);
                let z1 = (z + nz).min(dims.depth - 1);
                for x in 0..w {
                    let fp = features[dims.index(x, y, z)];
                    let x0 = x.saturating_sub(n);
                    let x1 = (x + n).min(w - 1);
                    let mut z_sum = 0.0;
                    let mut s1 = [0.0; 3];
                    let mut s2 = [0.0; 3];
                    for qz in z0..=z1 {
                        for qy in y0..=y1 {
                            let base = dims.index(0, qy, qz);
                            for fq in &features[base + x0..=base + x1] {
                                let d2 = (fp[0] - fq[0]).powi(2) + (fp[1] - fq[1]).powi(2) + (fp[2] - fq[2]).powi(2);
                                let wt = (-d2 * inv_two_sigma2).exp();
                                z_sum += wt;
                                for c in 0..3 {
                                    s1[c] += wt * fq[c];
                                    s2[c] += wt * fq[c] * fq[c];
                                }
                            }
                        }
                    }
                    // z_sum >= 1: the center pixel has weight exp(0).
                    for c in 0..3 {
                        r1[x][c] = s1[c] / z_sum;
                        r2[x][c] = s2[c] / z_sum;
                    }
                }
            });
        Ok(Self::assemble(dims, f1, f2, n, sigma))
    }

    fn assemble(dims: Dims, f1: Vec<[f64; 3]>, f2: Vec<[f64; 3]>, n: usize, sigma: f64) -> Self {
        let spread = f1
            .iter()
            .zip(&f2)
            .map(|(a, b)| [b[0] - a[0] * a[0], b[1] - a[1] * a[1], b[2] - a[2] * a[2]])
            .collect();
        MomentImages {
            dims,
            f1,
            f2,
            spread,
            n,
            sigma,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn radius(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn f1(&self) -> &[[f64; 3]] {
        &self.f1
    }

    pub fn f2(&self) -> &[[f64; 3]] {
        &self.f2
    }

    /// Neighborhood color distance for the element at linear index `idx`.
    ///
    /// Evaluated as `Σ (f2 - f1^2) + (f1 - F)^2`, the same quantity as
    /// `f2 + F^2 - 2 F f1` with less cancellation; for `n = 0` it is exactly
    /// the plain squared color difference.
    #[inline]
    pub fn distance_at(&self, idx: usize, feature: &[f64; 3]) -> f64 {
        let m1 = &self.f1[idx];
        let s = &self.spread[idx];
        let mut d = 0.0;
        for c in 0..3 {
            let diff = m1[c] - feature[c];
            d += s[c] + diff * diff;
        }
        d
    }
}
