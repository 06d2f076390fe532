//! Contour priors: loading external detector maps and building a prior from
//! decompositions at several scales.

use std::path::Path;

use rayon::prelude::*;

use crate::clustering::run_scalp;
use crate::error::{Result, ScalpError};
use crate::metrics::BoundaryMap;
use crate::types::{ContourMap, LabImage, LabelMap, ScalpParams};

/// Superpixel counts used when no scale set is given.
pub const DEFAULT_SCALES: [usize; 12] = [25, 50, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000];

/// Threshold applied to the averaged boundary map by default.
pub const DEFAULT_PRIOR_THRESHOLD: f64 = 0.5;

/// Loads an 8- or 16-bit grayscale contour map that must be `width x height`.
pub fn load_contour_map(path: impl AsRef<Path>, width: usize, height: usize) -> Result<ContourMap> {
    crate::io::read_contour_map(path, Some((width, height)))
}

/// Runs one decomposition per scale without any prior, in parallel. Results
/// come back in scale order.
pub fn decompose_scales(image: &LabImage, scales: &[usize], params: &ScalpParams) -> Result<Vec<LabelMap>> {
    if scales.is_empty() {
        return Err(ScalpError::param("scale set is empty"));
    }
    scales
        .par_iter()
        .map(|&k| {
            let p = ScalpParams {
                gamma: 0.0,
                ..params.clone().with_k(k)
            };
            run_scalp(image, &p, None)
        })
        .collect()
}

/// Mean of the boundary indicators of `decompositions`.
pub fn average_boundaries(decompositions: &[LabelMap]) -> Result<BoundaryMap> {
    let first = decompositions
        .first()
        .ok_or_else(|| ScalpError::param("no decompositions to average"))?;
    let mut sum = vec![0.0; first.len()];
    for d in decompositions {
        if d.dims() != first.dims() {
            return Err(ScalpError::dims(first.dims(), d.dims()));
        }
        for (s, v) in sum.iter_mut().zip(BoundaryMap::from_labels(d).values()) {
            *s += v;
        }
    }
    let n = decompositions.len() as f64;
    BoundaryMap::new(first.dims(), sum.into_iter().map(|s| s / n).collect())
}

/// Multi-scale boundary average of `image`, not thresholded.
pub fn multiscale_boundary_average(image: &LabImage, scales: &[usize], params: &ScalpParams) -> Result<BoundaryMap> {
    average_boundaries(&decompose_scales(image, scales, params)?)
}

/// Zeroes values below `threshold`.
pub fn threshold_boundaries(average: &BoundaryMap, threshold: f64) -> Result<ContourMap> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ScalpError::param(format!("threshold {threshold} outside [0, 1]")));
    }
    let d = average.dims();
    if d.is_volume() {
        return Err(ScalpError::InvalidData("contour priors are planar".into()));
    }
    let values = average
        .values()
        .iter()
        .map(|&v| if v < threshold { 0.0 } else { v })
        .collect();
    ContourMap::new(d.width, d.height, values)
}

/// Averaged and thresholded boundary map over decompositions at `scales`,
/// usable as a contour prior.
pub fn multiscale_boundary_prior(
    image: &LabImage,
    scales: &[usize],
    params: &ScalpParams,
    threshold: f64,
) -> Result<ContourMap> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(ScalpError::param(format!("threshold {threshold} outside [0, 1]")));
    }
    threshold_boundaries(&multiscale_boundary_average(image, scales, params)?, threshold)
}
