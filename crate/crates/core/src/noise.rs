use image::RgbImage;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, ScalpError};

/// Adds white Gaussian noise of the given variance (on the 0..255 scale) to
/// every channel independently, rounding and clamping back to 8 bits.
pub fn add_gaussian_noise(image: &RgbImage, variance: f64, seed: u64) -> Result<RgbImage> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(ScalpError::param(format!(
            "noise variance must be finite and nonnegative, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(image.clone());
    }
    let normal = Normal::new(0.0, variance.sqrt()).expect("positive standard deviation");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = image.clone();
    for px in out.pixels_mut() {
        for c in px.0.iter_mut() {
            let v = *c as f64 + normal.sample(&mut rng);
            *c = v.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn zero_variance_is_identity() {
        let img = RgbImage::from_fn(5, 4, |x, y| Rgb([x as u8 * 40, y as u8 * 50, 7]));
        assert_eq!(add_gaussian_noise(&img, 0.0, 3).unwrap(), img);
    }

    #[test]
    fn negative_variance_rejected() {
        let img = RgbImage::new(2, 2);
        assert!(add_gaussian_noise(&img, -1.0, 0).is_err());
    }

    #[test]
    fn same_seed_same_output() {
        let img = RgbImage::from_pixel(32, 32, Rgb([100, 150, 200]));
        let a = add_gaussian_noise(&img, 20.0, 11).unwrap();
        let b = add_gaussian_noise(&img, 20.0, 11).unwrap();
        let c = add_gaussian_noise(&img, 20.0, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_variance_matches_requested() {
        // Mid-gray keeps every sample far from the clamp bounds.
        let img = RgbImage::from_pixel(256, 256, Rgb([128, 128, 128]));
        let out = add_gaussian_noise(&img, 20.0, 5).unwrap();
        let diffs: Vec<f64> = out
            .as_raw()
            .iter()
            .zip(img.as_raw())
            .map(|(&o, &i)| o as f64 - i as f64)
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var - 20.0).abs() < 2.0, "sample variance {var}");
    }
}
