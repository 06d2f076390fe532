//! sRGB (D65) <-> CIELab conversion.

use image::RgbImage;

use crate::error::{Result, ScalpError};
use crate::types::LabImage;

// sRGB primaries, D65 white.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];
const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const DELTA: f64 = 6.0 / 29.0;

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn linear_to_srgb(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

/// Converts one 8-bit sRGB triple to CIELab.
pub fn rgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(|c| srgb_to_linear(c as f64 / 255.0));
    let mut f = [0.0; 3];
    for (i, row) in RGB_TO_XYZ.iter().enumerate() {
        let v = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
        f[i] = lab_f(v / WHITE[i]);
    }
    let l = (116.0 * f[1] - 16.0).clamp(0.0, 100.0);
    let a = (500.0 * (f[0] - f[1])).clamp(-128.0, 128.0);
    let b = (200.0 * (f[1] - f[2])).clamp(-128.0, 128.0);
    [l, a, b]
}

/// Converts a CIELab color back to 8-bit sRGB, clamping out-of-gamut values.
pub fn lab_pixel_to_rgb(lab: [f64; 3]) -> [u8; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let xyz = [
        WHITE[0] * lab_f_inv(fx),
        WHITE[1] * lab_f_inv(fy),
        WHITE[2] * lab_f_inv(fz),
    ];
    let mut out = [0u8; 3];
    for (i, row) in XYZ_TO_RGB.iter().enumerate() {
        let lin = row[0] * xyz[0] + row[1] * xyz[1] + row[2] * xyz[2];
        let s = linear_to_srgb(lin.clamp(0.0, 1.0));
        out[i] = (s * 255.0).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Converts an 8-bit sRGB image to CIELab.
pub fn rgb_to_lab(image: &RgbImage) -> LabImage {
    let (w, h) = image.dimensions();
    let data = image.pixels().map(|p| rgb_pixel_to_lab(p.0)).collect();
    LabImage::new(w as usize, h as usize, data).expect("sRGB gamut maps inside the Lab bounds")
}

/// Converts interleaved 8-bit sRGB bytes (3 per pixel, row-major) to CIELab.
pub fn rgb_bytes_to_lab(width: usize, height: usize, bytes: &[u8]) -> Result<LabImage> {
    if bytes.len() != 3 * width * height {
        return Err(ScalpError::dims(3 * width * height, bytes.len()));
    }
    let data = bytes
        .chunks_exact(3)
        .map(|c| rgb_pixel_to_lab([c[0], c[1], c[2]]))
        .collect();
    LabImage::new(width, height, data)
}

pub fn lab_to_rgb(image: &LabImage) -> RgbImage {
    let mut out = RgbImage::new(image.width() as u32, image.height() as u32);
    for (dst, &lab) in out.pixels_mut().zip(image.pixels()) {
        dst.0 = lab_pixel_to_rgb(lab);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent route: CIE constants epsilon/kappa instead of the 6/29 form,
    // XYZ normalized by the white point's own RGB projection.
    fn oracle_lab(rgb: [u8; 3]) -> [f64; 3] {
        let eps = 216.0 / 24389.0;
        let kappa = 24389.0 / 27.0;
        let lin: Vec<f64> = rgb
            .iter()
            .map(|&c| {
                let v = c as f64 / 255.0;
                if v > 0.04045 {
                    ((v + 0.055) / 1.055).powf(2.4)
                } else {
                    v / 12.92
                }
            })
            .collect();
        let x = 0.4124564 * lin[0] + 0.3575761 * lin[1] + 0.1804375 * lin[2];
        let y = 0.2126729 * lin[0] + 0.7151522 * lin[1] + 0.0721750 * lin[2];
        let z = 0.0193339 * lin[0] + 0.1191920 * lin[1] + 0.9503041 * lin[2];
        let f = |t: f64| {
            if t > eps {
                t.powf(1.0 / 3.0)
            } else {
                (kappa * t + 16.0) / 116.0
            }
        };
        let (fx, fy, fz) = (f(x / 0.95047), f(y), f(z / 1.08883));
        [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
    }

    #[test]
    fn black_maps_to_origin() {
        let lab = rgb_pixel_to_lab([0, 0, 0]);
        for c in lab {
            assert!(c.abs() < 1e-3, "{lab:?}");
        }
    }

    #[test]
    fn white_maps_to_reference_white() {
        let lab = rgb_pixel_to_lab([255, 255, 255]);
        assert!((lab[0] - 100.0).abs() < 1e-2, "{lab:?}");
        assert!(lab[1].abs() < 1e-2 && lab[2].abs() < 1e-2, "{lab:?}");
    }

    #[test]
    fn red_matches_independent_converter() {
        let lab = rgb_pixel_to_lab([255, 0, 0]);
        let expected = oracle_lab([255, 0, 0]);
        for i in 0..3 {
            assert!((lab[i] - expected[i]).abs() < 1e-6, "{lab:?} vs {expected:?}");
        }
        // Published value for sRGB red under D65, loose sanity bound.
        assert!((lab[0] - 53.24).abs() < 0.05 && (lab[1] - 80.09).abs() < 0.05);
    }

    #[test]
    fn matches_oracle_on_lattice() {
        for r in (0..=255).step_by(15) {
            for g in (0..=255).step_by(15) {
                for b in (0..=255).step_by(15) {
                    let rgb = [r as u8, g as u8, b as u8];
                    let lab = rgb_pixel_to_lab(rgb);
                    let expected = oracle_lab(rgb);
                    // L is clamped to 100; the Y row of the matrix sums to 1.0000001.
                    for i in 0..3 {
                        assert!((lab[i] - expected[i]).abs() < 1e-4, "{rgb:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn round_trip_within_one_level() {
        for r in (0..=256).step_by(16) {
            for g in (0..=256).step_by(16) {
                for b in (0..=256).step_by(16) {
                    let rgb = [r.min(255) as u8, g.min(255) as u8, b.min(255) as u8];
                    let back = lab_pixel_to_rgb(rgb_pixel_to_lab(rgb));
                    for i in 0..3 {
                        assert!((back[i] as i32 - rgb[i] as i32).abs() <= 1, "{rgb:?} -> {back:?}");
                    }
                }
            }
        }
    }
}
