//! File formats: RGB input (PNG, binary PPM), grayscale maps (8/16-bit PNG or
//! PGM), label maps (16-bit binary PGM, CSV) and boundary overlays (PNG).
//!
//! Label PGM layout: header `P5\n<width> <height>\n65535\n` followed by one
//! big-endian `u16` per pixel, row-major. Label CSV: one line per row,
//! comma-separated decimal labels, `\n` line endings.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use image::{DynamicImage, Rgb, RgbImage};

use crate::connectivity::boundary_mask;
use crate::error::{Result, ScalpError};
use crate::types::{ContourMap, LabelMap};

fn open_image(path: &Path) -> Result<DynamicImage> {
    image::ImageReader::open(path)
        .map_err(|e| ScalpError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| ScalpError::io(path, e))?
        .decode()
        .map_err(|source| ScalpError::Image {
            path: path.to_path_buf(),
            source,
        })
}

/// Reads a PNG or PPM image as 8-bit RGB. Alpha is dropped.
pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    Ok(open_image(path.as_ref())?.to_rgb8())
}

/// Reads a grayscale PNG/PGM and scales it to `[0, 1]` by the maximum of its
/// bit depth (255 or 65535). Color images are converted to luma first.
pub fn read_gray_normalized(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    let img = open_image(path.as_ref())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        other => other
            .to_luma16()
            .into_raw()
            .into_iter()
            .map(|v| v as f64 / 65535.0)
            .collect(),
    };
    Ok((w, h, values))
}

/// Loads a contour map, checking its size against `expected` when given.
pub fn read_contour_map(path: impl AsRef<Path>, expected: Option<(usize, usize)>) -> Result<ContourMap> {
    let (w, h, values) = read_gray_normalized(path.as_ref())?;
    if let Some((ew, eh)) = expected {
        if (ew, eh) != (w, h) {
            return Err(ScalpError::dims(format!("{ew}x{eh}"), format!("{w}x{h}")));
        }
    }
    ContourMap::new(w, h, values)
}

/// Reads a label map: `.csv` files as CSV, anything else as a grayscale image
/// whose raw sample values are the labels.
pub fn read_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    if has_extension(path, "csv") {
        return read_label_csv(path);
    }
    let img = open_image(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let labels = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(u32::from).collect(),
        _ => {
            return Err(ScalpError::Format(format!(
                "{}: label maps must be single-channel",
                path.display()
            )))
        }
    };
    LabelMap::new(w, h, labels)
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

pub fn read_label_csv(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| ScalpError::io(path, e))?;
    let mut labels = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (row, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ScalpError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = labels.len();
        for cell in line.split(',') {
            let v: u32 = cell.trim().parse().map_err(|_| {
                ScalpError::Format(format!("{}: bad label {cell:?} on line {}", path.display(), row + 1))
            })?;
            labels.push(v);
        }
        let n = labels.len() - before;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(ScalpError::Format(format!(
                    "{}: line {} has {n} cells, expected {w}",
                    path.display(),
                    row + 1
                )))
            }
            _ => {}
        }
        height += 1;
    }
    LabelMap::new(width.unwrap_or(0), height, labels)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| ScalpError::io(path, e))?))
}

/// Encodes 16-bit samples as a binary PGM.
pub fn encode_pgm16(width: usize, height: usize, samples: impl Iterator<Item = u16>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for s in samples {
        out.extend_from_slice(&s.to_be_bytes());
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(bytes).map_err(|e| ScalpError::io(path, e))?;
    f.flush().map_err(|e| ScalpError::io(path, e))
}

pub fn write_label_pgm(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    if labels.depth() != 1 {
        return Err(ScalpError::Format("PGM label output is planar only".into()));
    }
    if labels.label_bound() > 65536 {
        return Err(ScalpError::Format(format!(
            "{} labels do not fit in 16-bit PGM",
            labels.label_bound()
        )));
    }
    let bytes = encode_pgm16(
        labels.width(),
        labels.height(),
        labels.labels().iter().map(|&l| l as u16),
    );
    write_bytes(path.as_ref(), &bytes)
}

pub fn write_label_csv(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    let path = path.as_ref();
    let mut f = create(path)?;
    let w = labels.width();
    for row in labels.labels().chunks(w) {
        let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        writeln!(f, "{}", line.join(",")).map_err(|e| ScalpError::io(path, e))?;
    }
    f.flush().map_err(|e| ScalpError::io(path, e))
}

/// Writes a label map, choosing CSV for `.csv` paths and 16-bit PGM otherwise.
pub fn write_label_map(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    let path = path.as_ref();
    if has_extension(path, "csv") {
        write_label_csv(path, labels)
    } else {
        write_label_pgm(path, labels)
    }
}

/// Writes values in `[0, 1]` as a 16-bit PGM (`round(v * 65535)`).
pub fn write_unit_pgm(path: impl AsRef<Path>, width: usize, height: usize, values: &[f64]) -> Result<()> {
    let bytes = encode_pgm16(
        width,
        height,
        values.iter().map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16),
    );
    write_bytes(path.as_ref(), &bytes)
}

pub fn write_contour_pgm(path: impl AsRef<Path>, contour: &ContourMap) -> Result<()> {
    write_unit_pgm(path, contour.width(), contour.height(), contour.values())
}

/// Draws superpixel boundaries in `color` over `image`.
pub fn boundary_overlay(image: &RgbImage, labels: &LabelMap, color: [u8; 3]) -> RgbImage {
    let mask = boundary_mask(labels.dims(), labels.labels());
    let mut out = image.clone();
    for (px, &b) in out.pixels_mut().zip(&mask) {
        if b {
            *px = Rgb(color);
        }
    }
    out
}

pub fn write_png(path: impl AsRef<Path>, image: &RgbImage) -> Result<()> {
    let path = path.as_ref();
    image
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| ScalpError::Image {
            path: path.to_path_buf(),
            source,
        })
}
