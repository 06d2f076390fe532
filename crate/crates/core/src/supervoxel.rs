//! Supervoxel decomposition of volumes and the raw volume file format.
//!
//! A volume on disk is a JSON header plus a raw little-endian sample file:
//!
//! ```json
//! {"width": 64, "height": 64, "depth": 32, "channels": 1,
//!  "dtype": "f32", "data_file": "brain.raw"}
//! ```
//!
//! `dtype` is one of `u8`, `u16`, `u32`, `f32`, `f64`. Samples are stored
//! x fastest, then y, then z, with channels interleaved per voxel.
//! `data_file` is resolved relative to the header's directory. Label volumes
//! use `dtype` `u32` and one channel.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::run_scalp_features;
use crate::error::{Result, ScalpError};
use crate::metrics;
use crate::types::{Dims, LabelMap, ScalpParams};

/// Voxel intensities with one or three channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: Dims,
    channels: usize,
    data: Vec<f64>,
}

impl Volume {
    pub fn new(width: usize, height: usize, depth: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        let dims = Dims::new_3d(width, height, depth);
        dims.check_nonempty()?;
        if channels != 1 && channels != 3 {
            return Err(ScalpError::InvalidData(format!("{channels} channels; expected 1 or 3")));
        }
        if data.len() != dims.len() * channels {
            return Err(ScalpError::dims(dims.len() * channels, data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(ScalpError::InvalidData("volume holds non-finite intensities".into()));
        }
        Ok(Volume { dims, channels, data })
    }

    /// Single-channel volume from a function of voxel coordinates.
    pub fn from_fn(
        width: usize,
        height: usize,
        depth: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * depth);
        for z in 0..depth {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(x, y, z));
                }
            }
        }
        Self::new(width, height, depth, 1, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Per-voxel feature vectors. A single channel fills the first slot.
    pub fn features(&self) -> Vec<[f64; 3]> {
        match self.channels {
            1 => self.data.iter().map(|&v| [v, 0.0, 0.0]).collect(),
            _ => self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect(),
        }
    }
}

/// Decomposes a volume into about `params.k` supervoxels. `contour`, when
/// given, must be a single-channel volume of the same size with values in
/// `[0, 1]`.
pub fn run_scalp_3d(volume: &Volume, params: &ScalpParams, contour: Option<&Volume>) -> Result<LabelMap> {
    if let Some(c) = contour {
        if c.dims != volume.dims || c.channels != 1 {
            return Err(ScalpError::dims(
                format!("single-channel {}", volume.dims),
                format!("{}-channel {}", c.channels, c.dims),
            ));
        }
        if c.data.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(ScalpError::InvalidData(
                "contour volume values must lie in [0, 1]".into(),
            ));
        }
    }
    run_scalp_features(
        volume.dims,
        &volume.features(),
        params,
        contour.map(|c| c.data.as_slice()),
    )
}

/// Achievable segmentation accuracy over voxels.
pub fn asa_3d(s: &LabelMap, t: &LabelMap) -> Result<f64> {
    metrics::asa(s, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleType {
    U8,
    U16,
    U32,
    F32,
    F64,
}

impl SampleType {
    fn size(self) -> usize {
        match self {
            SampleType::U8 => 1,
            SampleType::U16 => 2,
            SampleType::U32 | SampleType::F32 => 4,
            SampleType::F64 => 8,
        }
    }

    fn decode(self, b: &[u8]) -> f64 {
        match self {
            SampleType::U8 => b[0] as f64,
            SampleType::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            SampleType::U32 => u32::from_le_bytes(b.try_into().expect("4 bytes")) as f64,
            SampleType::F32 => f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64,
            SampleType::F64 => f64::from_le_bytes(b.try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub width: usize,
    pub height: usize,
    pub depth: usize,
    #[serde(default = "one")]
    pub channels: usize,
    pub dtype: SampleType,
    pub data_file: PathBuf,
}

fn one() -> usize {
    1
}

fn read_header(path: &Path) -> Result<(VolumeHeader, Vec<u8>)> {
    let text = std::fs::read_to_string(path).map_err(|e| ScalpError::io(path, e))?;
    let header: VolumeHeader =
        serde_json::from_str(&text).map_err(|e| ScalpError::Format(format!("{}: {e}", path.display())))?;
    let raw_path = path.parent().unwrap_or(Path::new(".")).join(&header.data_file);
    let raw = std::fs::read(&raw_path).map_err(|e| ScalpError::io(&raw_path, e))?;
    let expected = header.width * header.height * header.depth * header.channels * header.dtype.size();
    if raw.len() != expected {
        return Err(ScalpError::Format(format!(
            "{}: {} bytes, header implies {expected}",
            raw_path.display(),
            raw.len()
        )));
    }
    Ok((header, raw))
}

/// Reads a volume from its JSON header.
pub fn read_volume(header_path: impl AsRef<Path>) -> Result<Volume> {
    let (h, raw) = read_header(header_path.as_ref())?;
    let data = raw.chunks_exact(h.dtype.size()).map(|b| h.dtype.decode(b)).collect();
    Volume::new(h.width, h.height, h.depth, h.channels, data)
}

/// Reads a single-channel integer label volume.
pub fn read_label_volume(header_path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = header_path.as_ref();
    let (h, raw) = read_header(path)?;
    if h.channels != 1 || !matches!(h.dtype, SampleType::U8 | SampleType::U16 | SampleType::U32) {
        return Err(ScalpError::Format(format!(
            "{}: label volumes need one integer channel",
            path.display()
        )));
    }
    let labels = raw
        .chunks_exact(h.dtype.size())
        .map(|b| h.dtype.decode(b) as u32)
        .collect();
    LabelMap::new_3d(h.width, h.height, h.depth, labels)
}

fn write_with_header(header_path: &Path, header: &VolumeHeader, raw: &[u8]) -> Result<()> {
    let raw_path = header_path.parent().unwrap_or(Path::new(".")).join(&header.data_file);
    std::fs::write(&raw_path, raw).map_err(|e| ScalpError::io(&raw_path, e))?;
    let text = serde_json::to_string_pretty(header).map_err(|e| ScalpError::Format(e.to_string()))?;
    std::fs::write(header_path, text + "\n").map_err(|e| ScalpError::io(header_path, e))
}

/// Raw file name paired with a header: `x.json` stores samples in `x.raw`.
fn sibling_raw(header_path: &Path) -> PathBuf {
    let stem = header_path
        .file_stem()
        .map(|s| s.to_os_string())
        .unwrap_or_else(|| "volume".into());
    let mut name = stem;
    name.push(".raw");
    PathBuf::from(name)
}

/// Writes a label volume as `u32` samples next to `header_path`.
pub fn write_label_volume(header_path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    let path = header_path.as_ref();
    let d = labels.dims();
    let header = VolumeHeader {
        width: d.width,
        height: d.height,
        depth: d.depth,
        channels: 1,
        dtype: SampleType::U32,
        data_file: sibling_raw(path),
    };
    let raw: Vec<u8> = labels.labels().iter().flat_map(|l| l.to_le_bytes()).collect();
    write_with_header(path, &header, &raw)
}

/// Writes a volume as `f64` samples next to `header_path`.
pub fn write_volume(header_path: impl AsRef<Path>, volume: &Volume) -> Result<()> {
    let path = header_path.as_ref();
    let header = VolumeHeader {
        width: volume.dims.width,
        height: volume.dims.height,
        depth: volume.dims.depth,
        channels: volume.channels,
        dtype: SampleType::F64,
        data_file: sibling_raw(path),
    };
    let raw: Vec<u8> = volume.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_with_header(path, &header, &raw)
}
