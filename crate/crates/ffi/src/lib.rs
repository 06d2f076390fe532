//! C ABI for the `scalp` library.
//!
//! Every function returns a [`ScalpStatus`] (or a plain value for accessors)
//! and never unwinds across the boundary. On failure, a message describing
//! the last error of the calling thread is available through
//! [`scalp_last_error_message`]. Label maps are returned as opaque
//! [`ScalpLabels`] handles released with [`scalp_labels_free`].
//!
//! Images are row-major. RGB input is interleaved 8-bit, 3 bytes per pixel.
//! Volumes are x fastest, then y, then z, channels interleaved.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use scalp::hard_constraint::{run_scalp_hc, ConstraintMode, HierarchicalMap};
use scalp::metrics;
use scalp::supervoxel::{run_scalp_3d, Volume};
use scalp::{ContourMap, LabelMap, PathCache, ScalpError, ScalpParams};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    DimensionMismatch = 3,
    InvalidData = 4,
    Io = 5,
    Panic = 6,
}

/// Path distance reuse strategy.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalpPathCache {
    Off = 0,
    Exact = 1,
    Approximate = 2,
}

/// Decomposition parameters. Obtain defaults from [`scalp_default_options`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ScalpOptions {
    pub k: u32,
    pub m2_scale: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub n: u32,
    pub sigma: f64,
    pub iterations: u32,
    pub seed: u64,
    /// One of the [`ScalpPathCache`] values.
    pub path_cache: u32,
}

fn params_of(o: &ScalpOptions) -> Result<ScalpParams, ScalpStatus> {
    let path_cache = match o.path_cache {
        x if x == ScalpPathCache::Off as u32 => PathCache::Off,
        x if x == ScalpPathCache::Exact as u32 => PathCache::Exact,
        x if x == ScalpPathCache::Approximate as u32 => PathCache::Approximate,
        x => return Err(fail_status(&format!("unknown path cache mode {x}"))),
    };
    Ok(ScalpParams {
        k: o.k as usize,
        m2_scale: o.m2_scale,
        lambda: o.lambda,
        gamma: o.gamma,
        n: o.n as usize,
        sigma: o.sigma,
        iterations: o.iterations as usize,
        rng_seed: o.seed,
        path_cache,
    })
}

/// Opaque label map.
pub struct ScalpLabels {
    map: LabelMap,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &ScalpError) -> ScalpStatus {
    match e {
        ScalpError::InvalidParameter(_) => ScalpStatus::InvalidParameter,
        ScalpError::DimensionMismatch { .. } => ScalpStatus::DimensionMismatch,
        ScalpError::InvalidData(_) | ScalpError::Format(_) => ScalpStatus::InvalidData,
        ScalpError::Io { .. } | ScalpError::Image { .. } => ScalpStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), ScalpStatus>) -> ScalpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ScalpStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            ScalpStatus::Panic
        }
    }
}

fn fail(e: ScalpError) -> ScalpStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> ScalpStatus {
    set_error(format!("{what} is null"));
    ScalpStatus::NullPointer
}

fn area(width: u32, height: u32, depth: u32) -> Result<usize, ScalpStatus> {
    (width as usize)
        .checked_mul(height as usize)
        .and_then(|v| v.checked_mul(depth as usize))
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            set_error(format!("invalid size {width}x{height}x{depth}"));
            ScalpStatus::InvalidParameter
        })
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], ScalpStatus> {
    if ptr.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(ptr, len))
    }
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn opt_slice<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    (!ptr.is_null()).then(|| std::slice::from_raw_parts(ptr, len))
}

fn lab_from_rgb(rgb: &[u8], width: u32, height: u32) -> Result<scalp::LabImage, ScalpStatus> {
    scalp::color::rgb_bytes_to_lab(width as usize, height as usize, rgb).map_err(fail)
}

fn fail_status(msg: &str) -> ScalpStatus {
    set_error(msg);
    ScalpStatus::InvalidParameter
}

fn emit(map: LabelMap, out: *mut *mut ScalpLabels) {
    // SAFETY: callers checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(ScalpLabels { map })) };
}

/// Default parameters.
#[no_mangle]
pub extern "C" fn scalp_default_options() -> ScalpOptions {
    let p = ScalpParams::default();
    ScalpOptions {
        k: p.k as u32,
        m2_scale: p.m2_scale,
        lambda: p.lambda,
        gamma: p.gamma,
        n: p.n as u32,
        sigma: p.sigma,
        iterations: p.iterations as u32,
        seed: p.rng_seed,
        path_cache: ScalpPathCache::Off as u32,
    }
}

/// Decomposes an RGB image. `contour` may be null or point to
/// `width * height` values in `[0, 1]`. On success `*out` receives a handle.
///
/// # Safety
/// `rgb` must hold `3 * width * height` bytes; `opts` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn scalp_decompose_rgb(
    rgb: *const u8,
    width: u32,
    height: u32,
    opts: *const ScalpOptions,
    contour: *const f64,
    out: *mut *mut ScalpLabels,
) -> ScalpStatus {
    guard(|| {
        if opts.is_null() {
            return Err(null("opts"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = area(width, height, 1)?;
        let rgb = slice(rgb, n.checked_mul(3).ok_or_else(|| fail_status("image size"))?, "rgb")?;
        let lab = lab_from_rgb(rgb, width, height)?;
        let prior = match opt_slice(contour, n) {
            Some(c) => Some(ContourMap::new(width as usize, height as usize, c.to_vec()).map_err(fail)?),
            None => None,
        };
        let params = params_of(&*opts)?;
        let map = scalp::clustering::run_scalp(&lab, &params, prior.as_ref()).map_err(fail)?;
        emit(map, out);
        Ok(())
    })
}

/// Region-constrained decomposition. `ucm` holds `width * height` contour
/// probabilities in `[0, 1]`; `tau` thresholds it and regions smaller than
/// `t` times the mean superpixel size are merged. With `init_only`, regions
/// only seed the clusters.
///
/// # Safety
/// As [`scalp_decompose_rgb`]; `ucm` must hold `width * height` values.
#[no_mangle]
pub unsafe extern "C" fn scalp_decompose_hc_rgb(
    rgb: *const u8,
    width: u32,
    height: u32,
    opts: *const ScalpOptions,
    contour: *const f64,
    ucm: *const f64,
    tau: f64,
    t: f64,
    init_only: bool,
    out: *mut *mut ScalpLabels,
) -> ScalpStatus {
    guard(|| {
        if opts.is_null() {
            return Err(null("opts"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = area(width, height, 1)?;
        let rgb = slice(rgb, n.checked_mul(3).ok_or_else(|| fail_status("image size"))?, "rgb")?;
        let ucm = slice(ucm, n, "ucm")?;
        let lab = lab_from_rgb(rgb, width, height)?;
        let prior = match opt_slice(contour, n) {
            Some(c) => Some(ContourMap::new(width as usize, height as usize, c.to_vec()).map_err(fail)?),
            None => None,
        };
        let ucm = HierarchicalMap::new(width as usize, height as usize, ucm.to_vec()).map_err(fail)?;
        let mode = if init_only {
            ConstraintMode::InitOnly
        } else {
            ConstraintMode::Hard
        };
        let params = params_of(&*opts)?;
        let res = run_scalp_hc(&lab, &params, prior.as_ref(), &ucm, tau, t, mode).map_err(fail)?;
        emit(res.labels, out);
        Ok(())
    })
}

/// Decomposes a volume with 1 or 3 channels into supervoxels. `contour`
/// may be null or hold one value in `[0, 1]` per voxel.
///
/// # Safety
/// `data` must hold `channels * width * height * depth` values.
#[no_mangle]
pub unsafe extern "C" fn scalp_decompose_volume(
    data: *const f64,
    width: u32,
    height: u32,
    depth: u32,
    channels: u32,
    opts: *const ScalpOptions,
    contour: *const f64,
    out: *mut *mut ScalpLabels,
) -> ScalpStatus {
    guard(|| {
        if opts.is_null() {
            return Err(null("opts"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let n = area(width, height, depth)?;
        let total = n
            .checked_mul(channels as usize)
            .ok_or_else(|| fail_status("volume size"))?;
        let data = slice(data, total, "data")?;
        let (w, h, d) = (width as usize, height as usize, depth as usize);
        let vol = Volume::new(w, h, d, channels as usize, data.to_vec()).map_err(fail)?;
        let prior = match opt_slice(contour, n) {
            Some(c) => Some(Volume::new(w, h, d, 1, c.to_vec()).map_err(fail)?),
            None => None,
        };
        let params = params_of(&*opts)?;
        let map = run_scalp_3d(&vol, &params, prior.as_ref()).map_err(fail)?;
        emit(map, out);
        Ok(())
    })
}

fn with_labels<T: Default>(labels: *const ScalpLabels, f: impl FnOnce(&LabelMap) -> T) -> T {
    if labels.is_null() {
        return T::default();
    }
    // SAFETY: non-null handles come from this library.
    let l = unsafe { &*labels };
    catch_unwind(AssertUnwindSafe(|| f(&l.map))).unwrap_or_default()
}

/// Width of the label map; 0 for a null handle.
///
/// # Safety
/// `labels` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_width(labels: *const ScalpLabels) -> u32 {
    with_labels(labels, |m| m.width() as u32)
}

/// # Safety
/// `labels` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_height(labels: *const ScalpLabels) -> u32 {
    with_labels(labels, |m| m.height() as u32)
}

/// 1 for planar maps.
///
/// # Safety
/// `labels` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_depth(labels: *const ScalpLabels) -> u32 {
    with_labels(labels, |m| m.depth() as u32)
}

/// Number of label entries (pixels or voxels).
///
/// # Safety
/// `labels` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_len(labels: *const ScalpLabels) -> usize {
    with_labels(labels, |m| m.len())
}

/// Number of distinct superpixels. Labels run from 0 to this count minus one.
///
/// # Safety
/// `labels` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_count(labels: *const ScalpLabels) -> u32 {
    with_labels(labels, |m| m.label_count() as u32)
}

/// Borrowed pointer to the labels, valid until the handle is freed.
///
/// # Safety
/// `labels` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_data(labels: *const ScalpLabels) -> *const u32 {
    if labels.is_null() {
        return std::ptr::null();
    }
    (*labels).map.labels().as_ptr()
}

/// Copies the labels into `dst`, which must have room for `len` entries
/// with `len` equal to [`scalp_labels_len`].
///
/// # Safety
/// `dst` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_copy(labels: *const ScalpLabels, dst: *mut u32, len: usize) -> ScalpStatus {
    guard(|| {
        if labels.is_null() {
            return Err(null("labels"));
        }
        if dst.is_null() {
            return Err(null("dst"));
        }
        let src = (*labels).map.labels();
        if len != src.len() {
            set_error(format!("buffer holds {len} entries, map has {}", src.len()));
            return Err(ScalpStatus::DimensionMismatch);
        }
        std::ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `labels` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn scalp_labels_free(labels: *mut ScalpLabels) {
    if !labels.is_null() {
        drop(Box::from_raw(labels));
    }
}

/// # Safety
/// `ptr` must be null or valid for `width * height * depth` reads.
unsafe fn label_map(ptr: *const u32, width: u32, height: u32, depth: u32, what: &str) -> Result<LabelMap, ScalpStatus> {
    let n = area(width, height, depth)?;
    let v = slice(ptr, n, what)?.to_vec();
    LabelMap::new_3d(width as usize, height as usize, depth as usize, v).map_err(fail)
}

fn write_out(out: *mut f64, v: scalp::Result<f64>) -> Result<(), ScalpStatus> {
    if out.is_null() {
        return Err(null("out"));
    }
    let v = v.map_err(fail)?;
    // SAFETY: checked non-null above.
    unsafe { *out = v };
    Ok(())
}

/// Achievable segmentation accuracy of `s` against ground truth `t`.
/// Use `depth = 1` for images.
///
/// # Safety
/// `s` and `t` must hold `width * height * depth` labels.
#[no_mangle]
pub unsafe extern "C" fn scalp_asa(
    s: *const u32,
    t: *const u32,
    width: u32,
    height: u32,
    depth: u32,
    out: *mut f64,
) -> ScalpStatus {
    guard(|| {
        let s = label_map(s, width, height, depth, "s")?;
        let t = label_map(t, width, height, depth, "t")?;
        write_out(out, metrics::asa(&s, &t))
    })
}

/// Boundary recall of `s` against `t` with matching distance `< epsilon`.
///
/// # Safety
/// `s` and `t` must hold `width * height` labels.
#[no_mangle]
pub unsafe extern "C" fn scalp_boundary_recall(
    s: *const u32,
    t: *const u32,
    width: u32,
    height: u32,
    epsilon: f64,
    out: *mut f64,
) -> ScalpStatus {
    guard(|| {
        let s = label_map(s, width, height, 1, "s")?;
        let t = label_map(t, width, height, 1, "t")?;
        write_out(out, metrics::boundary_recall(&s, &t, epsilon))
    })
}

/// Fraction of pixels on superpixel boundaries.
///
/// # Safety
/// `s` must hold `width * height` labels.
#[no_mangle]
pub unsafe extern "C" fn scalp_contour_density(s: *const u32, width: u32, height: u32, out: *mut f64) -> ScalpStatus {
    guard(|| {
        let s = label_map(s, width, height, 1, "s")?;
        write_out(out, Ok(metrics::contour_density(&s)))
    })
}

/// Shape regularity of the superpixels of `s`.
///
/// # Safety
/// `s` must hold `width * height` labels.
#[no_mangle]
pub unsafe extern "C" fn scalp_shape_regularity(s: *const u32, width: u32, height: u32, out: *mut f64) -> ScalpStatus {
    guard(|| {
        let s = label_map(s, width, height, 1, "s")?;
        write_out(out, Ok(metrics::shape_regularity(&s)))
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to fit) and returns the full message length
/// without the terminator. Pass a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn scalp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
