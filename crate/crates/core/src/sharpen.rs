//! Patch-wise sigmoid sharpening.
//!
//! Each patch is normalized into `(0, 1)` using its own range widened by `eps`,
//! pushed through the two-parameter sigmoid
//! `g(y; K, B) = 1 / (1 + (1/y − 1)^K · e^B)`, and mapped back to intensities
//! with the same range. Overlapping patches are blended with a separable Hann
//! window (or a plain mean).
//!
//! `K > 1` steepens each local slope, `K < 1` flattens it, and `K = 1, B = 0`
//! is the identity. `B` shifts the midpoint of the curve.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::plane::ImagePlane;

/// How overlapping patch outputs are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlendMode {
    /// Weight-normalized sum with a floored 2-D Hann window.
    #[default]
    Hann,
    /// Unweighted mean of all contributions.
    Mean,
}

impl std::str::FromStr for BlendMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" => Ok(BlendMode::Hann),
            "mean" => Ok(BlendMode::Mean),
            other => Err(invalid(format!("unknown blend mode {other:?} (hann|mean)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SigmoidParams {
    /// Steepness `K`.
    #[serde(rename = "K")]
    pub sharpness: f64,
    /// Location `B`.
    #[serde(rename = "B")]
    pub location: f64,
    /// Patch side in LR pixels.
    pub patch_len_lr: usize,
    /// Patch stride in LR pixels.
    pub stride_lr: usize,
    /// Range guard added to both ends of each patch's intensity range.
    pub eps: f64,
    /// LR to HR pixel ratio; HR patch side is `patch_len_lr * scale`.
    pub scale: usize,
    pub blend: BlendMode,
}

impl Default for SigmoidParams {
    fn default() -> Self {
        Self {
            sharpness: 2.0,
            location: 0.0,
            patch_len_lr: 3,
            stride_lr: 1,
            eps: 0.01,
            scale: 3,
            blend: BlendMode::Hann,
        }
    }
}

impl SigmoidParams {
    pub fn validate(&self) -> Result<()> {
        if !self.sharpness.is_finite() || self.sharpness <= 0.0 {
            return Err(invalid(format!("K must be > 0, got {}", self.sharpness)));
        }
        if !self.location.is_finite() {
            return Err(invalid(format!("B must be finite, got {}", self.location)));
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(invalid(format!("eps must be > 0, got {}", self.eps)));
        }
        if self.patch_len_lr < 2 {
            return Err(invalid(format!("patch_len_lr must be >= 2, got {}", self.patch_len_lr)));
        }
        if self.stride_lr == 0 || self.stride_lr > self.patch_len_lr {
            return Err(invalid(format!(
                "stride_lr must be in 1..={}, got {}",
                self.patch_len_lr, self.stride_lr
            )));
        }
        if self.scale == 0 {
            return Err(invalid("scale must be >= 1"));
        }
        Ok(())
    }

    /// Patch side in HR pixels.
    pub fn patch_side(&self) -> usize {
        self.patch_len_lr * self.scale
    }

    /// Patch stride in HR pixels.
    pub fn stride(&self) -> usize {
        self.stride_lr * self.scale
    }
}

/// A square block of intensities cut from a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchView {
    pub row: usize,
    pub col: usize,
    pub side: usize,
    pub values: Vec<f64>,
}

impl PatchView {
    /// Copies the `side × side` block at `(row, col)`.
    pub fn extract(p: &ImagePlane, row: usize, col: usize, side: usize) -> Result<Self> {
        if side == 0 || row + side > p.height() || col + side > p.width() {
            return Err(invalid(format!(
                "patch {side}x{side}@({row},{col}) outside {}x{}",
                p.width(),
                p.height()
            )));
        }
        let mut values = Vec::with_capacity(side * side);
        for r in row..row + side {
            values.extend_from_slice(&p.row(r)[col..col + side]);
        }
        Ok(Self { row, col, side, values })
    }

    /// Patch with origin `(0, 0)` from raw values; `values.len()` must be a square.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let side = (values.len() as f64).sqrt().round() as usize;
        if side == 0 || side * side != values.len() {
            return Err(invalid(format!("{} values do not form a square patch", values.len())));
        }
        Ok(Self {
            row: 0,
            col: 0,
            side,
            values,
        })
    }
}

/// Patch values mapped into `(0, 1)` together with the widened range.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

fn range_of(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

/// `lo = min − eps`, `hi = max + eps`, `y = (z − lo) / (hi − lo)`.
///
/// Evaluated around the range midpoint so a constant patch maps to exactly 0.5.
pub fn normalize_values(values: &[f64], eps: f64) -> Normalized {
    let (min, max) = range_of(values);
    let lo = min - eps;
    let hi = max + eps;
    let mid = 0.5 * (min + max);
    let span = (max - min) + 2.0 * eps;
    Normalized {
        values: values.iter().map(|&z| 0.5 + (z - mid) / span).collect(),
        lo,
        hi,
    }
}

pub fn normalize_patch(patch: &PatchView, eps: f64) -> Result<Normalized> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(invalid(format!("eps must be > 0, got {eps}")));
    }
    Ok(normalize_values(&patch.values, eps))
}

/// `g(y; K, B)` given precomputed `e^B`; caller guarantees `0 < y < 1`.
#[inline]
fn remap(y: f64, k: f64, exp_b: f64) -> f64 {
    let odds = 1.0 / y - 1.0;
    1.0 / (1.0 + odds.powf(k) * exp_b)
}

/// `g(y; K, B) = 1 / (1 + (1/y − 1)^K · e^B)` for `y ∈ (0, 1)`.
pub fn sigmoid_remap(y: f64, k: f64, b: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain(y));
    }
    if k.is_nan() || k <= 0.0 {
        return Err(invalid(format!("K must be > 0, got {k}")));
    }
    Ok(remap(y, k, b.exp()))
}

/// Maps a value in `(0, 1)` back onto `[lo, hi]`.
#[inline]
pub fn requantize(yp: f64, lo: f64, hi: f64) -> f64 {
    yp * (hi - lo) + lo
}

fn sharpen_values_into(values: &[f64], k: f64, exp_b: f64, eps: f64, out: &mut Vec<f64>) -> Result<()> {
    let (min, max) = range_of(values);
    let lo = min - eps;
    let hi = max + eps;
    let mid = 0.5 * (min + max);
    let span = (max - min) + 2.0 * eps;
    out.clear();
    for &z in values {
        let y = 0.5 + (z - mid) / span;
        if !(y > 0.0 && y < 1.0) {
            return Err(Error::Domain(y));
        }
        out.push(requantize(remap(y, k, exp_b), lo, hi));
    }
    Ok(())
}

/// Normalize, remap and requantize one patch.
pub fn sharpen_patch(patch: &PatchView, params: &SigmoidParams) -> Result<PatchView> {
    if params.eps.is_nan() || params.eps <= 0.0 {
        return Err(invalid(format!("eps must be > 0, got {}", params.eps)));
    }
    if params.sharpness.is_nan() || params.sharpness <= 0.0 {
        return Err(invalid(format!("K must be > 0, got {}", params.sharpness)));
    }
    let mut values = Vec::with_capacity(patch.values.len());
    sharpen_values_into(
        &patch.values,
        params.sharpness,
        params.location.exp(),
        params.eps,
        &mut values,
    )?;
    Ok(PatchView {
        row: patch.row,
        col: patch.col,
        side: patch.side,
        values,
    })
}

/// One axis of the Hann window, `0.5 − 0.5·cos(2π(i + 0.5)/side)`.
pub fn hann_profile(side: usize) -> Vec<f64> {
    (0..side)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * (i as f64 + 0.5) / side as f64).cos())
        .collect()
}

const WINDOW_FLOOR: f64 = 1e-3;

/// Row-major `side × side` blend weights: separable Hann, floored at 1e-3.
pub fn window_weights(side: usize) -> Vec<f64> {
    let w = hann_profile(side);
    let mut out = Vec::with_capacity(side * side);
    for &a in &w {
        for &b in &w {
            out.push((a * b).max(WINDOW_FLOOR));
        }
    }
    out
}

/// Patch origins along one axis: `0, stride, 2·stride, …`, with a final origin
/// at `dim − side` whenever the regular grid leaves a remainder.
pub fn patch_origins(dim: usize, side: usize, stride: usize) -> Vec<usize> {
    debug_assert!(side <= dim && stride > 0);
    let last = dim - side;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if *v.last().expect("origin 0 always present") != last {
        v.push(last);
    }
    v
}

/// Sharpens every HR patch of side `patch_len_lr·scale` at stride
/// `stride_lr·scale` and blends the overlapping results.
///
/// Patches are computed in parallel and accumulated sequentially in raster
/// order, so the output does not depend on the thread count.
pub fn sharpen_image(p: &ImagePlane, params: &SigmoidParams) -> Result<ImagePlane> {
    params.validate()?;
    let side = params.patch_side();
    let stride = params.stride();
    let (w, h) = p.dims();
    if w < side || h < side {
        return Err(invalid(format!("image {w}x{h} smaller than one {side}x{side} patch")));
    }
    let rows = patch_origins(h, side, stride);
    let cols = patch_origins(w, side, stride);
    let k = params.sharpness;
    let exp_b = params.location.exp();
    let eps = params.eps;

    // One Vec per patch row: concatenated sharpened patches, in column order.
    let patch_rows: Vec<Vec<f64>> = rows
        .par_iter()
        .map(|&r0| -> Result<Vec<f64>> {
            let mut buf = Vec::with_capacity(side * side);
            let mut sharpened = Vec::with_capacity(side * side);
            let mut out = Vec::with_capacity(cols.len() * side * side);
            for &c0 in &cols {
                buf.clear();
                for r in r0..r0 + side {
                    buf.extend_from_slice(&p.row(r)[c0..c0 + side]);
                }
                sharpen_values_into(&buf, k, exp_b, eps, &mut sharpened)?;
                out.extend_from_slice(&sharpened);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let weights = match params.blend {
        BlendMode::Hann => window_weights(side),
        BlendMode::Mean => vec![1.0; side * side],
    };
    let mut acc = vec![0.0; w * h];
    let mut wsum = vec![0.0; w * h];
    for (&r0, patches) in rows.iter().zip(&patch_rows) {
        for (ci, &c0) in cols.iter().enumerate() {
            let patch = &patches[ci * side * side..(ci + 1) * side * side];
            for dr in 0..side {
                let base = (r0 + dr) * w + c0;
                let prow = &patch[dr * side..(dr + 1) * side];
                let wrow = &weights[dr * side..(dr + 1) * side];
                for ((a, s), (&v, &wt)) in acc[base..base + side]
                    .iter_mut()
                    .zip(&mut wsum[base..base + side])
                    .zip(prow.iter().zip(wrow))
                {
                    *a += wt * v;
                    *s += wt;
                }
            }
        }
    }
    let data = acc.iter().zip(&wsum).map(|(a, s)| a / s).collect();
    Ok(ImagePlane::from_raw(w, h, data))
}
