//! PSNR and SSIM with a configurable border crop.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::plane::ImagePlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimMode {
    /// One evaluation over the whole cropped region.
    Global,
    /// Mean over all sliding windows (stride 1).
    #[default]
    Windowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimWeighting {
    #[default]
    Uniform,
    /// Separable Gaussian with σ = 1.5 over the window.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricParams {
    /// Pixels dropped from every edge before scoring.
    pub crop_border: usize,
    /// Dynamic range `L`.
    pub dynamic_range: f64,
    pub k1: f64,
    pub k2: f64,
    pub ssim_window: usize,
    pub ssim_mode: SsimMode,
    pub ssim_weighting: SsimWeighting,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self::for_scale(3)
    }
}

impl MetricParams {
    /// Defaults with a crop equal to the SR scale factor.
    pub fn for_scale(k: usize) -> Self {
        Self {
            crop_border: k,
            dynamic_range: 255.0,
            k1: 0.01,
            k2: 0.03,
            ssim_window: 8,
            ssim_mode: SsimMode::Windowed,
            ssim_weighting: SsimWeighting::Uniform,
        }
    }

    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }
}

fn cropped_pair(a: &ImagePlane, b: &ImagePlane, crop: usize) -> Result<(ImagePlane, ImagePlane)> {
    a.ensure_same_dims(b)?;
    let (w, h) = a.dims();
    if w <= 2 * crop || h <= 2 * crop {
        return Err(invalid(format!(
            "image {w}x{h} too small for a {crop}-pixel border crop"
        )));
    }
    let (cw, ch) = (w - 2 * crop, h - 2 * crop);
    Ok((a.crop(crop, crop, cw, ch)?, b.crop(crop, crop, cw, ch)?))
}

/// Mean squared error over the cropped region.
pub fn mse(reference: &ImagePlane, test: &ImagePlane, crop_border: usize) -> Result<f64> {
    let (a, b) = cropped_pair(reference, test, crop_border)?;
    let sum: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

/// `10·log10(L² / MSE)`; identical inputs give `f64::INFINITY`.
pub fn psnr(reference: &ImagePlane, test: &ImagePlane, p: &MetricParams) -> Result<f64> {
    let m = mse(reference, test, p.crop_border)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (p.dynamic_range * p.dynamic_range / m).log10())
}

#[inline]
fn ssim_from_moments(mx: f64, my: f64, vx: f64, vy: f64, cov: f64, c1: f64, c2: f64) -> f64 {
    ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
}

fn ssim_global(a: &ImagePlane, b: &ImagePlane, c1: f64, c2: f64) -> f64 {
    let n = a.len() as f64;
    let mx = a.data().iter().sum::<f64>() / n;
    let my = b.data().iter().sum::<f64>() / n;
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.data().iter().zip(b.data()) {
        let (dx, dy) = (x - mx, y - my);
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    ssim_from_moments(mx, my, vx / n, vy / n, cov / n, c1, c2)
}

fn window_profile(size: usize, weighting: SsimWeighting) -> Vec<f64> {
    let raw: Vec<f64> = match weighting {
        SsimWeighting::Uniform => vec![1.0; size],
        SsimWeighting::Gaussian => {
            let c = (size as f64 - 1.0) / 2.0;
            (0..size)
                .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * 1.5 * 1.5)).exp())
                .collect()
        }
    };
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Separable weighted sums over all `size × size` windows ("valid" region).
fn window_means(src: &[f64], w: usize, h: usize, prof: &[f64]) -> Vec<f64> {
    let n = prof.len();
    let (ow, oh) = (w - n + 1, h - n + 1);
    let mut horiz = vec![0.0; ow * h];
    for r in 0..h {
        let row = &src[r * w..(r + 1) * w];
        for c in 0..ow {
            horiz[r * ow + c] = prof.iter().zip(&row[c..c + n]).map(|(p, v)| p * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for r in 0..oh {
        for (t, &p) in prof.iter().enumerate() {
            let hrow = &horiz[(r + t) * ow..(r + t + 1) * ow];
            for (o, v) in out[r * ow..(r + 1) * ow].iter_mut().zip(hrow) {
                *o += p * v;
            }
        }
    }
    out
}

fn ssim_windowed(a: &ImagePlane, b: &ImagePlane, p: &MetricParams) -> Result<f64> {
    let (w, h) = a.dims();
    let size = p.ssim_window;
    if size == 0 || size > w || size > h {
        return Err(invalid(format!("SSIM window {size} does not fit a {w}x{h} region")));
    }
    let prof = window_profile(size, p.ssim_weighting);
    let xx: Vec<f64> = a.data().iter().map(|v| v * v).collect();
    let yy: Vec<f64> = b.data().iter().map(|v| v * v).collect();
    let xy: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| x * y).collect();
    let mx = window_means(a.data(), w, h, &prof);
    let my = window_means(b.data(), w, h, &prof);
    let ex2 = window_means(&xx, w, h, &prof);
    let ey2 = window_means(&yy, w, h, &prof);
    let exy = window_means(&xy, w, h, &prof);
    let (c1, c2) = (p.c1(), p.c2());
    let total: f64 = (0..mx.len())
        .map(|i| {
            let vx = ex2[i] - mx[i] * mx[i];
            let vy = ey2[i] - my[i] * my[i];
            let cov = exy[i] - mx[i] * my[i];
            ssim_from_moments(mx[i], my[i], vx, vy, cov, c1, c2)
        })
        .sum();
    Ok(total / mx.len() as f64)
}

/// Structural similarity using the covariance form of the structure term.
pub fn ssim(reference: &ImagePlane, test: &ImagePlane, p: &MetricParams) -> Result<f64> {
    let (a, b) = cropped_pair(reference, test, p.crop_border)?;
    match p.ssim_mode {
        SsimMode::Global => Ok(ssim_global(&a, &b, p.c1(), p.c2())),
        SsimMode::Windowed => ssim_windowed(&a, &b, p),
    }
}
