//! Blur kernels and 2-D convolution with symmetric border extension.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::plane::{mirror_index, ImagePlane};

/// Square, odd-sized 2-D convolution kernel.
///
/// Kernels built from an outer product keep their 1-D factor so convolution
/// can run as two passes.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    taps: Vec<f64>,
    separable: Option<Vec<f64>>,
}

impl Kernel2D {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(invalid(format!("kernel size must be odd and >= 1, got {size}")));
        }
        if taps.len() != size * size {
            return Err(invalid(format!(
                "kernel of size {size} needs {} taps, got {}",
                size * size,
                taps.len()
            )));
        }
        Ok(Self {
            size,
            taps,
            separable: None,
        })
    }

    /// Outer product `v ⊗ v` of a 1-D odd-length profile.
    pub fn separable(profile: Vec<f64>) -> Result<Self> {
        let size = profile.len();
        if size == 0 || size.is_multiple_of(2) {
            return Err(invalid(format!("kernel size must be odd and >= 1, got {size}")));
        }
        let mut taps = Vec::with_capacity(size * size);
        for &a in &profile {
            for &b in &profile {
                taps.push(a * b);
            }
        }
        Ok(Self {
            size,
            taps,
            separable: Some(profile),
        })
    }

    pub fn identity() -> Self {
        Self::separable(vec![1.0]).expect("size-1 kernel is valid")
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at offset `(dy, dx)` from the center.
    pub fn at(&self, dy: isize, dx: isize) -> f64 {
        let r = self.radius() as isize;
        self.taps[((dy + r) as usize) * self.size + (dx + r) as usize]
    }

    pub fn profile(&self) -> Option<&[f64]> {
        self.separable.as_deref()
    }

    /// Kernel rotated by 180°.
    pub fn flipped(&self) -> Kernel2D {
        let mut taps = self.taps.clone();
        taps.reverse();
        Kernel2D {
            size: self.size,
            taps,
            separable: self.separable.as_ref().map(|p| p.iter().rev().copied().collect()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Kernel2D {
        Kernel2D {
            size: self.size,
            taps: self.taps.iter().map(|t| t * factor).collect(),
            // Split the scale across both passes.
            separable: self.separable.as_ref().map(|p| {
                let s = factor.sqrt();
                p.iter().map(|t| t * s).collect()
            }),
        }
    }
}

/// Normalized `size × size` Gaussian with standard deviation `sigma`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel2D> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(invalid(format!("gaussian size must be odd and >= 1, got {size}")));
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(invalid(format!("gaussian sigma must be > 0, got {sigma}")));
    }
    let r = (size / 2) as isize;
    let mut profile: Vec<f64> = (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = profile.iter().sum();
    profile.iter_mut().for_each(|v| *v /= sum);
    Kernel2D::separable(profile)
}

/// `out(r, c) = Σ k(a, b) · in(r − a, c − b)` with half-sample symmetric
/// extension at the borders. Output has the input's dimensions.
pub fn convolve2d(p: &ImagePlane, k: &Kernel2D) -> ImagePlane {
    match k.profile() {
        Some(profile) => {
            let tmp = convolve_rows(p, profile);
            convolve_cols(&tmp, profile)
        }
        None => convolve_dense(p, k),
    }
}

fn convolve_rows(p: &ImagePlane, profile: &[f64]) -> ImagePlane {
    let (w, h) = p.dims();
    let r = (profile.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(row, dst)| {
        let src = p.row(row);
        for (c, o) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (t, &kv) in profile.iter().enumerate() {
                let dx = t as isize - r;
                acc += kv * src[mirror_index(c as isize - dx, w)];
            }
            *o = acc;
        }
    });
    ImagePlane::from_raw(w, h, out)
}

fn convolve_cols(p: &ImagePlane, profile: &[f64]) -> ImagePlane {
    let (w, h) = p.dims();
    let r = (profile.len() / 2) as isize;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(row, dst)| {
        for (t, &kv) in profile.iter().enumerate() {
            let dy = t as isize - r;
            let src = p.row(mirror_index(row as isize - dy, h));
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += kv * s;
            }
        }
    });
    ImagePlane::from_raw(w, h, out)
}

fn convolve_dense(p: &ImagePlane, k: &Kernel2D) -> ImagePlane {
    let (w, h) = p.dims();
    let r = k.radius() as isize;
    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(row, dst)| {
        for (c, o) in dst.iter_mut().enumerate() {
            let mut acc = 0.0;
            for dy in -r..=r {
                let src = p.row(mirror_index(row as isize - dy, h));
                for dx in -r..=r {
                    acc += k.at(dy, dx) * src[mirror_index(c as isize - dx, w)];
                }
            }
            *o = acc;
        }
    });
    ImagePlane::from_raw(w, h, out)
}
