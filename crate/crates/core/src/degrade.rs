//! The observation model `Y = D·H·X + N`: blur, decimate, add noise.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::{convolve2d, gaussian_kernel, Kernel2D};
use crate::noise::add_gaussian_noise;
use crate::plane::ImagePlane;
use crate::resample::{decimate, decimated_len};

/// Gaussian blur, integer decimation and additive noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradationModel {
    pub kernel_size: usize,
    pub kernel_sigma: f64,
    pub factor: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Phase of the decimation grid, `0 <= offset < factor`.
    pub offset: usize,
}

impl Default for DegradationModel {
    fn default() -> Self {
        Self {
            kernel_size: 7,
            kernel_sigma: 1.2,
            factor: 3,
            noise_sigma: 0.0,
            seed: 0,
            offset: 0,
        }
    }
}

impl DegradationModel {
    pub fn validate(&self) -> Result<()> {
        if self.kernel_size == 0 || self.kernel_size.is_multiple_of(2) {
            return Err(invalid(format!(
                "kernel_size must be odd and >= 1, got {}",
                self.kernel_size
            )));
        }
        if !self.kernel_sigma.is_finite() || self.kernel_sigma <= 0.0 {
            return Err(invalid(format!("kernel_sigma must be > 0, got {}", self.kernel_sigma)));
        }
        if self.factor == 0 {
            return Err(invalid("factor must be >= 1"));
        }
        if self.offset >= self.factor {
            return Err(invalid(format!(
                "offset {} must be < factor {}",
                self.offset, self.factor
            )));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(invalid(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Kernel2D> {
        gaussian_kernel(self.kernel_size, self.kernel_sigma)
    }

    /// LR dims produced from an HR plane of `(w, h)`.
    pub fn lr_dims(&self, w: usize, h: usize) -> (usize, usize) {
        (
            decimated_len(w, self.factor, self.offset),
            decimated_len(h, self.factor, self.offset),
        )
    }

    /// Noise-free `D·H·x`.
    pub fn blur_decimate(&self, hr: &ImagePlane) -> Result<ImagePlane> {
        let blurred = convolve2d(hr, &self.kernel()?);
        decimate(&blurred, self.factor, self.offset)
    }
}

/// Applies the full observation model, including seeded noise.
pub fn degrade(hr: &ImagePlane, m: &DegradationModel) -> Result<ImagePlane> {
    m.validate()?;
    let (w, h) = hr.dims();
    if w < m.kernel_size || h < m.kernel_size {
        return Err(invalid(format!(
            "HR plane {w}x{h} smaller than the {}x{} blur kernel",
            m.kernel_size, m.kernel_size
        )));
    }
    let lr = m.blur_decimate(hr)?;
    add_gaussian_noise(&lr, m.noise_sigma, m.seed)
}
