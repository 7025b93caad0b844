//! Iterative reconstruction with a sigmoid-sharpening prior.
//!
//! Starting from a bicubic upscale `X⁰` of the observation `Y`, every iteration
//! lifts the LR residual `D·H·Xˡ − Y` back to HR with `U(·)`, sharpens the
//! current estimate into `Zˡ`, and steps
//!
//! ```text
//! Xˡ⁺¹ = Xˡ − η · ( U(D·H·Xˡ − Y) + λ · (Xˡ − Zˡ) )
//! ```
//!
//! which descends `‖D·H·X − Y‖² + λ‖X − Z‖²`. Intermediates are left unclamped;
//! the result is clamped to `[0, 255]` once at the end.

use serde::{Deserialize, Serialize};

use crate::color::{rgb_to_ycbcr_planes, ycbcr_planes_to_rgb, ColorImage};
use crate::degrade::DegradationModel;
use crate::error::{invalid, Error, Result};
use crate::kernel::convolve2d;
use crate::plane::ImagePlane;
use crate::resample::bicubic_resize;
use crate::sharpen::{sharpen_image, SigmoidParams};

/// Operator used to lift the LR residual onto the HR grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualUpscaler {
    #[default]
    Bicubic,
    /// Zero-insert at the decimation sites, then blur with the flipped kernel
    /// scaled by `k²` (the back-projection adjoint of `D·H`, rescaled).
    ZeroInsertBlur,
}

impl std::str::FromStr for ResidualUpscaler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bicubic" => Ok(Self::Bicubic),
            "zero_insert_blur" => Ok(Self::ZeroInsertBlur),
            other => Err(invalid(format!(
                "unknown residual upscaler {other:?} (bicubic|zero_insert_blur)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SRConfig {
    pub scale: usize,
    pub lambda: f64,
    pub eta: f64,
    pub max_iters: usize,
    /// Early exit once the RMS of an update drops below this. 0 disables it.
    pub stop_tol: f64,
    pub sigmoid: SigmoidParams,
    /// Blur and decimation assumed by the solver; its noise fields are unused.
    pub degradation: DegradationModel,
    pub residual_upscaler: ResidualUpscaler,
}

impl Default for SRConfig {
    fn default() -> Self {
        Self {
            scale: 3,
            lambda: 0.2,
            eta: 0.1,
            max_iters: 30,
            stop_tol: 0.0,
            sigmoid: SigmoidParams::default(),
            degradation: DegradationModel::default(),
            residual_upscaler: ResidualUpscaler::Bicubic,
        }
    }
}

impl SRConfig {
    /// Sets the scale here and in the nested sigmoid and degradation settings.
    pub fn set_scale(&mut self, k: usize) {
        self.scale = k;
        self.sigmoid.scale = k;
        self.degradation.factor = k;
        if self.degradation.offset >= k {
            self.degradation.offset = 0;
        }
    }

    pub fn with_scale(mut self, k: usize) -> Self {
        self.set_scale(k);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scale < 2 {
            return Err(Error::Config(format!("scale must be >= 2, got {}", self.scale)));
        }
        if self.sigmoid.scale != self.scale || self.degradation.factor != self.scale {
            return Err(Error::Config(format!(
                "scale {} disagrees with sigmoid.scale {} / degradation.factor {}",
                self.scale, self.sigmoid.scale, self.degradation.factor
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::Config(format!("eta must be >= 0, got {}", self.eta)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.stop_tol.is_nan() || self.stop_tol < 0.0 {
            return Err(Error::Config(format!("stop_tol must be >= 0, got {}", self.stop_tol)));
        }
        self.sigmoid.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.degradation.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// Diagnostics for one completed iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// `data + λ·reg` at `Xˡ` with `Zˡ = sharpen(Xˡ)`.
    pub cost: f64,
    /// `‖D·H·Xˡ − Y‖²`.
    pub data_term: f64,
    /// `‖Xˡ − Zˡ‖²`.
    pub reg_term: f64,
    /// Cost at `Xˡ⁺¹` with `Zˡ` held fixed.
    pub cost_after: f64,
    /// RMS of `Xˡ⁺¹ − Xˡ`.
    pub update_rms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
    /// Cost of the final (unclamped) estimate against its own sharpened image.
    pub final_cost: f64,
}

impl SolveTrace {
    /// Fraction of iterations where the frozen-`Z` cost went down.
    pub fn descent_fraction(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let down = self.records.iter().filter(|r| r.cost_after < r.cost).count();
        down as f64 / self.records.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,cost,data_term,reg_term,cost_after,update_rms\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter, r.cost, r.data_term, r.reg_term, r.cost_after, r.update_rms
            ));
        }
        s
    }
}

fn sum_sq_diff(a: &ImagePlane, b: &ImagePlane) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lifts an LR residual to the `k×` HR grid.
pub fn residual_upscale(
    residual_lr: &ImagePlane,
    k: usize,
    mode: ResidualUpscaler,
    model: &DegradationModel,
) -> Result<ImagePlane> {
    if k == 0 {
        return Err(invalid("upscale factor must be >= 1"));
    }
    let (w, h) = residual_lr.dims();
    let (hw, hh) = (w * k, h * k);
    match mode {
        ResidualUpscaler::Bicubic => bicubic_resize(residual_lr, hw, hh),
        ResidualUpscaler::ZeroInsertBlur => {
            if model.offset >= k {
                return Err(invalid(format!("offset {} must be < factor {k}", model.offset)));
            }
            let mut up = vec![0.0; hw * hh];
            for i in 0..h {
                for j in 0..w {
                    up[(model.offset + i * k) * hw + model.offset + j * k] = residual_lr.get(i, j);
                }
            }
            let up = ImagePlane::from_raw(hw, hh, up);
            let kernel = model.kernel()?.flipped().scaled((k * k) as f64);
            Ok(convolve2d(&up, &kernel))
        }
    }
}

/// Breakdown of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTerms {
    pub data: f64,
    pub reg: f64,
    pub total: f64,
}

/// `‖D·H·x − y‖² + λ‖x − z‖²` using the config's blur and decimation.
pub fn cost_terms(x: &ImagePlane, y: &ImagePlane, z: &ImagePlane, cfg: &SRConfig) -> Result<CostTerms> {
    x.ensure_same_dims(z)?;
    let sim = cfg.degradation.blur_decimate(x)?;
    y.ensure_same_dims(&sim)?;
    let data = sum_sq_diff(&sim, y);
    let reg = sum_sq_diff(x, z);
    Ok(CostTerms {
        data,
        reg,
        total: data + cfg.lambda * reg,
    })
}

pub fn cost(x: &ImagePlane, y: &ImagePlane, z: &ImagePlane, cfg: &SRConfig) -> Result<f64> {
    Ok(cost_terms(x, y, z, cfg)?.total)
}

/// Bicubic `k×` upscale used as the starting estimate.
pub fn initial_estimate(y: &ImagePlane, k: usize) -> Result<ImagePlane> {
    bicubic_resize(y, y.width() * k, y.height() * k)
}

/// Runs the solver from the bicubic initialization.
pub fn reconstruct(y: &ImagePlane, cfg: &SRConfig) -> Result<(ImagePlane, SolveTrace)> {
    cfg.validate()?;
    if y.width() < 2 || y.height() < 2 {
        return Err(invalid(format!(
            "LR image must be at least 2x2, got {}x{}",
            y.width(),
            y.height()
        )));
    }
    let x0 = initial_estimate(y, cfg.scale)?;
    reconstruct_from(y, x0, cfg)
}

/// Runs the solver from a caller-supplied HR starting point.
pub fn reconstruct_from(y: &ImagePlane, x0: ImagePlane, cfg: &SRConfig) -> Result<(ImagePlane, SolveTrace)> {
    cfg.validate()?;
    let k = cfg.scale;
    if x0.dims() != (y.width() * k, y.height() * k) {
        return Err(Error::DimensionMismatch {
            expected_w: y.width() * k,
            expected_h: y.height() * k,
            got_w: x0.width(),
            got_h: x0.height(),
        });
    }
    let n = x0.len() as f64;
    let mut x = x0;
    let mut trace = SolveTrace::default();

    for iter in 0..cfg.max_iters {
        let sim = cfg.degradation.blur_decimate(&x)?;
        y.ensure_same_dims(&sim)?;
        let residual = sim.axpy(-1.0, y)?;
        let z = sharpen_image(&x, &cfg.sigmoid)?;
        let data_term = residual.data().iter().map(|v| v * v).sum::<f64>();
        let reg_term = sum_sq_diff(&x, &z);

        let lifted = residual_upscale(&residual, k, cfg.residual_upscaler, &cfg.degradation)?;
        let step: Vec<f64> = lifted
            .data()
            .iter()
            .zip(x.data().iter().zip(z.data()))
            .map(|(u, (xv, zv))| cfg.eta * (u + cfg.lambda * (xv - zv)))
            .collect();
        let next_data: Vec<f64> = x.data().iter().zip(&step).map(|(xv, s)| xv - s).collect();
        let next = ImagePlane::from_raw(x.width(), x.height(), next_data);
        let update_rms = (step.iter().map(|s| s * s).sum::<f64>() / n).sqrt();
        let cost_after = cost(&next, y, &z, cfg)?;

        trace.records.push(IterationRecord {
            iter,
            cost: data_term + cfg.lambda * reg_term,
            data_term,
            reg_term,
            cost_after,
            update_rms,
        });
        x = next;
        if !x.all_finite() {
            return Err(invalid(format!("iteration {iter} produced non-finite intensities")));
        }
        if update_rms < cfg.stop_tol {
            break;
        }
    }

    let z = sharpen_image(&x, &cfg.sigmoid)?;
    trace.final_cost = cost(&x, y, &z, cfg)?;
    Ok((x.clamp(0.0, 255.0), trace))
}

/// HR Y, Cb, Cr planes from an RGB input: luma through the solver, chroma
/// through bicubic upscaling.
pub fn sr_color_planes(img: &ColorImage, cfg: &SRConfig) -> Result<([ImagePlane; 3], SolveTrace)> {
    let [y, cb, cr] = rgb_to_ycbcr_planes(img)?;
    let (hw, hh) = (img.width() * cfg.scale, img.height() * cfg.scale);
    let (y_hr, trace) = reconstruct(&y, cfg)?;
    let cb_hr = bicubic_resize(&cb, hw, hh)?;
    let cr_hr = bicubic_resize(&cr, hw, hh)?;
    Ok(([y_hr, cb_hr, cr_hr], trace))
}

/// Super-resolves an RGB image, returning RGB.
pub fn sr_color(img: &ColorImage, cfg: &SRConfig) -> Result<(ColorImage, SolveTrace)> {
    let (planes, trace) = sr_color_planes(img, cfg)?;
    Ok((ycbcr_planes_to_rgb(&planes)?, trace))
}
