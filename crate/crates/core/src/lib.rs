//! Single-image super-resolution with a patch-wise sigmoid sharpening prior.
//!
//! The crate is organized bottom-up:
//!
//! - [`plane`], [`color`], [`kernel`], [`resample`], [`noise`], [`degrade`],
//!   [`io`]: pixel primitives and the `Y = D·H·X + N` observation model.
//! - [`sharpen`]: per-patch normalization, sigmoid remapping and overlapped
//!   Hann-window blending.
//! - [`reconstruct`]: the iterative solver and luma-only color handling.
//! - [`metrics`]: PSNR and SSIM.
//! - [`bench`]: dataset sweeps producing CSV reports.
//! - [`fixtures`]: bundled offline test images.

pub mod bench;
pub mod color;
pub mod degrade;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod kernel;
pub mod metrics;
pub mod noise;
pub mod plane;
pub mod reconstruct;
pub mod resample;
pub mod sharpen;

pub use color::{ColorImage, ColorSpace};
pub use degrade::{degrade, DegradationModel};
pub use error::{Error, Result};
pub use kernel::{convolve2d, gaussian_kernel, Kernel2D};
pub use metrics::{psnr, ssim, MetricParams, SsimMode};
pub use plane::ImagePlane;
pub use reconstruct::{reconstruct, sr_color, ResidualUpscaler, SRConfig, SolveTrace};
pub use sharpen::{sharpen_image, BlendMode, SigmoidParams};
