//! Seeded additive Gaussian noise.
//!
//! Samples come from ChaCha8 seeded with a 64-bit value and are turned into
//! normals with the Box–Muller transform: each pair of uniforms `(u1, u2)`
//! yields `sqrt(-2 ln u1)·cos(2π u2)` and `sqrt(-2 ln u1)·sin(2π u2)`, consumed
//! in row-major pixel order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::plane::ImagePlane;

/// Deterministic standard-normal stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // gen::<f64>() is in [0, 1); flip to (0, 1] so ln() stays finite.
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2 = self.rng.gen::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        self.spare = Some(radius * theta.sin());
        radius * theta.cos()
    }
}

/// `p + N(0, sigma²)` i.i.d. per pixel. `sigma == 0` returns the input unchanged.
pub fn add_gaussian_noise(p: &ImagePlane, sigma: f64, seed: u64) -> Result<ImagePlane> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(invalid(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(p.clone());
    }
    let mut stream = GaussianStream::new(seed);
    Ok(p.map(|v| v + sigma * stream.next_normal()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let p = ImagePlane::from_fn(8, 8, |r, c| (r + c) as f64);
        assert_eq!(add_gaussian_noise(&p, 0.0, 7).unwrap(), p);
    }

    #[test]
    fn sample_moments() {
        let p = ImagePlane::filled(256, 256, 100.0);
        let q = add_gaussian_noise(&p, 4.0, 2024).unwrap();
        let diffs: Vec<f64> = q.data().iter().zip(p.data()).map(|(a, b)| a - b).collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.15, "mean {mean}");
        assert!((var.sqrt() - 4.0).abs() < 0.15, "std {}", var.sqrt());
    }

    #[test]
    fn seeded_determinism() {
        let p = ImagePlane::filled(33, 17, 10.0);
        let a = add_gaussian_noise(&p, 2.0, 99).unwrap();
        let b = add_gaussian_noise(&p, 2.0, 99).unwrap();
        let c = add_gaussian_noise(&p, 2.0, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(add_gaussian_noise(&ImagePlane::filled(2, 2, 0.0), -1.0, 0).is_err());
    }
}
