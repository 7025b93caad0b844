//! Offline test images: synthetic patterns plus two small photographs.
//!
//! All HR fixtures have dimensions divisible by 3 (and by 2 for the synthetic
//! ones), so they degrade and reconstruct without cropping at `k ∈ {2, 3}`.

use std::path::Path;

use crate::color::ColorImage;
use crate::error::Result;
use crate::io::{decode_pnm, write_gray, Image};
use crate::plane::ImagePlane;

const CAMERA_PGM: &[u8] = include_bytes!("../fixtures/camera.pgm");
const ASTRONAUT_PPM: &[u8] = include_bytes!("../fixtures/astronaut.ppm");

/// 255×255 grayscale photograph (scikit-image `camera`, 2× area-downsampled).
pub fn camera() -> ImagePlane {
    match decode_pnm(Path::new("camera.pgm"), CAMERA_PGM) {
        Ok(Image::Gray(p)) => p,
        _ => unreachable!("bundled camera fixture is a valid P5 file"),
    }
}

/// 255×255 RGB photograph (scikit-image `astronaut`, 2× area-downsampled).
pub fn astronaut() -> ColorImage {
    match decode_pnm(Path::new("astronaut.ppm"), ASTRONAUT_PPM) {
        Ok(Image::Color(c)) => c,
        _ => unreachable!("bundled astronaut fixture is a valid P6 file"),
    }
}

/// Diagonal ramp from 20 to 235.
pub fn ramp(size: usize) -> ImagePlane {
    let span = (2 * (size - 1)) as f64;
    ImagePlane::from_fn(size, size, |r, c| 20.0 + 215.0 * (r + c) as f64 / span)
}

/// Vertical step edge between 50 (left) and 200 (right).
pub fn step_edge(width: usize, height: usize) -> ImagePlane {
    ImagePlane::from_fn(width, height, |_, c| if c < width / 2 { 50.0 } else { 200.0 })
}

/// Checkerboard of `cell`-pixel squares alternating 40 / 210.
pub fn checkerboard(size: usize, cell: usize) -> ImagePlane {
    ImagePlane::from_fn(size, size, |r, c| {
        if (r / cell + c / cell).is_multiple_of(2) {
            40.0
        } else {
            210.0
        }
    })
}

/// The bundled grayscale evaluation set, in a fixed order.
pub fn fixture_set() -> Vec<(String, ImagePlane)> {
    vec![
        ("camera".into(), camera()),
        ("checkerboard".into(), checkerboard(96, 12)),
        ("ramp".into(), ramp(96)),
        ("step_edge".into(), step_edge(96, 96)),
    ]
}

/// Writes the fixture set into `dir` as `<name>.pgm`.
pub fn write_fixture_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, plane) in fixture_set() {
        write_gray(&dir.join(format!("{name}.pgm")), &plane)?;
    }
    Ok(())
}
