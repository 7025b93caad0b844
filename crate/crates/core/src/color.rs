//! 8-bit three-channel images and BT.601 full-range RGB <-> YCbCr conversion.

use crate::error::{invalid, Result};
use crate::plane::ImagePlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    Rgb,
    YCbCr,
}

/// Interleaved 8-bit, 3-channel image tagged with its color space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    space: ColorSpace,
    samples: Vec<u8>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, space: ColorSpace, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(invalid(format!("image dims must be >= 1, got {width}x{height}")));
        }
        if samples.len() != 3 * width * height {
            return Err(invalid(format!(
                "color image has {} samples, expected {}",
                samples.len(),
                3 * width * height
            )));
        }
        Ok(Self {
            width,
            height,
            space,
            samples,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        let i = 3 * (row * self.width + col);
        [self.samples[i], self.samples[i + 1], self.samples[i + 2]]
    }

    /// Splits into three real-valued planes (channel order of the stored space).
    pub fn to_planes(&self) -> [ImagePlane; 3] {
        let n = self.width * self.height;
        let mut chans = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for px in self.samples.chunks_exact(3) {
            for (c, &v) in chans.iter_mut().zip(px) {
                c.push(f64::from(v));
            }
        }
        chans.map(|d| ImagePlane::from_raw(self.width, self.height, d))
    }

    /// Interleaves three planes, quantizing each with `quantize_u8`.
    pub fn from_planes(planes: &[ImagePlane; 3], space: ColorSpace) -> Result<Self> {
        planes[0].ensure_same_dims(&planes[1])?;
        planes[0].ensure_same_dims(&planes[2])?;
        let (w, h) = planes[0].dims();
        let mut samples = Vec::with_capacity(3 * w * h);
        for i in 0..w * h {
            for p in planes {
                samples.push(quantize_u8(p.data()[i]));
            }
        }
        Self::new(w, h, space, samples)
    }
}

/// Round half away from zero, then clamp to `[0, 255]`.
#[inline]
pub fn quantize_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[inline]
pub fn rgb_to_ycbcr_f(r: f64, g: f64, b: f64) -> [f64; 3] {
    [
        0.299 * r + 0.587 * g + 0.114 * b,
        128.0 - 0.168_735_891_647_856 * r - 0.331_264_108_352_144 * g + 0.5 * b,
        128.0 + 0.5 * r - 0.418_687_589_158_237 * g - 0.081_312_410_841_763 * b,
    ]
}

#[inline]
pub fn ycbcr_to_rgb_f(y: f64, cb: f64, cr: f64) -> [f64; 3] {
    let cb = cb - 128.0;
    let cr = cr - 128.0;
    [
        y + 1.402 * cr,
        y - 0.344_136_286_201_022 * cb - 0.714_136_286_201_022 * cr,
        y + 1.772 * cb,
    ]
}

fn convert(
    img: &ColorImage,
    from: ColorSpace,
    to: ColorSpace,
    f: impl Fn(f64, f64, f64) -> [f64; 3],
) -> Result<ColorImage> {
    if img.space != from {
        return Err(invalid(format!("expected {from:?} image, got {:?}", img.space)));
    }
    let mut samples = Vec::with_capacity(img.samples.len());
    for px in img.samples.chunks_exact(3) {
        let out = f(f64::from(px[0]), f64::from(px[1]), f64::from(px[2]));
        samples.extend(out.iter().map(|&v| quantize_u8(v)));
    }
    Ok(ColorImage {
        width: img.width,
        height: img.height,
        space: to,
        samples,
    })
}

pub fn rgb_to_ycbcr(img: &ColorImage) -> Result<ColorImage> {
    convert(img, ColorSpace::Rgb, ColorSpace::YCbCr, rgb_to_ycbcr_f)
}

pub fn ycbcr_to_rgb(img: &ColorImage) -> Result<ColorImage> {
    convert(img, ColorSpace::YCbCr, ColorSpace::Rgb, ycbcr_to_rgb_f)
}

/// Real-valued Y, Cb, Cr planes of an RGB image (no 8-bit requantization).
pub fn rgb_to_ycbcr_planes(img: &ColorImage) -> Result<[ImagePlane; 3]> {
    if img.space != ColorSpace::Rgb {
        return Err(invalid("expected an RGB image"));
    }
    let n = img.width * img.height;
    let mut chans = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    for px in img.samples.chunks_exact(3) {
        let ycc = rgb_to_ycbcr_f(f64::from(px[0]), f64::from(px[1]), f64::from(px[2]));
        for (c, v) in chans.iter_mut().zip(ycc) {
            c.push(v);
        }
    }
    Ok(chans.map(|d| ImagePlane::from_raw(img.width, img.height, d)))
}

/// Recombines real-valued Y, Cb, Cr planes into an 8-bit RGB image.
pub fn ycbcr_planes_to_rgb(planes: &[ImagePlane; 3]) -> Result<ColorImage> {
    planes[0].ensure_same_dims(&planes[1])?;
    planes[0].ensure_same_dims(&planes[2])?;
    let (w, h) = planes[0].dims();
    let mut samples = Vec::with_capacity(3 * w * h);
    for i in 0..w * h {
        let rgb = ycbcr_to_rgb_f(planes[0].data()[i], planes[1].data()[i], planes[2].data()[i]);
        samples.extend(rgb.iter().map(|&v| quantize_u8(v)));
    }
    ColorImage::new(w, h, ColorSpace::Rgb, samples)
}

/// Luma plane of an RGB image.
pub fn luma_plane(img: &ColorImage) -> Result<ImagePlane> {
    let [y, _, _] = rgb_to_ycbcr_planes(img)?;
    Ok(y)
}
