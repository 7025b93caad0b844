//! Binary PGM (P5) / PPM (P6) and 8-bit PNG reading and writing.
//!
//! Real-valued planes are quantized with round-half-away-from-zero and clamped
//! to `[0, 255]` on write.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::color::{quantize_u8, ColorImage, ColorSpace};
use crate::error::{Error, Result};
use crate::plane::ImagePlane;

/// A decoded 8-bit image file.
#[derive(Debug, Clone, PartialEq)]
pub enum Image {
    Gray(ImagePlane),
    Color(ColorImage),
}

impl Image {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            Image::Gray(p) => p.dims(),
            Image::Color(c) => (c.width(), c.height()),
        }
    }
}

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"\x89PNG") {
        decode_png(path, &bytes)
    } else {
        decode_pnm(path, &bytes)
    }
}

/// Reads a file as a single plane; color images are reduced to BT.601 luma.
pub fn read_luma(path: &Path) -> Result<ImagePlane> {
    match read_image(path)? {
        Image::Gray(p) => Ok(p),
        Image::Color(c) => crate::color::luma_plane(&c),
    }
}

/// Parses a P5/P6 byte buffer.
pub fn decode_pnm(path: &Path, bytes: &[u8]) -> Result<Image> {
    let mut pos = 0usize;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
            pos += 1;
        }
        if start == pos {
            return Err(format_err(path, "truncated header"));
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| format_err(path, "non-ascii header"))?);
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;

    let channels = match tokens[0] {
        "P5" => 1,
        "P6" => 3,
        other => return Err(format_err(path, format!("unsupported magic {other:?} (need P5 or P6)"))),
    };
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| format_err(path, format!("bad {what} {s:?}")))
    };
    let width = parse(tokens[1], "width")?;
    let height = parse(tokens[2], "height")?;
    let maxval = parse(tokens[3], "maxval")?;
    if maxval != 255 {
        return Err(format_err(path, format!("only maxval 255 is supported, got {maxval}")));
    }
    if width == 0 || height == 0 {
        return Err(format_err(path, "zero-sized image"));
    }
    let need = width * height * channels;
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| format_err(path, format!("raster truncated: need {need} bytes")))?;
    if channels == 1 {
        let data = raster.iter().map(|&v| f64::from(v)).collect();
        Ok(Image::Gray(ImagePlane::new(width, height, data)?))
    } else {
        Ok(Image::Color(ColorImage::new(
            width,
            height,
            ColorSpace::Rgb,
            raster.to_vec(),
        )?))
    }
}

fn decode_png(path: &Path, bytes: &[u8]) -> Result<Image> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder.read_info().map_err(|e| format_err(path, e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| format_err(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| format_err(path, e.to_string()))?;
    buf.truncate(info.buffer_size());
    let (w, h) = (info.width as usize, info.height as usize);
    let stride = info.line_size;
    let channels = info.color_type.samples();
    let mut packed = Vec::with_capacity(w * h * channels);
    for row in buf.chunks_exact(stride).take(h) {
        packed.extend_from_slice(&row[..w * channels]);
    }
    match info.color_type {
        png::ColorType::Grayscale | png::ColorType::GrayscaleAlpha => {
            let data = packed.chunks_exact(channels).map(|px| f64::from(px[0])).collect();
            Ok(Image::Gray(ImagePlane::new(w, h, data)?))
        }
        png::ColorType::Rgb | png::ColorType::Rgba => {
            let rgb = packed
                .chunks_exact(channels)
                .flat_map(|px| [px[0], px[1], px[2]])
                .collect();
            Ok(Image::Color(ColorImage::new(w, h, ColorSpace::Rgb, rgb)?))
        }
        png::ColorType::Indexed => Err(format_err(path, "palette was not expanded")),
    }
}

pub fn encode_pgm(p: &ImagePlane) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", p.width(), p.height()).into_bytes();
    out.extend(p.data().iter().map(|&v| quantize_u8(v)));
    out
}

pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.samples());
    out
}

fn write_png(path: &Path, w: usize, h: usize, color: png::ColorType, data: &[u8]) -> Result<()> {
    let file = BufWriter::new(File::create(path)?);
    let mut enc = png::Encoder::new(file, w as u32, h as u32);
    enc.set_color(color);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| format_err(path, e.to_string()))?;
    writer
        .write_image_data(data)
        .map_err(|e| format_err(path, e.to_string()))?;
    writer.finish().map_err(|e| format_err(path, e.to_string()))?;
    Ok(())
}

/// Writes a plane as PGM, or PNG when the path ends in `.png`.
pub fn write_gray(path: &Path, p: &ImagePlane) -> Result<()> {
    if is_png(path) {
        let data: Vec<u8> = p.data().iter().map(|&v| quantize_u8(v)).collect();
        return write_png(path, p.width(), p.height(), png::ColorType::Grayscale, &data);
    }
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&encode_pgm(p))?;
    f.flush()?;
    Ok(())
}

/// Writes an RGB image as PPM, or PNG when the path ends in `.png`.
pub fn write_color(path: &Path, img: &ColorImage) -> Result<()> {
    let img = match img.space() {
        ColorSpace::Rgb => img.clone(),
        ColorSpace::YCbCr => crate::color::ycbcr_to_rgb(img)?,
    };
    if is_png(path) {
        return write_png(path, img.width(), img.height(), png::ColorType::Rgb, img.samples());
    }
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(&encode_ppm(&img))?;
    f.flush()?;
    Ok(())
}

pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    match img {
        Image::Gray(p) => write_gray(path, p),
        Image::Color(c) => write_color(path, c),
    }
}
