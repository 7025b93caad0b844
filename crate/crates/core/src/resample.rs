//! Decimation and bicubic resampling.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::plane::{mirror_index, ImagePlane};

/// Output length of decimating `dim` samples by `factor` starting at `offset`.
pub fn decimated_len(dim: usize, factor: usize, offset: usize) -> usize {
    (dim - 1 - offset) / factor + 1
}

/// Keeps every `factor`-th sample in both directions starting at `offset`:
/// `out(i, j) = in(offset + i·factor, offset + j·factor)`.
pub fn decimate(p: &ImagePlane, factor: usize, offset: usize) -> Result<ImagePlane> {
    if factor == 0 {
        return Err(invalid("decimation factor must be >= 1"));
    }
    if offset >= factor {
        return Err(invalid(format!("decimation offset {offset} must be < factor {factor}")));
    }
    let (w, h) = p.dims();
    if offset >= w || offset >= h {
        return Err(invalid(format!("decimation offset {offset} exceeds plane {w}x{h}")));
    }
    let ow = decimated_len(w, factor, offset);
    let oh = decimated_len(h, factor, offset);
    let mut out = Vec::with_capacity(ow * oh);
    for i in 0..oh {
        let row = p.row(offset + i * factor);
        out.extend((0..ow).map(|j| row[offset + j * factor]));
    }
    Ok(ImagePlane::from_raw(ow, oh, out))
}

const CUBIC_A: f64 = -0.5;

/// Keys cubic convolution kernel with `a = -0.5`.
#[inline]
pub fn cubic_weight(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        ((CUBIC_A + 2.0) * x - (CUBIC_A + 3.0)) * x * x + 1.0
    } else if x < 2.0 {
        ((CUBIC_A * x - 5.0 * CUBIC_A) * x + 8.0 * CUBIC_A) * x - 4.0 * CUBIC_A
    } else {
        0.0
    }
}

/// Four source indices and weights for each output sample along one axis.
fn axis_taps(src_len: usize, dst_len: usize) -> Vec<([usize; 4], [f64; 4])> {
    let scale = src_len as f64 / dst_len as f64;
    (0..dst_len)
        .map(|d| {
            let s = (d as f64 + 0.5) * scale - 0.5;
            let base = s.floor();
            let t = s - base;
            let base = base as isize;
            let idx = [-1isize, 0, 1, 2].map(|o| mirror_index(base + o, src_len));
            let wts = [
                cubic_weight(1.0 + t),
                cubic_weight(t),
                cubic_weight(1.0 - t),
                cubic_weight(2.0 - t),
            ];
            (idx, wts)
        })
        .collect()
}

/// Bicubic resize with center-aligned sampling `src = (dst + 0.5)·(in/out) − 0.5`
/// and half-sample symmetric borders.
pub fn bicubic_resize(p: &ImagePlane, out_w: usize, out_h: usize) -> Result<ImagePlane> {
    if out_w == 0 || out_h == 0 {
        return Err(invalid(format!("resize target must be >= 1x1, got {out_w}x{out_h}")));
    }
    let (w, h) = p.dims();
    let xt = axis_taps(w, out_w);
    let yt = axis_taps(h, out_h);

    // Horizontal pass: h rows of out_w.
    let mut tmp = vec![0.0; out_w * h];
    tmp.par_chunks_mut(out_w).enumerate().for_each(|(r, dst)| {
        let src = p.row(r);
        for (o, (idx, wts)) in dst.iter_mut().zip(&xt) {
            *o = wts[0] * src[idx[0]] + wts[1] * src[idx[1]] + wts[2] * src[idx[2]] + wts[3] * src[idx[3]];
        }
    });

    let mut out = vec![0.0; out_w * out_h];
    out.par_chunks_mut(out_w).enumerate().for_each(|(r, dst)| {
        let (idx, wts) = &yt[r];
        let rows = idx.map(|i| &tmp[i * out_w..(i + 1) * out_w]);
        for (c, o) in dst.iter_mut().enumerate() {
            *o = wts[0] * rows[0][c] + wts[1] * rows[1][c] + wts[2] * rows[2][c] + wts[3] * rows[3][c];
        }
    });
    Ok(ImagePlane::from_raw(out_w, out_h, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimate_identity_and_grid() {
        let p = ImagePlane::from_fn(6, 6, |r, c| (10 * r + c) as f64);
        assert_eq!(decimate(&p, 1, 0).unwrap(), p);
        let d = decimate(&p, 3, 0).unwrap();
        assert_eq!(d.dims(), (2, 2));
        assert_eq!(d.data(), &[0.0, 3.0, 30.0, 33.0]);
        let d1 = decimate(&p, 3, 1).unwrap();
        assert_eq!(d1.data(), &[11.0, 14.0, 41.0, 44.0]);
    }

    #[test]
    fn decimate_dims_formula() {
        let p = ImagePlane::filled(7, 7, 1.0);
        assert_eq!(decimate(&p, 3, 0).unwrap().dims(), (3, 3));
        let q = ImagePlane::filled(510, 509, 1.0);
        assert_eq!(decimate(&q, 3, 0).unwrap().dims(), (170, 170));
        assert_eq!(decimated_len(8, 3, 2), 2);
    }

    #[test]
    fn decimate_offset_out_of_range() {
        let p = ImagePlane::filled(6, 6, 1.0);
        assert!(decimate(&p, 3, 3).is_err());
        assert!(decimate(&p, 0, 0).is_err());
    }

    #[test]
    fn cubic_weights_partition_unity() {
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let s = cubic_weight(1.0 + t) + cubic_weight(t) + cubic_weight(1.0 - t) + cubic_weight(2.0 - t);
            assert!((s - 1.0).abs() < 1e-14);
        }
        assert_eq!(cubic_weight(0.0), 1.0);
        assert_eq!(cubic_weight(1.0), 0.0);
        assert_eq!(cubic_weight(2.0), 0.0);
    }

    #[test]
    fn same_size_is_identity() {
        let p = ImagePlane::from_fn(9, 7, |r, c| ((r * 13 + c * 29) % 37) as f64 * 3.3);
        let q = bicubic_resize(&p, 9, 7).unwrap();
        for (a, b) in p.data().iter().zip(q.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_stays_constant() {
        let p = ImagePlane::filled(5, 4, 77.5);
        for (w, h) in [(15, 12), (3, 2), (7, 9), (1, 1)] {
            let q = bicubic_resize(&p, w, h).unwrap();
            assert!(q.data().iter().all(|v| (v - 77.5).abs() <= 1e-12));
        }
    }

    #[test]
    fn upscaled_ramp_stays_linear_in_interior() {
        // f(c) = 2c + 5. At 2x, output column d samples source x = (d + 0.5)/2 - 0.5.
        let p = ImagePlane::from_fn(16, 4, |_, c| 2.0 * c as f64 + 5.0);
        let q = bicubic_resize(&p, 32, 8).unwrap();
        for r in 0..8 {
            for d in 4..28 {
                let x = (d as f64 + 0.5) / 2.0 - 0.5;
                assert!((q.get(r, d) - (2.0 * x + 5.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_target_rejected() {
        assert!(bicubic_resize(&ImagePlane::filled(2, 2, 0.0), 0, 3).is_err());
    }
}
