//! Test-only oracles, written independently of the library's code paths.

#![allow(dead_code)]

use sigmoid_sr::ImagePlane;

/// Single reflection `-1 -> 0`, `n -> n-1`; valid while the overhang is < n.
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= n {
        2 * n - 1 - i
    } else {
        i
    };
    assert!((0..n).contains(&j), "overhang too large for the oracle");
    j as usize
}

/// Unnormalized Gaussian taps evaluated on the 2-D grid and normalized as a whole.
pub fn gaussian_grid(size: usize, sigma: f64) -> Vec<f64> {
    let r = (size / 2) as f64;
    let mut taps = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            let (dy, dx) = (i as f64 - r, j as f64 - r);
            taps.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let s: f64 = taps.iter().sum();
    taps.iter().map(|t| t / s).collect()
}

/// Dense row-major `(lr_w·lr_h) × (w·h)` matrix for decimation after blur.
pub fn dense_dh(
    w: usize,
    h: usize,
    taps: &[f64],
    size: usize,
    factor: usize,
    offset: usize,
) -> (Vec<f64>, usize, usize) {
    let r = (size / 2) as isize;
    // H: (w*h) x (w*h)
    let n = w * h;
    let mut hmat = vec![0.0; n * n];
    for row in 0..h {
        for col in 0..w {
            let out = row * w + col;
            for a in -r..=r {
                for b in -r..=r {
                    let tap = taps[((a + r) as usize) * size + (b + r) as usize];
                    let sr = reflect(row as isize - a, h);
                    let sc = reflect(col as isize - b, w);
                    hmat[out * n + sr * w + sc] += tap;
                }
            }
        }
    }
    let lw = (w - 1 - offset) / factor + 1;
    let lh = (h - 1 - offset) / factor + 1;
    let m = lw * lh;
    let mut dh = vec![0.0; m * n];
    for i in 0..lh {
        for j in 0..lw {
            let hr_index = (offset + i * factor) * w + offset + j * factor;
            dh[(i * lw + j) * n..(i * lw + j + 1) * n].copy_from_slice(&hmat[hr_index * n..(hr_index + 1) * n]);
        }
    }
    (dh, lw, lh)
}

pub fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    m.chunks_exact(v.len())
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Double-loop MSE/PSNR over the interior after dropping `crop` pixels per edge.
pub fn psnr_oracle(a: &ImagePlane, b: &ImagePlane, crop: usize) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in crop..a.height() - crop {
        for c in crop..a.width() - crop {
            let d = a.get(r, c) - b.get(r, c);
            sum += d * d;
            count += 1;
        }
    }
    10.0 * (255.0f64 * 255.0 / (sum / count as f64)).log10()
}

/// Small xorshift generator so oracle inputs don't share the library's RNG.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn plane(&mut self, w: usize, h: usize, scale: f64) -> ImagePlane {
        ImagePlane::from_fn(w, h, |_, _| scale * self.next_f64())
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_f64() * n as f64) as usize % n
    }
}

/// 10%–90% rise distance along one scanline, linearly interpolated.
pub fn transition_width(line: &[f64], low: f64, high: f64) -> f64 {
    let t10 = low + 0.1 * (high - low);
    let t90 = low + 0.9 * (high - low);
    let cross = |t: f64| -> f64 {
        for i in 1..line.len() {
            if line[i - 1] < t && line[i] >= t {
                return (i - 1) as f64 + (t - line[i - 1]) / (line[i] - line[i - 1]);
            }
        }
        panic!("scanline never crosses {t}");
    };
    cross(t90) - cross(t10)
}
