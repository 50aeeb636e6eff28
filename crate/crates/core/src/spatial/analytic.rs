//! Analytic masks: dithered, smoothed Laplacian magnitude.

use rand::Rng;

use crate::error::Result;
use crate::image::{Image, Mask};
use crate::spatial::{correct_count, random_mask, rng, target_count};
use crate::stencil::laplacian_at;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dither {
    FloydSteinberg,
    /// One biased coin per pixel.
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticConfig {
    pub density: f64,
    pub dither: Dither,
    /// Gaussian presmoothing; 0 disables it.
    pub sigma: f64,
    pub seed: u64,
}

impl AnalyticConfig {
    pub fn new(density: f64) -> Self {
        AnalyticConfig {
            density,
            dither: Dither::FloydSteinberg,
            sigma: 1.0,
            seed: 0,
        }
    }
}

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Separable Gaussian blur with mirrored borders.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Image {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (w, h) = (img.width(), img.height());
    let mut out = img.clone();
    let mut tmp = vec![0.0; w * h];
    for c in 0..img.channels() {
        let src = img.plane(c);
        for y in 0..h {
            for x in 0..w {
                tmp[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, &g)| g * src[y * w + mirror(x as isize + k as isize - radius, w)])
                    .sum();
            }
        }
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                dst[y * w + x] = kernel
                    .iter()
                    .enumerate()
                    .map(|(k, &g)| g * tmp[mirror(y as isize + k as isize - radius, h) * w + x])
                    .sum();
            }
        }
    }
    out
}

/// `|L f|` of the presmoothed image, summed over channels.
pub fn laplacian_magnitude(f: &Image, sigma: f64) -> Vec<f64> {
    let s = gaussian_blur(f, sigma);
    let (w, h) = (f.width(), f.height());
    let mut mag = vec![0.0; w * h];
    for plane in s.planes() {
        for y in 0..h {
            for x in 0..w {
                mag[y * w + x] += laplacian_at(plane, w, h, x, y).abs();
            }
        }
    }
    mag
}

/// Serpentine Floyd-Steinberg dithering of `p` at threshold 0.5.
fn floyd_steinberg(p: &[f64], w: usize, h: usize) -> Vec<bool> {
    let mut buf = p.to_vec();
    let mut out = vec![false; w * h];
    for y in 0..h {
        let forward = y % 2 == 0;
        for k in 0..w {
            let x = if forward { k } else { w - 1 - k };
            let i = y * w + x;
            let on = buf[i] >= 0.5;
            out[i] = on;
            let err = buf[i] - if on { 1.0 } else { 0.0 };
            let ahead = |d: isize| -> Option<usize> {
                let nx = x as isize + if forward { d } else { -d };
                (nx >= 0 && nx < w as isize).then_some(nx as usize)
            };
            if let Some(nx) = ahead(1) {
                buf[y * w + nx] += err * 7.0 / 16.0;
            }
            if y + 1 < h {
                let row = (y + 1) * w;
                if let Some(nx) = ahead(-1) {
                    buf[row + nx] += err * 3.0 / 16.0;
                }
                buf[row + x] += err * 5.0 / 16.0;
                if let Some(nx) = ahead(1) {
                    buf[row + nx] += err / 16.0;
                }
            }
        }
    }
    out
}

/// Mask of exactly `floor(d N)` pixels placed by dithering the Laplacian
/// magnitude. A featureless image falls back to uniform random placement.
pub fn analytic_mask(f: &Image, cfg: &AnalyticConfig) -> Result<Mask> {
    let count = target_count(cfg.density, f.pixel_count())?;
    analytic_mask_with_count(f, count, cfg)
}

/// As [`analytic_mask`] with an explicit pixel count; `cfg.density` is ignored.
pub(crate) fn analytic_mask_with_count(f: &Image, count: usize, cfg: &AnalyticConfig) -> Result<Mask> {
    let (w, h) = (f.width(), f.height());
    let n = w * h;
    if count == n {
        return Ok(Mask::full(w, h));
    }
    let mag = laplacian_magnitude(f, cfg.sigma);
    let total: f64 = mag.iter().sum();
    if !(total > 0.0) {
        return random_mask(w, h, count, cfg.seed);
    }
    let scale = count as f64 / total;
    let p: Vec<f64> = mag.iter().map(|m| (m * scale).clamp(0.0, 1.0)).collect();
    let bits = match cfg.dither {
        Dither::FloydSteinberg => floyd_steinberg(&p, w, h),
        Dither::Random => {
            let mut r = rng(cfg.seed);
            p.iter().map(|&q| r.gen::<f64>() < q).collect()
        }
    };
    let mut mask = Mask::from_bits(w, h, bits)?;
    correct_count(&mut mask, &p, count);
    Ok(mask)
}
