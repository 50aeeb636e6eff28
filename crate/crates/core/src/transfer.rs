//! Grid transfer between a fine grid and the next coarser one.
//!
//! A coarse pixel covers a 2x2 fine block; on odd sizes the last coarse
//! row/column covers the single remaining fine row/column.

use crate::image::{Image, Mask};

pub fn coarse_dim(fine: usize) -> usize {
    fine.div_ceil(2)
}

/// Sum of the fine samples of coarse cell `(cx, cy)` and how many there are.
///
/// Adds within rows first, then across rows, so equal inputs average back exactly.
#[inline]
fn block_sum(plane: &[f64], width: usize, height: usize, cx: usize, cy: usize) -> (f64, usize) {
    let x0 = 2 * cx;
    let y0 = 2 * cy;
    let wide = x0 + 1 < width;
    let tall = y0 + 1 < height;
    let row = |y: usize| {
        let i = y * width + x0;
        if wide {
            plane[i] + plane[i + 1]
        } else {
            plane[i]
        }
    };
    let sum = if tall { row(y0) + row(y0 + 1) } else { row(y0) };
    (sum, (1 + wide as usize) * (1 + tall as usize))
}

pub(crate) fn restrict_plane(fine: &[f64], width: usize, height: usize, coarse: &mut [f64]) {
    let cw = coarse_dim(width);
    let ch = coarse_dim(height);
    for cy in 0..ch {
        for cx in 0..cw {
            let (sum, n) = block_sum(fine, width, height, cx, cy);
            coarse[cy * cw + cx] = sum / n as f64;
        }
    }
}

/// 2x2 block average of every channel.
pub fn restrict(img: &Image) -> Image {
    let (w, h) = (img.width(), img.height());
    let mut out = Image::new(coarse_dim(w), coarse_dim(h), img.channels());
    for c in 0..img.channels() {
        restrict_plane(img.plane(c), w, h, out.plane_mut(c));
    }
    out
}

pub(crate) fn restrict_mask_bits(mask: &Mask) -> Mask {
    let (w, h) = (mask.width(), mask.height());
    let (cw, ch) = (coarse_dim(w), coarse_dim(h));
    let mut bits = vec![false; cw * ch];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                bits[(y / 2) * cw + x / 2] = true;
            }
        }
    }
    Mask::from_bits(cw, ch, bits).expect("coarse mask dimensions are consistent")
}

/// Restricts a mask by logical OR over each 2x2 block and the stored values by
/// averaging the covered fine mask pixels. Values are 0 off the coarse mask.
pub fn restrict_mask(mask: &Mask, values: &Image) -> (Mask, Image) {
    let coarse = restrict_mask_bits(mask);
    let (w, h) = (mask.width(), mask.height());
    let cw = coarse.width();
    let mut out = Image::new(cw, coarse.height(), values.channels());
    let mut counts = vec![0usize; coarse.len()];
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                counts[(y / 2) * cw + x / 2] += 1;
            }
        }
    }
    for c in 0..values.channels() {
        let fine = values.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if mask.is_set(i) {
                    dst[(y / 2) * cw + x / 2] += fine[i];
                }
            }
        }
        for (v, &n) in dst.iter_mut().zip(&counts) {
            if n > 0 {
                *v /= n as f64;
            }
        }
    }
    (coarse, out)
}

/// Interpolation position of fine index `i` between coarse samples.
#[inline]
fn coarse_coord(i: usize, coarse_len: usize) -> (usize, usize, f64) {
    // Coarse sample k sits at fine coordinate 2k + 0.5.
    let pos = ((i as f64 - 0.5) * 0.5).max(0.0);
    let lo = (pos.floor() as usize).min(coarse_len - 1);
    let hi = (lo + 1).min(coarse_len - 1);
    let t = if hi == lo { 0.0 } else { (pos - lo as f64).min(1.0) };
    (lo, hi, t)
}

pub(crate) fn prolongate_plane(
    coarse: &[f64],
    cw: usize,
    ch: usize,
    fine: &mut [f64],
    width: usize,
    height: usize,
    mut write: impl FnMut(&mut f64, f64),
) {
    let cols: Vec<_> = (0..width).map(|x| coarse_coord(x, cw)).collect();
    for y in 0..height {
        let (y0, y1, ty) = coarse_coord(y, ch);
        let r0 = &coarse[y0 * cw..(y0 + 1) * cw];
        let r1 = &coarse[y1 * cw..(y1 + 1) * cw];
        for (x, &(x0, x1, tx)) in cols.iter().enumerate() {
            let top = r0[x0] + tx * (r0[x1] - r0[x0]);
            let bottom = r1[x0] + tx * (r1[x1] - r1[x0]);
            write(&mut fine[y * width + x], top + ty * (bottom - top));
        }
    }
}

/// Bilinear interpolation onto a `width x height` fine grid.
pub fn prolongate(coarse: &Image, width: usize, height: usize) -> Image {
    let mut out = Image::new(width, height, coarse.channels());
    for c in 0..coarse.channels() {
        prolongate_plane(
            coarse.plane(c),
            coarse.width(),
            coarse.height(),
            out.plane_mut(c),
            width,
            height,
            |dst, v| *dst = v,
        );
    }
    out
}
