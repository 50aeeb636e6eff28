//! Five-point negated Laplacian with reflecting boundaries, and the
//! inpainting matrices built from it.
//!
//! With `C = diag(mask)` and `L` the negated Laplacian:
//!
//! * inpainting matrix `A = C + (I - C) L`
//! * symmetrized matrix `Ã = C + (I - C) L (I - C)`
//! * symmetrized right-hand side operator `C̃ = C - (I - C) L C`
//!
//! `Ã u = C̃ f` and `A u = C f` share their solution, and `Ã` is symmetric
//! positive definite whenever the mask is nonempty.

use crate::error::{Error, Result};
use crate::image::{Image, Mask};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilSpec {
    h: f64,
}

impl Default for StencilSpec {
    fn default() -> Self {
        StencilSpec { h: 1.0 }
    }
}

impl StencilSpec {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.0 && h.is_finite() {
            Ok(StencilSpec { h })
        } else {
            Err(Error::InvalidConfig(format!("grid spacing must be positive, got {h}")))
        }
    }

    pub fn unit() -> Self {
        Self::default()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn inv_h2(&self) -> f64 {
        1.0 / (self.h * self.h)
    }
}

/// Negated Laplacian of one pixel. Out-of-range neighbors take the center value.
#[inline]
pub(crate) fn laplacian_at(src: &[f64], width: usize, height: usize, x: usize, y: usize) -> f64 {
    let i = y * width + x;
    let c = src[i];
    let mut acc = 0.0;
    if x > 0 {
        acc += c - src[i - 1];
    }
    if x + 1 < width {
        acc += c - src[i + 1];
    }
    if y > 0 {
        acc += c - src[i - width];
    }
    if y + 1 < height {
        acc += c - src[i + width];
    }
    acc
}

pub(crate) fn laplacian_plane(src: &[f64], dst: &mut [f64], width: usize, height: usize, inv_h2: f64) {
    for y in 0..height {
        for x in 0..width {
            dst[y * width + x] = laplacian_at(src, width, height, x, y) * inv_h2;
        }
    }
}

pub fn apply_negated_laplacian(img: &Image, stencil: StencilSpec) -> Image {
    let (w, h) = (img.width(), img.height());
    let mut out = Image::new(w, h, img.channels());
    for c in 0..img.channels() {
        laplacian_plane(img.plane(c), out.plane_mut(c), w, h, stencil.inv_h2());
    }
    out
}

pub fn apply_inpainting_matrix(img: &Image, mask: &Mask, stencil: StencilSpec) -> Result<Image> {
    img.check_mask(mask)?;
    let mut out = apply_negated_laplacian(img, stencil);
    for c in 0..img.channels() {
        let src = img.plane(c);
        for (i, v) in out.plane_mut(c).iter_mut().enumerate() {
            if mask.is_set(i) {
                *v = src[i];
            }
        }
    }
    Ok(out)
}

/// `Ã x = C x + (I - C) L (I - C) x`.
pub fn apply_symmetrized_matrix(img: &Image, mask: &Mask, stencil: StencilSpec) -> Result<Image> {
    img.check_mask(mask)?;
    let unknown = img.map_masked(mask, false);
    let mut out = apply_negated_laplacian(&unknown, stencil);
    for c in 0..img.channels() {
        let src = img.plane(c);
        for (i, v) in out.plane_mut(c).iter_mut().enumerate() {
            if mask.is_set(i) {
                *v = src[i];
            }
        }
    }
    Ok(out)
}

/// `C̃ f = C f - (I - C) L C f`.
pub fn symmetrized_rhs(f: &Image, mask: &Mask, stencil: StencilSpec) -> Result<Image> {
    f.check_mask(mask)?;
    let known = f.masked(mask);
    let mut out = apply_negated_laplacian(&known, stencil);
    for c in 0..f.channels() {
        let k = known.plane(c);
        for (i, v) in out.plane_mut(c).iter_mut().enumerate() {
            *v = if mask.is_set(i) { k[i] } else { -*v };
        }
    }
    Ok(out)
}

impl Image {
    /// Keeps samples whose mask bit equals `keep`, zeroing the rest.
    pub(crate) fn map_masked(&self, mask: &Mask, keep: bool) -> Image {
        let mut out = self.clone();
        for plane in out.planes_mut() {
            for (v, &bit) in plane.iter_mut().zip(mask.bits()) {
                if bit != keep {
                    *v = 0.0;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dot(a: &Image, b: &Image) -> f64 {
        a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn constant_image_has_zero_laplacian() {
        let img = Image::filled(5, 3, 2, 42.5);
        let out = apply_negated_laplacian(&img, StencilSpec::unit());
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn column_ramp_laplacian() {
        let img = Image::from_fn(4, 4, 1, |x, _, _| x as f64);
        let out = apply_negated_laplacian(&img, StencilSpec::unit());
        for y in 0..4 {
            assert_eq!(out.get(0, y, 0), -1.0);
            assert_eq!(out.get(1, y, 0), 0.0);
            assert_eq!(out.get(2, y, 0), 0.0);
            assert_eq!(out.get(3, y, 0), 1.0);
        }
    }

    #[test]
    fn single_pixel_reflects_to_zero() {
        let img = Image::filled(1, 1, 1, 7.0);
        assert_eq!(apply_negated_laplacian(&img, StencilSpec::unit()).data(), &[0.0]);
    }

    #[test]
    fn grid_spacing_scales_by_inverse_square() {
        let img = Image::from_fn(4, 1, 1, |x, _, _| (x * x) as f64);
        let unit = apply_negated_laplacian(&img, StencilSpec::unit());
        let coarse = apply_negated_laplacian(&img, StencilSpec::new(2.0).unwrap());
        for (a, b) in unit.data().iter().zip(coarse.data()) {
            assert_eq!(a / 4.0, *b);
        }
        assert!(StencilSpec::new(0.0).is_err());
    }

    #[test]
    fn full_and_empty_masks() {
        let img = Image::from_fn(6, 5, 1, |x, y, _| (x * 7 + y * y) as f64);
        let full = apply_inpainting_matrix(&img, &Mask::full(6, 5), StencilSpec::unit()).unwrap();
        assert_eq!(full, img);
        let empty = apply_inpainting_matrix(&img, &Mask::empty(6, 5), StencilSpec::unit()).unwrap();
        assert_eq!(empty, apply_negated_laplacian(&img, StencilSpec::unit()));

        let full_mask = Mask::full(6, 5);
        assert_eq!(apply_symmetrized_matrix(&img, &full_mask, StencilSpec::unit()).unwrap(), img);
        assert_eq!(symmetrized_rhs(&img, &full_mask, StencilSpec::unit()).unwrap(), img);
    }

    #[test]
    fn mask_rows_are_unit_rows() {
        let mask = Mask::from_indices(4, 4, [5, 10]);
        for &i in &[5usize, 10] {
            let mut e = Image::new(4, 4, 1);
            e.data_mut()[i] = 1.0;
            let out = apply_inpainting_matrix(&e, &mask, StencilSpec::unit()).unwrap();
            // Row i of A is e_i; the column may be nonzero at neighbouring unknown rows.
            assert_eq!(out.data()[i], 1.0);
            let mut row = Image::new(4, 4, 1);
            for j in 0..16 {
                let mut ej = Image::new(4, 4, 1);
                ej.data_mut()[j] = 1.0;
                row.data_mut()[j] = apply_inpainting_matrix(&ej, &mask, StencilSpec::unit())
                    .unwrap()
                    .data()[i];
            }
            assert_eq!(row, e);
        }
    }

    fn instance(w: usize, h: usize) -> impl Strategy<Value = (Image, Image, Mask)> {
        let n = w * h;
        (
            proptest::collection::vec(-100.0f64..100.0, n),
            proptest::collection::vec(-100.0f64..100.0, n),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(a, b, m)| {
                (
                    Image::from_plane(w, h, a).unwrap(),
                    Image::from_plane(w, h, b).unwrap(),
                    Mask::from_bits(w, h, m).unwrap(),
                )
            })
    }

    proptest! {
        #[test]
        fn reflecting_boundary_conserves_sum((x, _, _) in instance(7, 5)) {
            let out = apply_negated_laplacian(&x, StencilSpec::unit());
            let scale: f64 = x.data().iter().map(|v| v.abs()).sum();
            prop_assert!(out.data().iter().sum::<f64>().abs() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn symmetrized_matrix_is_symmetric((x, y, mask) in instance(8, 8)) {
            let ax = apply_symmetrized_matrix(&x, &mask, StencilSpec::unit()).unwrap();
            let ay = apply_symmetrized_matrix(&y, &mask, StencilSpec::unit()).unwrap();
            let lhs = dot(&ax, &y);
            let rhs = dot(&x, &ay);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
        }
    }
}
