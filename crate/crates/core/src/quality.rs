use std::fmt;

use crate::error::Result;
use crate::image::Image;

pub const PEAK: f64 = 255.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    /// Reconstruction is identical to the reference.
    Exact,
    Db(f64),
}

impl Psnr {
    pub fn from_mse(mse: f64) -> Self {
        if mse == 0.0 {
            Psnr::Exact
        } else {
            Psnr::Db(10.0 * (PEAK * PEAK / mse).log10())
        }
    }

    /// Decibel value, with `Exact` mapped to `+inf`.
    pub fn db(&self) -> f64 {
        match *self {
            Psnr::Exact => f64::INFINITY,
            Psnr::Db(v) => v,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Exact => f.write_str("exact"),
            Psnr::Db(v) => write!(f, "{v:.4}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr: Psnr,
}

impl QualityReport {
    pub fn from_mse(mse: f64) -> Self {
        QualityReport {
            mse,
            psnr: Psnr::from_mse(mse),
        }
    }
}

/// Mean squared error over all pixels and channels, summed in index order.
pub fn mse(reference: &Image, test: &Image) -> Result<f64> {
    reference.check_same_shape(test)?;
    if reference.data().is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.data().len() as f64)
}

pub fn quality(reference: &Image, test: &Image) -> Result<QualityReport> {
    Ok(QualityReport::from_mse(mse(reference, test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_images_are_exact() {
        let a = Image::filled(3, 3, 3, 12.0);
        let q = quality(&a, &a).unwrap();
        assert_eq!(q.mse, 0.0);
        assert_eq!(q.psnr, Psnr::Exact);
        assert_eq!(q.psnr.to_string(), "exact");
    }

    #[test]
    fn peak_error_is_zero_db() {
        let q = quality(&Image::new(4, 4, 1), &Image::filled(4, 4, 1, 255.0)).unwrap();
        assert_eq!(q.mse, 65025.0);
        assert_eq!(q.psnr, Psnr::Db(0.0));
    }

    #[test]
    fn unit_error_psnr() {
        let q = quality(&Image::new(4, 4, 1), &Image::filled(4, 4, 1, 1.0)).unwrap();
        assert_eq!(q.mse, 1.0);
        // 10 log10(65025)
        assert!((q.psnr.db() - 48.130_803_608_679_1).abs() < 1e-9);
    }

    #[test]
    fn mse_is_symmetric() {
        let a = Image::from_fn(5, 4, 2, |x, y, c| (x * y + c) as f64);
        let b = Image::from_fn(5, 4, 2, |x, y, c| (x + 3 * y) as f64 - c as f64);
        assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(quality(&Image::new(2, 2, 1), &Image::new(2, 3, 1)).is_err());
    }
}
