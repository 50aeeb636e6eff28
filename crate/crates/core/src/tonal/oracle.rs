//! Dense direct solvers used to verify the iterative ones.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::image::{Image, Mask};
use crate::quality::mse;
use crate::tonal::TonalState;

/// Largest pixel count accepted by the dense solvers.
pub const DENSE_LIMIT: usize = 4096;

fn check_size(mask: &Mask) -> Result<()> {
    if mask.len() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            pixels: mask.len(),
            limit: DENSE_LIMIT,
        });
    }
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

fn neighbours(i: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (i % w, i / w);
    [
        (x > 0).then(|| i - 1),
        (x + 1 < w).then(|| i + 1),
        (y > 0).then(|| i - w),
        (y + 1 < h).then(|| i + w),
    ]
    .into_iter()
    .flatten()
}

/// Factorized `Ã` restricted to the non-mask pixels.
struct UnknownSystem {
    unknowns: Vec<usize>,
    chol: Option<Cholesky<f64, nalgebra::Dyn>>,
}

impl UnknownSystem {
    fn new(mask: &Mask) -> Result<Self> {
        let (w, h) = (mask.width(), mask.height());
        let unknowns: Vec<usize> = (0..mask.len()).filter(|&i| !mask.is_set(i)).collect();
        if unknowns.is_empty() {
            return Ok(UnknownSystem { unknowns, chol: None });
        }
        let mut index = vec![usize::MAX; mask.len()];
        for (k, &i) in unknowns.iter().enumerate() {
            index[i] = k;
        }
        let m = unknowns.len();
        let mut a = DMatrix::zeros(m, m);
        for (k, &i) in unknowns.iter().enumerate() {
            for j in neighbours(i, w, h) {
                a[(k, k)] += 1.0;
                if !mask.is_set(j) {
                    a[(k, index[j])] -= 1.0;
                }
            }
        }
        let chol = Cholesky::new(a)
            .ok_or_else(|| Error::InvalidConfig("inpainting matrix is not positive definite".into()))?;
        Ok(UnknownSystem {
            unknowns,
            chol: Some(chol),
        })
    }

    /// Coupling of unknown rows to mask pixel `j`: `-(L e_j)` on the unknowns.
    fn solve(&self, rhs: DMatrix<f64>) -> DMatrix<f64> {
        match &self.chol {
            Some(c) => c.solve(&rhs),
            None => rhs,
        }
    }
}

/// Inpainting by a direct solve of the symmetrized system.
pub fn dense_inpaint(f: &Image, mask: &Mask) -> Result<Image> {
    f.check_mask(mask)?;
    check_size(mask)?;
    let (w, h) = (f.width(), f.height());
    let sys = UnknownSystem::new(mask)?;
    let mut out = f.masked(mask);
    if sys.unknowns.is_empty() {
        return Ok(out);
    }
    let mut rhs = DMatrix::zeros(sys.unknowns.len(), f.channels());
    for (k, &i) in sys.unknowns.iter().enumerate() {
        for j in neighbours(i, w, h) {
            if mask.is_set(j) {
                for c in 0..f.channels() {
                    rhs[(k, c)] += f.plane(c)[j];
                }
            }
        }
    }
    let sol = sys.solve(rhs);
    for (k, &i) in sys.unknowns.iter().enumerate() {
        for c in 0..f.channels() {
            out.plane_mut(c)[i] = sol[(k, c)];
        }
    }
    Ok(out)
}

/// The inpainting operator `B` as a dense `N x |K|` matrix; column `k` is
/// the inpainting echo of the `k`-th mask pixel in row-major order.
pub fn dense_inpainting_operator(mask: &Mask) -> Result<DMatrix<f64>> {
    check_size(mask)?;
    let (w, h) = (mask.width(), mask.height());
    let known = mask.indices();
    let mut col = vec![usize::MAX; mask.len()];
    for (k, &i) in known.iter().enumerate() {
        col[i] = k;
    }
    let sys = UnknownSystem::new(mask)?;
    let mut b = DMatrix::zeros(mask.len(), known.len());
    for (k, &i) in known.iter().enumerate() {
        b[(i, k)] = 1.0;
    }
    if sys.unknowns.is_empty() {
        return Ok(b);
    }
    let mut rhs = DMatrix::zeros(sys.unknowns.len(), known.len());
    for (r, &i) in sys.unknowns.iter().enumerate() {
        for j in neighbours(i, w, h) {
            if mask.is_set(j) {
                rhs[(r, col[j])] += 1.0;
            }
        }
    }
    let sol = sys.solve(rhs);
    for (r, &i) in sys.unknowns.iter().enumerate() {
        for k in 0..known.len() {
            b[(i, k)] = sol[(r, k)];
        }
    }
    Ok(b)
}

/// The least-squares optimal mask values, from the dense operator `B`.
pub fn dense_tonal_oracle(f: &Image, mask: &Mask) -> Result<TonalState> {
    f.check_mask(mask)?;
    let b = dense_inpainting_operator(mask)?;
    let known = mask.indices();
    let n = mask.len();
    let mut g = Image::new(f.width(), f.height(), f.channels());
    let mut u = g.clone();
    let svd = b.clone().svd(true, true);
    for c in 0..f.channels() {
        let rhs = DMatrix::from_column_slice(n, 1, f.plane(c));
        let x = svd
            .solve(&rhs, 1e-13)
            .map_err(|e| Error::InvalidConfig(format!("least-squares solve failed: {e}")))?;
        let recon = &b * &x;
        for (k, &i) in known.iter().enumerate() {
            g.plane_mut(c)[i] = x[(k, 0)];
        }
        u.plane_mut(c).copy_from_slice(recon.as_slice());
    }
    Ok(TonalState {
        mse: mse(f, &u)?,
        g,
        u,
        history: Vec::new(),
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_mask_oracle_is_identity() {
        let f = Image::from_fn(5, 4, 1, |x, y, _| (x * y + 3) as f64);
        let s = dense_tonal_oracle(&f, &Mask::full(5, 4)).unwrap();
        assert!(s.g.data().iter().zip(f.data()).all(|(a, b)| (a - b).abs() < 1e-10));
        assert!(s.mse < 1e-20);
    }

    #[test]
    fn single_pixel_oracle_is_the_mean() {
        let f = Image::from_fn(7, 6, 1, |x, y, _| ((x * 5 + y * 11) % 9) as f64);
        let mean = f.data().iter().sum::<f64>() / 42.0;
        let s = dense_tonal_oracle(&f, &Mask::from_indices(7, 6, [20])).unwrap();
        assert!((s.g.data()[20] - mean).abs() < 1e-10);
    }

    #[test]
    fn echo_columns_are_partitions_of_unity() {
        // Constants are reproduced exactly, so the echoes sum to one everywhere.
        let m = Mask::from_indices(9, 7, [0, 10, 33, 62]);
        let b = dense_inpainting_operator(&m).unwrap();
        for r in 0..b.nrows() {
            let s: f64 = b.row(r).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_is_idempotent() {
        let f = Image::from_fn(12, 10, 1, |x, y, _| ((x * 7 + y * 3) % 13) as f64 * 9.0);
        let m = Mask::from_indices(12, 10, [5, 30, 47, 66, 91, 110]);
        let first = dense_tonal_oracle(&f, &m).unwrap();
        let second = dense_tonal_oracle(&first.u, &m).unwrap();
        for i in m.indices() {
            assert!((first.g.data()[i] - second.g.data()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_large_problems() {
        let f = Image::new(65, 64, 1);
        assert!(matches!(
            dense_tonal_oracle(&f, &Mask::full(65, 64)),
            Err(Error::TooLarge { .. })
        ));
    }
}
