//! Mask construction: Delaunay densification and the comparison baselines.

pub mod analytic;
pub mod densify;
pub mod history;
pub mod nlpe;
pub mod ps;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Mask;

pub use analytic::{analytic_mask, gaussian_blur, laplacian_magnitude, AnalyticConfig, Dither};
pub use densify::{delaunay_densify, Buckets, DensificationConfig, Densified, InitialMask};
pub use history::{write_history_csv, IterationRecord};
pub use nlpe::{nlpe, NlpeConfig, NlpeOutcome};
pub use ps::{probabilistic_sparsify, PsConfig};

/// `floor(d * n)`, the exact pixel budget for density `d`.
pub fn target_count(density: f64, pixels: usize) -> Result<usize> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidConfig(format!("density {density} must lie in (0, 1]")));
    }
    let t = (density * pixels as f64).floor() as usize;
    if t == 0 {
        return Err(Error::InvalidConfig(format!(
            "density {density} selects no pixel of {pixels}"
        )));
    }
    Ok(t.min(pixels))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random mask with exactly `count` pixels.
pub fn random_mask(width: usize, height: usize, count: usize, seed: u64) -> Result<Mask> {
    let n = width * height;
    if count > n {
        return Err(Error::InvalidConfig(format!("cannot place {count} pixels in {n}")));
    }
    let mut r = rng(seed);
    Ok(Mask::from_indices(width, height, sample(&mut r, n, count).into_iter()))
}

/// Adds the highest-scoring free pixels or removes the lowest-scoring set
/// ones until `mask` holds exactly `count` pixels. Ties go to the lower index.
pub(crate) fn correct_count(mask: &mut Mask, score: &[f64], count: usize) {
    let current = mask.count();
    if current < count {
        let mut free: Vec<usize> = (0..mask.len()).filter(|&i| !mask.is_set(i)).collect();
        free.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
        for &i in free.iter().take(count - current) {
            mask.set(i, true);
        }
    } else if current > count {
        let mut set = mask.indices();
        set.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
        for &i in set.iter().take(current - count) {
            mask.set(i, false);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_count_floors() {
        assert_eq!(target_count(0.05, 4096).unwrap(), 204);
        assert_eq!(target_count(1.0, 10).unwrap(), 10);
        assert!(target_count(0.01, 50).is_err());
        assert!(target_count(0.0, 50).is_err());
        assert!(target_count(1.5, 50).is_err());
    }

    #[test]
    fn random_mask_is_exact_and_deterministic() {
        let a = random_mask(30, 20, 77, 5).unwrap();
        assert_eq!(a.count(), 77);
        assert_eq!(a, random_mask(30, 20, 77, 5).unwrap());
        assert_ne!(a, random_mask(30, 20, 77, 6).unwrap());
    }

    #[test]
    fn count_correction_hits_the_target() {
        let score: Vec<f64> = (0..20).map(|i| (i % 7) as f64).collect();
        let mut m = Mask::from_indices(5, 4, [0, 1, 2]);
        correct_count(&mut m, &score, 6);
        assert_eq!(m.count(), 6);
        assert!(m.is_set(6) && m.is_set(13));
        correct_count(&mut m, &score, 2);
        assert_eq!(m.count(), 2);
    }
}
