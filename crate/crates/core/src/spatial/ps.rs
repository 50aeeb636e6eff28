//! Probabilistic sparsification.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};
use crate::solver::{InpaintSolver, SolverConfig};
use crate::spatial::{rng, target_count};

#[derive(Clone, Debug, PartialEq)]
pub struct PsConfig {
    /// Fraction of the current mask drawn as removal candidates.
    pub candidate_fraction: f64,
    /// Fraction of the candidates removed for good, those with the lowest error.
    pub removal_fraction: f64,
    pub seed: u64,
}

impl Default for PsConfig {
    fn default() -> Self {
        PsConfig {
            candidate_fraction: 0.3,
            removal_fraction: 0.005,
            seed: 0,
        }
    }
}

impl PsConfig {
    pub fn validate(&self) -> Result<()> {
        let (p, q) = (self.candidate_fraction, self.removal_fraction);
        if !(q > 0.0 && q < p && p <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sparsification needs 0 < q < p <= 1, got p={p}, q={q}"
            )));
        }
        Ok(())
    }
}

/// Thins a full mask down to exactly `floor(d N)` pixels. Each step drops a
/// random candidate set, inpaints, and permanently removes the candidates
/// whose local error is smallest; the others return to the mask.
pub fn probabilistic_sparsify(f: &Image, density: f64, cfg: &PsConfig, solver: &SolverConfig) -> Result<Mask> {
    cfg.validate()?;
    let (w, h) = (f.width(), f.height());
    let target = target_count(density, w * h)?;
    let mut mask = Mask::full(w, h);
    let mut r = rng(cfg.seed);
    let mut u: Option<Image> = None;
    while mask.count() > target {
        let set = mask.indices();
        let k = ((cfg.candidate_fraction * set.len() as f64).ceil() as usize).clamp(1, set.len() - 1);
        let mut candidates: Vec<usize> = sample(&mut r, set.len(), k).into_iter().map(|j| set[j]).collect();
        candidates.sort_unstable();
        let mut trial = mask.clone();
        for &i in &candidates {
            trial.set(i, false);
        }
        let recon = InpaintSolver::new(&trial, solver)?.inpaint(f, u.as_ref())?.0;
        let errors = f.squared_error_map(&recon)?;
        let remove = ((cfg.removal_fraction * k as f64).round() as usize).max(1).min(set.len() - target);
        candidates.sort_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(a.cmp(&b)));
        for &i in candidates.iter().take(remove) {
            mask.set(i, false);
        }
        u = Some(recon);
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_density_is_a_noop() {
        let f = Image::from_fn(6, 6, 1, |x, y, _| (x + y) as f64);
        let m = probabilistic_sparsify(&f, 1.0, &PsConfig::default(), &SolverConfig::default()).unwrap();
        assert!(m.is_full());
    }

    #[test]
    fn reaches_the_exact_count() {
        let f = Image::from_fn(24, 24, 1, |x, y, _| ((x * 13 + y * 7) % 29) as f64 * 8.0);
        let cfg = PsConfig {
            removal_fraction: 0.05,
            ..PsConfig::default()
        };
        let m = probabilistic_sparsify(&f, 0.1, &cfg, &SolverConfig::default()).unwrap();
        assert_eq!(m.count(), 57);
    }

    #[test]
    fn rejects_bad_fractions() {
        let cfg = PsConfig {
            candidate_fraction: 0.1,
            removal_fraction: 0.2,
            seed: 0,
        };
        assert!(cfg.validate().is_err());
    }
}
