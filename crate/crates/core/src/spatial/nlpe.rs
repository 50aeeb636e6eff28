//! Nonlocal pixel exchange.

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};
use crate::quality::mse;
use crate::solver::{InpaintSolver, SolverConfig};
use crate::spatial::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct NlpeConfig {
    /// One cycle attempts as many swaps as the mask has pixels.
    pub cycles: usize,
    /// Size of the random non-mask subset searched for the worst pixel.
    pub candidates: usize,
    pub seed: u64,
}

impl Default for NlpeConfig {
    fn default() -> Self {
        NlpeConfig {
            cycles: 5,
            candidates: 30,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NlpeOutcome {
    pub mask: Mask,
    pub reconstruction: Image,
    pub mse: f64,
    pub initial_mse: f64,
    pub attempts: usize,
    pub accepted: usize,
}

/// Moves random mask pixels to high-error positions, keeping a move only
/// when it lowers the reconstruction MSE.
pub fn nlpe(f: &Image, mask: &Mask, cfg: &NlpeConfig, solver: &SolverConfig) -> Result<NlpeOutcome> {
    if cfg.cycles == 0 || cfg.candidates == 0 {
        return Err(Error::InvalidConfig("nlpe needs at least one cycle and one candidate".into()));
    }
    f.check_mask(mask)?;
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = mask.len();
    let mut mask = mask.clone();
    let (mut u, _) = InpaintSolver::new(&mask, solver)?.inpaint(f, None)?;
    let mut current = mse(f, &u)?;
    let initial_mse = current;
    let mut out = NlpeOutcome {
        mask: mask.clone(),
        reconstruction: u.clone(),
        mse: current,
        initial_mse,
        attempts: 0,
        accepted: 0,
    };
    if mask.is_full() {
        return Ok(out);
    }
    let mut errors = f.squared_error_map(&u)?;
    let mut r = rng(cfg.seed);
    let per_cycle = mask.count();
    for _ in 0..cfg.cycles * per_cycle {
        out.attempts += 1;
        if current == 0.0 {
            break;
        }
        let set = mask.indices();
        let free: Vec<usize> = (0..n).filter(|&i| !mask.is_set(i)).collect();
        let from = set[r.gen_range(0..set.len())];
        let k = cfg.candidates.min(free.len());
        let to = sample(&mut r, free.len(), k)
            .into_iter()
            .map(|j| free[j])
            .max_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(b.cmp(&a)))
            .expect("at least one free pixel");
        if errors[to] == 0.0 {
            continue;
        }
        let mut trial = mask.clone();
        trial.set(from, false);
        trial.set(to, true);
        let (v, _) = InpaintSolver::new(&trial, solver)?.inpaint(f, Some(&u))?;
        let e = mse(f, &v)?;
        if e < current {
            mask = trial;
            u = v;
            current = e;
            errors = f.squared_error_map(&u)?;
            out.accepted += 1;
        }
    }
    out.mask = mask;
    out.reconstruction = u;
    out.mse = current;
    Ok(out)
}
