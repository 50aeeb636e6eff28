//! Cheap initializations: neighbourhood error balancing and the Voronoi
//! Richardson iteration.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{jump_flood_voronoi, voronoi_weights, VoronoiLabels, WeightKind};
use crate::image::{Image, Mask};
use crate::quality::mse;
use crate::solver::{InpaintSolver, SolverConfig};
use crate::tonal::{finish, TonalRecord, TonalState};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitScheme {
    None,
    NeighborBalance,
    VoronoiRichardson,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub scheme: InitScheme,
    /// Richardson step size.
    pub tau: f64,
    pub weights: WeightKind,
    pub max_steps: usize,
    /// Stop as soon as a step raises the MSE.
    pub stop_on_increase: bool,
    /// Inpainting per step, warm-started from the previous one.
    pub inner: SolverConfig,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            scheme: InitScheme::VoronoiRichardson,
            tau: 1.0,
            weights: WeightKind::InverseLogDistance,
            max_steps: 50,
            stop_on_increase: true,
            inner: SolverConfig::default(),
        }
    }
}

impl InitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidConfig("tau must be positive".into()));
        }
        self.inner.validate()
    }
}

/// Adds to each mask value the mean signed error `f - u` over its 3x3
/// neighbourhood (clipped at the image border). Keeps `start` if that is better.
pub fn neighbor_balance_init(f: &Image, mask: &Mask, start: &TonalState) -> Result<TonalState> {
    let u = &start.u;
    f.check_same_shape(u)?;
    f.check_mask(mask)?;
    let begin = Instant::now();
    let (w, h) = (f.width(), f.height());
    let mut g = Image::new(w, h, f.channels());
    for c in 0..f.channels() {
        let (fp, up) = (f.plane(c), u.plane(c));
        let gp = g.plane_mut(c);
        for i in mask.indices() {
            let (x, y) = (i % w, i / w);
            let mut sum = 0.0;
            let mut n = 0usize;
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    sum += fp[j] - up[j];
                    n += 1;
                }
            }
            gp[i] = up[i] + sum / n as f64;
        }
    }
    let balanced = TonalState::new(f, mask, &g)?;
    let record = TonalRecord {
        iteration: 1,
        mse: balanced.mse,
        seconds: begin.elapsed().as_secs_f64(),
        inner_vcycles: 0,
    };
    finish(f, mask, start, balanced.g, vec![record], 1)
}

/// Richardson iteration `g <- g + tau (C W f - C W u)` with `u` the
/// inpainting of `g` and `W` a weighted average over each Voronoi cell.
/// Starts from `g = f` on the mask and returns the lowest-MSE step.
pub fn voronoi_richardson_init(
    f: &Image,
    mask: &Mask,
    cfg: &InitConfig,
    labels: Option<&VoronoiLabels>,
) -> Result<TonalState> {
    cfg.validate()?;
    f.check_mask(mask)?;
    let start = Instant::now();
    let owned;
    let labels = match labels {
        Some(l) => l,
        None => {
            owned = jump_flood_voronoi(mask)?;
            &owned
        }
    };
    let w = f.width();
    let seed_index: Vec<usize> = labels.seeds().iter().map(|&(x, y)| y * w + x).collect();
    let weights = voronoi_weights(labels, cfg.weights);
    let solver = InpaintSolver::new(mask, &cfg.inner)?;

    let initial = TonalState::from_image(f, mask)?;
    let mut g = initial.g.clone();
    let mut u = initial.u.clone();
    let mut prev = initial.mse;
    let mut best = prev;
    let mut best_g = g.clone();
    let mut history = Vec::new();
    let mut cycles = 0;
    let mut steps = 0;
    while steps < cfg.max_steps {
        for c in 0..f.channels() {
            let mut delta = vec![0.0; labels.seed_count()];
            let (fp, up) = (f.plane(c), u.plane(c));
            for (p, &l) in labels.labels().iter().enumerate() {
                delta[l as usize] += weights[p] * (fp[p] - up[p]);
            }
            let gp = g.plane_mut(c);
            for (k, &s) in seed_index.iter().enumerate() {
                gp[s] += cfg.tau * delta[k];
            }
        }
        let (v, report) = solver.inpaint(&g, Some(&u))?;
        u = v;
        cycles += report.vcycles;
        steps += 1;
        let current = mse(f, &u)?;
        history.push(TonalRecord {
            iteration: steps,
            mse: current,
            seconds: start.elapsed().as_secs_f64(),
            inner_vcycles: cycles,
        });
        if current < best {
            best = current;
            best_g = g.clone();
        }
        if cfg.stop_on_increase && current > prev {
            break;
        }
        prev = current;
    }
    finish(f, mask, &initial, best_g, history, steps)
}
