//! Restricted additive Schwarz for the tonal normal equations.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::image::{Image, Mask};
use crate::solver::{cg_solve, BlockDecomposition, CgStop, FnOperator, InpaintSolver, SolverConfig, WeightScheme};
use crate::tonal::operator::TonalOperator;
use crate::tonal::{dot, finish, TonalRecord, TonalState, TonalStop};

#[derive(Clone, Debug, PartialEq)]
pub struct RasTonalConfig {
    pub block_size: usize,
    pub overlap: usize,
    /// Cap on CG iterations for each local normal-equation solve.
    pub local_max_iters: usize,
    /// Relative residual at which local solves stop early.
    pub local_tolerance: f64,
    /// Global inpainting per application of `B` or `B^T`, warm-started.
    pub inner: SolverConfig,
    /// Inpainting inside the blocks; only affects the quality of the local
    /// corrections, not the fixed point.
    pub local_inner: SolverConfig,
    pub stop: TonalStop,
}

impl Default for RasTonalConfig {
    fn default() -> Self {
        RasTonalConfig {
            block_size: 64,
            overlap: 6,
            local_max_iters: 30,
            local_tolerance: 1e-2,
            inner: SolverConfig::default().with_tolerance(1e-6),
            local_inner: SolverConfig::default().with_fixed_cycles(1),
            stop: TonalStop::default(),
        }
    }
}

/// A block with its own inpainting problem: the mask restricted to the
/// block, with reflecting boundaries on all block sides.
struct LocalProblem {
    block: usize,
    op: TonalOperator,
}

/// RAS outer iterations from `init`: global residual `B^T (f - B g)`,
/// independent local solves of `B_i^T B_i v_i = R_i r`, and an averaged
/// update of the mask values covered by several blocks.
pub fn ras_tonal(f: &Image, mask: &Mask, init: &TonalState, cfg: &RasTonalConfig) -> Result<TonalState> {
    f.check_same_shape(&init.g)?;
    let start = Instant::now();
    let (width, height) = (f.width(), f.height());
    let op = TonalOperator::new(mask, &cfg.inner)?;
    let decomposition = BlockDecomposition::new(width, height, cfg.block_size, cfg.overlap, WeightScheme::Average)?;

    let mut locals = Vec::new();
    for (k, b) in decomposition.blocks().iter().enumerate() {
        let mut bits = vec![false; b.len()];
        for ly in 0..b.height {
            for lx in 0..b.width {
                bits[ly * b.width + lx] = mask.is_set(b.global_index(width, lx, ly));
            }
        }
        if !bits.iter().any(|&x| x) {
            continue;
        }
        let local = Mask::from_bits(b.width, b.height, bits)?;
        locals.push(LocalProblem {
            block: k,
            op: TonalOperator::from_solver(InpaintSolver::new(&local, &cfg.local_inner)?),
        });
    }

    let len = f.data().len() as f64;
    let mut g = init.g.masked(mask);
    let mut u = init.u.clone();
    let mut w = Image::new(width, height, f.channels());
    let mut res = w.clone();
    let mut residual = f.clone();
    let mut cycles = 0;
    let mut warm_w = false;

    let objective = |u: &Image| -> f64 {
        f.data().iter().zip(u.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / len
    };
    let mut prev = objective(&u);
    let mut best = prev;
    let mut best_g = g.clone();
    let mut history = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.stop.max_iterations {
        for ((r, a), b) in residual.data_mut().iter_mut().zip(f.data()).zip(u.data()) {
            *r = a - b;
        }
        cycles += op.apply_bt(&residual, &mut w, &mut res, warm_w);
        warm_w = true;

        let jobs: Vec<(usize, usize)> = (0..locals.len())
            .flat_map(|l| (0..f.channels()).map(move |c| (l, c)))
            .collect();
        let solved: Vec<Vec<f64>> = jobs
            .par_iter()
            .map(|&(l, c)| {
                let local = &locals[l];
                let block = &decomposition.blocks()[local.block];
                let mut rhs = vec![0.0; block.len()];
                block.gather(width, res.plane(c), &mut rhs);
                if dot(&rhs, &rhs) == 0.0 {
                    return Vec::new();
                }
                let normal = FnOperator::new(block.len(), |x: &[f64], y: &mut [f64]| {
                    let mut bx = vec![0.0; x.len()];
                    local.op.apply_b_plane(x, &mut bx, false);
                    let mut aux = vec![0.0; x.len()];
                    local.op.apply_bt_plane(&bx, &mut aux, y, false);
                });
                let mut v = vec![0.0; block.len()];
                cg_solve(&normal, &rhs, &mut v, CgStop::Relative(cfg.local_tolerance), cfg.local_max_iters);
                v
            })
            .collect();

        for c in 0..f.channels() {
            let mut corrections = vec![Vec::new(); decomposition.len()];
            for (&(l, ch), v) in jobs.iter().zip(&solved) {
                if ch == c {
                    corrections[locals[l].block] = v.clone();
                }
            }
            decomposition.accumulate(&corrections, g.plane_mut(c));
        }
        g = g.masked(mask);
        cycles += op.apply_b(&g, &mut u, true);
        iterations += 1;
        let current = objective(&u);
        history.push(TonalRecord {
            iteration: iterations,
            mse: current,
            seconds: start.elapsed().as_secs_f64(),
            inner_vcycles: cycles,
        });
        if current < best {
            best = current;
            best_g = g.clone();
        }
        if cfg.stop.reached(prev, current) {
            break;
        }
        prev = current;
    }
    finish(f, mask, init, best_g, history, iterations)
}
