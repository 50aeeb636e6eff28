//! Conjugate gradients on the normal equations `B^T B g = B^T f`.

use std::time::Instant;

use crate::error::Result;
use crate::image::{Image, Mask};
use crate::solver::SolverConfig;
use crate::tonal::operator::TonalOperator;
use crate::tonal::{dot, finish, TonalRecord, TonalState, TonalStop};

#[derive(Clone, Debug, PartialEq)]
pub struct CgnrConfig {
    /// Defaults to a 0.01% threshold: a CG step can improve by less than
    /// 0.1% while the iterate is still more than 0.1% above the optimum.
    pub stop: TonalStop,
    /// Inner inpainting per application of `B` or `B^T`. Solves start cold,
    /// so a fixed single V-cycle leaves the gradient too inexact.
    pub inner: SolverConfig,
}

impl Default for CgnrConfig {
    fn default() -> Self {
        CgnrConfig {
            stop: TonalStop {
                min_relative_improvement: 1e-4,
                ..TonalStop::default()
            },
            inner: SolverConfig::default().with_tolerance(1e-6),
        }
    }
}

/// CGNR from `init`. The primal residual `f - B g` is updated alongside the
/// iterate, so every step reports its MSE; the best iterate is returned.
/// Inner solves start cold: search directions are no good initial guesses.
pub fn cgnr_tonal(f: &Image, mask: &Mask, init: &TonalState, cfg: &CgnrConfig) -> Result<TonalState> {
    f.check_same_shape(&init.g)?;
    let start = Instant::now();
    let op = TonalOperator::new(mask, &cfg.inner)?;
    let len = f.data().len() as f64;
    let mut g = init.g.masked(mask);
    let mut cycles = 0;

    let mut u = Image::new(f.width(), f.height(), f.channels());
    cycles += op.apply_b(&g, &mut u, false);
    let mut r = f.clone();
    for (ri, ui) in r.data_mut().iter_mut().zip(u.data()) {
        *ri -= ui;
    }
    let mut w = Image::new(f.width(), f.height(), f.channels());
    let mut z = w.clone();
    cycles += op.apply_bt(&r, &mut w, &mut z, false);
    let mut p = z.clone();
    let mut zz = dot(z.data(), z.data());

    let mut best_g = g.clone();
    let mut best = dot(r.data(), r.data()) / len;
    let mut prev = best;
    let mut history = Vec::new();
    let mut q = Image::new(f.width(), f.height(), f.channels());
    let mut iterations = 0;
    while iterations < cfg.stop.max_iterations && zz > 0.0 {
        cycles += op.apply_b(&p, &mut q, false);
        let qq = dot(q.data(), q.data());
        if !(qq > 0.0) {
            break;
        }
        let alpha = zz / qq;
        for (gi, pi) in g.data_mut().iter_mut().zip(p.data()) {
            *gi += alpha * pi;
        }
        for (ri, qi) in r.data_mut().iter_mut().zip(q.data()) {
            *ri -= alpha * qi;
        }
        iterations += 1;
        let current = dot(r.data(), r.data()) / len;
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
        cycles += op.apply_bt(&r, &mut w, &mut z, false);
        let zz_new = dot(z.data(), z.data());
        let beta = zz_new / zz;
        for (pi, zi) in p.data_mut().iter_mut().zip(z.data()) {
            *pi = zi + beta * *pi;
        }
        zz = zz_new;
    }
    finish(f, mask, init, best_g, history, iterations)
}
