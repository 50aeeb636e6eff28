//! Multigrid with ORAS smoothing and reduced full multigrid initialization.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::image::{Image, Mask};
use crate::solver::config::{Levels, MultigridConfig, MultigridMode, SolverConfig};
use crate::solver::oras::Level;
use crate::stencil::StencilSpec;
use crate::transfer::{coarse_dim, prolongate_plane, restrict_mask_bits, restrict_plane};

/// Levels from fine (index 0) to coarse. Level `l` uses grid spacing `2^l`.
#[derive(Clone, Debug)]
pub struct GridHierarchy {
    levels: Vec<Level>,
}

impl GridHierarchy {
    pub fn build(mask: &Mask, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        let max_levels = match config.multigrid.levels {
            Levels::Auto => usize::MAX,
            Levels::Fixed(n) => n,
        };
        let mut levels = Vec::new();
        let mut current = mask.clone();
        let mut h = 1.0;
        loop {
            let (w, ht) = (current.width(), current.height());
            let next = restrict_mask_bits(&current);
            levels.push(Level::new(current, StencilSpec::new(h)?, &config.oras)?);
            let coarsen = match config.multigrid.levels {
                Levels::Auto => w.max(ht) > config.oras.block_size,
                Levels::Fixed(_) => levels.len() < max_levels,
            };
            if !coarsen || (w == 1 && ht == 1) {
                break;
            }
            current = next;
            h *= 2.0;
        }
        Ok(GridHierarchy { levels })
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn finest(&self) -> &Level {
        &self.levels[0]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverReport {
    pub vcycles: usize,
    /// ORAS sweeps performed on each level, finest first.
    pub sweeps_per_level: Vec<usize>,
    pub local_iterations: usize,
    /// Relative residual of the symmetrized system, before the first V-cycle and after each one.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub seconds: f64,
}

impl SolverReport {
    fn merge(&mut self, other: SolverReport) {
        self.vcycles = self.vcycles.max(other.vcycles);
        if self.sweeps_per_level.len() < other.sweeps_per_level.len() {
            self.sweeps_per_level.resize(other.sweeps_per_level.len(), 0);
        }
        for (a, b) in self.sweeps_per_level.iter_mut().zip(&other.sweeps_per_level) {
            *a += b;
        }
        self.local_iterations += other.local_iterations;
        if self.residual_history.len() < other.residual_history.len() {
            self.residual_history.resize(other.residual_history.len(), 0.0);
        }
        for (a, &b) in self.residual_history.iter_mut().zip(&other.residual_history) {
            *a = a.max(b);
        }
        self.converged &= other.converged;
        self.seconds += other.seconds;
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residual_history.last().copied()
    }
}

struct Work {
    sweeps: Vec<usize>,
    local_iterations: usize,
}

/// Prepared multigrid solver for one mask. Solves `A x = b`, where `b`
/// holds the prescribed values at mask pixels and the right-hand side of
/// `L x = b` elsewhere.
#[derive(Clone, Debug)]
pub struct InpaintSolver {
    hierarchy: GridHierarchy,
    config: SolverConfig,
}

impl InpaintSolver {
    pub fn new(mask: &Mask, config: &SolverConfig) -> Result<Self> {
        Ok(InpaintSolver {
            hierarchy: GridHierarchy::build(mask, config)?,
            config: config.clone(),
        })
    }

    pub fn mask(&self) -> &Mask {
        self.hierarchy.finest().mask()
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn hierarchy(&self) -> &GridHierarchy {
        &self.hierarchy
    }

    pub fn width(&self) -> usize {
        self.hierarchy.finest().width()
    }

    pub fn height(&self) -> usize {
        self.hierarchy.finest().height()
    }

    /// Same solver with a different multigrid schedule; the prepared levels are reused.
    pub fn with_multigrid(&self, multigrid: MultigridConfig) -> Result<Self> {
        multigrid.validate()?;
        let mut out = self.clone();
        out.config.multigrid = multigrid;
        Ok(out)
    }

    /// Solves one plane. With `warm` set, `x` is the starting iterate and the
    /// coarse-to-fine initialization is skipped.
    pub fn solve_plane(&self, b: &[f64], x: &mut [f64], warm: bool) -> SolverReport {
        let start = Instant::now();
        let mg = &self.config.multigrid;
        let fine = self.hierarchy.finest();
        let n = fine.width() * fine.height();
        assert_eq!(b.len(), n, "rhs length must match the grid");
        assert_eq!(x.len(), n, "iterate length must match the grid");

        let mut work = Work {
            sweeps: vec![0; self.hierarchy.len()],
            local_iterations: 0,
        };
        if !warm {
            match mg.mode {
                MultigridMode::ReducedFmg => self.cascade(b, x, &mut work),
                MultigridMode::VCycleOnly => initial_guess(fine.mask(), b, x),
            }
        }
        fine.enforce_mask(x, b);

        let norm = symmetrized_rhs_norm(fine, b);
        let mut r = vec![0.0; n];
        let relative = |x: &[f64], r: &mut [f64]| {
            let rr = fine.residual(x, b, r).sqrt();
            if norm > 0.0 {
                rr / norm
            } else {
                rr
            }
        };

        let mut report = SolverReport::default();
        match mg.tolerance {
            Some(tol) => {
                let mut rel = relative(x, &mut r);
                report.residual_history.push(rel);
                while rel > tol && report.vcycles < mg.max_vcycles {
                    self.vcycle(0, x, b, &mut work);
                    report.vcycles += 1;
                    rel = relative(x, &mut r);
                    report.residual_history.push(rel);
                }
                report.converged = rel <= tol;
            }
            None => {
                for _ in 0..mg.vcycles {
                    self.vcycle(0, x, b, &mut work);
                    report.vcycles += 1;
                }
                report.converged = true;
            }
        }
        report.sweeps_per_level = work.sweeps;
        report.local_iterations = work.local_iterations;
        report.seconds = start.elapsed().as_secs_f64();
        report
    }

    /// Homogeneous diffusion inpainting of `f` from its mask pixels, channel by channel.
    pub fn inpaint(&self, f: &Image, init: Option<&Image>) -> Result<(Image, SolverReport)> {
        f.check_mask(self.mask())?;
        if let Some(init) = init {
            f.check_same_shape(init)?;
        }
        let b = f.masked(self.mask());
        let mut out = match init {
            Some(u) => u.clone(),
            None => Image::new(f.width(), f.height(), f.channels()),
        };
        let mut report: Option<SolverReport> = None;
        for c in 0..f.channels() {
            let rep = self.solve_plane(b.plane(c), out.plane_mut(c), init.is_some());
            match report.as_mut() {
                Some(r) => r.merge(rep),
                None => report = Some(rep),
            }
        }
        Ok((out, report.unwrap_or_default()))
    }

    /// Coarse-to-fine initialization: start on the coarsest level, then
    /// prolongate and pre-smooth once per level, without V-cycles in between.
    fn cascade(&self, b: &[f64], x: &mut [f64], work: &mut Work) {
        let levels = self.hierarchy.levels();
        let mut rhs = vec![b.to_vec()];
        for l in 1..levels.len() {
            let coarse = restrict_problem(&levels[l - 1], &rhs[l - 1], &levels[l]);
            rhs.push(coarse);
        }
        let top = levels.len() - 1;
        let mut cur = vec![0.0; levels[top].width() * levels[top].height()];
        initial_guess(levels[top].mask(), &rhs[top], &mut cur);
        for l in (0..levels.len()).rev() {
            let level = &levels[l];
            if l < top {
                let coarse = &levels[l + 1];
                let mut fine = vec![0.0; level.width() * level.height()];
                prolongate_plane(
                    &cur,
                    coarse.width(),
                    coarse.height(),
                    &mut fine,
                    level.width(),
                    level.height(),
                    |dst, v| *dst = v,
                );
                cur = fine;
            }
            self.smooth(l, &mut cur, &rhs[l], self.config.multigrid.pre_smooth.max(1), work);
        }
        x.copy_from_slice(&cur);
    }

    fn smooth(&self, l: usize, x: &mut [f64], b: &[f64], count: usize, work: &mut Work) {
        let level = &self.hierarchy.levels()[l];
        let mut r = vec![0.0; x.len()];
        for _ in 0..count {
            let stats = level.sweep(x, b, &self.config.oras, &mut r);
            work.sweeps[l] += 1;
            work.local_iterations += stats.local_iterations;
        }
        level.enforce_mask(x, b);
    }

    fn vcycle(&self, l: usize, x: &mut [f64], b: &[f64], work: &mut Work) {
        let mg = &self.config.multigrid;
        let levels = self.hierarchy.levels();
        self.smooth(l, x, b, mg.pre_smooth, work);
        if l + 1 < levels.len() {
            let level = &levels[l];
            let coarse = &levels[l + 1];
            let mut r = vec![0.0; x.len()];
            level.residual(x, b, &mut r);
            let (cw, ch) = (coarse.width(), coarse.height());
            let mut rc = vec![0.0; cw * ch];
            restrict_plane(&r, level.width(), level.height(), &mut rc);
            for (v, &known) in rc.iter_mut().zip(coarse.mask().bits()) {
                if known {
                    *v = 0.0;
                }
            }
            let mut ec = vec![0.0; cw * ch];
            self.vcycle(l + 1, &mut ec, &rc, work);
            let bits = level.mask().bits();
            let mut k = 0;
            prolongate_plane(&ec, cw, ch, x, level.width(), level.height(), |dst, v| {
                if !bits[k] {
                    *dst += v;
                }
                k += 1;
            });
        }
        self.smooth(l, x, b, mg.post_smooth, work);
    }
}

/// Mask values at mask pixels and their mean elsewhere.
fn initial_guess(mask: &Mask, b: &[f64], x: &mut [f64]) {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (&v, &known) in b.iter().zip(mask.bits()) {
        if known {
            sum += v;
            count += 1;
        }
    }
    let mean = if count > 0 { sum / count as f64 } else { 0.0 };
    for ((xi, &bi), &known) in x.iter_mut().zip(b).zip(mask.bits()) {
        *xi = if known { bi } else { mean };
    }
}

/// Coarse version of a problem: coarse mask pixels average the fine mask
/// values they cover, other pixels average the fine right-hand side.
fn restrict_problem(fine: &Level, b: &[f64], coarse: &Level) -> Vec<f64> {
    let (w, h) = (fine.width(), fine.height());
    let cw = coarse_dim(w);
    let ch = coarse_dim(h);
    let mut mask_sum = vec![0.0; cw * ch];
    let mut mask_n = vec![0usize; cw * ch];
    let mut all_sum = vec![0.0; cw * ch];
    restrict_plane(b, w, h, &mut all_sum);
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if fine.mask().is_set(i) {
                let c = (y / 2) * cw + x / 2;
                mask_sum[c] += b[i];
                mask_n[c] += 1;
            }
        }
    }
    (0..cw * ch)
        .map(|c| {
            if coarse.mask().is_set(c) {
                mask_sum[c] / mask_n[c] as f64
            } else {
                all_sum[c]
            }
        })
        .collect()
}

/// `|C̃ b|` for the problem `A x = b`, the normalizer of the stopping rule.
fn symmetrized_rhs_norm(level: &Level, b: &[f64]) -> f64 {
    let (w, h) = (level.width(), level.height());
    let inv_h2 = level.stencil().inv_h2();
    let bits = level.mask().bits();
    let mut sum = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let v = if bits[i] {
                b[i]
            } else {
                let mut s = b[i];
                let mut add = |j: usize| {
                    if bits[j] {
                        s += inv_h2 * b[j];
                    }
                };
                if x > 0 {
                    add(i - 1);
                }
                if x + 1 < w {
                    add(i + 1);
                }
                if y > 0 {
                    add(i - w);
                }
                if y + 1 < h {
                    add(i + w);
                }
                s
            };
            sum += v * v;
        }
    }
    sum.sqrt()
}

/// Inpaints `f` from its values on `mask`. With `init`, V-cycles start from it directly.
pub fn inpaint(f: &Image, mask: &Mask, config: &SolverConfig, init: Option<&Image>) -> Result<(Image, SolverReport)> {
    f.check_mask(mask)?;
    InpaintSolver::new(mask, config)?.inpaint(f, init)
}

/// One V-cycle for the inpainting problem of `f` on `mask`, starting from `u`.
pub fn vcycle(u: &Image, f: &Image, mask: &Mask, config: &SolverConfig) -> Result<Image> {
    let cfg = SolverConfig {
        multigrid: MultigridConfig {
            tolerance: None,
            vcycles: 1,
            ..config.multigrid.clone()
        },
        oras: config.oras.clone(),
    };
    let (out, _) = inpaint(f, mask, &cfg, Some(u))?;
    Ok(out)
}
