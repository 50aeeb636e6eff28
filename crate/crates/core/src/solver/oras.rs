//! Optimized restricted additive Schwarz smoothing for `A x = b`.
//!
//! `b` carries the prescribed value at mask pixels and the right-hand side of
//! `L x = b` elsewhere. Once the mask rows hold, the correction `v` vanishes
//! at mask pixels, so each block solves the symmetric system `Ã_i v = R_i r`
//! with a Robin closure wherever a stencil neighbour falls outside the block
//! but inside the image.

use rayon::prelude::*;

use crate::error::Result;
use crate::image::{Image, Mask};
use crate::solver::cg::{cg_solve, dot, CgStop, LinearOperator};
use crate::solver::config::OrasConfig;
use crate::solver::decomposition::{Block, BlockDecomposition, WeightScheme};
use crate::stencil::{laplacian_at, StencilSpec};

const LEFT: u8 = 1;
const RIGHT: u8 = 2;
const UP: u8 = 4;
const DOWN: u8 = 8;

/// Local block matrix with Robin-closed inner boundaries.
#[derive(Clone, Debug)]
pub(crate) struct LocalOperator {
    width: usize,
    diag: Vec<f64>,
    /// Bit set of in-block unknown neighbours.
    links: Vec<u8>,
    inv_h2: f64,
    unknowns: usize,
}

impl LocalOperator {
    fn build(block: &Block, grid_w: usize, grid_h: usize, mask: &Mask, stencil: StencilSpec, alpha: f64) -> Self {
        let inv_h2 = stencil.inv_h2();
        let ah = alpha * stencil.h();
        let robin = 2.0 * ah / (1.0 + ah);
        let mut diag = vec![1.0; block.len()];
        let mut links = vec![0u8; block.len()];
        let mut unknowns = 0;
        for ly in 0..block.height {
            for lx in 0..block.width {
                let k = ly * block.width + lx;
                let gx = block.x0 + lx;
                let gy = block.y0 + ly;
                if mask.get(gx, gy) {
                    continue;
                }
                unknowns += 1;
                let mut d = 0.0;
                let mut bits = 0u8;
                let neighbours = [
                    (gx > 0, lx > 0, gx.wrapping_sub(1), gy, LEFT),
                    (gx + 1 < grid_w, lx + 1 < block.width, gx + 1, gy, RIGHT),
                    (gy > 0, ly > 0, gx, gy.wrapping_sub(1), UP),
                    (gy + 1 < grid_h, ly + 1 < block.height, gx, gy + 1, DOWN),
                ];
                for (in_image, in_block, nx, ny, bit) in neighbours {
                    if !in_image {
                        // Reflecting image boundary: the term vanishes.
                        continue;
                    }
                    if !in_block {
                        d += robin;
                    } else if mask.get(nx, ny) {
                        d += 1.0;
                    } else {
                        d += 1.0;
                        bits |= bit;
                    }
                }
                diag[k] = d * inv_h2;
                links[k] = bits;
            }
        }
        LocalOperator {
            width: block.width,
            diag,
            links,
            inv_h2,
            unknowns,
        }
    }
}

impl LinearOperator for LocalOperator {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let w = self.width;
        for (k, out) in y.iter_mut().enumerate() {
            let bits = self.links[k];
            let mut v = self.diag[k] * x[k];
            if bits != 0 {
                let mut s = 0.0;
                if bits & LEFT != 0 {
                    s += x[k - 1];
                }
                if bits & RIGHT != 0 {
                    s += x[k + 1];
                }
                if bits & UP != 0 {
                    s += x[k - w];
                }
                if bits & DOWN != 0 {
                    s += x[k + w];
                }
                v -= self.inv_h2 * s;
            }
            *out = v;
        }
    }
}

/// One grid level: mask, stencil and prepared block operators.
#[derive(Clone, Debug)]
pub struct Level {
    width: usize,
    height: usize,
    mask: Mask,
    stencil: StencilSpec,
    decomposition: BlockDecomposition,
    locals: Vec<LocalOperator>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SweepStats {
    /// Squared residual norm before the sweep.
    pub residual_norm2: f64,
    pub local_iterations: usize,
}

impl Level {
    pub fn new(mask: Mask, stencil: StencilSpec, cfg: &OrasConfig) -> Result<Self> {
        cfg.validate()?;
        let (width, height) = (mask.width(), mask.height());
        let decomposition =
            BlockDecomposition::new(width, height, cfg.block_size, cfg.overlap, WeightScheme::Ramp)?;
        let locals = decomposition
            .blocks()
            .iter()
            .map(|b| LocalOperator::build(b, width, height, &mask, stencil, cfg.robin_alpha))
            .collect();
        Ok(Level {
            width,
            height,
            mask,
            stencil,
            decomposition,
            locals,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    pub fn stencil(&self) -> StencilSpec {
        self.stencil
    }

    pub fn decomposition(&self) -> &BlockDecomposition {
        &self.decomposition
    }

    pub(crate) fn enforce_mask(&self, x: &mut [f64], b: &[f64]) {
        for (i, &known) in self.mask.bits().iter().enumerate() {
            if known {
                x[i] = b[i];
            }
        }
    }

    /// `r = b - A x` on unknown pixels and 0 on the mask; returns `|r|^2`.
    pub(crate) fn residual(&self, x: &[f64], b: &[f64], r: &mut [f64]) -> f64 {
        let (w, h) = (self.width, self.height);
        let inv_h2 = self.stencil.inv_h2();
        let bits = self.mask.bits();
        let mut rr = 0.0;
        for y in 0..h {
            for xx in 0..w {
                let i = y * w + xx;
                let v = if bits[i] {
                    0.0
                } else {
                    b[i] - inv_h2 * laplacian_at(x, w, h, xx, y)
                };
                r[i] = v;
                rr += v * v;
            }
        }
        rr
    }

    /// One ORAS sweep on `x`, after imposing the mask rows of `b`.
    pub(crate) fn sweep(&self, x: &mut [f64], b: &[f64], cfg: &OrasConfig, r: &mut [f64]) -> SweepStats {
        self.enforce_mask(x, b);
        let rr = self.residual(x, b, r);
        if rr == 0.0 {
            return SweepStats::default();
        }
        let n = (self.width * self.height) as f64;
        let r: &[f64] = r;
        let solved: Vec<(Vec<f64>, usize)> = self
            .decomposition
            .blocks()
            .par_iter()
            .zip(self.locals.par_iter())
            .map(|(block, op)| {
                if op.unknowns == 0 {
                    return (Vec::new(), 0);
                }
                let mut rhs = vec![0.0; block.len()];
                block.gather(self.width, r, &mut rhs);
                let threshold = cfg.local_fraction * block.len() as f64 / n * rr;
                if dot(&rhs, &rhs) <= threshold {
                    return (Vec::new(), 0);
                }
                let mut v = vec![0.0; block.len()];
                let report = cg_solve(op, &rhs, &mut v, CgStop::AbsoluteSquared(threshold), cfg.local_max_iters);
                (v, report.iterations)
            })
            .collect();
        let local_iterations = solved.iter().map(|(_, it)| it).sum();
        let corrections: Vec<Vec<f64>> = solved.into_iter().map(|(v, _)| v).collect();
        self.decomposition.accumulate(&corrections, x);
        SweepStats {
            residual_norm2: rr,
            local_iterations,
        }
    }
}

/// One ORAS sweep of the inpainting problem on every channel, with unit grid spacing.
pub fn oras_iteration(u: &Image, f: &Image, mask: &Mask, cfg: &OrasConfig) -> Result<Image> {
    u.check_same_shape(f)?;
    f.check_mask(mask)?;
    let level = Level::new(mask.clone(), StencilSpec::unit(), cfg)?;
    let b = f.masked(mask);
    let mut out = u.clone();
    let mut r = vec![0.0; u.pixel_count()];
    for c in 0..u.channels() {
        level.sweep(out.plane_mut(c), b.plane(c), cfg, &mut r);
    }
    Ok(out)
}
