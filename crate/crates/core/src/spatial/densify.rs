//! Delaunay densification: greedy mask growth at the highest-error triangles.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{accumulate_errors, bucket_errors, delaunay_from_voronoi, jump_flood_from, jump_flood_voronoi};
use crate::image::{Image, Mask};
use crate::quality::mse;
use crate::solver::{InpaintSolver, SolverConfig};
use crate::spatial::analytic::{analytic_mask_with_count, AnalyticConfig, Dither};
use crate::spatial::history::IterationRecord;
use crate::spatial::{random_mask, target_count};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialMask {
    LaplacianDither,
    UniformRandom,
}

/// Error aggregation regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Buckets {
    Triangles,
    /// Voronoi cells of the current mask pixels.
    Cells,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensificationConfig {
    pub density: f64,
    pub iterations: usize,
    /// Ratio between consecutive per-iteration pixel counts.
    pub growth: f64,
    /// Initial mask size as a fraction of the budget; `None` gives one
    /// equal share, `budget / (iterations + 1)`.
    pub initial_fraction: Option<f64>,
    pub initial: InitialMask,
    pub buckets: Buckets,
    pub seed: u64,
}

impl DensificationConfig {
    pub fn new(density: f64) -> Self {
        DensificationConfig {
            density,
            iterations: 20,
            growth: 1.0,
            initial_fraction: None,
            initial: InitialMask::LaplacianDither,
            buckets: Buckets::Triangles,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("densification needs at least one iteration".into()));
        }
        if !(self.growth > 0.0) || !self.growth.is_finite() {
            return Err(Error::InvalidConfig("growth factor must be positive".into()));
        }
        if let Some(f) = self.initial_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidConfig("initial fraction must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    /// Initial mask size and per-iteration additions for a budget of `total` pixels.
    pub fn schedule(&self, total: usize) -> (usize, Vec<usize>) {
        let n = self.iterations;
        let initial = match self.initial_fraction {
            Some(f) => (f * total as f64).round() as usize,
            None => total / (n + 1),
        }
        .clamp(1, total);
        let rest = total - initial;
        let t = self.growth;
        let m0 = if (t - 1.0).abs() < 1e-12 {
            rest as f64 / n as f64
        } else {
            rest as f64 * (t - 1.0) / (t.powi(n as i32) - 1.0)
        };
        let mut counts = Vec::with_capacity(n);
        let mut used = 0usize;
        let mut m = m0;
        for i in 0..n {
            let c = if i + 1 == n {
                rest - used
            } else {
                (m.round() as usize).min(rest - used)
            };
            counts.push(c);
            used += c;
            m *= t;
        }
        (initial, counts)
    }
}

#[derive(Clone, Debug)]
pub struct Densified {
    pub mask: Mask,
    /// Inpainting from the final mask.
    pub reconstruction: Image,
    /// One record per iteration plus the final state.
    pub history: Vec<IterationRecord>,
}

/// Grows a mask to exactly `floor(d N)` pixels. Each iteration inpaints,
/// aggregates the squared error over triangles (or cells) of the current
/// mask and adds the worst pixel of each of the highest-error regions.
pub fn delaunay_densify(f: &Image, cfg: &DensificationConfig, solver: &SolverConfig) -> Result<Densified> {
    cfg.validate()?;
    solver.validate()?;
    let (w, h) = (f.width(), f.height());
    let total = target_count(cfg.density, w * h)?;
    let (initial, schedule) = cfg.schedule(total);
    let start = Instant::now();

    let mut mask = match cfg.initial {
        InitialMask::LaplacianDither => {
            let acfg = AnalyticConfig {
                dither: Dither::FloydSteinberg,
                seed: cfg.seed,
                ..AnalyticConfig::new(cfg.density)
            };
            analytic_mask_with_count(f, initial, &acfg)?
        }
        InitialMask::UniformRandom => random_mask(w, h, initial, cfg.seed)?,
    };

    let mut history = Vec::with_capacity(cfg.iterations + 1);
    let mut carry = 0usize;
    let mut radius: Option<f64> = None;
    let mut u: Option<Image> = None;
    for (it, &planned) in schedule.iter().enumerate() {
        let recon = InpaintSolver::new(&mask, solver)?.inpaint(f, u.as_ref())?.0;
        let errors = f.squared_error_map(&recon)?;
        history.push(IterationRecord {
            iteration: it,
            mask_count: mask.count(),
            mse: mse(f, &recon)?,
            seconds: start.elapsed().as_secs_f64(),
        });
        let want = planned + carry;
        let labels = match radius {
            Some(r) => jump_flood_from(&mask, r.ceil() as usize)?,
            None => jump_flood_voronoi(&mask)?,
        };
        radius = Some(labels.max_radius());
        let cells = match cfg.buckets {
            Buckets::Triangles => {
                let mesh = delaunay_from_voronoi(&labels);
                if mesh.is_degenerate() {
                    bucket_errors(labels.labels(), labels.seed_count(), &errors, Some(&mask))?
                } else {
                    accumulate_errors(&mesh, &errors, Some(&mask))?
                }
            }
            Buckets::Cells => bucket_errors(labels.labels(), labels.seed_count(), &errors, Some(&mask))?,
        };
        let mut order: Vec<usize> = (0..cells.len()).filter(|&k| cells.argmax[k].is_some()).collect();
        order.sort_by(|&a, &b| cells.sums[b].total_cmp(&cells.sums[a]).then(a.cmp(&b)));
        let mut added = 0;
        for &k in order.iter().take(want) {
            let p = cells.argmax[k].expect("filtered above");
            mask.set(p, true);
            added += 1;
        }
        carry = want - added;
        if it + 1 == schedule.len() && carry > 0 {
            fill_highest(&mut mask, &errors, carry);
            carry = 0;
        }
        u = Some(recon);
    }

    let recon = InpaintSolver::new(&mask, solver)?.inpaint(f, u.as_ref())?.0;
    history.push(IterationRecord {
        iteration: schedule.len(),
        mask_count: mask.count(),
        mse: mse(f, &recon)?,
        seconds: start.elapsed().as_secs_f64(),
    });
    debug_assert_eq!(mask.count(), total);
    Ok(Densified {
        mask,
        reconstruction: recon,
        history,
    })
}

/// Adds the `count` highest-error free pixels; with too few positive errors
/// the lowest free indices make up the rest.
fn fill_highest(mask: &mut Mask, errors: &[f64], count: usize) {
    let mut free: Vec<usize> = (0..mask.len()).filter(|&i| !mask.is_set(i)).collect();
    free.sort_by(|&a, &b| errors[b].total_cmp(&errors[a]).then(a.cmp(&b)));
    for &i in free.iter().take(count) {
        mask.set(i, true);
    }
}
