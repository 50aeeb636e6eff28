//! Approximate Voronoi labelling by jump flooding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Mask;

pub const NO_SEED: u32 = u32::MAX;

/// Nearest-seed label per pixel. Seeds are the mask pixels in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoronoiLabels {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    seeds: Vec<(usize, usize)>,
}

impl VoronoiLabels {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn seeds(&self) -> &[(usize, usize)] {
        &self.seeds
    }

    pub fn seed_count(&self) -> usize {
        self.seeds.len()
    }

    /// Squared distance from pixel `i` to its seed.
    pub fn distance2(&self, i: usize) -> u64 {
        dist2(i % self.width, i / self.width, self.seeds[self.labels[i] as usize])
    }

    /// Largest distance from any pixel to its seed.
    pub fn max_radius(&self) -> f64 {
        ((0..self.labels.len()).map(|i| self.distance2(i)).max().unwrap_or(0) as f64).sqrt()
    }

    /// Pixel count of every cell.
    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.seeds.len()];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

#[inline]
fn dist2(x: usize, y: usize, seed: (usize, usize)) -> u64 {
    let dx = x.abs_diff(seed.0) as u64;
    let dy = y.abs_diff(seed.1) as u64;
    dx * dx + dy * dy
}

/// Initial jump length for a full labelling: half the smallest power of two
/// not below the larger image side.
pub fn full_start_step(width: usize, height: usize) -> usize {
    (width.max(height).next_power_of_two() / 2).max(1)
}

/// Jump flooding with steps `1, start, start/2, ..., 1, 1`. The extra
/// step-1 rounds at both ends remove most of the mislabelled pixels plain
/// jump flooding leaves behind when few seeds are far apart.
pub fn jump_flood_voronoi(mask: &Mask) -> Result<VoronoiLabels> {
    jump_flood_from(mask, full_start_step(mask.width(), mask.height()))
}

/// Jump flooding from a given initial step, rounded up to a power of two.
/// Shorter schedules suffice when every pixel lies within about twice the
/// step of its nearest seed.
pub fn jump_flood_from(mask: &Mask, start_step: usize) -> Result<VoronoiLabels> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let mut seeds = Vec::with_capacity(mask.count());
    let mut cur = vec![NO_SEED; w * h];
    for (i, &set) in mask.bits().iter().enumerate() {
        if set {
            cur[i] = seeds.len() as u32;
            seeds.push((i % w, i / w));
        }
    }
    let mut next = vec![NO_SEED; w * h];
    let mut steps = vec![1];
    let mut s = start_step.max(1).next_power_of_two();
    while s >= 1 {
        steps.push(s);
        s /= 2;
    }
    steps.push(1);

    for step in steps {
        let src = &cur;
        next.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
            for (x, out) in row.iter_mut().enumerate() {
                let mut best = src[y * w + x];
                let mut best_d = if best == NO_SEED {
                    u64::MAX
                } else {
                    dist2(x, y, seeds[best as usize])
                };
                for dy in [-1isize, 0, 1] {
                    let ny = y as isize + dy * step as isize;
                    if ny < 0 || ny >= h as isize {
                        continue;
                    }
                    for dx in [-1isize, 0, 1] {
                        let nx = x as isize + dx * step as isize;
                        if nx < 0 || nx >= w as isize || (dx == 0 && dy == 0) {
                            continue;
                        }
                        let cand = src[ny as usize * w + nx as usize];
                        if cand == NO_SEED || cand == best {
                            continue;
                        }
                        let d = dist2(x, y, seeds[cand as usize]);
                        if d < best_d || (d == best_d && cand < best) {
                            best = cand;
                            best_d = d;
                        }
                    }
                }
                *out = best;
            }
        });
        std::mem::swap(&mut cur, &mut next);
    }

    Ok(VoronoiLabels {
        width: w,
        height: h,
        labels: cur,
        seeds,
    })
}

/// Exact nearest seed by exhaustive search, ties to the lower index.
pub fn brute_force_voronoi(mask: &Mask) -> Result<VoronoiLabels> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let seeds: Vec<(usize, usize)> = mask.indices().into_iter().map(|i| (i % w, i / w)).collect();
    let labels = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            let mut best = 0u32;
            let mut best_d = u64::MAX;
            for (k, &s) in seeds.iter().enumerate() {
                let d = dist2(x, y, s);
                if d < best_d {
                    best_d = d;
                    best = k as u32;
                }
            }
            best
        })
        .collect();
    Ok(VoronoiLabels {
        width: w,
        height: h,
        labels,
        seeds,
    })
}
