//! Overlapping block decomposition of a pixel grid with partition-of-unity weights.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x0 + self.width && y >= self.y0 && y < self.y0 + self.height
    }

    /// Global row-major index of local pixel `(lx, ly)`.
    #[inline]
    pub fn global_index(&self, grid_width: usize, lx: usize, ly: usize) -> usize {
        (self.y0 + ly) * grid_width + self.x0 + lx
    }

    /// Copies the block's samples out of a full grid plane.
    pub fn gather(&self, grid_width: usize, src: &[f64], dst: &mut [f64]) {
        for ly in 0..self.height {
            let g = self.global_index(grid_width, 0, ly);
            dst[ly * self.width..(ly + 1) * self.width].copy_from_slice(&src[g..g + self.width]);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightScheme {
    /// Linear ramp over the overlap strip next to inner boundaries.
    Ramp,
    /// Equal share for every covering block.
    Average,
}

#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    width: usize,
    height: usize,
    block_size: usize,
    overlap: usize,
    blocks: Vec<Block>,
    weights: Vec<Vec<f64>>,
}

/// Block start/end positions along one axis. Interior blocks advance by
/// `block - overlap`; the last one is moved inward to keep its full size.
pub(crate) fn axis_intervals(len: usize, block: usize, overlap: usize) -> Vec<(usize, usize)> {
    if len <= block {
        return vec![(0, len)];
    }
    let stride = block - overlap;
    let mut out = Vec::new();
    let mut start = 0;
    while start + block < len {
        out.push((start, start + block));
        start += stride;
    }
    out.push((len - block, len));
    out
}

fn ramp(pos: usize, start: usize, end: usize, len: usize, overlap: usize) -> f64 {
    let width = (overlap + 1) as f64;
    let mut w: f64 = 1.0;
    if start > 0 {
        w = w.min((pos - start + 1) as f64 / width);
    }
    if end < len {
        w = w.min((end - pos) as f64 / width);
    }
    w
}

impl BlockDecomposition {
    pub fn new(
        width: usize,
        height: usize,
        block_size: usize,
        overlap: usize,
        scheme: WeightScheme,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig("cannot decompose an empty grid".into()));
        }
        if overlap < 1 || block_size < overlap + 2 {
            return Err(Error::InvalidConfig(format!(
                "block size {block_size} with overlap {overlap} is not a valid decomposition"
            )));
        }
        let xs = axis_intervals(width, block_size, overlap);
        let ys = axis_intervals(height, block_size, overlap);
        let mut blocks = Vec::with_capacity(xs.len() * ys.len());
        for &(y0, y1) in &ys {
            for &(x0, x1) in &xs {
                blocks.push(Block {
                    x0,
                    y0,
                    width: x1 - x0,
                    height: y1 - y0,
                });
            }
        }

        let raw: Vec<Vec<f64>> = blocks
            .iter()
            .map(|b| {
                let mut w = Vec::with_capacity(b.len());
                for ly in 0..b.height {
                    let wy = ramp(b.y0 + ly, b.y0, b.y0 + b.height, height, overlap);
                    for lx in 0..b.width {
                        let wx = ramp(b.x0 + lx, b.x0, b.x0 + b.width, width, overlap);
                        w.push(match scheme {
                            WeightScheme::Ramp => wx * wy,
                            WeightScheme::Average => 1.0,
                        });
                    }
                }
                w
            })
            .collect();

        let n = width * height;
        let mut total = vec![0.0; n];
        let mut cover = vec![0u32; n];
        for (b, w) in blocks.iter().zip(&raw) {
            for ly in 0..b.height {
                for lx in 0..b.width {
                    let g = b.global_index(width, lx, ly);
                    total[g] += w[ly * b.width + lx];
                    cover[g] += 1;
                }
            }
        }

        // Normalize pointwise in block order; the last covering block takes
        // the remainder so the block-order sum is exactly 1.
        let mut partial = vec![0.0; n];
        let mut seen = vec![0u32; n];
        let mut weights = raw;
        for (b, w) in blocks.iter().zip(weights.iter_mut()) {
            for ly in 0..b.height {
                for lx in 0..b.width {
                    let g = b.global_index(width, lx, ly);
                    let k = ly * b.width + lx;
                    seen[g] += 1;
                    let d = if seen[g] == cover[g] {
                        1.0 - partial[g]
                    } else {
                        w[k] / total[g]
                    };
                    w[k] = d;
                    partial[g] += d;
                }
            }
        }

        Ok(BlockDecomposition {
            width,
            height,
            block_size,
            overlap,
            blocks,
            weights,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Local weights of block `i`, row-major within the block.
    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    /// Sum of the weights of all blocks covering each pixel, added in block order.
    pub fn weight_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.width * self.height];
        for (b, w) in self.blocks.iter().zip(&self.weights) {
            for ly in 0..b.height {
                for lx in 0..b.width {
                    sums[b.global_index(self.width, lx, ly)] += w[ly * b.width + lx];
                }
            }
        }
        sums
    }

    /// Adds `Σ R_iᵀ D_i v_i` to `target`, in block order.
    pub fn accumulate(&self, corrections: &[Vec<f64>], target: &mut [f64]) {
        for ((b, w), v) in self.blocks.iter().zip(&self.weights).zip(corrections) {
            if v.is_empty() {
                continue;
            }
            for ly in 0..b.height {
                let row = ly * b.width;
                let g = b.global_index(self.width, 0, ly);
                for lx in 0..b.width {
                    target[g + lx] += w[row + lx] * v[row + lx];
                }
            }
        }
    }
}
