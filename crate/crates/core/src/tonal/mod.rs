//! Tonal optimization: the stored values that minimize `|f - B g|^2` for a
//! fixed mask, where `B = A^{-1} C` maps mask values to their inpainting.

pub mod cgnr;
pub mod init;
pub mod operator;
pub mod oracle;
pub mod ras;

use std::path::Path;

use crate::error::Result;
use crate::image::{Image, Mask};
use crate::quality::{mse, Psnr};
use crate::solver::{InpaintSolver, SolverConfig};

pub use cgnr::{cgnr_tonal, CgnrConfig};
pub use init::{neighbor_balance_init, voronoi_richardson_init, InitConfig, InitScheme};
pub use operator::{apply_b, apply_bt, TonalOperator};
pub use oracle::{dense_inpaint, dense_inpainting_operator, dense_tonal_oracle, DENSE_LIMIT};
pub use ras::{ras_tonal, RasTonalConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TonalRecord {
    pub iteration: usize,
    /// Objective as tracked during the iteration, from inexact inner solves.
    pub mse: f64,
    pub seconds: f64,
    pub inner_vcycles: usize,
}

/// Stop once an iteration improves the MSE by less than this fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TonalStop {
    pub min_relative_improvement: f64,
    pub max_iterations: usize,
}

impl Default for TonalStop {
    fn default() -> Self {
        TonalStop {
            min_relative_improvement: 1e-3,
            max_iterations: 200,
        }
    }
}

impl TonalStop {
    pub(crate) fn reached(&self, previous: f64, current: f64) -> bool {
        if previous <= 0.0 {
            return true;
        }
        (previous - current) / previous < self.min_relative_improvement
    }
}

/// Solver settings for the accurate inpainting behind reported errors.
pub fn final_solver_config() -> SolverConfig {
    SolverConfig::default().with_tolerance(1e-8)
}

#[derive(Clone, Debug)]
pub struct TonalState {
    /// Stored values; zero off the mask.
    pub g: Image,
    /// Inpainting of `g`.
    pub u: Image,
    /// MSE of `u` against the reference, from an accurate solve.
    pub mse: f64,
    pub history: Vec<TonalRecord>,
    /// Outer iterations performed.
    pub iterations: usize,
}

impl TonalState {
    /// State for stored values `g` (zeroed off the mask), with an accurate inpainting.
    pub fn new(f: &Image, mask: &Mask, g: &Image) -> Result<Self> {
        f.check_same_shape(g)?;
        let g = g.masked(mask);
        let (u, _) = InpaintSolver::new(mask, &final_solver_config())?.inpaint(&g, None)?;
        Ok(TonalState {
            mse: mse(f, &u)?,
            g,
            u,
            history: Vec::new(),
            iterations: 0,
        })
    }

    /// The untouched image values at the mask.
    pub fn from_image(f: &Image, mask: &Mask) -> Result<Self> {
        Self::new(f, mask, f)
    }

    pub fn psnr(&self) -> Psnr {
        Psnr::from_mse(self.mse)
    }
}

/// Re-solves the best iterate accurately. If inexact inner solves made it
/// worse than the starting state, the starting state is kept.
pub(crate) fn finish(
    f: &Image,
    mask: &Mask,
    start: &TonalState,
    best_g: Image,
    history: Vec<TonalRecord>,
    iterations: usize,
) -> Result<TonalState> {
    let mut out = TonalState::new(f, mask, &best_g)?;
    if out.mse > start.mse {
        out = start.clone();
    }
    let mut full = start.history.clone();
    let offset = full.len();
    full.extend(history.into_iter().map(|mut r| {
        r.iteration += offset;
        r
    }));
    out.history = full;
    out.iterations = start.iterations + iterations;
    Ok(out)
}

/// Columns: `iteration,mse,psnr,seconds,inner_vcycles`. Without `timing`
/// the seconds column is left empty.
pub fn write_tonal_history_csv(path: impl AsRef<Path>, records: &[TonalRecord], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "mse", "psnr", "seconds", "inner_vcycles"])?;
    for r in records {
        w.write_record([
            r.iteration.to_string(),
            format!("{:.6}", r.mse),
            Psnr::from_mse(r.mse).to_string(),
            if timing {
                format!("{:.6}", r.seconds)
            } else {
                String::new()
            },
            r.inner_vcycles.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
