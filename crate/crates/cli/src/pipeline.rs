use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use inpaint_core::pnm;
use inpaint_core::solver::{inpaint, SolverReport};
use inpaint_core::spatial::{
    analytic_mask, delaunay_densify, nlpe, probabilistic_sparsify, random_mask, target_count, write_history_csv,
    IterationRecord,
};
use inpaint_core::tonal::{
    cgnr_tonal, neighbor_balance_init, ras_tonal, voronoi_richardson_init, write_tonal_history_csv, TonalState,
};
use inpaint_core::{quality, Image, Mask, QualityReport};

use crate::config::{PipelineConfig, SpatialMethod, TonalMethod};

pub struct SpatialOutcome {
    pub mask: Mask,
    /// Per-iteration history; empty for methods without iterations.
    pub history: Vec<IterationRecord>,
}

pub fn compute_mask(f: &Image, cfg: &PipelineConfig) -> Result<SpatialOutcome> {
    let solver = &cfg.solver;
    let (mask, history) = match cfg.spatial {
        SpatialMethod::Dd => {
            let out = delaunay_densify(f, &cfg.densify_config(), solver)?;
            (out.mask, out.history)
        }
        SpatialMethod::Aa => (analytic_mask(f, &cfg.analytic_config())?, Vec::new()),
        SpatialMethod::Ps => (probabilistic_sparsify(f, cfg.density, &cfg.ps_config(), solver)?, Vec::new()),
        SpatialMethod::PsNlpe => {
            let start = probabilistic_sparsify(f, cfg.density, &cfg.ps_config(), solver)?;
            (nlpe(f, &start, &cfg.nlpe_config(), solver)?.mask, Vec::new())
        }
        SpatialMethod::Random => {
            let count = target_count(cfg.density, f.width() * f.height())?;
            (random_mask(f.width(), f.height(), count, cfg.seed)?, Vec::new())
        }
    };
    Ok(SpatialOutcome { mask, history })
}

pub fn optimize_tonal(f: &Image, mask: &Mask, cfg: &PipelineConfig) -> Result<TonalState> {
    let plain = || TonalState::from_image(f, mask);
    let vi = || voronoi_richardson_init(f, mask, &cfg.init, None);
    let state = match cfg.tonal {
        TonalMethod::None => plain()?,
        TonalMethod::Balance => neighbor_balance_init(f, mask, &plain()?)?,
        TonalMethod::VoronoiInit => vi()?,
        TonalMethod::Cgnr => cgnr_tonal(f, mask, &plain()?, &cfg.cgnr)?,
        TonalMethod::Ras => ras_tonal(f, mask, &plain()?, &cfg.ras)?,
        TonalMethod::RasVi => ras_tonal(f, mask, &vi()?, &cfg.ras)?,
    };
    Ok(state)
}

pub struct Reconstruction {
    pub image: Image,
    pub report: SolverReport,
}

/// Inpaints the stored values `g` with the accurate final solver.
pub fn reconstruct(g: &Image, mask: &Mask, cfg: &PipelineConfig, init: Option<&Image>) -> Result<Reconstruction> {
    let (image, report) = inpaint(g, mask, &cfg.final_solver(), init)?;
    Ok(Reconstruction { image, report })
}

pub struct PipelineOutcome {
    pub mask: Mask,
    pub spatial_history: Vec<IterationRecord>,
    pub tonal: TonalState,
    pub reconstruction: Reconstruction,
    pub quality: QualityReport,
    pub seconds: f64,
}

impl PipelineOutcome {
    pub fn converged(&self) -> bool {
        self.reconstruction.report.converged
    }
}

/// Spatial optimization, tonal optimization and the final reconstruction.
pub fn run_pipeline(f: &Image, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let start = Instant::now();
    let spatial = compute_mask(f, cfg)?;
    let tonal = optimize_tonal(f, &spatial.mask, cfg)?;
    let reconstruction = reconstruct(&tonal.g, &spatial.mask, cfg, Some(&tonal.u))?;
    let quality = quality(f, &reconstruction.image)?;
    Ok(PipelineOutcome {
        mask: spatial.mask,
        spatial_history: spatial.history,
        tonal,
        reconstruction,
        quality,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn image_extension(img: &Image) -> &'static str {
    if img.channels() == 3 {
        "ppm"
    } else {
        "pgm"
    }
}

/// Artifact paths written by `optimize` into its output directory.
pub struct Artifacts {
    pub mask: PathBuf,
    pub tonal: PathBuf,
    pub tonal16: PathBuf,
    pub reconstruction: PathBuf,
    pub spatial_csv: PathBuf,
    pub tonal_csv: PathBuf,
}

impl Artifacts {
    pub fn in_dir(dir: &Path, img: &Image) -> Self {
        let ext = image_extension(img);
        Artifacts {
            mask: dir.join("mask.pbm"),
            tonal: dir.join(format!("tonal.{ext}")),
            tonal16: dir.join(format!("tonal16.{ext}")),
            reconstruction: dir.join(format!("reconstruction.{ext}")),
            spatial_csv: dir.join("spatial.csv"),
            tonal_csv: dir.join("tonal.csv"),
        }
    }

    pub fn write(&self, out: &PipelineOutcome, timing: bool) -> Result<()> {
        if let Some(dir) = self.mask.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        pnm::write_mask(&self.mask, &out.mask)?;
        pnm::write_tonal(&self.tonal, &out.tonal.g, &out.mask)?;
        pnm::write_tonal16(&self.tonal16, &out.tonal.g, &out.mask)?;
        pnm::write_image(&self.reconstruction, &out.reconstruction.image)?;
        write_history_csv(&self.spatial_csv, &out.spatial_history, timing)?;
        write_tonal_history_csv(&self.tonal_csv, &out.tonal.history, timing)?;
        Ok(())
    }
}

/// `density,spatial,tonal,mse,psnr,seconds`
pub fn summary_line(cfg: &PipelineConfig, out: &PipelineOutcome) -> String {
    format!(
        "{},{},{},{:.6},{},{:.3}",
        cfg.density, cfg.spatial, cfg.tonal, out.quality.mse, out.quality.psnr, out.seconds
    )
}
