mod config;
mod pipeline;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use inpaint_core::solver::inpaint;
use inpaint_core::spatial::write_history_csv;
use inpaint_core::tonal::write_tonal_history_csv;
use inpaint_core::{pnm, quality};

use crate::config::{PipelineConfig, SpatialMethod, TonalMethod};
use crate::pipeline::{compute_mask, optimize_tonal, reconstruct, run_pipeline, summary_line, Artifacts};

const THREADS_VAR: &str = "INPAINT_THREADS";

#[derive(Parser)]
#[command(name = "inpaint", version, about = "Diffusion inpainting with spatial and tonal data optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct an image from a mask and its stored values.
    Inpaint(InpaintArgs),
    /// Choose mask pixels for an image.
    Mask(MaskArgs),
    /// Optimize the stored values for a given mask.
    Tonal(TonalArgs),
    /// Run mask selection, tonal optimization and reconstruction.
    Optimize(OptimizeArgs),
    /// Run the pipeline over a corpus at several densities and resolutions.
    Sweep(SweepArgs),
    /// Compare two images.
    Eval(EvalArgs),
}

/// Settings shared by all commands. Flags override the config file.
#[derive(Args, Clone, Default)]
struct Settings {
    /// key=value file with pipeline and solver settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set mg.tolerance=1e-6`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    spatial: Option<SpatialMethod>,
    #[arg(long)]
    tonal: Option<TonalMethod>,
    #[arg(long)]
    seed: Option<u64>,
    /// Leave the seconds column of CSV files empty.
    #[arg(long)]
    no_timing: bool,
}

impl Settings {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        let mut errors = Vec::new();
        if let Some(path) = &self.config {
            cfg.apply_file(path, &mut errors)?;
        }
        let mut pairs = Vec::new();
        for item in &self.set {
            match item.split_once('=') {
                Some((k, v)) => pairs.push((k.trim(), v.trim())),
                None => errors.push(format!("--set expects KEY=VALUE, got {item:?}")),
            }
        }
        cfg.apply(pairs, &mut errors);
        if let Some(d) = self.density {
            cfg.density = d;
        }
        if let Some(s) = self.spatial {
            cfg.spatial = s;
        }
        if let Some(t) = self.tonal {
            cfg.tonal = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if self.no_timing {
            cfg.timing = false;
        }
        errors.extend(cfg.problems());
        if !errors.is_empty() {
            bail!("invalid configuration:\n  {}", errors.join("\n  "));
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct InpaintArgs {
    /// PBM mask.
    #[arg(long)]
    mask: PathBuf,
    /// Stored values: a tonal file or any image of the same size.
    #[arg(long)]
    values: PathBuf,
    /// Original image for MSE and PSNR.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct MaskArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// PBM mask to write.
    #[arg(short, long)]
    output: PathBuf,
    /// Per-iteration history, for methods that iterate.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct TonalArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    /// 8-bit tonal file to write.
    #[arg(short, long)]
    output: PathBuf,
    /// 16-bit tonal file that keeps values outside [0, 255].
    #[arg(long)]
    output16: Option<PathBuf>,
    #[arg(long)]
    reconstruction: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Directory for the mask, tonal files, reconstruction and CSV histories.
    #[arg(short, long)]
    output_dir: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct SweepArgs {
    /// Directory of PGM/PPM images.
    #[arg(long)]
    corpus: PathBuf,
    /// Comma-separated densities.
    #[arg(long, value_delimiter = ',', required = true)]
    densities: Vec<f64>,
    /// Comma-separated target lengths of the longer image side.
    #[arg(long, value_delimiter = ',', required = true)]
    resolutions: Vec<usize>,
    #[arg(long)]
    csv: PathBuf,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

/// Numerical non-convergence; artifacts have been written.
#[derive(Debug)]
struct NotConverged(String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} did not reach its tolerance", self.0)
    }
}

impl std::error::Error for NotConverged {}

fn read_image(path: &Path) -> Result<inpaint_core::Image> {
    pnm::read_image(path).with_context(|| format!("reading {}", path.display()))
}

fn read_mask(path: &Path) -> Result<inpaint_core::Mask> {
    pnm::read_mask(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_inpaint(args: &InpaintArgs) -> Result<()> {
    let cfg = args.settings.resolve()?;
    let mask = read_mask(&args.mask)?;
    let values = pnm::read_tonal(&args.values).with_context(|| format!("reading {}", args.values.display()))?;
    let reference = args.reference.as_deref().map(read_image).transpose()?;
    let (u, report) = inpaint(&values, &mask, &cfg.solver, None)?;
    pnm::write_image(&args.output, &u).with_context(|| format!("writing {}", args.output.display()))?;
    if let Some(reference) = reference {
        let q = quality(&reference, &u)?;
        println!("mse={:.6} psnr={}", q.mse, q.psnr);
    }
    if !report.converged {
        return Err(NotConverged("the inpainting solve".into()).into());
    }
    Ok(())
}

fn cmd_mask(args: &MaskArgs) -> Result<()> {
    let cfg = args.settings.resolve()?;
    let f = read_image(&args.input)?;
    let out = compute_mask(&f, &cfg)?;
    pnm::write_mask(&args.output, &out.mask)?;
    if let Some(csv) = &args.csv {
        write_history_csv(csv, &out.history, cfg.timing)?;
    }
    println!("mask_count={} density={:.6}", out.mask.count(), out.mask.density());
    Ok(())
}

fn cmd_tonal(args: &TonalArgs) -> Result<()> {
    let cfg = args.settings.resolve()?;
    let f = read_image(&args.input)?;
    let mask = read_mask(&args.mask)?;
    let state = optimize_tonal(&f, &mask, &cfg)?;
    pnm::write_tonal(&args.output, &state.g, &mask)?;
    if let Some(p) = &args.output16 {
        pnm::write_tonal16(p, &state.g, &mask)?;
    }
    if let Some(csv) = &args.csv {
        write_tonal_history_csv(csv, &state.history, cfg.timing)?;
    }
    let rec = reconstruct(&state.g, &mask, &cfg, Some(&state.u))?;
    if let Some(p) = &args.reconstruction {
        pnm::write_image(p, &rec.image)?;
    }
    let q = quality(&f, &rec.image)?;
    println!("mse={:.6} psnr={} iterations={}", q.mse, q.psnr, state.iterations);
    if !rec.report.converged {
        return Err(NotConverged("the final reconstruction".into()).into());
    }
    Ok(())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let cfg = args.settings.resolve()?;
    let f = read_image(&args.input)?;
    let out = run_pipeline(&f, &cfg)?;
    Artifacts::in_dir(&args.output_dir, &f).write(&out, cfg.timing)?;
    println!("{}", summary_line(&cfg, &out));
    if !out.converged() {
        return Err(NotConverged("the final reconstruction".into()).into());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = args.settings.resolve()?;
    let rows = sweep::run_sweep(&args.corpus, &args.densities, &args.resolutions, &cfg, &args.csv)?;
    println!("rows={rows}");
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let a = read_image(&args.reference)?;
    let b = read_image(&args.test)?;
    let q = quality(&a, &b)?;
    println!("mse={:.6} psnr={}", q.mse, q.psnr);
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR} must be a thread count, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Inpaint(a) => cmd_inpaint(a),
        Command::Mask(a) => cmd_mask(a),
        Command::Tonal(a) => cmd_tonal(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<NotConverged>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
