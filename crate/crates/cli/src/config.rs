use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::Context;
use inpaint_core::solver::{parse_key_values, SolverConfig};
use inpaint_core::spatial::{AnalyticConfig, Buckets, DensificationConfig, Dither, InitialMask, NlpeConfig, PsConfig};
use inpaint_core::tonal::{CgnrConfig, InitConfig, RasTonalConfig, TonalStop};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpatialMethod {
    Dd,
    Aa,
    Ps,
    PsNlpe,
    Random,
}

impl FromStr for SpatialMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "dd" => SpatialMethod::Dd,
            "aa" => SpatialMethod::Aa,
            "ps" => SpatialMethod::Ps,
            "ps+nlpe" => SpatialMethod::PsNlpe,
            "random" => SpatialMethod::Random,
            _ => return Err(format!("unknown spatial method {s:?} (dd, aa, ps, ps+nlpe, random)")),
        })
    }
}

impl fmt::Display for SpatialMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpatialMethod::Dd => "dd",
            SpatialMethod::Aa => "aa",
            SpatialMethod::Ps => "ps",
            SpatialMethod::PsNlpe => "ps+nlpe",
            SpatialMethod::Random => "random",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TonalMethod {
    None,
    Balance,
    VoronoiInit,
    Cgnr,
    Ras,
    RasVi,
}

impl FromStr for TonalMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "none" => TonalMethod::None,
            "balance" => TonalMethod::Balance,
            "voronoi-init" => TonalMethod::VoronoiInit,
            "cgnr" => TonalMethod::Cgnr,
            "ras" => TonalMethod::Ras,
            "ras+vi" => TonalMethod::RasVi,
            _ => {
                return Err(format!(
                    "unknown tonal method {s:?} (none, balance, voronoi-init, cgnr, ras, ras+vi)"
                ))
            }
        })
    }
}

impl fmt::Display for TonalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TonalMethod::None => "none",
            TonalMethod::Balance => "balance",
            TonalMethod::VoronoiInit => "voronoi-init",
            TonalMethod::Cgnr => "cgnr",
            TonalMethod::Ras => "ras",
            TonalMethod::RasVi => "ras+vi",
        })
    }
}

/// Everything a pipeline run needs besides its file paths.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub density: f64,
    pub spatial: SpatialMethod,
    pub tonal: TonalMethod,
    pub seed: u64,
    /// Record wall-clock seconds in CSV files. Off gives reproducible files.
    pub timing: bool,
    /// Spatial optimization and plain inpainting.
    pub solver: SolverConfig,
    /// Tolerance of the reconstruction behind reported errors.
    pub final_tolerance: f64,
    pub densify: DensificationConfig,
    pub analytic: AnalyticConfig,
    pub ps: PsConfig,
    pub nlpe: NlpeConfig,
    pub init: InitConfig,
    pub ras: RasTonalConfig,
    pub cgnr: CgnrConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            density: 0.05,
            spatial: SpatialMethod::Dd,
            tonal: TonalMethod::RasVi,
            seed: 0,
            timing: true,
            solver: SolverConfig::default(),
            final_tolerance: 1e-8,
            densify: DensificationConfig::new(0.05),
            analytic: AnalyticConfig::new(0.05),
            ps: PsConfig::default(),
            nlpe: NlpeConfig::default(),
            init: InitConfig::default(),
            ras: RasTonalConfig::default(),
            cgnr: CgnrConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("cannot parse {key}={value}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(format!("cannot parse {key}={value} as a boolean")),
    }
}

fn set_stop(stop: &mut TonalStop, field: &str, key: &str, value: &str) -> Result<(), String> {
    match field {
        "min_improvement" => stop.min_relative_improvement = parse(key, value)?,
        "max_iterations" => stop.max_iterations = parse(key, value)?,
        _ => return Err(format!("unknown key {key}")),
    }
    Ok(())
}

impl PipelineConfig {
    /// Applies one setting. Unknown keys and unparsable values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "density" => self.density = parse(key, value)?,
            "spatial" => self.spatial = value.parse()?,
            "tonal" => self.tonal = value.parse()?,
            "seed" => self.seed = parse(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            "final.tolerance" => self.final_tolerance = parse(key, value)?,
            "dd.iterations" => self.densify.iterations = parse(key, value)?,
            "dd.growth" => self.densify.growth = parse(key, value)?,
            "dd.initial_fraction" => {
                self.densify.initial_fraction = match value {
                    "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "dd.initial" => {
                self.densify.initial = match value {
                    "dither" => InitialMask::LaplacianDither,
                    "random" => InitialMask::UniformRandom,
                    _ => return Err(format!("unknown {key} {value:?} (dither, random)")),
                }
            }
            "dd.buckets" => {
                self.densify.buckets = match value {
                    "triangles" => Buckets::Triangles,
                    "cells" => Buckets::Cells,
                    _ => return Err(format!("unknown {key} {value:?} (triangles, cells)")),
                }
            }
            "aa.sigma" => self.analytic.sigma = parse(key, value)?,
            "aa.dither" => {
                self.analytic.dither = match value {
                    "floyd-steinberg" => Dither::FloydSteinberg,
                    "random" => Dither::Random,
                    _ => return Err(format!("unknown {key} {value:?} (floyd-steinberg, random)")),
                }
            }
            "ps.candidates" => self.ps.candidate_fraction = parse(key, value)?,
            "ps.removal" => self.ps.removal_fraction = parse(key, value)?,
            "nlpe.cycles" => self.nlpe.cycles = parse(key, value)?,
            "nlpe.candidates" => self.nlpe.candidates = parse(key, value)?,
            "vi.tau" => self.init.tau = parse(key, value)?,
            "vi.weights" => self.init.weights = value.parse().map_err(|e| format!("{key}: {e}"))?,
            "vi.max_steps" => self.init.max_steps = parse(key, value)?,
            "ras.block_size" => self.ras.block_size = parse(key, value)?,
            "ras.overlap" => self.ras.overlap = parse(key, value)?,
            "ras.local_max_iters" => self.ras.local_max_iters = parse(key, value)?,
            "ras.local_tolerance" => self.ras.local_tolerance = parse(key, value)?,
            _ => {
                if let Some(field) = key.strip_prefix("ras.") {
                    return set_stop(&mut self.ras.stop, field, key, value);
                }
                if let Some(field) = key.strip_prefix("cgnr.") {
                    return set_stop(&mut self.cgnr.stop, field, key, value);
                }
                return match self.solver.set(key, value) {
                    Ok(true) => Ok(()),
                    Ok(false) => Err(format!("unknown key {key}")),
                    Err(e) => Err(e.to_string()),
                };
            }
        }
        Ok(())
    }

    /// Applies `key=value` pairs, collecting every problem instead of
    /// stopping at the first.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>, errors: &mut Vec<String>) {
        for (k, v) in pairs {
            if let Err(e) = self.set(k, v) {
                errors.push(e);
            }
        }
    }

    pub fn apply_file(&mut self, path: &Path, errors: &mut Vec<String>) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let pairs = parse_key_values(&text)?;
        self.apply(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())), errors);
        Ok(())
    }

    /// Every validation problem, empty when the config is usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.density > 0.0 && self.density <= 1.0) {
            out.push(format!("density must lie in (0, 1], got {}", self.density));
        }
        if !(self.final_tolerance > 0.0) {
            out.push("final.tolerance must be positive".into());
        }
        let mut push = |r: inpaint_core::Result<()>| {
            if let Err(e) = r {
                out.push(e.to_string());
            }
        };
        push(self.solver.validate());
        push(self.densify_config().validate());
        push(self.ps.validate());
        push(self.init.validate());
        if self.ras.block_size == 0 || self.ras.overlap >= self.ras.block_size {
            out.push("ras.overlap must be smaller than ras.block_size".into());
        }
        if !(self.ras.local_tolerance > 0.0) {
            out.push("ras.local_tolerance must be positive".into());
        }
        if self.nlpe.candidates == 0 {
            out.push("nlpe.candidates must be positive".into());
        }
        if self.analytic.sigma < 0.0 {
            out.push("aa.sigma must be non-negative".into());
        }
        out
    }

    pub fn densify_config(&self) -> DensificationConfig {
        DensificationConfig {
            density: self.density,
            seed: self.seed,
            ..self.densify.clone()
        }
    }

    pub fn analytic_config(&self) -> AnalyticConfig {
        AnalyticConfig {
            density: self.density,
            seed: self.seed,
            ..self.analytic.clone()
        }
    }

    pub fn ps_config(&self) -> PsConfig {
        PsConfig {
            seed: self.seed,
            ..self.ps.clone()
        }
    }

    pub fn nlpe_config(&self) -> NlpeConfig {
        NlpeConfig {
            seed: self.seed,
            ..self.nlpe.clone()
        }
    }

    pub fn final_solver(&self) -> SolverConfig {
        self.solver.clone().with_tolerance(self.final_tolerance)
    }
}
