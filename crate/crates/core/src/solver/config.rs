//! Solver configuration and its `key=value` text form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct OrasConfig {
    /// Pixels per block side.
    pub block_size: usize,
    /// Overlap width between neighbouring blocks.
    pub overlap: usize,
    /// Robin coefficient at inner block boundaries.
    pub robin_alpha: f64,
    /// Local CG stops once its squared residual drops below
    /// `local_fraction * |block| / N * |r|^2`.
    pub local_fraction: f64,
    pub local_max_iters: usize,
}

impl Default for OrasConfig {
    fn default() -> Self {
        OrasConfig {
            block_size: 32,
            overlap: 6,
            robin_alpha: 1.0,
            local_fraction: 0.25,
            local_max_iters: 200,
        }
    }
}

impl OrasConfig {
    pub fn validate(&self) -> Result<()> {
        if self.overlap < 1 {
            return Err(invalid("oras.overlap must be at least 1"));
        }
        if self.block_size < self.overlap + 2 {
            return Err(invalid("oras.block_size must be at least overlap + 2"));
        }
        if !(self.robin_alpha > 0.0) || !self.robin_alpha.is_finite() {
            return Err(invalid("oras.robin_alpha must be positive"));
        }
        if !(self.local_fraction > 0.0 && self.local_fraction < 1.0) {
            return Err(invalid("oras.local_fraction must lie in (0, 1)"));
        }
        if self.local_max_iters == 0 {
            return Err(invalid("oras.local_max_iters must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Levels {
    /// Coarsen until a single ORAS block covers the grid.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MultigridMode {
    /// Coarse-to-fine initialization followed by V-cycles on the finest level.
    ReducedFmg,
    VCycleOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultigridConfig {
    pub levels: Levels,
    pub pre_smooth: usize,
    pub post_smooth: usize,
    /// V-cycles per solve when no tolerance is set.
    pub vcycles: usize,
    pub mode: MultigridMode,
    /// Stop once the relative residual of the symmetrized system falls below this.
    pub tolerance: Option<f64>,
    pub max_vcycles: usize,
}

impl Default for MultigridConfig {
    fn default() -> Self {
        MultigridConfig {
            levels: Levels::Auto,
            pre_smooth: 1,
            post_smooth: 1,
            vcycles: 1,
            mode: MultigridMode::ReducedFmg,
            tolerance: Some(1e-4),
            max_vcycles: 100,
        }
    }
}

impl MultigridConfig {
    /// A fixed number of V-cycles and no residual check.
    pub fn fixed_cycles(vcycles: usize) -> Self {
        MultigridConfig {
            vcycles,
            tolerance: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == Levels::Fixed(0) {
            return Err(invalid("mg.levels must be at least 1"));
        }
        if self.pre_smooth == 0 && self.post_smooth == 0 {
            return Err(invalid("mg.pre_smooth and mg.post_smooth cannot both be 0"));
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(invalid("mg.tolerance must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverConfig {
    pub oras: OrasConfig,
    pub multigrid: MultigridConfig,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        self.oras.validate()?;
        self.multigrid.validate()
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.multigrid.tolerance = Some(tolerance);
        self
    }

    pub fn with_fixed_cycles(mut self, vcycles: usize) -> Self {
        self.multigrid.tolerance = None;
        self.multigrid.vcycles = vcycles;
        self
    }

    /// Applies one `key=value` setting. Returns `Ok(false)` for keys this
    /// config does not own.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let o = &mut self.oras;
        let m = &mut self.multigrid;
        match key {
            "oras.block_size" => o.block_size = parse(key, value)?,
            "oras.overlap" => o.overlap = parse(key, value)?,
            "oras.robin_alpha" => o.robin_alpha = parse(key, value)?,
            "oras.local_fraction" => o.local_fraction = parse(key, value)?,
            "oras.local_max_iters" => o.local_max_iters = parse(key, value)?,
            "mg.levels" => {
                m.levels = match value {
                    "auto" => Levels::Auto,
                    v => Levels::Fixed(parse(key, v)?),
                }
            }
            "mg.pre_smooth" => m.pre_smooth = parse(key, value)?,
            "mg.post_smooth" => m.post_smooth = parse(key, value)?,
            "mg.vcycles" => m.vcycles = parse(key, value)?,
            "mg.mode" => {
                m.mode = match value {
                    "fmg" | "reduced-fmg" => MultigridMode::ReducedFmg,
                    "vcycle" | "v-cycle" => MultigridMode::VCycleOnly,
                    v => return Err(invalid(&format!("unknown mg.mode {v:?}"))),
                }
            }
            "mg.tolerance" => {
                m.tolerance = match value {
                    "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "mg.max_vcycles" => m.max_vcycles = parse(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn to_key_values(&self) -> String {
        let o = &self.oras;
        let m = &self.multigrid;
        let mut out = String::new();
        let _ = writeln!(out, "oras.block_size={}", o.block_size);
        let _ = writeln!(out, "oras.overlap={}", o.overlap);
        let _ = writeln!(out, "oras.robin_alpha={}", o.robin_alpha);
        let _ = writeln!(out, "oras.local_fraction={}", o.local_fraction);
        let _ = writeln!(out, "oras.local_max_iters={}", o.local_max_iters);
        let levels = match m.levels {
            Levels::Auto => "auto".to_string(),
            Levels::Fixed(n) => n.to_string(),
        };
        let _ = writeln!(out, "mg.levels={levels}");
        let _ = writeln!(out, "mg.pre_smooth={}", m.pre_smooth);
        let _ = writeln!(out, "mg.post_smooth={}", m.post_smooth);
        let _ = writeln!(out, "mg.vcycles={}", m.vcycles);
        let mode = match m.mode {
            MultigridMode::ReducedFmg => "fmg",
            MultigridMode::VCycleOnly => "vcycle",
        };
        let _ = writeln!(out, "mg.mode={mode}");
        let tol = m.tolerance.map_or("none".to_string(), |t| t.to_string());
        let _ = writeln!(out, "mg.tolerance={tol}");
        let _ = writeln!(out, "mg.max_vcycles={}", m.max_vcycles);
        out
    }
}

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidConfig(msg.to_string())
}

pub fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse {key}={value}")))
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped; later
/// keys override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key=value", n + 1)))?;
        out.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = SolverConfig::default();
        cfg.oras.block_size = 7;
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::default();
        cfg.multigrid.pre_smooth = 0;
        cfg.multigrid.post_smooth = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = SolverConfig::default();
        cfg.oras.robin_alpha = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn key_values_roundtrip() {
        let mut cfg = SolverConfig::default();
        cfg.oras.robin_alpha = 0.5;
        cfg.multigrid.levels = Levels::Fixed(3);
        cfg.multigrid.tolerance = None;
        let text = cfg.to_key_values();
        let mut back = SolverConfig::default();
        for (k, v) in parse_key_values(&text).unwrap() {
            assert!(back.set(&k, &v).unwrap(), "unhandled key {k}");
        }
        assert_eq!(back, cfg);
    }

    #[test]
    fn parser_skips_comments_and_reports_lines() {
        let kv = parse_key_values("# header\n a = 1 # note\n\nb=2\n").unwrap();
        assert_eq!(kv["a"], "1");
        assert_eq!(kv["b"], "2");
        assert!(parse_key_values("novalue").is_err());
    }
}
