use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use inpaint_core::{pnm, Image};
use rayon::prelude::*;

use crate::config::PipelineConfig;
use crate::pipeline::run_pipeline;

/// Sweep CSV columns, in their fixed order.
pub const COLUMNS: [&str; 11] = [
    "image",
    "width",
    "height",
    "density",
    "spatial",
    "tonal",
    "mask_count",
    "mse",
    "psnr",
    "seconds",
    "status",
];

/// Box-average downscaling so that the longer side becomes `longest`.
/// Every output pixel averages the input area it covers, with fractional
/// weights for partially covered pixels.
pub fn box_downscale(img: &Image, longest: usize) -> Result<Image> {
    let (w, h) = (img.width(), img.height());
    let side = w.max(h);
    if longest == 0 || longest > side {
        bail!("resolution {longest} outside 1..={side} for a {w}x{h} image");
    }
    if longest == side {
        return Ok(img.clone());
    }
    let scale = side as f64 / longest as f64;
    let nw = ((w as f64 / scale).round() as usize).max(1);
    let nh = ((h as f64 / scale).round() as usize).max(1);
    let xs = coverage(w, nw);
    let ys = coverage(h, nh);
    let mut out = Image::new(nw, nh, img.channels());
    for c in 0..img.channels() {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for (oy, yc) in ys.iter().enumerate() {
            for (ox, xc) in xs.iter().enumerate() {
                let mut sum = 0.0;
                let mut weight = 0.0;
                for &(sy, wy) in yc {
                    for &(sx, wx) in xc {
                        sum += wy * wx * src[sy * w + sx];
                        weight += wy * wx;
                    }
                }
                dst[oy * nw + ox] = sum / weight;
            }
        }
    }
    Ok(out)
}

/// Source pixels and overlap lengths for every output pixel along one axis.
fn coverage(n: usize, m: usize) -> Vec<Vec<(usize, f64)>> {
    let step = n as f64 / m as f64;
    (0..m)
        .map(|o| {
            let a = o as f64 * step;
            let b = a + step;
            let first = a.floor() as usize;
            let last = (b.ceil() as usize).min(n);
            (first..last)
                .filter_map(|s| {
                    let overlap = (b.min(s as f64 + 1.0) - a.max(s as f64)).max(0.0);
                    (overlap > 1e-12).then_some((s, overlap))
                })
                .collect()
        })
        .collect()
}

/// PGM and PPM files of `dir`, sorted by name.
pub fn corpus_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading corpus {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("pgm" | "ppm")))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("corpus {} holds no PGM or PPM images", dir.display());
    }
    Ok(files)
}

struct Job {
    image: usize,
    resolution: usize,
    density: f64,
}

/// Runs the pipeline for every (image, resolution, density) and writes one
/// row each. Failures are recorded in the status column.
pub fn run_sweep(
    corpus: &Path,
    densities: &[f64],
    resolutions: &[usize],
    cfg: &PipelineConfig,
    csv_path: &Path,
) -> Result<usize> {
    if densities.is_empty() {
        bail!("the densities list is empty");
    }
    if resolutions.is_empty() {
        bail!("the resolutions list is empty");
    }
    let mut problems = Vec::new();
    for &d in densities {
        let mut probe = cfg.clone();
        probe.density = d;
        problems.extend(probe.problems());
    }
    if !problems.is_empty() {
        bail!("invalid configuration:\n  {}", problems.join("\n  "));
    }
    let files = corpus_images(corpus)?;
    let images = files
        .iter()
        .map(|p| pnm::read_image(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for image in 0..images.len() {
        for &resolution in resolutions {
            for &density in densities {
                jobs.push(Job {
                    image,
                    resolution,
                    density,
                });
            }
        }
    }

    let rows: Vec<Vec<String>> = jobs
        .par_iter()
        .map(|job| {
            let name = files[job.image]
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let mut row_cfg = cfg.clone();
            row_cfg.density = job.density;
            let mut row = vec![name, String::new(), String::new(), job.density.to_string()];
            row.push(cfg.spatial.to_string());
            row.push(cfg.tonal.to_string());
            let result = box_downscale(&images[job.image], job.resolution).and_then(|img| {
                row[1] = img.width().to_string();
                row[2] = img.height().to_string();
                run_pipeline(&img, &row_cfg)
            });
            match result {
                Ok(out) => {
                    row.push(out.mask.count().to_string());
                    row.push(format!("{:.6}", out.quality.mse));
                    row.push(out.quality.psnr.to_string());
                    row.push(if cfg.timing {
                        format!("{:.6}", out.seconds)
                    } else {
                        String::new()
                    });
                    row.push(if out.converged() { "ok" } else { "not-converged" }.to_string());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 4));
                    row.push(format!("error: {e:#}"));
                }
            }
            row
        })
        .collect();

    let mut writer = csv::Writer::from_path(csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    writer.write_record(COLUMNS)?;
    for row in &rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(rows.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_factor_is_a_block_mean() {
        let img = Image::from_fn(4, 4, 1, |x, y, _| (y * 4 + x) as f64);
        let small = box_downscale(&img, 2).unwrap();
        assert_eq!(small.data(), &[2.5, 4.5, 10.5, 12.5]);
    }

    #[test]
    fn fractional_factor_keeps_the_mean() {
        let img = Image::from_fn(9, 6, 1, |x, y, _| ((x * 7 + y * 3) % 11) as f64);
        let small = box_downscale(&img, 6).unwrap();
        assert_eq!((small.width(), small.height()), (6, 4));
        let mean = |i: &Image| i.data().iter().sum::<f64>() / i.data().len() as f64;
        assert!((mean(&img) - mean(&small)).abs() < 1e-9);
    }

    #[test]
    fn constant_stays_constant() {
        let img = Image::filled(10, 7, 3, 42.0);
        let small = box_downscale(&img, 3).unwrap();
        assert!(small.data().iter().all(|&v| (v - 42.0).abs() < 1e-12));
    }

    #[test]
    fn upscaling_is_rejected() {
        assert!(box_downscale(&Image::new(8, 8, 1), 16).is_err());
    }
}
