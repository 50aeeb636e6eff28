//! Per-iteration progress records and their CSV form.

use std::path::Path;

use crate::error::Result;
use crate::quality::Psnr;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mask_count: usize,
    pub mse: f64,
    pub seconds: f64,
}

impl IterationRecord {
    pub fn psnr(&self) -> Psnr {
        Psnr::from_mse(self.mse)
    }
}

/// Columns: `iteration,mask_count,mse,psnr,seconds`. Without `timing` the
/// seconds column is left empty so that reruns produce identical files.
pub fn write_history_csv(path: impl AsRef<Path>, records: &[IterationRecord], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "mask_count", "mse", "psnr", "seconds"])?;
    for r in records {
        w.write_record([
            r.iteration.to_string(),
            r.mask_count.to_string(),
            format!("{:.6}", r.mse),
            r.psnr().to_string(),
            if timing {
                format!("{:.6}", r.seconds)
            } else {
                String::new()
            },
        ])?;
    }
    w.flush()?;
    Ok(())
}
