//! Debug export of label maps and meshes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::geometry::delaunay::DelaunayMesh;
use crate::geometry::jfa::VoronoiLabels;

/// Deterministic pseudo-colour for a label.
fn label_colour(label: u32) -> [u8; 3] {
    let mut h = label.wrapping_mul(0x9E37_79B9) ^ 0x5bd1_e995;
    h ^= h >> 15;
    h = h.wrapping_mul(0x2c1b_3c6d);
    h ^= h >> 12;
    [(h & 0xff) as u8, ((h >> 8) & 0xff) as u8, ((h >> 16) & 0xff) as u8]
}

/// Writes the label map as a binary PPM with one colour per cell.
pub fn write_label_map(path: impl AsRef<Path>, labels: &VoronoiLabels) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P6\n{} {}\n255\n", labels.width(), labels.height())?;
    for &l in labels.labels() {
        out.write_all(&label_colour(l))?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the mesh as text: `v x y` per vertex, then `t a b c` per triangle.
pub fn write_mesh(path: impl AsRef<Path>, mesh: &DelaunayMesh) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {} vertices, {} triangles", mesh.vertices().len(), mesh.triangles().len())?;
    for &(x, y) in mesh.vertices() {
        writeln!(out, "v {x} {y}")?;
    }
    for t in mesh.triangles() {
        writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
    }
    out.flush()?;
    Ok(())
}
