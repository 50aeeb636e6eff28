//! Delaunay triangulation read off a Voronoi label map, and per-triangle
//! error aggregation.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::jfa::VoronoiLabels;
use crate::image::Mask;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DelaunayMesh {
    width: usize,
    height: usize,
    vertices: Vec<(usize, usize)>,
    /// Sorted vertex triples in ascending order.
    triangles: Vec<[u32; 3]>,
    edges: Vec<(u32, u32)>,
    /// Triangle covering each pixel; see [`DelaunayMesh::assignment`].
    assignment: Vec<u32>,
    degenerate: bool,
}

fn orient(a: (usize, usize), b: (usize, usize), c: (i64, i64)) -> i64 {
    let (ax, ay) = (a.0 as i64, a.1 as i64);
    let (bx, by) = (b.0 as i64, b.1 as i64);
    (bx - ax) * (c.1 - ay) - (by - ay) * (c.0 - ax)
}

fn contains(t: [(usize, usize); 3], p: (i64, i64)) -> bool {
    let d0 = orient(t[0], t[1], p);
    let d1 = orient(t[1], t[2], p);
    let d2 = orient(t[2], t[0], p);
    let has_neg = d0 < 0 || d1 < 0 || d2 < 0;
    let has_pos = d0 > 0 || d1 > 0 || d2 > 0;
    if has_neg && has_pos {
        return false;
    }
    if has_neg || has_pos {
        return true;
    }
    // Collinear vertices: inside iff on the segment hull.
    let xs = t.map(|v| v.0 as i64);
    let ys = t.map(|v| v.1 as i64);
    p.0 >= *xs.iter().min().unwrap()
        && p.0 <= *xs.iter().max().unwrap()
        && p.1 >= *ys.iter().min().unwrap()
        && p.1 <= *ys.iter().max().unwrap()
}

fn sorted3(mut t: [u32; 3]) -> [u32; 3] {
    t.sort_unstable();
    t
}

fn edge(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

/// Builds the triangulation dual to `labels`.
///
/// Every 2x2 pixel corner where three labels meet yields their triangle; a
/// corner with four labels is split along the diagonal whose sorted label
/// pair is lexicographically smaller. Pixels are assigned to the first
/// triangle containing them (edges inclusive); pixels outside every
/// triangle go to the first triangle incident to their seed.
pub fn delaunay_from_voronoi(labels: &VoronoiLabels) -> DelaunayMesh {
    let (w, h) = (labels.width(), labels.height());
    let l = labels.labels();
    let mut tris = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            let a = l[y * w + x];
            if x + 1 < w && l[y * w + x + 1] != a {
                edges.insert(edge(a, l[y * w + x + 1]));
            }
            if y + 1 < h && l[(y + 1) * w + x] != a {
                edges.insert(edge(a, l[(y + 1) * w + x]));
            }
            if x + 1 >= w || y + 1 >= h {
                continue;
            }
            let b = l[y * w + x + 1];
            let c = l[(y + 1) * w + x];
            let d = l[(y + 1) * w + x + 1];
            let mut distinct = vec![a, b, c, d];
            distinct.sort_unstable();
            distinct.dedup();
            match distinct.len() {
                3 => {
                    tris.insert(sorted3([distinct[0], distinct[1], distinct[2]]));
                }
                4 => {
                    let d1 = edge(a, d);
                    let d2 = edge(b, c);
                    let (diag, others) = if d1 <= d2 { (d1, [b, c]) } else { (d2, [a, d]) };
                    for o in others {
                        tris.insert(sorted3([diag.0, diag.1, o]));
                    }
                }
                _ => {}
            }
        }
    }
    for t in &tris {
        edges.insert(edge(t[0], t[1]));
        edges.insert(edge(t[1], t[2]));
        edges.insert(edge(t[0], t[2]));
    }
    let triangles: Vec<[u32; 3]> = tris.into_iter().collect();
    let vertices = labels.seeds().to_vec();
    let degenerate = vertices.len() < 3 || triangles.is_empty();
    let assignment = assign_pixels(labels, &vertices, &triangles);
    DelaunayMesh {
        width: w,
        height: h,
        vertices,
        triangles,
        edges: edges.into_iter().collect(),
        assignment,
        degenerate,
    }
}

fn assign_pixels(labels: &VoronoiLabels, vertices: &[(usize, usize)], triangles: &[[u32; 3]]) -> Vec<u32> {
    let (w, h) = (labels.width(), labels.height());
    let mut out = vec![u32::MAX; w * h];
    if triangles.is_empty() {
        return out;
    }
    for (k, t) in triangles.iter().enumerate() {
        let p = t.map(|i| vertices[i as usize]);
        let x0 = p.iter().map(|v| v.0).min().unwrap();
        let x1 = p.iter().map(|v| v.0).max().unwrap();
        let y0 = p.iter().map(|v| v.1).min().unwrap();
        let y1 = p.iter().map(|v| v.1).max().unwrap();
        for y in y0..=y1.min(h - 1) {
            for x in x0..=x1.min(w - 1) {
                let i = y * w + x;
                if out[i] == u32::MAX && contains(p, (x as i64, y as i64)) {
                    out[i] = k as u32;
                }
            }
        }
    }
    // First triangle incident to each seed.
    let mut incident = vec![u32::MAX; vertices.len()];
    for (k, t) in triangles.iter().enumerate() {
        for &v in t {
            if incident[v as usize] == u32::MAX {
                incident[v as usize] = k as u32;
            }
        }
    }
    for (i, slot) in out.iter_mut().enumerate() {
        if *slot == u32::MAX {
            let inc = incident[labels.labels()[i] as usize];
            *slot = if inc == u32::MAX { 0 } else { inc };
        }
    }
    out
}

impl DelaunayMesh {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Fewer than three seeds or no triangle found (e.g. collinear seeds).
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Triangle index owning each pixel, `u32::MAX` everywhere for an empty mesh.
    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }
}

/// Summed error and highest-error pixel of each bucket (triangle or cell).
#[derive(Clone, Debug, PartialEq)]
pub struct CellErrors {
    pub sums: Vec<f64>,
    /// Highest-error pixel that is not excluded, if any has positive error.
    pub argmax: Vec<Option<usize>>,
    /// Error of pixels that could not be assigned (empty mesh).
    pub unassigned: f64,
}

impl CellErrors {
    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.sums.iter().sum()
    }
}

/// Aggregates a per-pixel error map into buckets given by `assignment`.
pub fn bucket_errors(assignment: &[u32], buckets: usize, errors: &[f64], exclude: Option<&Mask>) -> Result<CellErrors> {
    if assignment.len() != errors.len() {
        return Err(Error::shape(
            format!("{} error samples", assignment.len()),
            format!("{} error samples", errors.len()),
        ));
    }
    let mut sums = vec![0.0; buckets];
    let mut best = vec![0.0f64; buckets];
    let mut argmax = vec![None; buckets];
    let mut unassigned = 0.0;
    for (i, (&b, &e)) in assignment.iter().zip(errors).enumerate() {
        if b == u32::MAX {
            unassigned += e;
            continue;
        }
        let b = b as usize;
        sums[b] += e;
        if exclude.is_some_and(|m| m.is_set(i)) {
            continue;
        }
        if e > best[b] {
            best[b] = e;
            argmax[b] = Some(i);
        }
    }
    Ok(CellErrors {
        sums,
        argmax,
        unassigned,
    })
}

/// Per-triangle error sums and argmax pixels. Pixels in `exclude` count
/// towards the sums but are never chosen as argmax.
pub fn accumulate_errors(mesh: &DelaunayMesh, errors: &[f64], exclude: Option<&Mask>) -> Result<CellErrors> {
    bucket_errors(&mesh.assignment, mesh.triangles.len(), errors, exclude)
}
