//! Per-cell weights for averaging over Voronoi cells.

use crate::geometry::jfa::VoronoiLabels;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    /// `1/|cell|` for every pixel of the cell.
    Constant,
    /// `1/ln(2 + d)` with `d` the distance to the seed, normalized per cell.
    InverseLogDistance,
}

impl std::str::FromStr for WeightKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "constant" => Ok(WeightKind::Constant),
            "inverse-log" | "inverse-log-distance" => Ok(WeightKind::InverseLogDistance),
            other => Err(format!("unknown weight scheme {other:?}")),
        }
    }
}

/// Weight of every pixel towards its seed; the weights of each cell sum to 1.
pub fn voronoi_weights(labels: &VoronoiLabels, kind: WeightKind) -> Vec<f64> {
    let n = labels.labels().len();
    let raw: Vec<f64> = match kind {
        WeightKind::Constant => vec![1.0; n],
        WeightKind::InverseLogDistance => (0..n)
            .map(|i| 1.0 / (2.0 + (labels.distance2(i) as f64).sqrt()).ln())
            .collect(),
    };
    let mut totals = vec![0.0; labels.seed_count()];
    for (&l, &w) in labels.labels().iter().zip(&raw) {
        totals[l as usize] += w;
    }
    raw.iter()
        .zip(labels.labels())
        .map(|(&w, &l)| w / totals[l as usize])
        .collect()
}
