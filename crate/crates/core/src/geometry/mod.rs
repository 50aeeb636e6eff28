//! Voronoi labelling, the dual triangulation and error bucketing.

pub mod delaunay;
pub mod export;
pub mod jfa;
pub mod weights;

pub use delaunay::{accumulate_errors, bucket_errors, delaunay_from_voronoi, CellErrors, DelaunayMesh};
pub use export::{write_label_map, write_mesh};
pub use jfa::{brute_force_voronoi, jump_flood_from, jump_flood_voronoi, VoronoiLabels};
pub use weights::{voronoi_weights, WeightKind};
