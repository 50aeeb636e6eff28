mod common;

use inpaint_core::geometry::{
    accumulate_errors, brute_force_voronoi, bucket_errors, delaunay_from_voronoi, jump_flood_voronoi,
    voronoi_weights, WeightKind,
};
use inpaint_core::spatial::random_mask;
use inpaint_core::Mask;
use proptest::prelude::*;

type P = (f64, f64);

fn pt(p: (usize, usize)) -> P {
    (p.0 as f64, p.1 as f64)
}

fn circumcircle(a: P, b: P, c: P) -> Option<(P, f64)> {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    if d.abs() < 1e-12 {
        return None;
    }
    let sq = |p: P| p.0 * p.0 + p.1 * p.1;
    let ux = (sq(a) * (b.1 - c.1) + sq(b) * (c.1 - a.1) + sq(c) * (a.1 - b.1)) / d;
    let uy = (sq(a) * (c.0 - b.0) + sq(b) * (a.0 - c.0) + sq(c) * (b.0 - a.0)) / d;
    let r = ((a.0 - ux).powi(2) + (a.1 - uy).powi(2)).sqrt();
    Some(((ux, uy), r))
}

/// Smallest depth by which any other seed intrudes into a circle through
/// `a` and `b` and a third seed; 0 for a true Delaunay edge.
fn edge_violation(seeds: &[P], a: usize, b: usize) -> f64 {
    let mut best = f64::INFINITY;
    for c in 0..seeds.len() {
        if c == a || c == b {
            continue;
        }
        let Some((centre, r)) = circumcircle(seeds[a], seeds[b], seeds[c]) else {
            continue;
        };
        let depth = seeds
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != a && i != b && i != c)
            .map(|(_, p)| r - ((p.0 - centre.0).powi(2) + (p.1 - centre.1).powi(2)).sqrt())
            .fold(0.0f64, f64::max);
        best = best.min(depth);
    }
    best
}

/// Delaunay triangles whose circumcircle keeps every other seed at least
/// two pixels away, so grid effects cannot flip them.
fn robust_delaunay_triangles(seeds: &[P]) -> Vec<[u32; 3]> {
    let n = seeds.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let Some((centre, r)) = circumcircle(seeds[a], seeds[b], seeds[c]) else {
                    continue;
                };
                let clear = (0..n)
                    .filter(|&i| i != a && i != b && i != c)
                    .all(|i| ((seeds[i].0 - centre.0).powi(2) + (seeds[i].1 - centre.1).powi(2)).sqrt() >= r + 2.0);
                if clear {
                    out.push([a as u32, b as u32, c as u32]);
                }
            }
        }
    }
    out
}

/// Number of seeds on the convex hull boundary, collinear ones included.
fn hull_size(seeds: &[P]) -> usize {
    let mut pts = seeds.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: P, a: P, b: P| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<P> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &P>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) < 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull.len()
}

#[test]
fn mesh_matches_euler_and_continuous_delaunay() {
    let mut total_edges = 0;
    let mut bad_edges = 0;
    for seed in 0..20u64 {
        let mask = random_mask(64, 64, 20, seed).unwrap();
        let labels = jump_flood_voronoi(&mask).unwrap();
        let mesh = delaunay_from_voronoi(&labels);
        let seeds: Vec<P> = labels.seeds().iter().map(|&p| pt(p)).collect();
        let expected = 2 * seeds.len() as i64 - 2 - hull_size(&seeds) as i64;
        let found = mesh.triangles().len() as i64;
        // Thin triangles near the hull can vanish on the pixel grid.
        assert!(found <= expected, "seed {seed}: {found} triangles, Euler allows {expected}");
        let have: std::collections::BTreeSet<[u32; 3]> = mesh.triangles().iter().copied().collect();
        for t in robust_delaunay_triangles(&seeds) {
            let Some((c, _)) = circumcircle(seeds[t[0] as usize], seeds[t[1] as usize], seeds[t[2] as usize]) else {
                continue;
            };
            // Triangles whose Voronoi vertex lies outside the image cannot
            // appear in a label map of the image.
            if c.0 >= 1.0 && c.1 >= 1.0 && c.0 <= 62.0 && c.1 <= 62.0 {
                assert!(have.contains(&t), "seed {seed}: Delaunay triangle {t:?} missing");
            }
        }
        for &(a, b) in mesh.edges() {
            total_edges += 1;
            if edge_violation(&seeds, a as usize, b as usize) > 1.5 {
                bad_edges += 1;
            }
        }
    }
    assert_eq!(bad_edges, 0, "{bad_edges} of {total_edges} edges are far from Delaunay");
}

#[test]
fn square_corners_split_deterministically() {
    let mask = Mask::from_indices(9, 9, [9 + 1, 9 + 7, 7 * 9 + 1, 7 * 9 + 7]);
    let labels = jump_flood_voronoi(&mask).unwrap();
    let first = delaunay_from_voronoi(&labels);
    assert_eq!(first.triangles(), &[[0, 1, 3], [0, 2, 3]]);
    for _ in 0..5 {
        assert_eq!(delaunay_from_voronoi(&jump_flood_voronoi(&mask).unwrap()), first);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jump_flood_agrees_with_brute_force(w in 8usize..96, h in 8usize..96, count in 1usize..60, seed in 0u64..10_000) {
        let count = count.min(w * h - 1);
        let mask = random_mask(w, h, count, seed).unwrap();
        let jfa = jump_flood_voronoi(&mask).unwrap();
        let exact = brute_force_voronoi(&mask).unwrap();
        let agree = (0..w * h).filter(|&i| jfa.distance2(i) == exact.distance2(i)).count();
        prop_assert!(agree as f64 >= 0.99 * (w * h) as f64, "{agree} of {}", w * h);
    }

    #[test]
    fn every_pixel_has_one_label_and_one_triangle(w in 8usize..64, h in 8usize..64, count in 3usize..40, seed in 0u64..10_000) {
        let mask = random_mask(w, h, count, seed).unwrap();
        let labels = jump_flood_voronoi(&mask).unwrap();
        prop_assert!(labels.labels().iter().all(|&l| (l as usize) < labels.seed_count()));
        let mesh = delaunay_from_voronoi(&labels);
        if !mesh.is_degenerate() {
            prop_assert!(mesh.assignment().iter().all(|&t| (t as usize) < mesh.triangles().len()));
        }
    }

    #[test]
    fn triangle_errors_partition_the_total(w in 8usize..64, h in 8usize..64, count in 3usize..40, seed in 0u64..10_000) {
        let mask = random_mask(w, h, count, seed).unwrap();
        let mesh = delaunay_from_voronoi(&jump_flood_voronoi(&mask).unwrap());
        prop_assume!(!mesh.is_degenerate());
        // Integer-valued errors keep every partial sum exact.
        let errors: Vec<f64> = (0..w * h).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64).collect();
        let buckets = accumulate_errors(&mesh, &errors, Some(&mask)).unwrap();
        prop_assert_eq!(buckets.unassigned, 0.0);
        prop_assert_eq!(buckets.sums.iter().sum::<f64>(), errors.iter().sum::<f64>());
    }

    #[test]
    fn cell_errors_partition_the_total(w in 4usize..64, h in 4usize..64, count in 1usize..40, seed in 0u64..10_000) {
        let count = count.min(w * h - 1);
        let mask = random_mask(w, h, count, seed).unwrap();
        let labels = jump_flood_voronoi(&mask).unwrap();
        let errors: Vec<f64> = (0..w * h).map(|i| ((i * 7 + 3) % 50) as f64).collect();
        let cells = bucket_errors(labels.labels(), labels.seed_count(), &errors, None).unwrap();
        prop_assert_eq!(cells.total(), errors.iter().sum::<f64>());
    }

    #[test]
    fn mesh_is_a_function_of_the_labels(w in 8usize..48, h in 8usize..48, count in 3usize..30, seed in 0u64..10_000) {
        let mask = random_mask(w, h, count, seed).unwrap();
        let labels = jump_flood_voronoi(&mask).unwrap();
        prop_assert_eq!(delaunay_from_voronoi(&labels), delaunay_from_voronoi(&labels.clone()));
    }

    #[test]
    fn voronoi_weights_sum_to_one_per_cell(w in 4usize..48, h in 4usize..48, count in 1usize..30, seed in 0u64..10_000, log in any::<bool>()) {
        let count = count.min(w * h - 1);
        let labels = jump_flood_voronoi(&random_mask(w, h, count, seed).unwrap()).unwrap();
        let kind = if log { WeightKind::InverseLogDistance } else { WeightKind::Constant };
        let weights = voronoi_weights(&labels, kind);
        let mut sums = vec![0.0; labels.seed_count()];
        for (i, &l) in labels.labels().iter().enumerate() {
            sums[l as usize] += weights[i];
        }
        prop_assert!(sums.iter().all(|s| (s - 1.0).abs() <= 1e-12));
    }
}
