#![allow(dead_code)]

use std::path::PathBuf;

use inpaint_core::{pnm, Image, Mask};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn corpus() -> Vec<(String, Image)> {
    ["astronaut", "brick", "camera", "chelsea", "coffee"]
        .iter()
        .map(|n| (n.to_string(), pnm::read_image(fixture(&format!("corpus/{n}.pgm"))).unwrap()))
        .collect()
}

/// Image of the given size with 8-bit-range values.
pub fn image(w: usize, h: usize, channels: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0f64..255.0, w * h * channels)
        .prop_map(move |data| Image::from_vec(w, h, channels, data).unwrap())
}

/// Mask with at least one and fewer than all pixels set.
pub fn mask(w: usize, h: usize) -> impl Strategy<Value = Mask> {
    let n = w * h;
    prop::collection::btree_set(0..n, 1..n.max(2)).prop_map(move |set| Mask::from_indices(w, h, set))
}

pub fn sparse_mask(w: usize, h: usize, max: usize) -> impl Strategy<Value = Mask> {
    let n = w * h;
    prop::collection::btree_set(0..n, 1..=max.min(n - 1)).prop_map(move |set| Mask::from_indices(w, h, set))
}

/// Dimensions, then an image and a mask of that size.
pub fn instance(min: usize, max: usize) -> impl Strategy<Value = (Image, Mask)> {
    (min..=max, min..=max).prop_flat_map(|(w, h)| (image(w, h, 1), mask(w, h)))
}

pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
