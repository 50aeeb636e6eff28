//! Pixel-grid containers.
//!
//! [`Image`] stores each channel as its own row-major plane so that the
//! single-channel kernels in the solvers can borrow a plane as a slice.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Self::filled(width, height, channels, 0.0)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        assert!(channels >= 1, "an image needs at least one channel");
        Image {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    /// Builds an image from channel-major data (plane 0 first).
    pub fn from_vec(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidConfig("image needs at least one channel".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::shape(
                format!("{} samples", width * height * channels),
                format!("{} samples", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn from_plane(width: usize, height: usize, plane: Vec<f64>) -> Result<Self> {
        Self::from_vec(width, height, 1, plane)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut img = Self::new(width, height, channels);
        for c in 0..channels {
            let plane = img.plane_mut(c);
            for y in 0..height {
                for x in 0..width {
                    plane[y * width + x] = f(x, y, c);
                }
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Pixels per channel.
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.pixel_count() == 0
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, channel: usize) -> &[f64] {
        let n = self.pixel_count();
        &self.data[channel * n..(channel + 1) * n]
    }

    pub fn plane_mut(&mut self, channel: usize) -> &mut [f64] {
        let n = self.pixel_count();
        &mut self.data[channel * n..(channel + 1) * n]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.pixel_count().max(1))
    }

    pub fn planes_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        let n = self.pixel_count().max(1);
        self.data.chunks_exact_mut(n)
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.data[channel * self.pixel_count() + y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: f64) {
        let n = self.pixel_count();
        self.data[channel * n + y * self.width + x] = value;
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn check_same_shape(&self, other: &Image) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(self.shape_string(), other.shape_string()))
        }
    }

    pub(crate) fn check_mask(&self, mask: &Mask) -> Result<()> {
        if self.width == mask.width() && self.height == mask.height() {
            Ok(())
        } else {
            Err(Error::shape(
                format!("mask {}x{}", self.width, self.height),
                format!("mask {}x{}", mask.width(), mask.height()),
            ))
        }
    }

    pub(crate) fn shape_string(&self) -> String {
        format!("{}x{}x{}", self.width, self.height, self.channels)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Zeroes every sample outside the mask, in all channels.
    pub fn masked(&self, mask: &Mask) -> Image {
        let mut out = self.clone();
        for plane in out.planes_mut() {
            for (v, &known) in plane.iter_mut().zip(mask.bits()) {
                if !known {
                    *v = 0.0;
                }
            }
        }
        out
    }

    /// Per-pixel squared error summed over channels.
    pub fn squared_error_map(&self, other: &Image) -> Result<Vec<f64>> {
        self.check_same_shape(other)?;
        let n = self.pixel_count();
        let mut e = vec![0.0; n];
        for (a, b) in self.planes().zip(other.planes()) {
            for i in 0..n {
                let d = a[i] - b[i];
                e[i] += d * d;
            }
        }
        Ok(e)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// Averages all channels into a single plane.
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let n = self.pixel_count();
        let mut out = vec![0.0; n];
        for plane in self.planes() {
            for (o, &v) in out.iter_mut().zip(plane) {
                *o += v;
            }
        }
        let k = self.channels as f64;
        out.iter_mut().for_each(|v| *v /= k);
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data: out,
        }
    }
}

/// Binary inpainting mask shared by all channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mask")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("count", &self.count())
            .finish()
    }
}

impl Mask {
    pub fn empty(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn full(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            bits: vec![true; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::shape(
                format!("{} mask entries", width * height),
                format!("{} mask entries", bits.len()),
            ));
        }
        Ok(Mask {
            width,
            height,
            bits,
        })
    }

    pub fn from_indices(width: usize, height: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = Self::empty(width, height);
        for i in indices {
            mask.bits[i] = true;
        }
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_set(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, index: usize, value: bool) {
        self.bits[index] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// True when no pixel is stored.
    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn density(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.bits.len() as f64
        }
    }

    /// Row-major indices of the stored pixels.
    pub fn indices(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }
}
