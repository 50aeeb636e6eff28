//! Homogeneous diffusion inpainting with spatial and tonal data optimization.

pub mod error;
pub mod geometry;
pub mod image;
pub mod pnm;
pub mod quality;
pub mod solver;
pub mod spatial;
pub mod stencil;
pub mod tonal;
pub mod transfer;

pub use error::{Error, Result};
pub use image::{Image, Mask};
pub use quality::{quality, Psnr, QualityReport};
pub use stencil::StencilSpec;
