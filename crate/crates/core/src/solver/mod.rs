//! Linear solvers for the inpainting system.

pub mod cg;
pub mod config;
pub mod decomposition;
pub mod multigrid;
pub mod oras;

pub use cg::{cg_solve, CgReport, CgStop, FnOperator, LinearOperator};
pub use config::{parse_key_values, Levels, MultigridConfig, MultigridMode, OrasConfig, SolverConfig};
pub use decomposition::{Block, BlockDecomposition, WeightScheme};
pub use multigrid::{inpaint, vcycle, GridHierarchy, InpaintSolver, SolverReport};
pub use oras::{oras_iteration, Level, SweepStats};
