//! Matrix-free `B = A^{-1} C` and its adjoint.

use crate::error::Result;
use crate::image::{Image, Mask};
use crate::solver::{InpaintSolver, SolverConfig, SolverReport};
use crate::stencil::laplacian_at;

/// `B` and `B^T` for one mask, with a prepared inner solver.
#[derive(Clone, Debug)]
pub struct TonalOperator {
    solver: InpaintSolver,
}

impl TonalOperator {
    pub fn new(mask: &Mask, inner: &SolverConfig) -> Result<Self> {
        Ok(TonalOperator {
            solver: InpaintSolver::new(mask, inner)?,
        })
    }

    pub fn from_solver(solver: InpaintSolver) -> Self {
        TonalOperator { solver }
    }

    pub fn mask(&self) -> &Mask {
        self.solver.mask()
    }

    pub fn solver(&self) -> &InpaintSolver {
        &self.solver
    }

    /// `B g` on one plane: the inpainting of the mask values of `g`.
    /// With `warm`, `u` holds the starting iterate.
    pub fn apply_b_plane(&self, g: &[f64], u: &mut [f64], warm: bool) -> SolverReport {
        let mut b = g.to_vec();
        for (v, &known) in b.iter_mut().zip(self.mask().bits()) {
            if !known {
                *v = 0.0;
            }
        }
        self.solver.solve_plane(&b, u, warm)
    }

    /// `B^T y` on one plane, via `B^T y = C (y - L w)` where `w` vanishes on
    /// the mask and solves `L w = y` elsewhere. `w` is kept for warm starts.
    pub fn apply_bt_plane(&self, y: &[f64], w: &mut [f64], out: &mut [f64], warm: bool) -> SolverReport {
        let bits = self.mask().bits();
        let mut b = y.to_vec();
        for (v, &known) in b.iter_mut().zip(bits) {
            if known {
                *v = 0.0;
            }
        }
        let report = self.solver.solve_plane(&b, w, warm);
        let (width, height) = (self.solver.width(), self.solver.height());
        for yy in 0..height {
            for x in 0..width {
                let i = yy * width + x;
                out[i] = if bits[i] {
                    y[i] - laplacian_at(w, width, height, x, yy)
                } else {
                    0.0
                };
            }
        }
        report
    }

    /// `B g` for all channels. Returns the inner V-cycle count.
    pub fn apply_b(&self, g: &Image, u: &mut Image, warm: bool) -> usize {
        let mut cycles = 0;
        for c in 0..g.channels() {
            cycles += self.apply_b_plane(g.plane(c), u.plane_mut(c), warm).vcycles;
        }
        cycles
    }

    /// `B^T y` for all channels into `out`; `w` holds the auxiliary solutions.
    pub fn apply_bt(&self, y: &Image, w: &mut Image, out: &mut Image, warm: bool) -> usize {
        let mut cycles = 0;
        for c in 0..y.channels() {
            cycles += self
                .apply_bt_plane(y.plane(c), w.plane_mut(c), out.plane_mut(c), warm)
                .vcycles;
        }
        cycles
    }
}

/// `B x` with a freshly prepared solver.
pub fn apply_b(x: &Image, mask: &Mask, solver: &SolverConfig) -> Result<Image> {
    x.check_mask(mask)?;
    let op = TonalOperator::new(mask, solver)?;
    let mut u = Image::new(x.width(), x.height(), x.channels());
    op.apply_b(x, &mut u, false);
    Ok(u)
}

/// `B^T y` with a freshly prepared solver.
pub fn apply_bt(y: &Image, mask: &Mask, solver: &SolverConfig) -> Result<Image> {
    y.check_mask(mask)?;
    let op = TonalOperator::new(mask, solver)?;
    let mut w = Image::new(y.width(), y.height(), y.channels());
    let mut out = w.clone();
    op.apply_bt(y, &mut w, &mut out, false);
    Ok(out)
}
