//! Matrix-free conjugate gradients.

/// A square linear operator applied without forming its matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Adapts a closure `(x, y) -> y = A x` to [`LinearOperator`].
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CgStop {
    /// `|r| <= tol * |r0|`.
    Relative(f64),
    /// `|r|^2 <= threshold`.
    AbsoluteSquared(f64),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CgReport {
    pub iterations: usize,
    /// Residual 2-norms, starting with the initial residual.
    pub residual_norms: Vec<f64>,
    pub converged: bool,
    /// A search direction with non-positive curvature was met.
    pub breakdown: bool,
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = rhs` in place, starting from the contents of `x`.
///
/// On breakdown the current iterate is kept: CG decreases the energy norm of
/// the error monotonically, so it is the best one seen.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    op: &A,
    rhs: &[f64],
    x: &mut [f64],
    stop: CgStop,
    max_iters: usize,
) -> CgReport {
    let n = op.dim();
    assert_eq!(rhs.len(), n, "rhs length must match the operator");
    assert_eq!(x.len(), n, "initial guess length must match the operator");

    let mut r = vec![0.0; n];
    op.apply(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(rhs) {
        *ri = bi - *ri;
    }
    let mut rr = dot(&r, &r);
    let target = match stop {
        CgStop::Relative(tol) => tol * tol * rr,
        CgStop::AbsoluteSquared(t) => t,
    };
    let mut report = CgReport {
        residual_norms: vec![rr.sqrt()],
        ..CgReport::default()
    };
    if rr <= target {
        report.converged = true;
        return report;
    }

    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    while report.iterations < max_iters {
        op.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) || !curvature.is_finite() {
            report.breakdown = true;
            break;
        }
        let alpha = rr / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        report.iterations += 1;
        report.residual_norms.push(rr_new.sqrt());
        if rr_new <= target {
            report.converged = true;
            break;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    report
}
