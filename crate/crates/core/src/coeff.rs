//! Optimal step coefficients.
//!
//! One SSHP2 step maps the residual `F` to
//!
//! ```text
//! F' = (1 - (alpha + beta)) I + alpha F + beta F^2 = I - alpha U - beta V
//! ```
//!
//! with `U = I - F` and `V = I - F^2`. Minimizing `||F'||_F` over real
//! `(alpha, beta)` is a 2x2 least-squares problem whose normal equations are
//!
//! ```text
//! c00 alpha + c01 beta = b1        c00 = <U, U>, c01 = Re<U, V>, b1 = Re tr U
//! c01 alpha + c11 beta = b2        c11 = <V, V>,                 b2 = Re tr V
//! ```
//!
//! Close to convergence `U` and `V` are both close to `I`, and forming
//! `c00 c11 - c01^2` directly loses every significant digit. The solve is
//! therefore carried out in the basis `(U, W)` with `W = V - U = F - F^2`,
//! which spans the same plane and has the same Gram determinant but no
//! cancellation.

use serde::{Deserialize, Serialize};

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default absolute determinant tolerance for real residuals.
pub const DEFAULT_DENOM_TOL_REAL: f64 = 1e-12;
/// Default absolute determinant tolerance for complex residuals.
pub const DEFAULT_DENOM_TOL_COMPLEX: f64 = 1e-5;

/// Normal-equation data of the coefficient least-squares problem.
///
/// All fields are real even for complex residuals. The complex formulation
/// that carries an extra factor 2 on both sides reduces to these values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSystem {
    /// `||I - F||_F^2`
    pub c00: f64,
    /// `Re <I - F, I - F^2>`
    pub c01: f64,
    /// `||I - F^2||_F^2`
    pub c11: f64,
    /// `n - Re tr F`
    pub b1: f64,
    /// `n - Re tr F^2`
    pub b2: f64,
    /// `Re <I - F, F - F^2>`
    pub c0d: f64,
    /// `||F - F^2||_F^2`
    pub cdd: f64,
    /// `Re tr (F - F^2)`
    pub bd: f64,
    /// `c00 c11 - c01^2`, evaluated as `c00 cdd - c0d^2`.
    pub det: f64,
    pub dim: usize,
}

impl GramSystem {
    /// Multiply every Gram entry and right-hand side by `factor`.
    ///
    /// The solution of the system is invariant under this; the determinant
    /// picks up `factor^2`.
    pub fn scaled(&self, factor: f64) -> GramSystem {
        GramSystem {
            c00: self.c00 * factor,
            c01: self.c01 * factor,
            c11: self.c11 * factor,
            b1: self.b1 * factor,
            b2: self.b2 * factor,
            c0d: self.c0d * factor,
            cdd: self.cdd * factor,
            bd: self.bd * factor,
            det: self.det * factor * factor,
            dim: self.dim,
        }
    }

    fn is_finite(&self) -> bool {
        [
            self.c00, self.c01, self.c11, self.b1, self.b2, self.c0d, self.cdd, self.bd, self.det,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// How the determinant is compared against the tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DenomMode {
    /// `|det| >= tol`
    #[default]
    Absolute,
    /// `|det| >= tol * max(1, c00 * c11)`
    Relative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenomTolerance {
    pub tol: f64,
    pub mode: DenomMode,
}

impl DenomTolerance {
    pub fn absolute(tol: f64) -> Self {
        DenomTolerance {
            tol,
            mode: DenomMode::Absolute,
        }
    }

    pub fn relative(tol: f64) -> Self {
        DenomTolerance {
            tol,
            mode: DenomMode::Relative,
        }
    }

    fn threshold(&self, g: &GramSystem) -> f64 {
        match self.mode {
            DenomMode::Absolute => self.tol,
            DenomMode::Relative => self.tol * (g.c00 * g.c11).max(1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientResult {
    pub alpha: f64,
    pub beta: f64,
    /// The determinant was below tolerance and a plain Schultz step `(0, 1)` was chosen.
    pub fallback: bool,
    pub det: f64,
}

impl CoefficientResult {
    pub const SCHULTZ: (f64, f64) = (0.0, 1.0);
}

/// Accumulate the Gram system for residual `f` and its square `f2 = f * f`.
pub fn build_gram<T: Scalar>(f: &Matrix<T>, f2: &Matrix<T>) -> Result<GramSystem> {
    if !f.is_square() {
        return Err(Error::NotSquare {
            op: "build_gram",
            rows: f.rows(),
            cols: f.cols(),
        });
    }
    if f.shape() != f2.shape() {
        return Err(Error::DimensionMismatch {
            op: "build_gram",
            left: f.shape(),
            right: f2.shape(),
        });
    }
    let n = f.rows();
    let (mut c00, mut c01, mut c11) = (0.0, 0.0, 0.0);
    let (mut c0d, mut cdd) = (0.0, 0.0);
    let (mut b1, mut b2, mut bd) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let fij = f[(i, j)];
            let gij = f2[(i, j)];
            let (u, v) = if i == j {
                (T::one() - fij, T::one() - gij)
            } else {
                (-fij, -gij)
            };
            let w = fij - gij;
            c00 += u.norm_sqr();
            c11 += v.norm_sqr();
            cdd += w.norm_sqr();
            c01 += (u.conj() * v).re();
            c0d += (u.conj() * w).re();
            if i == j {
                b1 += u.re();
                b2 += v.re();
                bd += w.re();
            }
        }
    }
    let det = c00 * cdd - c0d * c0d;
    Ok(GramSystem {
        c00,
        c01,
        c11,
        b1,
        b2,
        c0d,
        cdd,
        bd,
        det,
        dim: n,
    })
}

/// Solve the Gram system by Cramer's rule, or fall back to a Schultz step
/// when the determinant is below tolerance.
pub fn solve_coefficients(g: &GramSystem, tol: DenomTolerance) -> Result<CoefficientResult> {
    if tol.tol <= 0.0 || !tol.tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "denominator tolerance must be positive, got {}",
            tol.tol
        )));
    }
    if !g.is_finite() {
        return Err(Error::NonFinite("gram system"));
    }
    // det >= 0 by Cauchy-Schwarz; anything negative is rounding.
    let det = g.det.max(0.0);
    if det.abs() < tol.threshold(g) {
        let (alpha, beta) = CoefficientResult::SCHULTZ;
        return Ok(CoefficientResult {
            alpha,
            beta,
            fallback: true,
            det,
        });
    }
    // Unknowns in the (U, W) basis: s = alpha + beta multiplies U, t = beta multiplies W.
    let s = (g.cdd * g.b1 - g.c0d * g.bd) / det;
    let t = (g.c00 * g.bd - g.c0d * g.b1) / det;
    let (alpha, beta) = (s - t, t);
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::NonFinite("step coefficients"));
    }
    Ok(CoefficientResult {
        alpha,
        beta,
        fallback: false,
        det,
    })
}
