//! Iteration engines: SSHP2 (variable coefficients), HP2 (Schultz) and HP3.
//!
//! Every method starts from `X_0 = A^* / (2 ||A||_F^2)`, which places the
//! eigenvalues of `A X_0` in `(0, 1/2]` and hence the spectrum of the residual
//! `F_0 = I - A X_0` in `[1/2, 1)`. The residual is then propagated by its own
//! recurrence instead of being recomputed from `A`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coeff::{
    self, CoefficientResult, DenomMode, DenomTolerance, DEFAULT_DENOM_TOL_COMPLEX,
    DEFAULT_DENOM_TOL_REAL,
};
use crate::dense::{adjoint, affine_combine, frob_norm, matmul, Matrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of iterations looked back by the stagnation guard.
pub const STAGNATION_WINDOW: usize = 25;
/// Minimum decrease factor of `||F_k||_F` over [`STAGNATION_WINDOW`] iterations.
pub const STAGNATION_FACTOR: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Schultz (Newton) iteration, `X (2I - A X)`.
    Hp2,
    /// Hyper-power iteration of order three, `X (I + F + F^2)`.
    Hp3,
    /// Schultz-type step with per-iteration optimal coefficients.
    Sshp2,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sshp2, Method::Hp2, Method::Hp3];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hp2 => "hp2",
            Method::Hp3 => "hp3",
            Method::Sshp2 => "sshp2",
        }
    }

    /// Matrix products per iteration.
    pub fn matmuls_per_iteration(self) -> usize {
        match self {
            Method::Hp2 | Method::Sshp2 => 2,
            Method::Hp3 => 3,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hp2" | "schultz" => Ok(Method::Hp2),
            "hp3" => Ok(Method::Hp3),
            "sshp2" => Ok(Method::Sshp2),
            other => Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Stop once `||F_k||_F < epsilon`.
    pub epsilon: f64,
    pub max_iter: usize,
    /// Determinant tolerance; `None` picks the real or complex default.
    pub denom_tol: Option<f64>,
    pub denom_mode: DenomMode,
    pub record_trace: bool,
    /// Recompute `F_{k+1} = I - A X_{k+1}` from `A` every iteration instead of
    /// propagating the recurrence. Costs one extra product per iteration.
    pub recompute_residual: bool,
    /// Override the scale `c` of the initial guess `X_0 = c A^*`.
    pub x0_scale: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-10,
            max_iter: 1000,
            denom_tol: None,
            denom_mode: DenomMode::Absolute,
            record_trace: true,
            recompute_residual: false,
            x0_scale: None,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_denom_tol(mut self, tol: f64) -> Self {
        self.denom_tol = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if let Some(tol) = self.denom_tol {
            if tol <= 0.0 || !tol.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "denominator tolerance must be positive, got {tol}"
                )));
            }
        }
        if let Some(c) = self.x0_scale {
            if !c.is_finite() || c == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "initial guess scale must be finite and nonzero, got {c}"
                )));
            }
        }
        Ok(())
    }

    /// The tolerance actually used for element type `T`.
    pub fn denom_tolerance<T: Scalar>(&self) -> DenomTolerance {
        let tol = self.denom_tol.unwrap_or(if T::IS_COMPLEX {
            DEFAULT_DENOM_TOL_COMPLEX
        } else {
            DEFAULT_DENOM_TOL_REAL
        });
        DenomTolerance {
            tol,
            mode: self.denom_mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    /// Coefficients of the step; `None` for HP3, which is not of this form.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `||F_k||_F` before the step.
    pub res_norm: f64,
    pub fallback: bool,
    pub wall_ns: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Converged,
    MaxIter,
    /// `||F_k||_F` stopped decreasing, typically because the residual is
    /// approaching a nonzero idempotent matrix.
    Stagnated,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport<T> {
    pub method: Method,
    /// Approximate inverse.
    pub x: Matrix<T>,
    pub final_res: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub trace: Vec<IterationRecord>,
    /// Matrix products performed, including the initial residual.
    pub matmul_count: usize,
    pub wall_ns: u64,
    pub config: SolverConfig,
    /// Resolved determinant tolerance.
    pub denom_tol: f64,
}

impl<T> SolveReport<T> {
    pub fn n(&self) -> usize
    where
        T: Scalar,
    {
        self.x.rows()
    }
}

/// State handed to an observer after every step of [`run_observed`].
pub struct StepView<'a, T> {
    pub k: usize,
    /// `X_k`
    pub x: &'a Matrix<T>,
    /// `F_k`
    pub f: &'a Matrix<T>,
    /// `F_k^2`
    pub f2: &'a Matrix<T>,
    pub coeffs: Option<CoefficientResult>,
    pub x_next: &'a Matrix<T>,
    pub f_next: &'a Matrix<T>,
}

fn require_square<T: Scalar>(a: &Matrix<T>, op: &'static str) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare {
            op,
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

/// `X_0 = A^* / (2 ||A||_F^2)`.
pub fn initial_guess<T: Scalar>(a: &Matrix<T>) -> Result<Matrix<T>> {
    require_square(a, "initial_guess")?;
    let norm_sq: f64 = a.as_slice().iter().map(|v| v.norm_sqr()).sum();
    if norm_sq == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    if !norm_sq.is_finite() {
        return Err(Error::NonFinite("input matrix"));
    }
    Ok(adjoint(a).scale(1.0 / (2.0 * norm_sq)))
}

/// `F = I - A X`.
pub fn compute_residual<T: Scalar>(a: &Matrix<T>, x: &Matrix<T>) -> Result<Matrix<T>> {
    require_square(a, "compute_residual")?;
    if a.shape() != x.shape() {
        return Err(Error::DimensionMismatch {
            op: "compute_residual",
            left: a.shape(),
            right: x.shape(),
        });
    }
    matmul(a, x)?.identity_minus()
}

/// `X_{k+1} = X ((alpha + beta) I + beta F)` and
/// `F_{k+1} = (1 - (alpha + beta)) I + alpha F + beta F^2`.
pub fn sshp2_step<T: Scalar>(
    x: &Matrix<T>,
    f: &Matrix<T>,
    f2: &Matrix<T>,
    alpha: f64,
    beta: f64,
) -> Result<(Matrix<T>, Matrix<T>)> {
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::NonFinite("step coefficients"));
    }
    let sum = alpha + beta;
    let poly = affine_combine(sum, beta, 0.0, f, f)?;
    let x_next = matmul(x, &poly)?;
    let f_next = affine_combine(1.0 - sum, alpha, beta, f, f2)?;
    Ok((x_next, f_next))
}

/// Schultz step: `X_{k+1} = X (I + F)`, `F_{k+1} = F^2`.
pub fn hp2_step<T: Scalar>(x: &Matrix<T>, f: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let f2 = matmul(f, f)?;
    hp2_step_with_square(x, f, f2)
}

fn hp2_step_with_square<T: Scalar>(
    x: &Matrix<T>,
    f: &Matrix<T>,
    f2: Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let poly = affine_combine(1.0, 1.0, 0.0, f, f)?;
    Ok((matmul(x, &poly)?, f2))
}

/// Third-order hyper-power step: `X_{k+1} = X (I + F + F^2)`, `F_{k+1} = F^3`.
pub fn hp3_step<T: Scalar>(
    x: &Matrix<T>,
    f: &Matrix<T>,
    f2: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let poly = affine_combine(1.0, 1.0, 1.0, f, f2)?;
    let x_next = matmul(x, &poly)?;
    let f_next = matmul(f, f2)?;
    Ok((x_next, f_next))
}

/// Invert `a` with the given method.
pub fn run<T: Scalar>(a: &Matrix<T>, method: Method, cfg: &SolverConfig) -> Result<SolveReport<T>> {
    run_observed(a, method, cfg, |_| {})
}

/// [`run`] with a callback that sees every intermediate residual.
pub fn run_observed<T, O>(
    a: &Matrix<T>,
    method: Method,
    cfg: &SolverConfig,
    mut observe: O,
) -> Result<SolveReport<T>>
where
    T: Scalar,
    O: FnMut(&StepView<'_, T>),
{
    cfg.validate()?;
    require_square(a, "run")?;
    a.ensure_finite("input matrix")?;
    let tol = cfg.denom_tolerance::<T>();

    let started = Instant::now();
    let mut x = match cfg.x0_scale {
        Some(c) => {
            if frob_norm(a) == 0.0 {
                return Err(Error::ZeroMatrix);
            }
            adjoint(a).scale(c)
        }
        None => initial_guess(a)?,
    };
    let mut f = compute_residual(a, &x)?;
    let mut matmuls = 1;
    let mut res = frob_norm(&f);
    if !res.is_finite() {
        return Err(Error::Diverged { iteration: 0 });
    }

    let mut trace = Vec::new();
    let mut history = vec![res];
    let mut k = 0;
    let mut stop = StopReason::MaxIter;

    loop {
        if res < cfg.epsilon {
            stop = StopReason::Converged;
            break;
        }
        if k >= cfg.max_iter {
            break;
        }
        let t0 = Instant::now();
        let f2 = matmul(&f, &f)?;
        let (coeffs, (x_next, mut f_next)) = match method {
            Method::Sshp2 => {
                let gram = coeff::build_gram(&f, &f2)?;
                let c = coeff::solve_coefficients(&gram, tol)?;
                (Some(c), sshp2_step(&x, &f, &f2, c.alpha, c.beta)?)
            }
            Method::Hp2 => {
                let fixed = CoefficientResult {
                    alpha: 0.0,
                    beta: 1.0,
                    fallback: false,
                    det: 0.0,
                };
                (Some(fixed), hp2_step_with_square(&x, &f, f2.clone())?)
            }
            Method::Hp3 => (None, hp3_step(&x, &f, &f2)?),
        };
        matmuls += method.matmuls_per_iteration();
        if cfg.recompute_residual {
            f_next = compute_residual(a, &x_next)?;
            matmuls += 1;
        }

        observe(&StepView {
            k,
            x: &x,
            f: &f,
            f2: &f2,
            coeffs,
            x_next: &x_next,
            f_next: &f_next,
        });

        if cfg.record_trace {
            trace.push(IterationRecord {
                k,
                alpha: coeffs.map(|c| c.alpha),
                beta: coeffs.map(|c| c.beta),
                res_norm: res,
                fallback: coeffs.is_some_and(|c| c.fallback),
                wall_ns: t0.elapsed().as_nanos() as u64,
            });
        }

        x = x_next;
        f = f_next;
        k += 1;
        res = frob_norm(&f);
        if !res.is_finite() {
            return Err(Error::Diverged { iteration: k });
        }
        history.push(res);
        if k >= STAGNATION_WINDOW
            && res >= cfg.epsilon
            && res > STAGNATION_FACTOR * history[k - STAGNATION_WINDOW]
        {
            stop = StopReason::Stagnated;
            break;
        }
    }
    debug_assert_eq!(
        matmuls,
        1 + k * (method.matmuls_per_iteration() + usize::from(cfg.recompute_residual))
    );

    Ok(SolveReport {
        method,
        x,
        final_res: res,
        iterations: k,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        trace,
        matmul_count: matmuls,
        wall_ns: started.elapsed().as_nanos() as u64,
        config: cfg.clone(),
        denom_tol: tol.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{RealMatrix, ComplexMatrix};
    use crate::Complex64;
    use approx::assert_relative_eq;

    fn diag(v: &[f64]) -> RealMatrix {
        RealMatrix::from_diag(v)
    }

    fn assert_close(a: &RealMatrix, b: &RealMatrix, tol: f64) {
        let d = a.max_abs_diff(b).unwrap();
        assert!(d <= tol, "max diff {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn method_parse_and_display() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("hp4".parse::<Method>().is_err());
    }

    #[test]
    fn initial_guess_examples() {
        assert_eq!(initial_guess(&RealMatrix::identity(2)).unwrap(), RealMatrix::identity(2).scale(0.25));
        assert_close(&initial_guess(&diag(&[1.0, 2.0])).unwrap(), &diag(&[0.1, 0.2]), 1e-16);
        assert_relative_eq!(initial_guess(&diag(&[4.0])).unwrap()[(0, 0)], 0.125);
        assert!(matches!(initial_guess(&RealMatrix::zeros(3, 3)), Err(Error::ZeroMatrix)));
        let c = ComplexMatrix::from_diag(&[Complex64::new(0.0, 2.0)]);
        // conj(2i) / (2 * 4)
        assert_eq!(initial_guess(&c).unwrap()[(0, 0)], Complex64::new(0.0, -0.25));
    }

    #[test]
    fn residual_examples() {
        let a = diag(&[1.0, 2.0]);
        assert_close(&compute_residual(&a, &diag(&[1.0, 0.5])).unwrap(), &RealMatrix::zeros(2, 2), 0.0);
        assert_close(&compute_residual(&a, &diag(&[0.1, 0.2])).unwrap(), &diag(&[0.9, 0.6]), 1e-16);
        assert_eq!(
            compute_residual(&RealMatrix::identity(2), &RealMatrix::zeros(2, 2)).unwrap(),
            RealMatrix::identity(2)
        );
        assert!(compute_residual(&a, &RealMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn sshp2_step_examples() {
        let x = diag(&[0.1, 0.2]);
        let f = diag(&[0.9, 0.6]);
        let f2 = diag(&[0.81, 0.36]);

        let (xn, fn_) = sshp2_step(&x, &f, &f2, 0.0, 1.0).unwrap();
        let (xs, fs) = hp2_step(&x, &f).unwrap();
        assert_eq!(fn_, f2);
        assert_close(&xn, &xs, 1e-16);
        assert_close(&fs, &f2, 1e-16);

        let (xn, fn_) = sshp2_step(&x, &f, &f2, -37.5, 25.0).unwrap();
        assert_close(&fn_, &RealMatrix::zeros(2, 2), 1e-13);
        assert_close(&xn, &diag(&[1.0, 0.5]), 1e-13);

        let (xn, fn_) = sshp2_step(&x, &f, &f2, 1.0, 0.0).unwrap();
        assert_eq!(xn, x);
        assert_eq!(fn_, f);

        assert!(sshp2_step(&x, &f, &f2, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn hp2_step_examples() {
        let x = diag(&[0.3, 0.7]);
        let (xn, fn_) = hp2_step(&x, &RealMatrix::zeros(2, 2)).unwrap();
        assert_eq!(xn, x);
        assert_eq!(fn_, RealMatrix::zeros(2, 2));

        let (xn, fn_) = hp2_step(&diag(&[0.25]), &diag(&[0.5])).unwrap();
        assert_relative_eq!(xn[(0, 0)], 0.375);
        assert_relative_eq!(fn_[(0, 0)], 0.25);

        let (_, fn_) = hp2_step(&x, &diag(&[0.9, 0.6])).unwrap();
        assert_close(&fn_, &diag(&[0.81, 0.36]), 1e-16);
        assert!(hp2_step(&x, &RealMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn hp3_step_examples() {
        let x = diag(&[0.3, 0.7]);
        let z = RealMatrix::zeros(2, 2);
        assert_eq!(hp3_step(&x, &z, &z).unwrap().0, x);

        let (xn, fn_) = hp3_step(&diag(&[0.25]), &diag(&[0.5]), &diag(&[0.25])).unwrap();
        assert_relative_eq!(xn[(0, 0)], 0.4375);
        assert_relative_eq!(fn_[(0, 0)], 0.125);

        let f = diag(&[0.9, 0.6]);
        let (_, fn_) = hp3_step(&x, &f, &matmul(&f, &f).unwrap()).unwrap();
        assert_close(&fn_, &diag(&[0.729, 0.216]), 1e-15);
    }

    #[test]
    fn sshp2_one_step_on_two_point_spectrum() {
        let r = run(&diag(&[1.0, 2.0]), Method::Sshp2, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_close(&r.x, &diag(&[1.0, 0.5]), 1e-12);
        assert_eq!(r.trace.len(), 1);
        assert!((r.trace[0].alpha.unwrap() + 37.5).abs() < 1e-12);
        assert!((r.trace[0].beta.unwrap() - 25.0).abs() < 1e-12);
        assert!(!r.trace[0].fallback);
        assert_eq!(r.matmul_count, 3);
    }

    #[test]
    fn sshp2_scalar_falls_back_every_step() {
        let r = run(&diag(&[2.0]), Method::Sshp2, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 6);
        assert!(r.trace.iter().all(|t| t.fallback));
        for (k, t) in r.trace.iter().enumerate() {
            let want = 2f64.powf(-(2f64.powi(k as i32)));
            assert_relative_eq!(t.res_norm, want, max_relative = 1e-12);
        }
        assert_relative_eq!(r.x[(0, 0)], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn hp2_on_identity_follows_scalar_recurrence() {
        // scalar oracle: F_k = 0.75^(2^k) I, norm sqrt(2) * 0.75^(2^k)
        let mut lam: f64 = 0.75;
        let mut expected_iters = 0;
        while 2f64.sqrt() * lam >= 1e-10 {
            lam *= lam;
            expected_iters += 1;
        }
        assert_eq!(expected_iters, 7);

        let r = run(&RealMatrix::identity(2), Method::Hp2, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, expected_iters);
        assert_eq!(r.matmul_count, 1 + 2 * expected_iters);
        let mut lam: f64 = 0.75;
        for t in &r.trace {
            assert_relative_eq!(t.res_norm, 2f64.sqrt() * lam, max_relative = 1e-12);
            assert_eq!((t.alpha, t.beta, t.fallback), (Some(0.0), Some(1.0), false));
            lam *= lam;
        }
    }

    #[test]
    fn hp3_on_identity_cubes_residual() {
        let r = run(&RealMatrix::identity(3), Method::Hp3, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let mut lam: f64 = 1.0 - 1.0 / 6.0;
        for t in &r.trace {
            assert_relative_eq!(t.res_norm, 3f64.sqrt() * lam, max_relative = 1e-12);
            assert!(t.alpha.is_none());
            lam = lam.powi(3);
        }
        assert_eq!(r.matmul_count, 1 + 3 * r.iterations);
    }

    #[test]
    fn run_errors() {
        let cfg = SolverConfig::default();
        assert!(matches!(run(&RealMatrix::zeros(2, 2), Method::Sshp2, &cfg), Err(Error::ZeroMatrix)));
        assert!(matches!(run(&RealMatrix::zeros(2, 3), Method::Sshp2, &cfg), Err(Error::NotSquare { .. })));
        let bad = diag(&[1.0, f64::INFINITY]);
        assert!(run(&bad, Method::Sshp2, &cfg).is_err());
        assert!(run(&diag(&[1.0]), Method::Sshp2, &cfg.clone().with_epsilon(0.0)).is_err());
        assert!(run(&diag(&[1.0]), Method::Sshp2, &cfg.clone().with_max_iter(0)).is_err());
        assert!(run(&diag(&[1.0]), Method::Sshp2, &cfg.clone().with_denom_tol(-1.0)).is_err());
    }

    #[test]
    fn huge_initial_scale_diverges() {
        let cfg = SolverConfig {
            x0_scale: Some(1e200),
            ..SolverConfig::default()
        };
        let a = RealMatrix::from_rows(&[[3.0, 1.0], [1.0, 2.0]]).unwrap();
        assert!(matches!(run(&a, Method::Hp2, &cfg), Err(Error::Diverged { .. })));
    }

    #[test]
    fn max_iter_stops_without_convergence() {
        let a = RealMatrix::from_rows(&[[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]).unwrap();
        let r = run(&a, Method::Hp2, &SolverConfig::default().with_max_iter(2)).unwrap();
        assert!(!r.converged);
        assert_eq!(r.stop_reason, StopReason::MaxIter);
        assert_eq!(r.iterations, 2);
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn idempotent_residual_stagnates() {
        // X_0 = 0 gives F = I, a fixed point of every method.
        let cfg = SolverConfig {
            x0_scale: Some(1e-300),
            ..SolverConfig::default()
        };
        let a = RealMatrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let r = run(&a, Method::Sshp2, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.stop_reason, StopReason::Stagnated);
        assert_eq!(r.iterations, STAGNATION_WINDOW);
    }

    #[test]
    fn trace_can_be_disabled() {
        let cfg = SolverConfig {
            record_trace: false,
            ..SolverConfig::default()
        };
        let r = run(&diag(&[1.0, 3.0, 5.0]), Method::Sshp2, &cfg).unwrap();
        assert!(r.converged);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn recomputed_residual_agrees_with_recurrence() {
        let a = RealMatrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 1.0], [0.5, 1.0, 2.0]]).unwrap();
        let plain = run(&a, Method::Sshp2, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            recompute_residual: true,
            ..SolverConfig::default()
        };
        let drift = run(&a, Method::Sshp2, &cfg).unwrap();
        assert!(drift.converged);
        assert_eq!(drift.matmul_count, 1 + 3 * drift.iterations);
        for (p, d) in plain.trace.iter().zip(&drift.trace).take(plain.iterations.min(drift.iterations) - 1) {
            assert!((p.res_norm - d.res_norm).abs() < 1e-8);
        }
    }

    #[test]
    fn complex_run_converges() {
        let a = ComplexMatrix::from_rows(&[
            [Complex64::new(3.0, 1.0), Complex64::new(0.5, -0.2)],
            [Complex64::new(-0.3, 0.4), Complex64::new(2.0, -1.0)],
        ])
        .unwrap();
        for m in Method::ALL {
            let r = run(&a, m, &SolverConfig::default()).unwrap();
            assert!(r.converged, "{m}");
            let res = frob_norm(&compute_residual(&a, &r.x).unwrap());
            assert!(res < 1e-10, "{m}: {res}");
        }
        assert_eq!(SolverConfig::default().denom_tolerance::<Complex64>().tol, 1e-5);
        assert_eq!(SolverConfig::default().denom_tolerance::<f64>().tol, 1e-12);
    }
}
