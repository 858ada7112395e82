//! Independent verification path for real symmetric residuals.
//!
//! When `X_0` is a multiple of `A^T`, every residual `F_k` is a polynomial in
//! the symmetric matrix `I - c A A^T`, so the whole iteration can be followed
//! on eigenvalues alone: one step maps each eigenvalue through the quadratic
//! `q(l) = 1 - (alpha + beta) + alpha l + beta l^2`, and the optimal
//! coefficients have closed forms as sums over eigenvalue pairs. Nothing in
//! this module calls the Gram-system code in [`crate::coeff`].

use std::fmt;

use serde::Serialize;

use crate::dense::{frob_norm, matmul, trace, trace_of_product, Matrix, RealMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::solver::{self, Method, SolveReport, SolverConfig, StepView};

/// Default stopping threshold of the Jacobi sweeps, relative to `||S||_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative threshold below which the spectral denominator counts as zero.
pub const SPECTRAL_DEGENERACY_TOL: f64 = 1e-12;
/// Largest size for which the per-step spectral checks are evaluated.
pub const SPECTRAL_CHECK_MAX_N: usize = 200;

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// `rel_tol` bounds the off-diagonal Frobenius norm relative to `||S||_F` at
/// exit; `None` uses [`JACOBI_REL_TOL`].
pub fn jacobi_eigenvalues(s: &RealMatrix, rel_tol: Option<f64>) -> Result<Vec<f64>> {
    if !s.is_square() {
        return Err(Error::NotSquare {
            op: "jacobi_eigenvalues",
            rows: s.rows(),
            cols: s.cols(),
        });
    }
    let rel_tol = rel_tol.unwrap_or(JACOBI_REL_TOL);
    if rel_tol <= 0.0 || rel_tol.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "jacobi tolerance must be positive, got {rel_tol}"
        )));
    }
    s.ensure_finite("jacobi input")?;
    let norm = frob_norm(s);
    let asym = s.asymmetry();
    if asym > 1e-10 * norm {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }

    let n = s.rows();
    let mut a = crate::gen::symmetrize(s);
    let stop = rel_tol * norm;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= stop {
            let mut eig = a.diag();
            eig.sort_by(f64::total_cmp);
            return Ok(eig);
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    if off_diagonal_norm(&a) <= stop {
        let mut eig = a.diag();
        eig.sort_by(f64::total_cmp);
        return Ok(eig);
    }
    Err(Error::EigenNoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
    })
}

fn off_diagonal_norm(a: &RealMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}

/// Annihilate `a[p][q]` with one symmetric rotation.
fn rotate(a: &mut RealMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        let new_rp = c * arp - s * arq;
        let new_rq = s * arp + c * arq;
        a[(r, p)] = new_rp;
        a[(p, r)] = new_rp;
        a[(r, q)] = new_rq;
        a[(q, r)] = new_rq;
    }
}

/// Pair sums behind the spectral coefficient formulas:
/// `alpha = a / d`, `beta = b / d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralSums {
    /// `-sum_{i<j} (1-l_i)(1-l_j)(l_i+l_j)(l_j-l_i)^2`
    pub a: f64,
    /// `sum_{i<j} (1-l_i)(1-l_j)(l_j-l_i)^2`
    pub b: f64,
    /// `sum_{i<j} (1-l_i)^2 (1-l_j)^2 (l_j-l_i)^2`
    pub d: f64,
    /// `(sum_i (1-l_i)^2)^2`, the scale used for the degeneracy test.
    pub scale: f64,
}

impl SpectralSums {
    pub fn degenerate(&self) -> bool {
        self.d.is_nan() || self.d <= SPECTRAL_DEGENERACY_TOL * self.scale
    }
}

pub fn spectral_sums(lams: &[f64]) -> Result<SpectralSums> {
    if lams.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
    for (i, &li) in lams.iter().enumerate() {
        for &lj in &lams[i + 1..] {
            let p = (1.0 - li) * (1.0 - lj);
            let gap2 = (lj - li) * (lj - li);
            a -= p * (li + lj) * gap2;
            b += p * gap2;
            d += p * p * gap2;
        }
    }
    let s: f64 = lams.iter().map(|l| (1.0 - l) * (1.0 - l)).sum();
    Ok(SpectralSums {
        a,
        b,
        d,
        scale: s * s,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralCoeffs {
    pub alpha: f64,
    pub beta: f64,
    pub degenerate: bool,
}

/// Optimal `(alpha, beta)` from the spectrum of a symmetric residual, or
/// `(0, 1)` when the pair sums are degenerate.
pub fn coeffs_from_spectrum(lams: &[f64]) -> Result<SpectralCoeffs> {
    let sums = spectral_sums(lams)?;
    if sums.degenerate() {
        return Ok(SpectralCoeffs {
            alpha: 0.0,
            beta: 1.0,
            degenerate: true,
        });
    }
    Ok(SpectralCoeffs {
        alpha: sums.a / sums.d,
        beta: sums.b / sums.d,
        degenerate: false,
    })
}

/// Spectrum of a symmetric residual together with its oracle coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumDiag {
    pub eigenvalues: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub degenerate: bool,
}

pub fn spectrum_diag(f: &RealMatrix) -> Result<SpectrumDiag> {
    let eigenvalues = jacobi_eigenvalues(f, None)?;
    let c = coeffs_from_spectrum(&eigenvalues)?;
    Ok(SpectrumDiag {
        eigenvalues,
        alpha: c.alpha,
        beta: c.beta,
        degenerate: c.degenerate,
    })
}

/// One step of the eigenvalue-only iteration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecurrenceStep {
    pub alpha: f64,
    pub beta: f64,
    pub degenerate: bool,
    /// Eigenvalues after the step, ascending.
    pub lams: Vec<f64>,
}

/// Run the SSHP2 dynamics on eigenvalues alone for `steps` steps.
pub fn scalar_recurrence(lams0: &[f64], steps: usize) -> Result<Vec<RecurrenceStep>> {
    if lams0.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let mut lams = lams0.to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let c = coeffs_from_spectrum(&lams)?;
        let c0 = 1.0 - (c.alpha + c.beta);
        for l in lams.iter_mut() {
            *l = c0 + c.alpha * *l + c.beta * *l * *l;
        }
        lams.sort_by(f64::total_cmp);
        out.push(RecurrenceStep {
            alpha: c.alpha,
            beta: c.beta,
            degenerate: c.degenerate,
            lams: lams.clone(),
        });
    }
    Ok(out)
}

pub mod checks {
    //! Names of the checks in an [`InvariantReport`](super::InvariantReport).
    pub const MONOTONICITY: &str = "monotonicity";
    pub const SCHULTZ_DOMINATION: &str = "schultz_domination";
    pub const ORTHOGONALITY: &str = "orthogonality";
    pub const TRACE_IDENTITY: &str = "trace_identity";
    pub const SUM_TO_N: &str = "sum_to_n";
    pub const DECREMENT_IDENTITY: &str = "decrement_identity";
    pub const COEFFICIENT_SUM: &str = "coefficient_sum";
    pub const COEFFICIENT_LIMITS: &str = "coefficient_limits";
    pub const CORRECTNESS: &str = "correctness";
    pub const RESIDUAL_CONSISTENCY: &str = "residual_consistency";
    pub const COMPLEX_REAL_AGREEMENT: &str = "complex_real_agreement";
    pub const SPECTRAL_BOUNDS: &str = "spectral_bounds";
    pub const NUMERATOR_IDENTITY: &str = "numerator_identity";
    pub const RECURRENCE_TWIN: &str = "recurrence_twin";
    pub const REPLAY: &str = "replay";
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    /// Violation magnitude at the worst step (largest ratio to its bound).
    pub max_violation: f64,
    /// Bound in force at the worst step.
    pub tolerance: f64,
    pub passed: bool,
    pub worst_k: Option<usize>,
    /// Number of steps at which the check applied; zero means vacuous.
    pub evaluated: usize,
}

impl InvariantCheck {
    fn new(name: &'static str) -> Self {
        InvariantCheck {
            name,
            max_violation: 0.0,
            tolerance: 0.0,
            passed: true,
            worst_k: None,
            evaluated: 0,
        }
    }

    fn record(&mut self, k: usize, violation: f64, bound: f64) {
        self.evaluated += 1;
        let ratio = |v: f64, b: f64| if b > 0.0 { v / b } else { f64::INFINITY };
        let worse = !violation.is_finite()
            || self.worst_k.is_none()
            || ratio(violation, bound) > ratio(self.max_violation, self.tolerance);
        if worse {
            self.max_violation = violation;
            self.tolerance = bound;
            self.worst_k = Some(k);
        }
        if violation.is_nan() || violation > bound {
            self.passed = false;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantReport {
    pub method: Method,
    pub n: usize,
    pub checks: Vec<InvariantCheck>,
}

impl InvariantReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InvariantCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<24} {} worst={:.3e} bound={:.3e} at k={} ({} steps)",
                c.name,
                if c.passed { "ok  " } else { "FAIL" },
                c.max_violation,
                c.tolerance,
                c.worst_k.map_or("-".to_string(), |k| k.to_string()),
                c.evaluated
            )?;
        }
        Ok(())
    }
}

/// Per-step quantities gathered while replaying a run.
struct StepStats {
    res: f64,
    res_next: f64,
    res_sq_norm: f64,
    alpha: f64,
    beta: f64,
    nondegenerate: bool,
    orth1: f64,
    orth2: f64,
    trace_f: f64,
    i_minus_f_sq: f64,
    drift: f64,
    drift_scale: f64,
    spectrum: Option<Vec<f64>>,
}

/// Replay the run behind `report` and evaluate every invariant on it.
///
/// The trace stores norms only, so the iteration is re-executed with the
/// report's configuration to obtain the intermediate residuals.
pub fn check_invariants<T: Scalar>(report: &SolveReport<T>, a: &Matrix<T>) -> Result<InvariantReport> {
    use checks::*;

    if !report.config.record_trace || report.trace.len() != report.iterations {
        return Err(Error::MissingTrace);
    }
    let n = a.rows();
    let nf = n as f64;
    let cfg = SolverConfig {
        denom_tol: Some(report.denom_tol),
        record_trace: true,
        ..report.config.clone()
    };
    let real_input = a.to_real().is_some();
    let symmetric_run = report.method == Method::Sshp2 && real_input;
    let want_spectrum = symmetric_run && n <= SPECTRAL_CHECK_MAX_N;
    let a_norm = frob_norm(a);
    let mut failure: Option<Error> = None;

    let mut stats: Vec<StepStats> = Vec::with_capacity(report.iterations);
    let replay = solver::run_observed(a, report.method, &cfg, |v: &StepView<'_, T>| {
        if failure.is_some() {
            return;
        }
        match step_stats(v, a, a_norm, want_spectrum) {
            Ok(s) => stats.push(s),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let spectrum0 = if want_spectrum {
        let f0 = solver::compute_residual(a, &match cfg.x0_scale {
            Some(c) => crate::dense::adjoint(a).scale(c),
            None => solver::initial_guess(a)?,
        })?;
        Some(jacobi_eigenvalues(&crate::gen::symmetrize(&f0.to_real().ok_or(Error::ComplexUnsupported)?), None)?)
    } else {
        None
    };

    let mut replay_check = InvariantCheck::new(REPLAY);
    let same = replay.iterations == report.iterations;
    replay_check.record(0, if same { 0.0 } else { 1.0 }, 0.0);
    for (k, (r, t)) in replay.trace.iter().zip(&report.trace).enumerate() {
        replay_check.record(k, (r.res_norm - t.res_norm).abs(), 0.0);
    }

    let mut mono = InvariantCheck::new(MONOTONICITY);
    let mut dom = InvariantCheck::new(SCHULTZ_DOMINATION);
    let mut orth = InvariantCheck::new(ORTHOGONALITY);
    let mut tr_id = InvariantCheck::new(TRACE_IDENTITY);
    let mut sum_n = InvariantCheck::new(SUM_TO_N);
    let mut decr = InvariantCheck::new(DECREMENT_IDENTITY);
    let mut csum = InvariantCheck::new(COEFFICIENT_SUM);
    let mut climits = InvariantCheck::new(COEFFICIENT_LIMITS);
    let mut correct = InvariantCheck::new(CORRECTNESS);
    let mut consist = InvariantCheck::new(RESIDUAL_CONSISTENCY);
    let mut agree = InvariantCheck::new(COMPLEX_REAL_AGREEMENT);
    let mut bounds = InvariantCheck::new(SPECTRAL_BOUNDS);
    let mut numer = InvariantCheck::new(NUMERATOR_IDENTITY);
    let mut twin = InvariantCheck::new(RECURRENCE_TWIN);

    let sshp2 = report.method == Method::Sshp2;
    let cond_estimate = a_norm * frob_norm(&replay.x);
    for (k, s) in stats.iter().enumerate() {
        let prev_nondeg = k >= 1 && stats[k - 1].nondegenerate;
        if sshp2 && s.nondegenerate {
            mono.record(k, (s.res_next - s.res).max(0.0), 1e-9 * nf);
            dom.record(k, (s.res_next - s.res_sq_norm).max(0.0), 1e-9 * nf);
        }
        if symmetric_run && s.nondegenerate {
            orth.record(k, s.orth1.abs().max(s.orth2.abs()), 1e-8 * nf);
        }
        if symmetric_run && prev_nondeg {
            let r2 = s.res * s.res;
            tr_id.record(k, (r2 - s.trace_f).abs(), 1e-8 * nf);
            sum_n.record(k, (r2 + s.i_minus_f_sq - nf).abs(), 1e-8 * nf);
            csum.record(k, (1.0 - (s.alpha + s.beta)).max(0.0), 1e-8);
            if s.nondegenerate {
                let lhs = r2 - s.res_next * s.res_next;
                let rhs = (s.alpha + s.beta - 1.0) * s.i_minus_f_sq;
                decr.record(k, (lhs - rhs).abs(), 1e-7 * nf);
            }
        }
        if symmetric_run && replay.converged && s.res <= 1e-3 && s.nondegenerate {
            climits.record(k, s.alpha.abs().max((s.beta - 1.0).abs()), 0.01);
        }
        if cond_estimate <= 1e6 {
            consist.record(k, s.drift, 1e-8 * s.drift_scale);
        }
        if let Some(lams) = &s.spectrum {
            let r = lams.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            if r < 1.0 && s.nondegenerate {
                let alpha_bound = 2.0 * r / ((1.0 - r) * (1.0 - r));
                let beta_lo = 1.0 / ((1.0 + r) * (1.0 + r));
                let beta_hi = 1.0 / ((1.0 - r) * (1.0 - r));
                let excess = (s.alpha.abs() - alpha_bound)
                    .max(beta_lo - s.beta)
                    .max(s.beta - beta_hi)
                    .max(0.0);
                bounds.record(k, excess, 1e-8);
            }
            if prev_nondeg {
                let sums = spectral_sums(lams)?;
                if !sums.degenerate() {
                    let t: f64 = lams.iter().map(|l| l * l - l * l * l).sum();
                    let lhs = sums.a + sums.b - sums.d;
                    let scale = (sums.a.abs() + sums.b.abs() + sums.d).max(1.0);
                    numer.record(k, (lhs - t * t).abs(), 1e-7 * scale);
                }
            }
        }
    }

    if let Some(lams0) = &spectrum0 {
        let rec = scalar_recurrence(lams0, stats.len())?;
        for (k, s) in stats.iter().enumerate().skip(1) {
            if s.res < 1e-8 {
                break;
            }
            if let Some(lams) = &s.spectrum {
                let diff = lams
                    .iter()
                    .zip(&rec[k - 1].lams)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                twin.record(k, diff, 1e-6);
            }
        }
    }

    if replay.converged {
        let res = frob_norm(&solver::compute_residual(a, &replay.x)?);
        correct.record(replay.iterations, res, cfg.epsilon);
    }

    complex_real_agreement(a, report, &cfg, &mut agree)?;

    Ok(InvariantReport {
        method: report.method,
        n,
        checks: vec![
            mono, dom, orth, tr_id, sum_n, decr, csum, climits, correct, consist, agree, bounds,
            numer, twin, replay_check,
        ],
    })
}

fn step_stats<T: Scalar>(
    v: &StepView<'_, T>,
    a: &Matrix<T>,
    a_norm: f64,
    want_spectrum: bool,
) -> Result<StepStats> {
    let n = v.f.rows();
    let i_minus_f = v.f.identity_minus()?;
    let i_minus_f2 = v.f2.identity_minus()?;
    let (alpha, beta, nondegenerate) = match v.coeffs {
        Some(c) => (c.alpha, c.beta, !c.fallback),
        None => (f64::NAN, f64::NAN, false),
    };
    let recomputed = matmul(a, v.x_next)?.identity_minus()?;
    let drift = frob_norm(&recomputed.sub(v.f_next)?);
    let spectrum = if want_spectrum {
        let real = v.f.to_real().ok_or(Error::ComplexUnsupported)?;
        Some(jacobi_eigenvalues(&crate::gen::symmetrize(&real), None)?)
    } else {
        None
    };
    Ok(StepStats {
        res: frob_norm(v.f),
        res_next: frob_norm(v.f_next),
        res_sq_norm: frob_norm(v.f2),
        alpha,
        beta,
        nondegenerate,
        orth1: trace_of_product(v.f_next, &i_minus_f)?.re(),
        orth2: trace_of_product(v.f_next, &i_minus_f2)?.re(),
        trace_f: trace(v.f)?.re(),
        i_minus_f_sq: frob_norm(&i_minus_f).powi(2),
        drift,
        drift_scale: (n as f64).max(a_norm * frob_norm(v.x_next)),
        spectrum,
    })
}

fn complex_real_agreement<T: Scalar>(
    a: &Matrix<T>,
    report: &SolveReport<T>,
    cfg: &SolverConfig,
    check: &mut InvariantCheck,
) -> Result<()> {
    let other: Vec<(Option<f64>, Option<f64>, f64)> = if T::IS_COMPLEX {
        let Some(real) = a.to_real() else {
            return Ok(());
        };
        trace_triples(&solver::run(&real, report.method, cfg)?)
    } else {
        trace_triples(&solver::run(&a.to_complex(), report.method, cfg)?)
    };
    let own = trace_triples(report);
    if own.len() != other.len() {
        check.record(0, f64::INFINITY, 1e-12);
        return Ok(());
    }
    let rel = |x: f64, y: f64| {
        let scale = x.abs().max(y.abs());
        if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        }
    };
    let opt_rel = |x: Option<f64>, y: Option<f64>| match (x, y) {
        (Some(x), Some(y)) => rel(x, y),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    for (k, (p, q)) in own.iter().zip(&other).enumerate() {
        let worst = opt_rel(p.0, q.0).max(opt_rel(p.1, q.1)).max(rel(p.2, q.2));
        check.record(k, worst, 1e-12);
    }
    Ok(())
}

fn trace_triples<T>(r: &SolveReport<T>) -> Vec<(Option<f64>, Option<f64>, f64)> {
    r.trace.iter().map(|t| (t.alpha, t.beta, t.res_norm)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{build_gram, solve_coefficients, DenomTolerance};
    use crate::gen::{generate_real, orthonormal, GeneratorKind, MatrixRng};
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_examples() {
        assert_eq!(
            jacobi_eigenvalues(&RealMatrix::from_diag(&[0.9, 0.6]), None).unwrap(),
            vec![0.6, 0.9]
        );
        let swap = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let e = jacobi_eigenvalues(&swap, None).unwrap();
        assert_relative_eq!(e[0], -1.0, max_relative = 1e-14);
        assert_relative_eq!(e[1], 1.0, max_relative = 1e-14);
        // lambda^2 - 4 lambda + 3 = 0
        let m = RealMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = jacobi_eigenvalues(&m, None).unwrap();
        assert_relative_eq!(e[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(e[1], 3.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_errors() {
        let asym = RealMatrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            jacobi_eigenvalues(&asym, None),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(jacobi_eigenvalues(&RealMatrix::zeros(2, 3), None).is_err());
        assert_eq!(jacobi_eigenvalues(&RealMatrix::zeros(3, 3), None).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn jacobi_preserves_trace_and_norm() {
        for seed in 0..10 {
            let n = 3 + seed as usize * 4;
            let s = generate_real(GeneratorKind::Symmetric, n, seed).unwrap();
            let e = jacobi_eigenvalues(&s, None).unwrap();
            let scale = frob_norm(&s).powi(2).max(1.0);
            assert!((e.iter().sum::<f64>() - trace(&s).unwrap()).abs() <= 1e-10 * scale);
            let sq: f64 = e.iter().map(|l| l * l).sum();
            assert!((sq - frob_norm(&s).powi(2)).abs() <= 1e-10 * scale);
            assert!(e.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn spectral_coefficient_examples() {
        let c = coeffs_from_spectrum(&[0.9, 0.6]).unwrap();
        // beta = 0.1*0.4*0.09/0.000144, alpha = -0.1*0.4*1.5*0.09/0.000144
        assert!(!c.degenerate);
        assert!((c.alpha + 37.5).abs() < 1e-12);
        assert!((c.beta - 25.0).abs() < 1e-12);

        for v in [0.3, -0.2, 0.95] {
            let c = coeffs_from_spectrum(&[v, v]).unwrap();
            assert_eq!((c.alpha, c.beta, c.degenerate), (0.0, 1.0, true));
            let c = coeffs_from_spectrum(&[v]).unwrap();
            assert_eq!((c.alpha, c.beta, c.degenerate), (0.0, 1.0, true));
        }
        assert!(matches!(coeffs_from_spectrum(&[]), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn full_double_sum_forms_agree_with_pair_sums() {
        let lams = [0.93, 0.71, 0.52, 0.2, -0.1];
        let s = spectral_sums(&lams).unwrap();
        let (mut a2, mut b2, mut d2) = (0.0, 0.0, 0.0);
        for &li in &lams {
            for &lj in &lams {
                let p = (1.0 - li) * (1.0 - lj);
                let g = (lj - li).powi(2);
                a2 += p * (li + lj) * g;
                b2 += p * g;
                d2 += p * p * g;
            }
        }
        assert_relative_eq!(s.a, -0.5 * a2, max_relative = 1e-13);
        assert_relative_eq!(s.b, 0.5 * b2, max_relative = 1e-13);
        assert_relative_eq!(s.d, 0.5 * d2, max_relative = 1e-13);
    }

    #[test]
    fn recurrence_examples() {
        let steps = scalar_recurrence(&[0.9, 0.6], 1).unwrap();
        assert_eq!(steps.len(), 1);
        for l in &steps[0].lams {
            assert!(l.abs() < 1e-13, "{l}");
        }

        let steps = scalar_recurrence(&[0.5], 3).unwrap();
        let got: Vec<f64> = steps.iter().map(|s| s.lams[0]).collect();
        assert_eq!(got, vec![0.25, 0.0625, 0.00390625]);
        assert!(steps.iter().all(|s| s.degenerate));

        let steps = scalar_recurrence(&[1.0, 0.7, 0.3], 5).unwrap();
        for s in &steps {
            assert_relative_eq!(*s.lams.last().unwrap(), 1.0, max_relative = 1e-12);
        }
        assert!(scalar_recurrence(&[], 2).is_err());
        assert!(scalar_recurrence(&[0.4], 0).unwrap().is_empty());
    }

    fn random_symmetric_residual(rng: &mut MatrixRng, n: usize, radius: f64) -> (RealMatrix, Vec<f64>) {
        let q = orthonormal(rng, n);
        let lams: Vec<f64> = (0..n).map(|_| radius * rng.symmetric_unit()).collect();
        let qd = matmul(&q, &RealMatrix::from_diag(&lams)).unwrap();
        let f = crate::gen::symmetrize(&matmul(&qd, &crate::dense::adjoint(&q)).unwrap());
        (f, lams)
    }

    #[test]
    fn gram_and_spectral_routes_agree() {
        let mut rng = MatrixRng::new(2024);
        let mut compared = 0;
        for _ in 0..100 {
            let n = rng.int(2, 10);
            let (f, _) = random_symmetric_residual(&mut rng, n, 0.95);
            let f2 = matmul(&f, &f).unwrap();
            let g = solve_coefficients(&build_gram(&f, &f2).unwrap(), DenomTolerance::absolute(1e-12)).unwrap();
            let s = spectrum_diag(&f).unwrap();
            if g.fallback || s.degenerate {
                continue;
            }
            compared += 1;
            assert_relative_eq!(g.alpha, s.alpha, max_relative = 1e-6);
            assert_relative_eq!(g.beta, s.beta, max_relative = 1e-6);
        }
        assert!(compared >= 90, "only {compared} non-degenerate cases");
    }

    #[test]
    fn two_eigenvalue_residual_is_killed_in_one_step() {
        let mut rng = MatrixRng::new(77);
        for _ in 0..30 {
            let n = rng.int(2, 12);
            let l1 = rng.range(-0.9, 0.9);
            let mut l2 = rng.range(-0.9, 0.9);
            if (l1 - l2).abs() < 0.05 {
                l2 = -l1 + 0.1;
            }
            let q = orthonormal(&mut rng, n);
            let mut d = vec![l2; n];
            d[..n / 2].fill(l1);
            let f = crate::gen::symmetrize(
                &matmul(&matmul(&q, &RealMatrix::from_diag(&d)).unwrap(), &crate::dense::adjoint(&q)).unwrap(),
            );
            let f2 = matmul(&f, &f).unwrap();
            let c = solve_coefficients(&build_gram(&f, &f2).unwrap(), DenomTolerance::absolute(1e-12)).unwrap();
            assert!(!c.fallback);
            let next = crate::dense::affine_combine(1.0 - (c.alpha + c.beta), c.alpha, c.beta, &f, &f2).unwrap();
            assert!(frob_norm(&next) <= 1e-8 * n as f64, "{}", frob_norm(&next));
        }
    }

    #[test]
    fn invariants_on_one_step_example() {
        let a = RealMatrix::from_diag(&[1.0, 2.0]);
        let r = solver::run(&a, Method::Sshp2, &SolverConfig::default()).unwrap();
        let inv = check_invariants(&r, &a).unwrap();
        assert!(inv.passed(), "{inv}");
        let orth = inv.get(checks::ORTHOGONALITY).unwrap();
        assert_eq!(orth.evaluated, 1);
        assert!(orth.max_violation <= 1e-12);
    }

    #[test]
    fn invariants_on_scalar_fallback_chain_are_vacuous() {
        let a = RealMatrix::from_diag(&[2.0]);
        let r = solver::run(&a, Method::Sshp2, &SolverConfig::default()).unwrap();
        let inv = check_invariants(&r, &a).unwrap();
        assert!(inv.passed(), "{inv}");
        for name in [checks::TRACE_IDENTITY, checks::SUM_TO_N, checks::DECREMENT_IDENTITY, checks::ORTHOGONALITY] {
            assert_eq!(inv.get(name).unwrap().evaluated, 0, "{name}");
        }
    }

    #[test]
    fn invariants_on_random_spd() {
        let a = generate_real(GeneratorKind::Spd, 20, 42).unwrap();
        let r = solver::run(&a, Method::Sshp2, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let inv = check_invariants(&r, &a).unwrap();
        assert!(inv.passed(), "{inv}");
        assert!(inv.get(checks::RECURRENCE_TWIN).unwrap().evaluated > 0);
        assert!(inv.get(checks::TRACE_IDENTITY).unwrap().evaluated > 0);
    }

    #[test]
    fn every_solver_check_is_present_once() {
        let a = RealMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let r = solver::run(&a, Method::Hp2, &SolverConfig::default()).unwrap();
        let inv = check_invariants(&r, &a).unwrap();
        for name in [
            checks::MONOTONICITY,
            checks::SCHULTZ_DOMINATION,
            checks::ORTHOGONALITY,
            checks::TRACE_IDENTITY,
            checks::SUM_TO_N,
            checks::DECREMENT_IDENTITY,
            checks::COEFFICIENT_SUM,
            checks::COEFFICIENT_LIMITS,
            checks::CORRECTNESS,
            checks::RESIDUAL_CONSISTENCY,
            checks::COMPLEX_REAL_AGREEMENT,
        ] {
            assert_eq!(inv.checks.iter().filter(|c| c.name == name).count(), 1, "{name}");
        }
        assert!(inv.passed(), "{inv}");
    }

    #[test]
    fn missing_trace_is_an_error() {
        let a = RealMatrix::from_diag(&[1.0, 2.0]);
        let cfg = SolverConfig {
            record_trace: false,
            ..SolverConfig::default()
        };
        let r = solver::run(&a, Method::Sshp2, &cfg).unwrap();
        assert!(matches!(check_invariants(&r, &a), Err(Error::MissingTrace)));
    }
}
