//! Batch solves over many matrices or many methods.
//!
//! Independent solves are distributed over the rayon pool when the
//! `parallel` feature is on. Each solve is itself deterministic, so the
//! results do not depend on scheduling; output order always follows input order.

use crate::dense::Matrix;
use crate::error::Result;
use crate::scalar::Scalar;
use crate::solver::{self, Method, SolveReport, SolverConfig};

/// Solve every matrix in `mats` one after another.
pub fn solve_batch_seq<T: Scalar>(
    mats: &[Matrix<T>],
    method: Method,
    cfg: &SolverConfig,
) -> Vec<Result<SolveReport<T>>> {
    mats.iter().map(|a| solver::run(a, method, cfg)).collect()
}

/// Solve every matrix in `mats`, in parallel when available.
pub fn solve_batch<T: Scalar>(
    mats: &[Matrix<T>],
    method: Method,
    cfg: &SolverConfig,
) -> Vec<Result<SolveReport<T>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        mats.par_iter().map(|a| solver::run(a, method, cfg)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        solve_batch_seq(mats, method, cfg)
    }
}

/// Run each method on the same matrix. Reports come back in `methods` order.
pub fn compare_methods<T: Scalar>(
    a: &Matrix<T>,
    methods: &[Method],
    cfg: &SolverConfig,
) -> Vec<Result<SolveReport<T>>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        methods.par_iter().map(|&m| solver::run(a, m, cfg)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        methods.iter().map(|&m| solver::run(a, m, cfg)).collect()
    }
}

/// Apply `f` to every item, in parallel when available.
pub fn par_map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
