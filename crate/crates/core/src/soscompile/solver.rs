//! Solver contract and the Clarabel-backed implementation.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

use super::{ConicProgram, Entry, SolveOutcome, SolveStatus, Value, Values, VarRole};

/// Anything that can solve a [`ConicProgram`]. Implementations must be safe
/// to call concurrently on independent programs.
pub trait ConicSolver: Send + Sync {
    fn solve(&self, prog: &ConicProgram) -> SolveOutcome;
}

/// Interior-point solver for equality + non-negative + PSD cone programs.
#[derive(Clone, Debug)]
pub struct ClarabelSolver {
    pub verbose: bool,
    pub max_iter: u32,
}

impl Default for ClarabelSolver {
    fn default() -> Self {
        Self {
            verbose: std::env::var("FLEXHULL_SOLVER_VERBOSE").is_ok_and(|v| v == "1"),
            max_iter: 200,
        }
    }
}

pub fn default_solver() -> ClarabelSolver {
    ClarabelSolver::default()
}

/// Column layout of the stacked decision vector.
struct Layout {
    offset: Vec<usize>,
    n: usize,
}

impl Layout {
    fn new(prog: &ConicProgram) -> Self {
        let mut offset = Vec::with_capacity(prog.vars().len());
        let mut n = 0;
        for v in prog.vars() {
            offset.push(n);
            n += match v.role {
                VarRole::Scalar { .. } => 1,
                VarRole::Gram { size, .. } => size * (size + 1) / 2,
            };
        }
        Self { offset, n }
    }

    /// Upper triangle packed column by column.
    fn col(&self, e: Entry) -> usize {
        match e {
            Entry::Scalar(v) => self.offset[v.0],
            Entry::Gram(v, r, c) => self.offset[v.0] + c * (c + 1) / 2 + r,
        }
    }
}

fn csc(m: usize, n: usize, mut trip: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    trip.sort_by_key(|t| (t.1, t.0));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(trip.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(trip.len());
    let mut last: Option<(usize, usize)> = None;
    for (r, c, v) in trip {
        if last == Some((r, c)) {
            *nzval.last_mut().unwrap() += v;
            continue;
        }
        rowval.push(r);
        nzval.push(v);
        colptr[c + 1] += 1;
        last = Some((r, c));
    }
    for c in 0..n {
        colptr[c + 1] += colptr[c];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}

impl ConicSolver for ClarabelSolver {
    fn solve(&self, prog: &ConicProgram) -> SolveOutcome {
        let layout = Layout::new(prog);
        let mut trip = Vec::new();
        let mut b = Vec::new();
        let mut cones = Vec::new();

        // s = b − A x; zero cone rows are the equalities.
        for (k, row) in prog.rows().iter().enumerate() {
            for &(e, c) in &row.terms {
                trip.push((k, layout.col(e), c));
            }
            b.push(row.rhs);
        }
        if !prog.rows().is_empty() {
            cones.push(SupportedConeT::ZeroConeT(prog.rows().len()));
        }
        let nonneg: Vec<_> = prog
            .vars()
            .iter()
            .filter(|v| matches!(v.role, VarRole::Scalar { nonneg: true }))
            .collect();
        for v in &nonneg {
            trip.push((b.len(), layout.col(Entry::Scalar(v.id)), -1.0));
            b.push(0.0);
        }
        if !nonneg.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(nonneg.len()));
        }
        for v in prog.vars() {
            if let VarRole::Gram { size, .. } = v.role {
                for c in 0..size {
                    for r in 0..=c {
                        let scale = if r == c {
                            1.0
                        } else {
                            std::f64::consts::SQRT_2
                        };
                        trip.push((b.len(), layout.col(Entry::Gram(v.id, r, c)), -scale));
                        b.push(0.0);
                    }
                }
                cones.push(SupportedConeT::PSDTriangleConeT(size));
            }
        }

        let a = csc(b.len(), layout.n, trip);
        let p = CscMatrix::zeros((layout.n, layout.n));
        let mut q = vec![0.0; layout.n];
        for &(v, c) in prog.objective() {
            q[layout.col(Entry::Scalar(v))] += c;
        }

        let settings = match DefaultSettingsBuilder::default()
            .verbose(self.verbose)
            .max_iter(self.max_iter)
            .build()
        {
            Ok(s) => s,
            Err(e) => {
                log::error!("invalid solver settings: {e}");
                return SolveOutcome::failed(SolveStatus::Failed);
            }
        };
        let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
            Ok(s) => s,
            Err(e) => {
                log::error!("solver setup failed: {e}");
                return SolveOutcome::failed(SolveStatus::Failed);
            }
        };
        solver.solve();

        let status = match solver.solution.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::AlmostSolved => SolveStatus::Inaccurate,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::Infeasible
            }
            other => {
                log::debug!("solver stopped with {other:?}");
                SolveStatus::Failed
            }
        };
        if !matches!(status, SolveStatus::Optimal | SolveStatus::Inaccurate) {
            return SolveOutcome::failed(status);
        }

        let x = &solver.solution.x;
        let mut values = Values::default();
        for v in prog.vars() {
            match v.role {
                VarRole::Scalar { .. } => {
                    values.insert(v.id, Value::Scalar(x[layout.col(Entry::Scalar(v.id))]))
                }
                VarRole::Gram { size, .. } => {
                    let m = DMatrix::from_fn(size, size, |r, c| {
                        let (r, c) = if r <= c { (r, c) } else { (c, r) };
                        x[layout.col(Entry::Gram(v.id, r, c))]
                    });
                    values.insert(v.id, Value::Matrix(m));
                }
            }
        }
        SolveOutcome {
            status,
            values: Some(values),
            objective_value: solver.solution.obj_val,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psd_packing_order() {
        // max Ξ₀₂ with Ξ₀₀ = 1, Ξ₂₂ = 4 and Ξ PSD: optimum 2.
        let mut prog = ConicProgram::new();
        let g = prog.add_gram(1).unwrap();
        let t = prog.add_scalar(false);
        prog.add_equality(vec![(Entry::Gram(g, 0, 0), 1.0)], 1.0)
            .unwrap();
        prog.add_equality(vec![(Entry::Gram(g, 2, 2), 1.0)], 4.0)
            .unwrap();
        prog.add_equality(
            vec![(Entry::Gram(g, 0, 2), 1.0), (Entry::Scalar(t), -1.0)],
            0.0,
        )
        .unwrap();
        prog.minimize(vec![(t, -1.0)]).unwrap();
        let out = ClarabelSolver::default().solve(&prog);
        assert_eq!(out.status, SolveStatus::Optimal);
        let vals = out.values.unwrap();
        assert!((vals.scalar(t) - 2.0).abs() < 1e-6);
        assert!(prog.check(&vals).feasible);
    }

    #[test]
    fn concurrent_solves_are_independent() {
        let progs: Vec<ConicProgram> = (1..=4)
            .map(|k| {
                let mut prog = ConicProgram::new();
                let a = prog.add_scalar(false);
                prog.add_inequality(vec![(a, 1.0)], k as f64).unwrap();
                prog.minimize(vec![(a, 1.0)]).unwrap();
                prog
            })
            .collect();
        let solver = ClarabelSolver::default();
        let vals: Vec<f64> = std::thread::scope(|s| {
            let hs: Vec<_> = progs
                .iter()
                .map(|p| s.spawn(|| solver.solve(p).objective_value))
                .collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (k, v) in vals.iter().enumerate() {
            assert!((v - (k + 1) as f64).abs() < 1e-7);
        }
    }
}
