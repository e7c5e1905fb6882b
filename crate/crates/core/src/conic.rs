//! A small builder for second-order-cone programs, backed by an
//! interior-point solver.
//!
//! Programs are stated as `maximize c'x` subject to affine equalities,
//! affine inequalities and second-order cones `||head|| <= bound`, where
//! every head row and every bound is an affine expression of the variables.
//! The builder lowers this to the backend's standard form `A x + s = b`,
//! `s in K` with the cone blocks ordered equalities, inequalities, then one
//! block per second-order cone (bound row first).
//!
//! Solutions reported optimal are re-verified by an independent residual
//! walk over the *original* constraint list ([`check_residuals`]); a claimed
//! optimum that violates any constraint by more than [`RESIDUAL_TOL`] is
//! downgraded to a numerical failure, and a solution the backend only calls
//! "almost" solved is promoted to optimal exactly when that same walk
//! accepts it.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::error::{Error, Result};

/// Largest constraint violation accepted from the backend.
pub const RESIDUAL_TOL: f64 = 1e-7;

/// Affine expression `sum coef * x_var + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        LinExpr::default()
    }

    pub fn constant(value: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: value,
        }
    }

    pub fn term(var: usize, coef: f64) -> Self {
        LinExpr {
            terms: vec![(var, coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, var: usize, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
        self
    }

    pub fn add_constant(&mut self, value: f64) -> &mut Self {
        self.constant += value;
        self
    }

    /// Evaluates the expression at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(v, c)| c * x[v])
            .sum::<f64>()
            + self.constant
    }
}

/// One second-order cone `||head|| <= bound`.
#[derive(Debug, Clone)]
pub struct Soc {
    pub head: Vec<LinExpr>,
    pub bound: LinExpr,
}

/// A conic program in maximization form.
#[derive(Debug, Clone, Default)]
pub struct ConicProgram {
    objective: Vec<f64>,
    equalities: Vec<LinExpr>,
    inequalities: Vec<LinExpr>,
    socs: Vec<Soc>,
}

impl ConicProgram {
    pub fn new() -> Self {
        ConicProgram::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self) -> usize {
        self.objective.push(0.0);
        self.objective.len() - 1
    }

    pub fn add_vars(&mut self, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.add_var()).collect()
    }

    /// Adds `coef * x_var` to the (maximized) objective.
    pub fn maximize_term(&mut self, var: usize, coef: f64) {
        self.objective[var] += coef;
    }

    /// Constrains `expr = 0`.
    pub fn add_eq(&mut self, expr: LinExpr) {
        self.equalities.push(expr);
    }

    /// Constrains `expr <= 0`.
    pub fn add_le(&mut self, expr: LinExpr) {
        self.inequalities.push(expr);
    }

    /// Constrains `||head|| <= bound`.
    pub fn add_soc(&mut self, head: Vec<LinExpr>, bound: LinExpr) {
        assert!(!head.is_empty(), "second-order cone needs at least one head row");
        self.socs.push(Soc { head, bound });
    }

    pub fn fix_var(&mut self, var: usize, value: f64) {
        let mut expr = LinExpr::term(var, 1.0);
        expr.add_constant(-value);
        self.add_eq(expr);
    }

    pub fn add_lower_bound(&mut self, var: usize, lb: f64) {
        let mut expr = LinExpr::term(var, -1.0);
        expr.add_constant(lb);
        self.add_le(expr);
    }

    pub fn add_upper_bound(&mut self, var: usize, ub: f64) {
        let mut expr = LinExpr::term(var, 1.0);
        expr.add_constant(-ub);
        self.add_le(expr);
    }

    /// Objective value `c'x` at `x`.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// Index plan mapping `count` complex scalars onto interleaved real
/// variables: scalar `k` occupies `(base + 2k, base + 2k + 1)` as
/// (real, imaginary).
#[derive(Debug, Clone, Copy)]
pub struct ComplexEmbedding {
    base: usize,
    count: usize,
}

impl ComplexEmbedding {
    /// Allocates `count` complex scalars worth of real variables.
    pub fn allocate(prog: &mut ConicProgram, count: usize) -> Self {
        let base = prog.num_vars();
        prog.add_vars(2 * count);
        ComplexEmbedding { base, count }
    }

    pub fn re(&self, k: usize) -> usize {
        debug_assert!(k < self.count);
        self.base + 2 * k
    }

    pub fn im(&self, k: usize) -> usize {
        debug_assert!(k < self.count);
        self.base + 2 * k + 1
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Adds `t <= (x_1 * ... * x_n)^(1/n)` for nonnegative `x_i` and returns the
/// epigraph variable `t`.
///
/// Built from a binary tree of hyperbolic cones `z^2 <= x y` (each expressed
/// as `||(2z, x - y)|| <= x + y`), with the leaf list padded to a power of
/// two by copies of `t` itself — the standard trick that keeps the bound
/// exact. For `n = 1` the epigraph is the variable itself.
pub fn geo_mean_epigraph(prog: &mut ConicProgram, vars: &[usize]) -> Result<usize> {
    if vars.is_empty() {
        return Err(Error::InvalidInput(
            "geometric mean of zero variables".into(),
        ));
    }
    if vars.len() == 1 {
        return Ok(vars[0]);
    }
    let padded = vars.len().next_power_of_two();
    let needs_padding = padded > vars.len();
    let t = if needs_padding {
        let t = prog.add_var();
        prog.add_lower_bound(t, 0.0);
        Some(t)
    } else {
        None
    };
    let mut level: Vec<usize> = vars.to_vec();
    if let Some(t) = t {
        level.extend(std::iter::repeat_n(t, padded - vars.len()));
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            let (x, y) = (pair[0], pair[1]);
            let z = prog.add_var();
            prog.add_lower_bound(z, 0.0);
            let mut diff = LinExpr::term(x, 1.0);
            diff.add_term(y, -1.0);
            let mut sum = LinExpr::term(x, 1.0);
            sum.add_term(y, 1.0);
            prog.add_soc(vec![LinExpr::term(z, 2.0), diff], sum);
            next.push(z);
        }
        level = next;
    }
    let root = level[0];
    match t {
        Some(t) => {
            // t <= root closes the self-referential padding.
            let mut expr = LinExpr::term(t, 1.0);
            expr.add_term(root, -1.0);
            prog.add_le(expr);
            Ok(t)
        }
        None => Ok(root),
    }
}

/// Outcome classification of a conic solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// The backend solved the program and the solution passed the
    /// independent residual check.
    Optimal,
    /// The program is primal infeasible.
    Infeasible,
    /// The backend failed, stalled, or returned a point violating the
    /// constraints beyond [`RESIDUAL_TOL`].
    NumericalFailure,
}

/// Result of a conic solve. `x` and `objective` are meaningful only when
/// `status` is [`SolveStatus::Optimal`].
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Backend diagnostics for failures.
    pub message: Option<String>,
}

impl ConicSolution {
    fn failure(num_vars: usize, message: impl Into<String>) -> Self {
        ConicSolution {
            status: SolveStatus::NumericalFailure,
            x: vec![0.0; num_vars],
            objective: f64::NAN,
            iterations: 0,
            message: Some(message.into()),
        }
    }
}

/// Worst constraint violations of `x`, per constraint family, measured on
/// the original program (not the backend's scaled internal form).
#[derive(Debug, Clone, Copy, Default)]
pub struct ResidualReport {
    pub max_equality: f64,
    pub max_inequality: f64,
    pub max_soc: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.max_equality.max(self.max_inequality).max(self.max_soc)
    }
}

/// Walks every constraint of `prog` and reports the largest violations at
/// `x`. Deliberately independent of the backend: a plain evaluation of each
/// affine expression and each cone norm.
pub fn check_residuals(prog: &ConicProgram, x: &[f64]) -> ResidualReport {
    let mut report = ResidualReport::default();
    for expr in &prog.equalities {
        report.max_equality = report.max_equality.max(expr.eval(x).abs());
    }
    for expr in &prog.inequalities {
        report.max_inequality = report.max_inequality.max(expr.eval(x).max(0.0));
    }
    for soc in &prog.socs {
        let norm = soc
            .head
            .iter()
            .map(|row| row.eval(x).powi(2))
            .sum::<f64>()
            .sqrt();
        report.max_soc = report.max_soc.max((norm - soc.bound.eval(x)).max(0.0));
    }
    report
}

/// Lowers and solves `prog` with the interior-point backend, applying the
/// residual acceptance policy described at the module level.
pub fn solve(prog: &ConicProgram) -> ConicSolution {
    let n = prog.num_vars();
    let m_eq = prog.equalities.len();
    let m_ineq = prog.inequalities.len();
    let m_soc: usize = prog.socs.iter().map(|soc| soc.head.len() + 1).sum();
    let m = m_eq + m_ineq + m_soc;

    // Triplets of A and entries of b, rows ordered eq / ineq / soc blocks.
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = vec![0.0; m];
    let mut row = 0;
    for expr in prog.equalities.iter().chain(&prog.inequalities) {
        // s_row = b - A x with s = 0 (eq) or s >= 0 (ineq):
        // encode expr <= / = 0 as A = terms, b = -constant.
        for &(var, coef) in &expr.terms {
            triplets.push((row, var, coef));
        }
        b[row] = -expr.constant;
        row += 1;
    }
    for soc in &prog.socs {
        // Cone slacks equal the expressions themselves: A = -terms, b = const.
        for expr in std::iter::once(&soc.bound).chain(&soc.head) {
            for &(var, coef) in &expr.terms {
                triplets.push((row, var, -coef));
            }
            b[row] = expr.constant;
            row += 1;
        }
    }
    debug_assert_eq!(row, m);

    // Triplets to CSC, merging duplicates.
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (r, c, v) in triplets {
        columns[c].push((r, v));
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for column in &mut columns {
        column.sort_by_key(|&(r, _)| r);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(column.len());
        for &(r, v) in column.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == r => last.1 += v,
                _ => merged.push((r, v)),
            }
        }
        for (r, v) in merged {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m, n, colptr, rowval, nzval);
    let p = CscMatrix::zeros((n, n));
    let q: Vec<f64> = prog.objective.iter().map(|c| -c).collect();

    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if m_eq > 0 {
        cones.push(SupportedConeT::ZeroConeT(m_eq));
    }
    if m_ineq > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(m_ineq));
    }
    for soc in &prog.socs {
        cones.push(SupportedConeT::SecondOrderConeT(soc.head.len() + 1));
    }

    let settings = DefaultSettings {
        verbose: false,
        tol_feas: 1e-9,
        tol_gap_abs: 1e-9,
        tol_gap_rel: 1e-9,
        ..DefaultSettings::default()
    };
    let mut solver = match DefaultSolver::new(&p, &q, &a, &b, &cones, settings) {
        Ok(solver) => solver,
        Err(err) => return ConicSolution::failure(n, format!("backend setup: {err:?}")),
    };
    solver.solve();
    let solution = &solver.solution;
    let iterations = solution.iterations as usize;

    let accept = |x: Vec<f64>, message: Option<String>| -> ConicSolution {
        let report = check_residuals(prog, &x);
        if report.max() <= RESIDUAL_TOL {
            let objective = prog.objective_value(&x);
            ConicSolution {
                status: SolveStatus::Optimal,
                x,
                objective,
                iterations,
                message,
            }
        } else {
            ConicSolution {
                status: SolveStatus::NumericalFailure,
                x,
                objective: f64::NAN,
                iterations,
                message: Some(format!(
                    "residual check failed: max violation {:.3e}",
                    report.max()
                )),
            }
        }
    };

    match solution.status {
        SolverStatus::Solved => accept(solution.x.clone(), None),
        SolverStatus::AlmostSolved => accept(
            solution.x.clone(),
            Some("backend reached reduced accuracy".into()),
        ),
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => ConicSolution {
            status: SolveStatus::Infeasible,
            x: vec![0.0; n],
            objective: f64::NAN,
            iterations,
            message: None,
        },
        other => ConicSolution::failure(n, format!("backend status {other:?}")),
    }
}
