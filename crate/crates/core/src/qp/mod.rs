//! Concave quadratic programs with linear constraints.
//!
//! Problems are stated in maximization form
//!
//! ```text
//! maximize    ½ xᵀ diag(h) x + fᵀ x          (h ≤ 0)
//! subject to  A_eq x  = b_eq      (λ)
//!             A_in x ≤ b_in      (ν ≥ 0)
//!             l ≤ x ≤ u          (γ̲ ≥ 0, γ̄ ≥ 0)
//! ```
//!
//! Multipliers follow the Lagrangian
//! `L = −F + λᵀ(A_eq x − b_eq) + νᵀ(A_in x − b_in) + γ̄ᵀ(x − u) + γ̲ᵀ(l − x)`,
//! so stationarity reads `−h∘x − f + A_eqᵀλ + A_inᵀν + γ̄ − γ̲ = 0`.

mod ipm;
pub mod ldl;
mod oracle;
pub mod sparse;

pub use ipm::solve_qp;
pub use oracle::{oracle_solve, ORACLE_MAX_VARS};
pub use sparse::SparseMatrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("oracle limited to {max} variables, problem has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("objective is unbounded")]
    Unbounded,
}

/// Linear-constrained concave QP with a diagonal Hessian.
#[derive(Debug, Clone)]
pub struct QuadraticProgram {
    pub hess_diag: Vec<f64>,
    pub f: Vec<f64>,
    pub a_eq: SparseMatrix,
    pub b_eq: Vec<f64>,
    pub a_in: SparseMatrix,
    pub b_in: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Ordering hints for the factorization: variables and rows that share a
    /// stage are eliminated together, stages in increasing order.
    pub var_stage: Vec<usize>,
    pub eq_stage: Vec<usize>,
    pub in_stage: Vec<usize>,
}

impl QuadraticProgram {
    /// Unconstrained, zero-objective program over `n` free variables.
    pub fn new(n: usize) -> Self {
        Self {
            hess_diag: vec![0.0; n],
            f: vec![0.0; n],
            a_eq: SparseMatrix::new(n),
            b_eq: Vec::new(),
            a_in: SparseMatrix::new(n),
            b_in: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            var_stage: vec![0; n],
            eq_stage: Vec::new(),
            in_stage: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn add_eq(&mut self, row: &[(usize, f64)], rhs: f64, stage: usize) {
        self.a_eq.push_row(row);
        self.b_eq.push(rhs);
        self.eq_stage.push(stage);
    }

    pub fn add_le(&mut self, row: &[(usize, f64)], rhs: f64, stage: usize) {
        self.a_in.push_row(row);
        self.b_in.push(rhs);
        self.in_stage.push(stage);
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.hess_diag)
            .zip(&self.f)
            .map(|((xi, h), f)| 0.5 * h * xi * xi + f * xi)
            .sum()
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let n = self.n();
        let bad = |what: &str| Err(SolveError::Malformed(what.to_string()));
        if self.hess_diag.len() != n
            || self.lower.len() != n
            || self.upper.len() != n
            || self.var_stage.len() != n
        {
            return bad("per-variable vectors disagree in length");
        }
        if self.a_eq.ncols() != n || self.a_in.ncols() != n {
            return bad("constraint matrix column count differs from variable count");
        }
        if self.a_eq.nrows() != self.b_eq.len() || self.eq_stage.len() != self.b_eq.len() {
            return bad("equality rows and right-hand side disagree");
        }
        if self.a_in.nrows() != self.b_in.len() || self.in_stage.len() != self.b_in.len() {
            return bad("inequality rows and right-hand side disagree");
        }
        if self.hess_diag.iter().any(|h| !(h.is_finite() && *h <= 0.0)) {
            return bad("objective must be concave with finite curvature");
        }
        if self
            .f
            .iter()
            .chain(&self.b_eq)
            .chain(&self.b_in)
            .any(|v| !v.is_finite())
        {
            return bad("non-finite coefficient");
        }
        for (j, (l, u)) in self.lower.iter().zip(&self.upper).enumerate() {
            if l.is_nan() || u.is_nan() || l > u || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(SolveError::Malformed(format!(
                    "invalid bounds [{l}, {u}] on variable {j}"
                )));
            }
        }
        Ok(())
    }

    /// Exact bit-level equality, used to check deterministic assembly.
    pub fn bit_eq(&self, other: &Self) -> bool {
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
        }
        same(&self.hess_diag, &other.hess_diag)
            && same(&self.f, &other.f)
            && self.a_eq.bit_eq(&other.a_eq)
            && same(&self.b_eq, &other.b_eq)
            && self.a_in.bit_eq(&other.a_in)
            && same(&self.b_in, &other.b_in)
            && same(&self.lower, &other.lower)
            && same(&self.upper, &other.upper)
    }
}

#[derive(Debug, Clone)]
pub struct SolverSettings {
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Diagonal shift on variables without curvature.
    pub regularization: f64,
    /// Re-solve the KKT system on the detected active set after convergence.
    pub polish: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_primal: 1e-8,
            tol_dual: 1e-8,
            tol_gap: 1e-8,
            max_iter: 200,
            regularization: 1e-9,
            polish: true,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolveError> {
        let tols = [self.tol_primal, self.tol_dual, self.tol_gap];
        if tols.iter().any(|t| !(*t > 0.0)) || self.max_iter == 0 || !(self.regularization >= 0.0) {
            return Err(SolveError::Malformed(
                "solver tolerances must be positive and max_iter at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

/// Absolute KKT residuals (∞-norms).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest violation of any equality, inequality or bound.
    pub primal_inf: f64,
    /// Largest stationarity residual or negative multiplier.
    pub dual_inf: f64,
    /// Largest `slack · multiplier` product.
    pub comp_gap: f64,
    /// Sum of all `slack · multiplier` products.
    pub comp_sum: f64,
}

/// Residuals scaled by the problem data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl RelativeResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// λ, one per equality row.
    pub eq_duals: Vec<f64>,
    /// ν ≥ 0, one per inequality row.
    pub ineq_duals: Vec<f64>,
    /// γ̲ ≥ 0 per variable (zero where the bound is infinite).
    pub lower_duals: Vec<f64>,
    /// γ̄ ≥ 0 per variable.
    pub upper_duals: Vec<f64>,
    /// Maximized objective `F`.
    pub objective: f64,
    pub iterations: usize,
    pub polished: bool,
    pub residuals: Residuals,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn require_optimal(self) -> Result<Self, SolveError> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            SolveStatus::Infeasible => Err(SolveError::Infeasible(
                "no point satisfies all constraints".into(),
            )),
            SolveStatus::IterationLimit => Err(SolveError::IterationLimit(self.iterations)),
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Stationarity vector `−h∘x − f + A_eqᵀλ + A_inᵀν + γ̄ − γ̲`.
pub fn lagrangian_gradient(p: &QuadraticProgram, sol: &Solution) -> Vec<f64> {
    let mut g: Vec<f64> = (0..p.n())
        .map(|j| -p.hess_diag[j] * sol.x[j] - p.f[j])
        .collect();
    p.a_eq.add_tr_mul_vec(&sol.eq_duals, &mut g);
    p.a_in.add_tr_mul_vec(&sol.ineq_duals, &mut g);
    for j in 0..p.n() {
        g[j] += sol.upper_duals[j] - sol.lower_duals[j];
    }
    g
}

/// Evaluates primal feasibility, stationarity and complementarity of a
/// candidate primal-dual pair.
pub fn kkt_residuals(p: &QuadraticProgram, sol: &Solution) -> Result<Residuals, SolveError> {
    let n = p.n();
    if sol.x.len() != n
        || sol.lower_duals.len() != n
        || sol.upper_duals.len() != n
        || sol.eq_duals.len() != p.b_eq.len()
        || sol.ineq_duals.len() != p.b_in.len()
    {
        return Err(SolveError::Dimension(format!(
            "solution has {} variables, {} equality and {} inequality multipliers; problem expects {}, {}, {}",
            sol.x.len(),
            sol.eq_duals.len(),
            sol.ineq_duals.len(),
            n,
            p.b_eq.len(),
            p.b_in.len()
        )));
    }
    let mut primal: f64 = 0.0;
    let ax = p.a_eq.mul_vec(&sol.x);
    for (v, b) in ax.iter().zip(&p.b_eq) {
        primal = primal.max((v - b).abs());
    }
    let gx = p.a_in.mul_vec(&sol.x);
    let mut comp_gap: f64 = 0.0;
    let mut comp_sum = 0.0;
    for ((v, b), nu) in gx.iter().zip(&p.b_in).zip(&sol.ineq_duals) {
        primal = primal.max(v - b);
        let c = ((b - v) * nu).abs();
        comp_gap = comp_gap.max(c);
        comp_sum += c;
    }
    for j in 0..n {
        let x = sol.x[j];
        primal = primal.max(p.lower[j] - x).max(x - p.upper[j]);
        if p.lower[j].is_finite() {
            let c = ((x - p.lower[j]) * sol.lower_duals[j]).abs();
            comp_gap = comp_gap.max(c);
            comp_sum += c;
        }
        if p.upper[j].is_finite() {
            let c = ((p.upper[j] - x) * sol.upper_duals[j]).abs();
            comp_gap = comp_gap.max(c);
            comp_sum += c;
        }
    }
    let mut dual = inf_norm(&lagrangian_gradient(p, sol));
    for (j, (gl, gu)) in sol.lower_duals.iter().zip(&sol.upper_duals).enumerate() {
        dual = dual.max(-gl).max(-gu);
        if !p.lower[j].is_finite() {
            dual = dual.max(gl.abs());
        }
        if !p.upper[j].is_finite() {
            dual = dual.max(gu.abs());
        }
    }
    for nu in &sol.ineq_duals {
        dual = dual.max(-nu);
    }
    Ok(Residuals {
        primal_inf: primal.max(0.0),
        dual_inf: dual,
        comp_gap,
        comp_sum,
    })
}

/// Scales absolute residuals: primal by `1 + ‖b‖∞`, dual by `1 + ‖f‖∞ + ‖h∘x‖∞`,
/// complementarity (summed) by `1 + |F|`.
pub fn relative_residuals(
    p: &QuadraticProgram,
    x: &[f64],
    objective: f64,
    r: &Residuals,
) -> RelativeResiduals {
    let b_scale = 1.0 + inf_norm(&p.b_eq).max(inf_norm(&p.b_in));
    let hx: Vec<f64> = p.hess_diag.iter().zip(x).map(|(h, x)| h * x).collect();
    let d_scale = 1.0 + inf_norm(&p.f) + inf_norm(&hx);
    RelativeResiduals {
        primal: r.primal_inf / b_scale,
        dual: r.dual_inf / d_scale,
        gap: r.comp_sum / (1.0 + objective.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> QuadraticProgram {
        // maximize −x0² + 2 x0 + x1 subject to x0 + x1 = 1, x1 ≤ 0.25, 0 ≤ x
        let mut p = QuadraticProgram::new(2);
        p.hess_diag = vec![-2.0, 0.0];
        p.f = vec![2.0, 1.0];
        p.lower = vec![0.0, 0.0];
        p.add_eq(&[(0, 1.0), (1, 1.0)], 1.0, 0);
        p.add_le(&[(1, 1.0)], 0.25, 0);
        p
    }

    #[test]
    fn zero_duals_with_linear_objective_show_gradient() {
        let p = tiny();
        let sol = Solution {
            status: SolveStatus::Optimal,
            x: vec![0.75, 0.25],
            eq_duals: vec![0.0],
            ineq_duals: vec![0.0],
            lower_duals: vec![0.0; 2],
            upper_duals: vec![0.0; 2],
            objective: p.objective(&[0.75, 0.25]),
            iterations: 0,
            polished: false,
            residuals: Residuals::default(),
        };
        let r = kkt_residuals(&p, &sol).unwrap();
        assert_eq!(r.primal_inf, 0.0);
        // ∇F = (−2·0.75 + 2, 1) = (0.5, 1)
        assert!((r.dual_inf - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = tiny();
        let mut sol = solve_qp(&p, &SolverSettings::default()).unwrap();
        sol.x.pop();
        assert!(matches!(
            kkt_residuals(&p, &sol),
            Err(SolveError::Dimension(_))
        ));
    }

    #[test]
    fn malformed_bounds_rejected() {
        let mut p = tiny();
        p.lower[0] = 2.0;
        p.upper[0] = 1.0;
        assert!(p.validate().is_err());
        let mut p = tiny();
        p.hess_diag[1] = 1.0;
        assert!(p.validate().is_err());
    }
}
