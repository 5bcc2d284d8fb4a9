//! Primal-dual interior-point method with Mehrotra predictor-corrector steps.
//!
//! Internally the problem is converted to minimization form with equality
//! rows only: every inequality row receives a nonnegative slack, variables
//! with coinciding bounds are substituted out. The Newton system is the
//! quasi-definite augmented matrix
//!
//! ```text
//! [ P + Σ + ρI    Aᵀ ] [  dx ]
//! [ A            −δI ] [ −dy ]
//! ```
//!
//! factored by sparse LDLᵀ in a stage-major ordering and cleaned up with
//! iterative refinement against the unregularized matrix.

use super::ldl::{LdlFactor, LdlSolver, UpperCsc};
use super::{
    kkt_residuals, relative_residuals, QuadraticProgram, Residuals, Solution, SolveError,
    SolveStatus, SolverSettings, SparseMatrix,
};

const NONE: usize = usize::MAX;
const DUAL_REG: f64 = 1e-10;
const PIVOT_FLOOR: f64 = 1e-13;
const STEP_FRACTION: f64 = 0.995;
const DIVERGENCE: f64 = 1e13;
const MAX_REG: f64 = 1e-5;

/// Equality-only minimization form of a [`QuadraticProgram`].
struct Reduced {
    n: usize,
    m: usize,
    a: SparseMatrix,
    b: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    var_stage: Vec<usize>,
    row_stage: Vec<usize>,
    /// internal variable index of each original variable, `NONE` when fixed
    internal_of: Vec<usize>,
    fixed_value: Vec<f64>,
    n_orig: usize,
    m_eq: usize,
}

fn is_fixed(l: f64, u: f64) -> bool {
    l.is_finite() && u.is_finite() && u - l <= 1e-12 * (1.0 + l.abs())
}

impl Reduced {
    fn new(p: &QuadraticProgram) -> Self {
        let n_orig = p.n();
        let mut internal_of = vec![NONE; n_orig];
        let mut fixed_value = vec![0.0; n_orig];
        let mut n = 0;
        let (mut pd, mut q, mut lower, mut upper, mut var_stage) =
            (vec![], vec![], vec![], vec![], vec![]);
        for j in 0..n_orig {
            if is_fixed(p.lower[j], p.upper[j]) {
                fixed_value[j] = 0.5 * (p.lower[j] + p.upper[j]);
            } else {
                internal_of[j] = n;
                n += 1;
                pd.push(-p.hess_diag[j]);
                q.push(-p.f[j]);
                lower.push(p.lower[j]);
                upper.push(p.upper[j]);
                var_stage.push(p.var_stage[j]);
            }
        }
        let m_eq = p.b_eq.len();
        let m_in = p.b_in.len();
        let n_struct = n;
        for k in 0..m_in {
            pd.push(0.0);
            q.push(0.0);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            var_stage.push(p.in_stage[k]);
        }
        n += m_in;
        let mut a = SparseMatrix::new(n);
        let mut b = Vec::with_capacity(m_eq + m_in);
        let mut row_stage = Vec::with_capacity(m_eq + m_in);
        let push =
            |src: &SparseMatrix, i: usize, rhs: f64, slack: Option<usize>, a: &mut SparseMatrix| {
                let mut entries = Vec::new();
                let mut rhs = rhs;
                for (j, v) in src.row(i) {
                    if internal_of[j] == NONE {
                        rhs -= v * fixed_value[j];
                    } else {
                        entries.push((internal_of[j], v));
                    }
                }
                if let Some(s) = slack {
                    entries.push((s, 1.0));
                }
                a.push_row(&entries);
                rhs
            };
        for i in 0..m_eq {
            b.push(push(&p.a_eq, i, p.b_eq[i], None, &mut a));
            row_stage.push(p.eq_stage[i]);
        }
        for k in 0..m_in {
            b.push(push(&p.a_in, k, p.b_in[k], Some(n_struct + k), &mut a));
            row_stage.push(p.in_stage[k]);
        }
        Self {
            n,
            m: m_eq + m_in,
            a,
            b,
            p: pd,
            q,
            lower,
            upper,
            var_stage,
            row_stage,
            internal_of,
            fixed_value,
            n_orig,
            m_eq,
        }
    }

    fn objective(&self, x: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| 0.5 * self.p[j] * x[j] * x[j] + self.q[j] * x[j])
            .sum()
    }
}

/// Augmented system restricted to a subset of the internal variables.
struct Kkt {
    csc: UpperCsc,
    solver: LdlSolver,
    pos_var: Vec<usize>,
    pos_row: Vec<usize>,
    /// stored diagonal minus true diagonal, per position
    reg: Vec<f64>,
}

impl Kkt {
    fn new(r: &Reduced, include: &[bool]) -> Self {
        let mut items: Vec<(usize, u8, usize)> = Vec::with_capacity(r.n + r.m);
        for j in (0..r.n).filter(|&j| include[j]) {
            items.push((r.var_stage[j], 0, j));
        }
        for i in 0..r.m {
            items.push((r.row_stage[i], 1, i));
        }
        items.sort_unstable();
        let dim = items.len();
        let mut pos_var = vec![NONE; r.n];
        let mut pos_row = vec![NONE; r.m];
        let mut signs = Vec::with_capacity(dim);
        for (pos, &(_, kind, idx)) in items.iter().enumerate() {
            if kind == 0 {
                pos_var[idx] = pos;
                signs.push(1.0);
            } else {
                pos_row[idx] = pos;
                signs.push(-1.0);
            }
        }
        let mut trip = Vec::with_capacity(r.a.nnz());
        for i in 0..r.m {
            for (j, v) in r.a.row(i) {
                if pos_var[j] != NONE {
                    trip.push((pos_row[i], pos_var[j], v));
                }
            }
        }
        let csc = UpperCsc::from_triplets(dim, &trip);
        let solver = LdlSolver::new(&csc, signs, PIVOT_FLOOR);
        Self {
            csc,
            solver,
            pos_var,
            pos_row,
            reg: vec![0.0; dim],
        }
    }

    /// Sets the variable diagonal to `true_diag + prim_reg` and the row
    /// diagonal to `−dual_reg`, then factors.
    fn factor(&mut self, true_diag: &[f64], prim_reg: f64, dual_reg: f64) -> LdlFactor {
        for (j, &pos) in self.pos_var.iter().enumerate() {
            if pos != NONE {
                self.csc.set_diag(pos, true_diag[j] + prim_reg);
                self.reg[pos] = prim_reg;
            }
        }
        for &pos in &self.pos_row {
            self.csc.set_diag(pos, -dual_reg);
            self.reg[pos] = -dual_reg;
        }
        self.solver.factor(&self.csc)
    }

    fn true_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut y = self.csc.sym_mul_vec(v);
        for ((yi, vi), ri) in y.iter_mut().zip(v).zip(&self.reg) {
            *yi -= ri * vi;
        }
        y
    }

    fn pack(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.reg.len()];
        for (j, &pos) in self.pos_var.iter().enumerate() {
            if pos != NONE {
                v[pos] = xs[j];
            }
        }
        for (i, &pos) in self.pos_row.iter().enumerate() {
            v[pos] = ys[i];
        }
        v
    }

    fn unpack(&self, v: &[f64], nx: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![0.0; nx];
        for (j, &pos) in self.pos_var.iter().enumerate() {
            if pos != NONE {
                xs[j] = v[pos];
            }
        }
        let ys = self.pos_row.iter().map(|&pos| v[pos]).collect();
        (xs, ys)
    }

    /// Solves `K_true v = rhs` starting from `v0`, using the regularized
    /// factor as a preconditioner. Returns the final residual ∞-norm.
    fn refine(&self, fac: &LdlFactor, rhs: &[f64], v: &mut Vec<f64>, max_steps: usize) -> f64 {
        let scale = 1.0 + rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let residual = |v: &[f64]| -> (Vec<f64>, f64) {
            let kv = self.true_mul(v);
            let res: Vec<f64> = rhs.iter().zip(&kv).map(|(a, b)| a - b).collect();
            let norm = res.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            (
                res,
                if norm.is_finite() {
                    norm
                } else {
                    f64::INFINITY
                },
            )
        };
        let (mut res, mut res_norm) = residual(v);
        for _ in 0..max_steps {
            if res_norm <= 1e-15 * scale {
                break;
            }
            fac.solve_in_place(&mut res);
            let trial: Vec<f64> = v.iter().zip(&res).map(|(a, d)| a + d).collect();
            let (next_res, next_norm) = residual(&trial);
            // a poor preconditioner can make refinement diverge; keep the best
            if !(next_norm < res_norm) {
                break;
            }
            *v = trial;
            res = next_res;
            res_norm = next_norm;
        }
        res_norm
    }

    fn solve(&self, fac: &LdlFactor, rx: &[f64], ry: &[f64], nx: usize) -> (Vec<f64>, Vec<f64>) {
        let rhs = self.pack(rx, ry);
        let mut v = rhs.clone();
        fac.solve_in_place(&mut v);
        self.refine(fac, &rhs, &mut v, 6);
        let (dx, neg_dy) = self.unpack(&v, nx);
        (dx, neg_dy.into_iter().map(|v| -v).collect())
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_step(v: &[f64], dv: &[f64], mask: &[bool]) -> f64 {
    let mut a: f64 = 1.0;
    for ((vi, di), on) in v.iter().zip(dv).zip(mask) {
        if *on && *di < 0.0 {
            a = a.min(-vi / di);
        }
    }
    a
}

struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    zl: Vec<f64>,
    zu: Vec<f64>,
}

/// Solves a concave QP to the tolerances in `s`.
///
/// Returns `Err` only for malformed input; infeasibility and the iteration
/// cap are reported through [`Solution::status`].
pub fn solve_qp(problem: &QuadraticProgram, s: &SolverSettings) -> Result<Solution, SolveError> {
    problem.validate()?;
    s.validate()?;
    let r = Reduced::new(problem);
    let (n, m) = (r.n, r.m);
    let has_l: Vec<bool> = r.lower.iter().map(|l| l.is_finite()).collect();
    let has_u: Vec<bool> = r.upper.iter().map(|u| u.is_finite()).collect();
    let n_comp = has_l.iter().chain(&has_u).filter(|b| **b).count().max(1) as f64;
    let b_norm = inf_norm(&r.b);
    let q_norm = inf_norm(&r.q);

    // Starting point strictly inside the bounds.
    let theta = 1.0 + 0.01 * b_norm;
    let z0 = 1.0 + 0.01 * q_norm;
    let mut it = Iterate {
        x: (0..n)
            .map(|j| match (has_l[j], has_u[j]) {
                (true, true) => 0.5 * (r.lower[j] + r.upper[j]),
                (true, false) => r.lower[j] + theta,
                (false, true) => r.upper[j] - theta,
                (false, false) => 0.0,
            })
            .collect(),
        y: vec![0.0; m],
        zl: has_l.iter().map(|&h| if h { z0 } else { 0.0 }).collect(),
        zu: has_u.iter().map(|&h| if h { z0 } else { 0.0 }).collect(),
    };

    let mut kkt = Kkt::new(&r, &vec![true; n]);
    let mut status = SolveStatus::IterationLimit;
    let mut iterations = 0;
    let mut last_primal_rel = f64::INFINITY;

    for iter in 0..=s.max_iter {
        iterations = iter;
        let ax = r.a.mul_vec(&it.x);
        let rp: Vec<f64> = ax.iter().zip(&r.b).map(|(a, b)| a - b).collect();
        let aty = r.a.tr_mul_vec(&it.y);
        let rd: Vec<f64> = (0..n)
            .map(|j| r.p[j] * it.x[j] + r.q[j] - aty[j] - it.zl[j] + it.zu[j])
            .collect();
        let sl: Vec<f64> = (0..n)
            .map(|j| if has_l[j] { it.x[j] - r.lower[j] } else { 1.0 })
            .collect();
        let su: Vec<f64> = (0..n)
            .map(|j| if has_u[j] { r.upper[j] - it.x[j] } else { 1.0 })
            .collect();
        let comp: f64 = (0..n).map(|j| sl[j] * it.zl[j] + su[j] * it.zu[j]).sum();
        let mu = comp / n_comp;
        let obj = r.objective(&it.x);

        let primal_rel = inf_norm(&rp) / (1.0 + b_norm);
        let dual_rel = inf_norm(&rd) / (1.0 + q_norm);
        let gap_rel = comp / (1.0 + obj.abs());
        last_primal_rel = primal_rel;
        log::trace!("iter {iter}: primal {primal_rel:.2e} dual {dual_rel:.2e} gap {gap_rel:.2e} mu {mu:.2e} obj {obj:.6e}");
        if primal_rel <= s.tol_primal && dual_rel <= s.tol_dual && gap_rel <= s.tol_gap {
            status = SolveStatus::Optimal;
            break;
        }
        let dual_size = inf_norm(&it.y).max(inf_norm(&it.zl)).max(inf_norm(&it.zu));
        if dual_size > DIVERGENCE * (1.0 + q_norm) && primal_rel > s.tol_primal {
            status = SolveStatus::Infeasible;
            break;
        }
        if iter == s.max_iter {
            break;
        }

        let diag: Vec<f64> = (0..n)
            .map(|j| {
                let mut d = r.p[j];
                if has_l[j] {
                    d += it.zl[j] / sl[j];
                }
                if has_u[j] {
                    d += it.zu[j] / su[j];
                }
                d
            })
            .collect();
        // Quasi-definite factors exist for any positive regularization, but
        // rounding can still flip pivots when the barrier terms span many
        // orders of magnitude; stronger shifts restore a usable factor.
        let mut reg = (s.regularization, DUAL_REG);
        let mut fac = kkt.factor(&diag, reg.0, reg.1);
        while fac.perturbed_pivots > 0 && reg.1 < MAX_REG {
            reg = (reg.0.max(1e-12) * 100.0, reg.1 * 100.0);
            fac = kkt.factor(&diag, reg.0, reg.1);
        }

        let newton = |rcl: &[f64], rcu: &[f64]| {
            let rx: Vec<f64> = (0..n)
                .map(|j| {
                    let mut v = -rd[j];
                    if has_l[j] {
                        v += rcl[j] / sl[j];
                    }
                    if has_u[j] {
                        v -= rcu[j] / su[j];
                    }
                    v
                })
                .collect();
            let ry: Vec<f64> = rp.iter().map(|v| -v).collect();
            let (dx, dy) = kkt.solve(&fac, &rx, &ry, n);
            let dzl: Vec<f64> = (0..n)
                .map(|j| {
                    if has_l[j] {
                        (rcl[j] - it.zl[j] * dx[j]) / sl[j]
                    } else {
                        0.0
                    }
                })
                .collect();
            let dzu: Vec<f64> = (0..n)
                .map(|j| {
                    if has_u[j] {
                        (rcu[j] + it.zu[j] * dx[j]) / su[j]
                    } else {
                        0.0
                    }
                })
                .collect();
            (dx, dy, dzl, dzu)
        };
        let step_len = |dx: &[f64], dzl: &[f64], dzu: &[f64]| {
            let neg_dx: Vec<f64> = dx.iter().map(|v| -v).collect();
            let ap = max_step(&sl, dx, &has_l).min(max_step(&su, &neg_dx, &has_u));
            let ad = max_step(&it.zl, dzl, &has_l).min(max_step(&it.zu, dzu, &has_u));
            (ap, ad)
        };

        // predictor
        let rcl: Vec<f64> = (0..n).map(|j| -sl[j] * it.zl[j]).collect();
        let rcu: Vec<f64> = (0..n).map(|j| -su[j] * it.zu[j]).collect();
        let (dx_a, _, dzl_a, dzu_a) = newton(&rcl, &rcu);
        let (ap, ad) = step_len(&dx_a, &dzl_a, &dzu_a);
        let a_aff = ap.min(ad);
        let mu_aff: f64 = (0..n)
            .map(|j| {
                let mut c = 0.0;
                if has_l[j] {
                    c += (sl[j] + a_aff * dx_a[j]) * (it.zl[j] + a_aff * dzl_a[j]);
                }
                if has_u[j] {
                    c += (su[j] - a_aff * dx_a[j]) * (it.zu[j] + a_aff * dzu_a[j]);
                }
                c
            })
            .sum::<f64>()
            / n_comp;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let rcl: Vec<f64> = (0..n)
            .map(|j| {
                if has_l[j] {
                    sigma * mu - sl[j] * it.zl[j] - dx_a[j] * dzl_a[j]
                } else {
                    0.0
                }
            })
            .collect();
        let rcu: Vec<f64> = (0..n)
            .map(|j| {
                if has_u[j] {
                    sigma * mu - su[j] * it.zu[j] + dx_a[j] * dzu_a[j]
                } else {
                    0.0
                }
            })
            .collect();
        let (dx, dy, dzl, dzu) = newton(&rcl, &rcu);
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !(finite(&dx) && finite(&dy) && finite(&dzl) && finite(&dzu)) {
            log::debug!("non-finite Newton direction at iteration {iter}");
            let loose = 1e3;
            if primal_rel <= loose * s.tol_primal
                && dual_rel <= loose * s.tol_dual
                && gap_rel <= loose * s.tol_gap
            {
                status = SolveStatus::Optimal;
            }
            break;
        }
        let (ap, ad) = step_len(&dx, &dzl, &dzu);
        let alpha = (STEP_FRACTION * ap.min(ad)).min(1.0);
        for j in 0..n {
            it.x[j] += alpha * dx[j];
            it.zl[j] += alpha * dzl[j];
            it.zu[j] += alpha * dzu[j];
            // keep strict interiority against rounding
            if has_l[j] {
                it.x[j] = it.x[j].max(r.lower[j] + f64::MIN_POSITIVE);
                it.zl[j] = it.zl[j].max(f64::MIN_POSITIVE);
            }
            if has_u[j] {
                it.x[j] = it.x[j].min(r.upper[j] - f64::MIN_POSITIVE);
                it.zu[j] = it.zu[j].max(f64::MIN_POSITIVE);
            }
        }
        for i in 0..m {
            it.y[i] += alpha * dy[i];
        }
    }
    if status == SolveStatus::IterationLimit && last_primal_rel > 1e3 * s.tol_primal {
        status = SolveStatus::Infeasible;
    }

    let mut sol = to_solution(problem, &r, &it, status, iterations);
    if status == SolveStatus::Optimal && s.polish {
        if let Some(polished) = polish(problem, &r, &it, &sol, s) {
            sol = polished;
        }
    }
    Ok(sol)
}

fn to_solution(
    p: &QuadraticProgram,
    r: &Reduced,
    it: &Iterate,
    status: SolveStatus,
    iterations: usize,
) -> Solution {
    let n = r.n_orig;
    let mut x = vec![0.0; n];
    let mut lower_duals = vec![0.0; n];
    let mut upper_duals = vec![0.0; n];
    for j in 0..n {
        let k = r.internal_of[j];
        if k == NONE {
            x[j] = r.fixed_value[j];
        } else {
            x[j] = it.x[k];
            lower_duals[j] = it.zl[k];
            upper_duals[j] = it.zu[k];
        }
    }
    let eq_duals: Vec<f64> = it.y[..r.m_eq].iter().map(|v| -v).collect();
    let ineq_duals: Vec<f64> = it.y[r.m_eq..].iter().map(|v| -v).collect();
    let mut sol = Solution {
        status,
        objective: p.objective(&x),
        x,
        eq_duals,
        ineq_duals,
        lower_duals,
        upper_duals,
        iterations,
        polished: false,
        residuals: Residuals::default(),
    };
    assign_fixed_duals(p, r, &mut sol);
    sol.residuals = kkt_residuals(p, &sol).unwrap_or_default();
    sol
}

/// Bound multipliers of substituted variables follow from stationarity.
fn assign_fixed_duals(p: &QuadraticProgram, r: &Reduced, sol: &mut Solution) {
    if r.internal_of.iter().all(|&k| k != NONE) {
        return;
    }
    let mut g: Vec<f64> = (0..p.n())
        .map(|j| -p.hess_diag[j] * sol.x[j] - p.f[j])
        .collect();
    p.a_eq.add_tr_mul_vec(&sol.eq_duals, &mut g);
    p.a_in.add_tr_mul_vec(&sol.ineq_duals, &mut g);
    for j in 0..p.n() {
        if r.internal_of[j] == NONE {
            // g + γ̄ − γ̲ = 0
            if g[j] <= 0.0 {
                sol.upper_duals[j] = -g[j];
                sol.lower_duals[j] = 0.0;
            } else {
                sol.lower_duals[j] = g[j];
                sol.upper_duals[j] = 0.0;
            }
        }
    }
}

/// Which bound each internal variable is held at.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Held {
    Free,
    Lower,
    Upper,
}

/// Solves the equality-constrained problem with the held variables at their
/// bounds. Returns the full point and row multipliers, or `None` when the
/// system is inconsistent.
fn solve_eqp(
    r: &Reduced,
    held: &[Held],
    guess_x: &[f64],
    guess_y: &[f64],
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = r.n;
    let include: Vec<bool> = held.iter().map(|h| *h == Held::Free).collect();
    let mut xs = guess_x.to_vec();
    for j in 0..n {
        match held[j] {
            Held::Lower => xs[j] = r.lower[j],
            Held::Upper => xs[j] = r.upper[j],
            Held::Free => {}
        }
    }
    let mut kkt = Kkt::new(r, &include);
    let fac = kkt.factor(&r.p, 1e-8, 1e-8);
    let rx: Vec<f64> = (0..n).map(|j| -r.q[j]).collect();
    let mut ry = r.b.clone();
    for (i, ryi) in ry.iter_mut().enumerate() {
        for (j, v) in r.a.row(i) {
            if !include[j] {
                *ryi -= v * xs[j];
            }
        }
    }
    let rhs = kkt.pack(&rx, &ry);
    let neg_y: Vec<f64> = guess_y.iter().map(|v| -v).collect();
    let mut v = kkt.pack(&xs, &neg_y);
    let res = kkt.refine(&fac, &rhs, &mut v, 60);
    if !(res <= 1e-9 * (1.0 + inf_norm(&rhs))) {
        return None;
    }
    let (xf, neg_y) = kkt.unpack(&v, n);
    for j in (0..n).filter(|&j| include[j]) {
        xs[j] = xf[j];
    }
    Some((xs, neg_y.iter().map(|v| -v).collect()))
}

/// Bound multipliers implied by `y`, and the held variable whose multiplier
/// has the wrong sign by the most, if any exceeds `dual_tol`.
fn bound_duals(
    r: &Reduced,
    held: &[Held],
    x: &[f64],
    y: &[f64],
    dual_tol: f64,
) -> (Vec<f64>, Vec<f64>, Option<usize>) {
    let aty = r.a.tr_mul_vec(y);
    let mut zl = vec![0.0; r.n];
    let mut zu = vec![0.0; r.n];
    let mut worst = (dual_tol, None);
    for j in 0..r.n {
        let w = r.p[j] * x[j] + r.q[j] - aty[j];
        let wrong = match held[j] {
            Held::Free => continue,
            Held::Lower => {
                zl[j] = w.max(0.0);
                -w
            }
            Held::Upper => {
                zu[j] = (-w).max(0.0);
                w
            }
        };
        if wrong > worst.0 {
            worst = (wrong, Some(j));
        }
    }
    (zl, zu, worst.1)
}

/// Wrongly signed multipliers above this are released. Much tighter than the
/// solver's dual tolerance: with tiny curvature a multiplier error `w` moves
/// the optimum by `w / curvature`.
fn polish_dual_tol(r: &Reduced) -> f64 {
    1e-11 * (1.0 + inf_norm(&r.q))
}

fn bound_tol(l: f64, u: f64, x: f64) -> f64 {
    1e-9 * (1.0 + l.abs().min(u.abs()).min(x.abs()))
}

/// Accepts a candidate only if it meets the solver tolerances and is no
/// worse than the interior point.
fn accept(
    p: &QuadraticProgram,
    r: &Reduced,
    it: Iterate,
    ipm: &Solution,
    s: &SolverSettings,
) -> Option<Solution> {
    let mut sol = to_solution(p, r, &it, SolveStatus::Optimal, ipm.iterations);
    sol.polished = true;
    let rel = relative_residuals(p, &sol.x, sol.objective, &sol.residuals);
    let ok = rel.primal <= s.tol_primal
        && rel.dual <= s.tol_dual
        && rel.gap <= s.tol_gap
        && sol.objective >= ipm.objective - s.tol_gap * (1.0 + ipm.objective.abs());
    ok.then_some(sol)
}

/// Active set guessed from the interior iterate by comparing each bound's
/// slack with its multiplier.
fn guess_held(r: &Reduced, it: &Iterate) -> Vec<Held> {
    (0..r.n)
        .map(|j| {
            if r.lower[j].is_finite() && it.x[j] - r.lower[j] < it.zl[j] {
                Held::Lower
            } else if r.upper[j].is_finite() && r.upper[j] - it.x[j] < it.zu[j] {
                Held::Upper
            } else {
                Held::Free
            }
        })
        .collect()
}

/// Re-solves the equality-constrained KKT system on the active set guessed
/// from the interior iterate, correcting the guess primal-dual active-set
/// style while bounds or multiplier signs are violated. Falls back to a
/// primal active-set method when that cycles or meets an inconsistent
/// system, which happens on degenerate problems. Accepted only if the result
/// is primal and dual feasible and no worse than the interior point.
fn polish(
    p: &QuadraticProgram,
    r: &Reduced,
    it: &Iterate,
    ipm: &Solution,
    s: &SolverSettings,
) -> Option<Solution> {
    exchange_polish(p, r, it, ipm, s).or_else(|| primal_active_set(p, r, it, ipm, s))
}

fn exchange_polish(
    p: &QuadraticProgram,
    r: &Reduced,
    it: &Iterate,
    ipm: &Solution,
    s: &SolverSettings,
) -> Option<Solution> {
    const ROUNDS: usize = 25;
    let n = r.n;
    let mut held = guess_held(r, it);
    let dual_tol = polish_dual_tol(r);
    let mut guess_x = it.x.clone();
    let mut guess_y = it.y.clone();
    for _ in 0..ROUNDS {
        let (mut xs, y) = solve_eqp(r, &held, &guess_x, &guess_y)?;
        let mut changed = false;
        for j in 0..n {
            if held[j] == Held::Free {
                let (l, u) = (r.lower[j], r.upper[j]);
                let tol = bound_tol(l, u, xs[j]);
                if xs[j] < l - tol {
                    held[j] = Held::Lower;
                    changed = true;
                } else if xs[j] > u + tol {
                    held[j] = Held::Upper;
                    changed = true;
                } else {
                    xs[j] = xs[j].clamp(l, u);
                }
            }
        }
        let aty = r.a.tr_mul_vec(&y);
        for j in 0..n {
            let w = r.p[j] * xs[j] + r.q[j] - aty[j];
            let release = match held[j] {
                Held::Lower => w < -dual_tol,
                Held::Upper => w > dual_tol,
                Held::Free => false,
            };
            if release {
                held[j] = Held::Free;
                changed = true;
            }
        }
        if changed {
            guess_x = xs;
            guess_y = y;
            continue;
        }
        let (zl, zu, _) = bound_duals(r, &held, &xs, &y, dual_tol);
        return accept(p, r, Iterate { x: xs, y, zl, zu }, ipm, s);
    }
    None
}

/// Primal active-set method started from the interior iterate, which is
/// feasible, so every subproblem it meets is consistent. Blocking bounds
/// are added one at a time and the most wrongly signed multiplier is
/// dropped once a full step is taken.
fn primal_active_set(
    p: &QuadraticProgram,
    r: &Reduced,
    it: &Iterate,
    ipm: &Solution,
    s: &SolverSettings,
) -> Option<Solution> {
    let n = r.n;
    let dual_tol = polish_dual_tol(r);
    let max_rounds = 4 * (n + r.m) + 50;
    // start from the confident part of the guess only
    let mut held: Vec<Held> = guess_held(r, it)
        .into_iter()
        .enumerate()
        .map(|(j, h)| match h {
            Held::Lower if it.x[j] - r.lower[j] < 1e-3 * it.zl[j] => Held::Lower,
            Held::Upper if r.upper[j] - it.x[j] < 1e-3 * it.zu[j] => Held::Upper,
            _ => Held::Free,
        })
        .collect();
    let mut x = it.x.clone();
    let mut y = it.y.clone();
    for _ in 0..max_rounds {
        let (target, ty) = match solve_eqp(r, &held, &x, &y) {
            Some(v) => v,
            None if held.iter().any(|h| *h != Held::Free) && x == it.x => {
                held = vec![Held::Free; n];
                continue;
            }
            None => return None,
        };
        // longest step towards the target that keeps free variables in bounds
        let mut step = 1.0;
        let mut block = None;
        for j in (0..n).filter(|&j| held[j] == Held::Free) {
            let d = target[j] - x[j];
            let (l, u) = (r.lower[j], r.upper[j]);
            let tol = bound_tol(l, u, target[j]);
            if d < 0.0 && target[j] < l - tol {
                let t = ((l - x[j]) / d).max(0.0);
                if t < step {
                    step = t;
                    block = Some((j, Held::Lower));
                }
            } else if d > 0.0 && target[j] > u + tol {
                let t = ((u - x[j]) / d).max(0.0);
                if t < step {
                    step = t;
                    block = Some((j, Held::Upper));
                }
            }
        }
        for j in 0..n {
            x[j] = (x[j] + step * (target[j] - x[j])).clamp(r.lower[j], r.upper[j]);
        }
        y = ty;
        if let Some((j, side)) = block {
            held[j] = side;
            x[j] = if side == Held::Lower {
                r.lower[j]
            } else {
                r.upper[j]
            };
            continue;
        }
        let (zl, zu, worst) = bound_duals(r, &held, &x, &y, dual_tol);
        match worst {
            Some(j) => held[j] = Held::Free,
            None => return accept(p, r, Iterate { x, y, zl, zu }, ipm, s),
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_constrained_scalar() {
        // maximize −(x−3)² over [0, 2] → x = 2, γ̄ = 2
        let mut p = QuadraticProgram::new(1);
        p.hess_diag = vec![-2.0];
        p.f = vec![6.0];
        p.lower = vec![0.0];
        p.upper = vec![2.0];
        let sol = solve_qp(&p, &SolverSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.x[0] - 2.0).abs() < 1e-9);
        assert!((sol.upper_duals[0] - 2.0).abs() < 1e-7);
        assert!(sol.polished);
    }

    #[test]
    fn fixed_variables_are_substituted() {
        // x1 fixed at 1; maximize x0 subject to x0 + x1 ≤ 3
        let mut p = QuadraticProgram::new(2);
        p.f = vec![1.0, 0.0];
        p.lower = vec![0.0, 1.0];
        p.upper = vec![10.0, 1.0];
        p.add_le(&[(0, 1.0), (1, 1.0)], 3.0, 0);
        let sol = solve_qp(&p, &SolverSettings::default()).unwrap();
        assert!(sol.is_optimal());
        assert!((sol.x[0] - 2.0).abs() < 1e-8);
        assert!((sol.ineq_duals[0] - 1.0).abs() < 1e-7);
        // ν acts on the fixed variable too: γ̄ − γ̲ = −ν
        assert!((sol.lower_duals[1] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn conflicting_rows_reported_infeasible() {
        let mut p = QuadraticProgram::new(1);
        p.f = vec![1.0];
        p.lower = vec![0.0];
        p.upper = vec![1.0];
        p.add_eq(&[(0, 1.0)], 5.0, 0);
        let sol = solve_qp(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }
}
