//! Exact small-instance solver used to cross-check the interior-point method.
//!
//! Primal active-set search over bound constraints. Every working set visited
//! is solved as an equality-constrained QP on the null space of the active
//! equality rows; the search terminates at a working set whose KKT point is
//! primal feasible with correctly signed multipliers, which for a concave
//! objective certifies global optimality. A phase-one LP with artificial
//! columns supplies the first feasible working set.
//!
//! Dense linear algebra only, limited to [`ORACLE_MAX_VARS`] variables.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{kkt_residuals, QuadraticProgram, Residuals, Solution, SolveError, SolveStatus};

pub const ORACLE_MAX_VARS: usize = 40;
const MAX_STEPS: usize = 20_000;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Work {
    Free,
    Lower,
    Upper,
    Fixed,
}

struct Dense {
    a: DMatrix<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    l: Vec<f64>,
    u: Vec<f64>,
}

impl Dense {
    fn n(&self) -> usize {
        self.q.len()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|j| self.p[j] * x[j] + self.q[j])
            .collect()
    }

    fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(self.a.nrows(), idx.len(), |i, k| self.a[(i, idx[k])])
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().fold(0.0f64, |a, b| a.max(*b));
    sv.iter().filter(|s| **s > RANK_TOL * top.max(1.0)).count()
}

/// Orthonormal basis of `{v : m v = 0}`.
fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let k = m.ncols();
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(k, k);
    }
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let cols: Vec<usize> = (0..k)
        .filter(|&i| eig.eigenvalues[i] <= RANK_TOL * top.max(1.0))
        .collect();
    DMatrix::from_fn(k, cols.len(), |i, c| eig.eigenvectors[(i, cols[c])])
}

fn least_squares(m: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = m.clone().svd(true, true);
    svd.solve(rhs, RANK_TOL)
        .unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Runs the active-set search from a feasible `x`; `work` must describe an
/// independent working set. Returns the equality multipliers (min form).
fn active_set(d: &Dense, x: &mut [f64], work: &mut [Work]) -> Result<DVector<f64>, SolveError> {
    let n = d.n();
    for _ in 0..MAX_STEPS {
        let g = d.gradient(x);
        let g_scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let free: Vec<usize> = (0..n).filter(|&j| work[j] == Work::Free).collect();
        let a_f = d.columns(&free);
        let z = null_space(&a_f);
        let mut step: Option<(Vec<f64>, f64)> = None;
        if z.ncols() > 0 {
            let g_f = DVector::from_iterator(free.len(), free.iter().map(|&j| g[j]));
            let p_f = DMatrix::from_diagonal(&DVector::from_iterator(
                free.len(),
                free.iter().map(|&j| d.p[j]),
            ));
            let h = z.transpose() * &g_f;
            let hr = z.transpose() * p_f * &z;
            let eig = SymmetricEigen::new(hr);
            let ht = eig.eigenvectors.transpose() * &h;
            let top = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let flat = |i: usize| eig.eigenvalues[i] <= 1e-10 * top.max(1.0);
            let grad_tol = 1e-11 * g_scale;
            let dim = ht.len();
            let mut v = DVector::zeros(dim);
            let mut full = 1.0;
            if (0..dim).any(|i| flat(i) && ht[i].abs() > grad_tol) {
                for i in (0..dim).filter(|&i| flat(i)) {
                    v -= eig.eigenvectors.column(i) * ht[i];
                }
                full = f64::INFINITY;
            } else {
                for i in (0..dim).filter(|&i| !flat(i)) {
                    v -= eig.eigenvectors.column(i) * (ht[i] / eig.eigenvalues[i]);
                }
            }
            let p = &z * v;
            let x_scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if p.amax() > 1e-13 * x_scale {
                let mut dir = vec![0.0; n];
                for (k, &j) in free.iter().enumerate() {
                    dir[j] = p[k];
                }
                step = Some((dir, full));
            }
        }

        if let Some((dir, full)) = step {
            let mut alpha = full;
            let mut block: Option<(usize, Work)> = None;
            for &j in &free {
                let (lim, side) = if dir[j] < 0.0 && d.l[j].is_finite() {
                    ((d.l[j] - x[j]) / dir[j], Work::Lower)
                } else if dir[j] > 0.0 && d.u[j].is_finite() {
                    ((d.u[j] - x[j]) / dir[j], Work::Upper)
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                if lim < alpha {
                    alpha = lim;
                    block = Some((j, side));
                }
            }
            if alpha.is_infinite() {
                return Err(SolveError::Unbounded);
            }
            for j in 0..n {
                x[j] += alpha * dir[j];
            }
            if let Some((j, side)) = block {
                work[j] = side;
                x[j] = if side == Work::Lower { d.l[j] } else { d.u[j] };
            }
            continue;
        }

        // Stationary on the current face: multipliers decide optimality.
        let g_f = DVector::from_iterator(free.len(), free.iter().map(|&j| g[j]));
        let y = if free.is_empty() {
            // every column bound: pick multipliers fitting the fixed ones
            DVector::zeros(d.a.nrows())
        } else {
            least_squares(&a_f.transpose(), &g_f)
        };
        let aty = d.a.transpose() * &y;
        let mut release = None;
        for j in 0..n {
            let zj = g[j] - aty[j];
            let wrong = match work[j] {
                Work::Lower => zj < -1e-9 * g_scale,
                Work::Upper => zj > 1e-9 * g_scale,
                _ => false,
            };
            if wrong {
                release = Some(j);
                break;
            }
        }
        match release {
            Some(j) => work[j] = Work::Free,
            None => return Ok(y),
        }
    }
    Err(SolveError::IterationLimit(MAX_STEPS))
}

/// Finds the optimum of a small problem exactly (to rounding).
pub fn oracle_solve(p: &QuadraticProgram) -> Result<Solution, SolveError> {
    p.validate()?;
    let n0 = p.n();
    if n0 > ORACLE_MAX_VARS {
        return Err(SolveError::TooLarge {
            n: n0,
            max: ORACLE_MAX_VARS,
        });
    }
    let m_eq = p.b_eq.len();
    let m_in = p.b_in.len();
    let n = n0 + m_in;
    let m = m_eq + m_in;

    let mut a = DMatrix::zeros(m, n);
    for i in 0..m_eq {
        for (j, v) in p.a_eq.row(i) {
            a[(i, j)] = v;
        }
    }
    for k in 0..m_in {
        for (j, v) in p.a_in.row(k) {
            a[(m_eq + k, j)] = v;
        }
        a[(m_eq + k, n0 + k)] = 1.0;
    }
    let b = DVector::from_iterator(m, p.b_eq.iter().chain(&p.b_in).copied());
    let mut l = p.lower.clone();
    let mut u = p.upper.clone();
    l.extend(std::iter::repeat_n(0.0, m_in));
    u.extend(std::iter::repeat_n(f64::INFINITY, m_in));
    let fixed: Vec<bool> = (0..n).map(|j| l[j].is_finite() && l[j] == u[j]).collect();

    // Keep a maximal independent set of rows over the non-fixed columns.
    let movable: Vec<usize> = (0..n).filter(|&j| !fixed[j]).collect();
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..m {
        let mut trial = kept.clone();
        trial.push(i);
        let sub = DMatrix::from_fn(trial.len(), movable.len(), |r, c| a[(trial[r], movable[c])]);
        if rank(&sub) == trial.len() {
            kept = trial;
        }
    }
    let a_red = DMatrix::from_fn(kept.len(), n, |r, c| a[(kept[r], c)]);
    let b_red = DVector::from_iterator(kept.len(), kept.iter().map(|&i| b[i]));
    let mr = kept.len();

    // Phase one: minimize the sum of artificial columns.
    let mut x: Vec<f64> = (0..n).map(|j| 0.0f64.clamp(l[j], u[j])).collect();
    let resid = &b_red - &a_red * DVector::from_column_slice(&x);
    let mut a1 = DMatrix::zeros(mr, n + mr);
    a1.view_mut((0, 0), (mr, n)).copy_from(&a_red);
    for i in 0..mr {
        a1[(i, n + i)] = if resid[i] >= 0.0 { 1.0 } else { -1.0 };
    }
    let phase1 = Dense {
        a: a1,
        p: vec![0.0; n + mr],
        q: (0..n + mr).map(|j| if j < n { 0.0 } else { 1.0 }).collect(),
        l: l.iter()
            .copied()
            .chain(std::iter::repeat_n(0.0, mr))
            .collect(),
        u: u.iter()
            .copied()
            .chain(std::iter::repeat_n(f64::INFINITY, mr))
            .collect(),
    };
    let mut x1: Vec<f64> = x
        .iter()
        .copied()
        .chain(resid.iter().map(|r| r.abs()))
        .collect();
    let mut work1: Vec<Work> = (0..n + mr)
        .map(|j| {
            if j >= n {
                Work::Free
            } else if fixed[j] {
                Work::Fixed
            } else if x1[j] == l[j] {
                Work::Lower
            } else if x1[j] == u[j] {
                Work::Upper
            } else {
                Work::Free
            }
        })
        .collect();
    active_set(&phase1, &mut x1, &mut work1)?;
    let infeas: f64 = x1[n..].iter().sum();
    let b_scale = 1.0 + b.amax();
    if infeas > 1e-9 * b_scale {
        return Err(SolveError::Infeasible(format!(
            "phase one leaves residual {infeas:.3e}"
        )));
    }
    x.copy_from_slice(&x1[..n]);
    let mut work: Vec<Work> = work1[..n].to_vec();

    // Release bounds until the free columns span the kept rows again.
    let free_rank = |work: &[Work]| {
        let free: Vec<usize> = (0..n).filter(|&j| work[j] == Work::Free).collect();
        rank(&DMatrix::from_fn(mr, free.len(), |r, c| {
            a_red[(r, free[c])]
        }))
    };
    let mut current = free_rank(&work);
    for j in 0..n {
        if current == mr {
            break;
        }
        if matches!(work[j], Work::Lower | Work::Upper) {
            work[j] = Work::Free;
            let next = free_rank(&work);
            if next > current {
                current = next;
            } else {
                work[j] = if x[j] == l[j] {
                    Work::Lower
                } else {
                    Work::Upper
                };
            }
        }
    }

    let mut pd = vec![0.0; n];
    let mut qd = vec![0.0; n];
    for j in 0..n0 {
        pd[j] = -p.hess_diag[j];
        qd[j] = -p.f[j];
    }
    let phase2 = Dense {
        a: a_red,
        p: pd,
        q: qd,
        l,
        u,
    };
    let y_red = active_set(&phase2, &mut x, &mut work)?;

    // Map to the maximization-form multipliers.
    let mut y = vec![0.0; m];
    for (r, &i) in kept.iter().enumerate() {
        y[i] = y_red[r];
    }
    let g = phase2.gradient(&x);
    let aty = phase2.a.transpose() * &y_red;
    let mut lower_duals = vec![0.0; n0];
    let mut upper_duals = vec![0.0; n0];
    for j in 0..n0 {
        let zj = g[j] - aty[j];
        match work[j] {
            Work::Lower => lower_duals[j] = zj.max(0.0),
            Work::Upper => upper_duals[j] = (-zj).max(0.0),
            Work::Fixed => {
                if zj >= 0.0 {
                    lower_duals[j] = zj;
                } else {
                    upper_duals[j] = -zj;
                }
            }
            Work::Free => {}
        }
    }
    let x0: Vec<f64> = x[..n0].to_vec();
    let mut sol = Solution {
        status: SolveStatus::Optimal,
        objective: p.objective(&x0),
        x: x0,
        eq_duals: y[..m_eq].iter().map(|v| -v).collect(),
        ineq_duals: y[m_eq..].iter().map(|v| -v).collect(),
        lower_duals,
        upper_duals,
        iterations: 0,
        polished: false,
        residuals: Residuals::default(),
    };
    let primal = kkt_residuals(p, &sol)?.primal_inf;
    if primal > 1e-7 * b_scale {
        return Err(SolveError::Infeasible(format!(
            "dependent rows inconsistent, residual {primal:.3e}"
        )));
    }
    sol.residuals = kkt_residuals(p, &sol)?;
    Ok(sol)
}
