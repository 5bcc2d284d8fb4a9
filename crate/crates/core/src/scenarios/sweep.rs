//! Profit and its components along a grid of one policy parameter.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RevenueBreakdown;
use crate::analysis::{solve_model, AnalysisError, Param};
use crate::model::ValidatedModel;
use crate::qp::SolverSettings;

/// Environment variable capping the number of sweep threads.
pub const THREADS_VAR: &str = "TRIMARKET_THREADS";

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 21;

/// A change smaller than this (relative to `1 + |value|`) counts as flat.
pub const TREND_TOL: f64 = 1e-6;

/// Tolerance of the monotonicity check, relative to the profit scale.
pub const MONOTONE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub breakdown: Option<RevenueBreakdown>,
    pub mu: Option<f64>,
    pub delta: Option<f64>,
    /// Why the solve failed, if it did.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub param: Param,
    pub points: Vec<SweepPoint>,
    /// Grid values where some revenue component switches between rising,
    /// flat and falling.
    pub breakpoints: Vec<f64>,
}

/// Evenly spaced points over the parameter's domain: [0, 1] for α, and
/// (0, 1] in steps of 1/n for r.
pub fn default_grid(param: Param, n: usize) -> Vec<f64> {
    let n = n.max(2);
    match param {
        Param::Alpha => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        Param::R => (1..=n).map(|i| i as f64 / n as f64).collect(),
    }
}

/// Evenly spaced grid with `steps` points from `from` to `to` inclusive.
pub fn linear_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

fn trend(a: f64, b: f64) -> i8 {
    let d = b - a;
    if d.abs() <= TREND_TOL * (1.0 + a.abs().max(b.abs())) {
        0
    } else if d > 0.0 {
        1
    } else {
        -1
    }
}

impl SweepResult {
    fn solved(&self) -> impl Iterator<Item = (f64, &RevenueBreakdown)> {
        self.points
            .iter()
            .filter_map(|p| p.breakdown.as_ref().map(|b| (p.value, b)))
    }

    /// Profit never moves against the feasible-set ordering: non-increasing
    /// in r, non-decreasing in α.
    pub fn monotone(&self) -> bool {
        let profits: Vec<f64> = self.solved().map(|(_, b)| b.profit).collect();
        let scale = profits.iter().fold(1.0f64, |m, p| m.max(p.abs()));
        profits.windows(2).all(|w| match self.param {
            Param::R => w[1] <= w[0] + MONOTONE_TOL * scale,
            Param::Alpha => w[1] >= w[0] - MONOTONE_TOL * scale,
        })
    }

    /// Names of the revenue components that change anywhere along the grid.
    pub fn varying(&self) -> Vec<&'static str> {
        let rows: Vec<_> = self.solved().map(|(_, b)| b.components()).collect();
        (0..4)
            .filter(|&k| rows.windows(2).any(|w| trend(w[0][k].1, w[1][k].1) != 0))
            .map(|k| rows[0][k].0)
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }
}

fn breakpoints(points: &[SweepPoint]) -> Vec<f64> {
    let solved: Vec<(f64, [(&str, f64); 5])> = points
        .iter()
        .filter_map(|p| p.breakdown.map(|b| (p.value, b.components())))
        .collect();
    let trends: Vec<[i8; 4]> = solved
        .windows(2)
        .map(|w| std::array::from_fn(|k| trend(w[0].1[k].1, w[1].1[k].1)))
        .collect();
    trends
        .windows(2)
        .zip(solved.iter().skip(1))
        .filter(|(t, _)| t[0] != t[1])
        .map(|(_, (v, _))| *v)
        .collect()
}

fn thread_pool() -> Option<rayon::ThreadPool> {
    let n: usize = std::env::var(THREADS_VAR).ok()?.trim().parse().ok()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .ok()
}

/// Solves the model at every grid value. Failed points are recorded and the
/// sweep continues.
pub fn parameter_sweep(
    model: &ValidatedModel,
    param: Param,
    grid: &[f64],
    settings: &SolverSettings,
) -> Result<SweepResult, AnalysisError> {
    if let Some(v) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(AnalysisError::Grid(format!(
            "{} = {v} outside [0, 1]",
            param.name()
        )));
    }
    let solve_point = |&value: &f64| -> SweepPoint {
        let res = param
            .apply(model, value)
            .and_then(|m| solve_model(&m, settings));
        match res {
            Ok(s) => SweepPoint {
                value,
                breakdown: Some(RevenueBreakdown::from_plan(
                    &s.plan,
                    s.model.data(),
                    &s.model.config().tg,
                )),
                mu: Some(s.duals.mu),
                delta: Some(s.duals.delta),
                error: None,
            },
            Err(e) => {
                log::warn!("{} = {value}: {e}", param.name());
                SweepPoint {
                    value,
                    breakdown: None,
                    mu: None,
                    delta: None,
                    error: Some(e.to_string()),
                }
            }
        }
    };
    let points: Vec<SweepPoint> = match thread_pool() {
        Some(pool) => pool.install(|| grid.par_iter().map(solve_point).collect()),
        None => grid.par_iter().map(solve_point).collect(),
    };
    Ok(SweepResult {
        param,
        breakpoints: breakpoints(&points),
        points,
    })
}
