//! Behaviour of the optimum under changes of the policy parameters: affine
//! pieces over critical regions and envelope slopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    solve_model, solve_problem, AnalysisError, NamedDuals, PropertyReport, SolvedModel, Witness,
};
use super::{AFFINE_TOL, ENVELOPE_TOL, FINGERPRINT_TOL, MULT_TOL};
use crate::model::{
    assemble_qp, validate_config, DispatchPlan, QpProblem, ValidatedModel, QUOTA_ROW,
};
use crate::qp::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Alpha,
    R,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Alpha => "alpha",
            Param::R => "r",
        }
    }

    /// Copy of `model` with the parameter set to `value`.
    pub fn apply(
        self,
        model: &ValidatedModel,
        value: f64,
    ) -> Result<ValidatedModel, AnalysisError> {
        let (mut cfg, data) = model.clone().into_parts();
        match self {
            Param::Alpha => cfg.policy.alpha = value,
            Param::R => cfg.policy.r = value,
        }
        Ok(validate_config(cfg, data)?)
    }

    pub fn value(self, model: &ValidatedModel) -> f64 {
        match self {
            Param::Alpha => model.config().policy.alpha,
            Param::R => model.config().policy.r,
        }
    }

    /// Multiplier of the coupling row the parameter enters.
    pub fn multiplier(self, duals: &NamedDuals) -> f64 {
        match self {
            Param::Alpha => duals.delta,
            Param::R => duals.mu,
        }
    }

    /// Names of the two series claimed to be affine in the parameter.
    pub fn series_names(self) -> [&'static str; 2] {
        match self {
            Param::Alpha => ["g", "C"],
            Param::R => ["R", "P_c"],
        }
    }

    fn series(self, raw: &DispatchPlan) -> [Vec<f64>; 2] {
        match self {
            Param::Alpha => [raw.g.clone(), raw.cer_trade.clone()],
            Param::R => [raw.rec_trade.clone(), raw.p_c.clone()],
        }
    }

    fn property_id(self) -> &'static str {
        match self {
            Param::Alpha => "prop2",
            Param::R => "prop3",
        }
    }
}

/// Which inequalities bind at a solution.
///
/// One code per variable (0 free, 1 at lower, 2 at upper, 3 fixed) followed
/// by one per coupling row (0 slack, 1 binding).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint(pub Vec<u8>);

impl Fingerprint {
    pub fn active_count(&self) -> usize {
        self.0.iter().filter(|c| **c != 0).count()
    }

    /// Positions where two fingerprints disagree.
    pub fn diff(&self, other: &Self) -> Vec<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }
}

fn near(slack: f64, bound: f64) -> bool {
    slack <= FINGERPRINT_TOL * (1.0 + bound.abs())
}

pub fn fingerprint(problem: &QpProblem, x: &[f64]) -> Fingerprint {
    let qp = &problem.qp;
    let mut codes: Vec<u8> = x
        .iter()
        .zip(qp.lower.iter().zip(&qp.upper))
        .map(|(&v, (&l, &u))| {
            let lo = l.is_finite() && near(v - l, l);
            let hi = u.is_finite() && near(u - v, u);
            u8::from(lo) | (u8::from(hi) << 1)
        })
        .collect();
    let ax = qp.a_in.mul_vec(x);
    codes.extend(
        ax.iter()
            .zip(&qp.b_in)
            .map(|(a, b)| u8::from(near(b - a, *b))),
    );
    Fingerprint(codes)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffinePoint {
    pub value: f64,
    pub objective: f64,
    /// δ for α, μ for r.
    pub multiplier: f64,
    /// Index into [`AffineReport::regions`] of this point's fingerprint.
    pub region: usize,
    pub series: [Vec<f64>; 2],
    #[serde(skip)]
    pub x: Vec<f64>,
}

/// A maximal run of grid points sharing one fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    /// All points have a positive multiplier, so the affine claim applies.
    pub claimed: bool,
    pub scale: f64,
    /// Largest second difference of the two named series.
    pub max_second_diff: f64,
    /// Largest second difference over every primal variable.
    pub max_second_diff_all: f64,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_second_diff <= AFFINE_TOL * self.scale
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AffineReport {
    pub param: Param,
    pub series_names: [String; 2],
    pub grid: Vec<f64>,
    pub points: Vec<AffinePoint>,
    /// Distinct fingerprints in order of first appearance.
    #[serde(skip)]
    pub regions: Vec<Fingerprint>,
    pub segments: Vec<Segment>,
    /// Consecutive grid values between which the active set changes.
    pub breakpoints: Vec<(f64, f64)>,
    pub report: PropertyReport,
}

/// Second difference at the middle of three points, generalised to uneven
/// spacing as twice the deviation from the chord.
fn second_diff(x: [f64; 3], y: [f64; 3]) -> f64 {
    let w = (x[1] - x[0]) / (x[2] - x[0]);
    2.0 * (y[1] - (y[0] + w * (y[2] - y[0]))).abs()
}

fn max_second_diff<'a>(
    grid: &[f64],
    seg: (usize, usize),
    series: impl Fn(usize) -> &'a [f64],
    width: usize,
) -> f64 {
    let mut worst = 0.0f64;
    for i in seg.0..seg.1.saturating_sub(1) {
        let (a, b, c) = (series(i), series(i + 1), series(i + 2));
        for k in 0..width {
            worst = worst.max(second_diff(
                [grid[i], grid[i + 1], grid[i + 2]],
                [a[k], b[k], c[k]],
            ));
        }
    }
    worst
}

fn solve_at(
    model: &ValidatedModel,
    param: Param,
    value: f64,
    settings: &SolverSettings,
) -> Result<SolvedModel, AnalysisError> {
    solve_model(&param.apply(model, value)?, settings)
}

/// Curvature put on every curvature-free variable before a grid solve.
///
/// Certificate prices are constant over a day, so the optimal face is often
/// not a single point and an interior-point method returns a point near its
/// centre, which is not affine in the parameter. The penalty selects the
/// optimum closest to the origin; it moves the profit by about
/// `weight·‖x‖²/2`, roughly one part in a million for a week.
pub const TIE_BREAK: f64 = 1e-7;

/// Copy of the problem with a small concave term on every curvature-free
/// variable, which singles out one point of a non-unique optimal face.
pub fn tie_break(problem: &QpProblem, weight: f64) -> QpProblem {
    let mut p = problem.clone();
    for h in p.qp.hess_diag.iter_mut().filter(|h| **h == 0.0) {
        *h = -weight;
    }
    p
}

/// Solves the tie-broken problem; also returns the untouched profit.
pub(super) fn solve_tie_broken(
    model: &ValidatedModel,
    param: Param,
    value: f64,
    settings: &SolverSettings,
) -> Result<(SolvedModel, f64), AnalysisError> {
    let m = param.apply(model, value)?;
    let plain = assemble_qp(&m);
    let s = solve_problem(&m, tie_break(&plain, TIE_BREAK), settings)?;
    let profit = plain.qp.objective(&s.solution.x);
    Ok((s, profit))
}

/// Solves along `grid` and tests, within every run of points sharing an
/// active set, that the named series are affine in the parameter.
pub fn affine_sensitivity(
    model: &ValidatedModel,
    param: Param,
    grid: &[f64],
    settings: &SolverSettings,
) -> Result<AffineReport, AnalysisError> {
    if grid.len() < 3 {
        return Err(AnalysisError::Grid(format!(
            "need at least 3 points, got {}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(AnalysisError::Grid(
            "grid must be strictly increasing".into(),
        ));
    }
    let solved: Vec<(SolvedModel, f64)> = grid
        .par_iter()
        .map(|&v| solve_tie_broken(model, param, v, settings))
        .collect::<Result<_, _>>()?;

    let mut regions: Vec<Fingerprint> = Vec::new();
    let mut points = Vec::with_capacity(grid.len());
    for (&value, (s, profit)) in grid.iter().zip(&solved) {
        let fp = fingerprint(&s.problem, &s.solution.x);
        let region = regions.iter().position(|r| *r == fp).unwrap_or_else(|| {
            regions.push(fp);
            regions.len() - 1
        });
        points.push(AffinePoint {
            value,
            objective: *profit,
            multiplier: param.multiplier(&s.duals),
            region,
            series: param.series(&s.raw_plan),
            x: s.solution.x.clone(),
        });
    }

    let mut segments = Vec::new();
    let mut breakpoints = Vec::new();
    let mut start = 0;
    for i in 1..=points.len() {
        if i < points.len() && points[i].region == points[start].region {
            continue;
        }
        if i < points.len() {
            breakpoints.push((grid[i - 1], grid[i]));
        }
        let seg = (start, i - 1);
        let pts = &points[seg.0..=seg.1];
        let scale = pts
            .iter()
            .flat_map(|p| p.series.iter().flatten())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let horizon = pts[0].series[0].len();
        let named = max_second_diff(grid, seg, |k| &points[k].series[0], horizon).max(
            max_second_diff(grid, seg, |k| &points[k].series[1], horizon),
        );
        let all = max_second_diff(grid, seg, |k| &points[k].x, pts[0].x.len());
        segments.push(Segment {
            start: seg.0,
            end: seg.1,
            claimed: pts.iter().all(|p| p.multiplier > MULT_TOL),
            scale,
            max_second_diff: named,
            max_second_diff_all: all,
        });
        start = i;
    }

    let id = param.property_id();
    let [a, b] = param.series_names();
    let tested: Vec<&Segment> = segments
        .iter()
        .filter(|s| s.claimed && s.len() >= 3)
        .collect();
    let report = if tested.is_empty() {
        let why = if segments.iter().any(|s| s.len() >= 3) {
            "multiplier is zero somewhere in every region of three or more points"
        } else {
            "no region spans three grid points"
        };
        PropertyReport::skipped(id, format!("{why}; {} breakpoints", breakpoints.len()))
    } else {
        let worst = tested
            .iter()
            .max_by(|x, y| (x.max_second_diff / x.scale).total_cmp(&(y.max_second_diff / y.scale)))
            .expect("non-empty");
        let residual = worst.max_second_diff / worst.scale;
        PropertyReport::check(
            id,
            tested.iter().all(|s| s.within_tolerance()),
            residual,
            Witness { hour: None, value: grid[worst.start] },
            format!(
                "{} region(s) tested, max second difference of ({a}, {b}) = {:.3e} at scale {:.3e}; all variables {:.3e}; {} breakpoints",
                tested.len(),
                worst.max_second_diff,
                worst.scale,
                worst.max_second_diff_all,
                breakpoints.len()
            ),
        )
    };

    Ok(AffineReport {
        param,
        series_names: [a.to_string(), b.to_string()],
        grid: grid.to_vec(),
        points,
        regions,
        segments,
        breakpoints,
        report,
    })
}

/// One side of the envelope check.
struct Slope {
    asserted: bool,
    error: f64,
    detail: String,
}

type Probe<'a> = dyn Fn(f64) -> Result<Option<(f64, Fingerprint)>, AnalysisError> + 'a;

/// Derivative of a profit function at offset 0 from a central difference, or a
/// three-point one-sided difference when only one side has room; both are
/// exact for the quadratic pieces of the optimal profit. `probe` returns
/// `None` where the model is infeasible. Returns the slope, the kind of
/// difference and whether all probes share the fingerprint `fp0`.
fn derivative(
    f0: f64,
    fp0: &Fingerprint,
    probe: &Probe,
    h: f64,
    room_down: f64,
    room_up: f64,
) -> Result<Option<(f64, &'static str, bool)>, AnalysisError> {
    if room_down >= h && room_up >= h {
        if let (Some(lo), Some(hi)) = (probe(-h)?, probe(h)?) {
            return Ok(Some((
                (hi.0 - lo.0) / (2.0 * h),
                "central",
                lo.1 == *fp0 && hi.1 == *fp0,
            )));
        }
    }
    if room_up >= 2.0 * h {
        if let (Some(a), Some(b)) = (probe(h)?, probe(2.0 * h)?) {
            return Ok(Some((
                (4.0 * a.0 - b.0 - 3.0 * f0) / (2.0 * h),
                "forward",
                a.1 == *fp0 && b.1 == *fp0,
            )));
        }
    }
    if room_down >= 2.0 * h {
        if let (Some(a), Some(b)) = (probe(-h)?, probe(-2.0 * h)?) {
            return Ok(Some((
                (3.0 * f0 - 4.0 * a.0 + b.0) / (2.0 * h),
                "backward",
                a.1 == *fp0 && b.1 == *fp0,
            )));
        }
    }
    Ok(None)
}

fn probe_result(
    res: Result<SolvedModel, AnalysisError>,
) -> Result<Option<(f64, Fingerprint)>, AnalysisError> {
    match res {
        Ok(s) => Ok(Some((
            s.objective(),
            fingerprint(&s.problem, &s.solution.x),
        ))),
        Err(e) if e.is_infeasible() => Ok(None),
        Err(e) => Err(e),
    }
}

fn slope_report(
    what: &str,
    expected: f64,
    name: &str,
    found: Option<(f64, &'static str, bool)>,
) -> Slope {
    match found {
        None => Slope {
            asserted: false,
            error: 0.0,
            detail: format!("{what} not evaluated: no feasible neighbours"),
        },
        Some((slope, kind, same)) => Slope {
            asserted: same,
            error: (slope - expected).abs() / (1.0 + expected.abs()),
            detail: format!(
                "{what} ({kind}) = {slope:.9} vs {name} = {expected:.9}{}",
                if same {
                    ""
                } else {
                    ", active set changed across the step"
                }
            ),
        },
    }
}

fn quota_slope(
    base: &SolvedModel,
    step: f64,
    settings: &SolverSettings,
) -> Result<Slope, AnalysisError> {
    let q = base.problem.qp.b_in[QUOTA_ROW];
    let fp = fingerprint(&base.problem, &base.solution.x);
    let probe = |d: f64| {
        let mut p = base.problem.clone();
        p.qp.b_in[QUOTA_ROW] = q + d;
        probe_result(solve_problem(&base.model, p, settings))
    };
    let found = derivative(base.objective(), &fp, &probe, step, q, f64::INFINITY)?;
    Ok(slope_report("dF/dĈ", base.duals.delta, "δ", found))
}

fn rps_slope(
    base: &SolvedModel,
    step: f64,
    settings: &SolverSettings,
) -> Result<Slope, AnalysisError> {
    let r = base.model.config().policy.r;
    let expected = -base.duals.mu
        * (base.raw_plan.p_c.iter().sum::<f64>() + base.model.data().l.iter().sum::<f64>());
    let fp = fingerprint(&base.problem, &base.solution.x);
    let probe = |d: f64| probe_result(solve_at(&base.model, Param::R, r + d, settings));
    let found = derivative(base.objective(), &fp, &probe, step, r, 1.0 - r)?;
    Ok(slope_report("dF/dr", expected, "−μ·Σ(P_c+L)", found))
}

/// Finite-difference slopes of the optimal profit against the multipliers:
/// `dF/dĈ = δ` and `dF/dr = −μ·Σ(P_c+L)`.
pub fn envelope_check(
    base: &SolvedModel,
    quota_step: f64,
    r_step: f64,
    settings: &SolverSettings,
) -> Result<PropertyReport, AnalysisError> {
    const ID: &str = "envelope";
    if !(quota_step > 0.0 && r_step > 0.0) {
        return Err(AnalysisError::Grid(
            "envelope steps must be positive".into(),
        ));
    }
    let parts = [
        quota_slope(base, quota_step, settings)?,
        rps_slope(base, r_step, settings)?,
    ];
    let detail = parts
        .iter()
        .map(|p| p.detail.as_str())
        .collect::<Vec<_>>()
        .join("; ");
    let asserted: Vec<&Slope> = parts.iter().filter(|p| p.asserted).collect();
    let residual = parts.iter().fold(0.0f64, |m, p| m.max(p.error));
    if asserted.is_empty() {
        return Ok(PropertyReport::informational(ID, residual, None, detail));
    }
    let worst = asserted.iter().fold(0.0f64, |m, p| m.max(p.error));
    Ok(PropertyReport::check(
        ID,
        worst <= ENVELOPE_TOL,
        worst,
        Witness {
            hour: None,
            value: worst,
        },
        detail,
    ))
}
