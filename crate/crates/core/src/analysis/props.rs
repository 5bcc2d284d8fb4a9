use super::sensitivity::{fingerprint, solve_tie_broken, Param};
use super::{AnalysisError, NamedDuals, PropertyReport, SolvedModel, Witness, MULT_TOL, PROP1_TOL};
use crate::model::DispatchPlan;
use crate::qp::SolverSettings;

/// No hour charges and discharges at once while the RPS binds.
///
/// `plan` must be the plan as solved, before netting.
pub fn check_prop1(plan: &DispatchPlan, duals: &NamedDuals, r: f64) -> PropertyReport {
    if r <= 0.0 {
        return PropertyReport::skipped(
            "prop1",
            "r = 0: no portfolio requirement, netting applied",
        );
    }
    let (hour, worst) = plan
        .p_c
        .iter()
        .zip(&plan.p_d)
        .map(|(c, d)| c.min(*d).max(0.0))
        .enumerate()
        .fold(
            (0, 0.0),
            |(bt, bv), (t, v)| if v > bv { (t, v) } else { (bt, bv) },
        );
    if duals.mu <= MULT_TOL {
        return PropertyReport::informational(
            "prop1",
            worst,
            None,
            format!(
                "μ = {:.3e}: RPS slack, simultaneous flow up to {worst:.3e} removed by netting",
                duals.mu
            ),
        );
    }
    PropertyReport::check(
        "prop1",
        worst <= PROP1_TOL,
        worst,
        Witness {
            hour: Some(hour + 1),
            value: worst,
        },
        format!(
            "μ = {}, largest min(P_c, P_d) = {worst:.3e} at hour {}",
            duals.mu,
            hour + 1
        ),
    )
}

/// Times the step in r may be quartered to stay inside one critical region.
const MAX_SHRINK: usize = 6;

fn sum(v: &[f64]) -> f64 {
    v.iter().sum()
}

/// Raising r is met by retiring more certificates, not by charging less.
///
/// Solves the model at `r` and `r + dr` (or `r − dr` when that would exceed 1)
/// and compares horizon totals of `R_0` and `P_c`.
pub fn rps_priority_check(
    base: &SolvedModel,
    dr: f64,
    settings: &SolverSettings,
) -> Result<PropertyReport, AnalysisError> {
    const ID: &str = "prop4";
    let cfg = base.model.config();
    let data = base.model.data();
    let r = cfg.policy.r;
    let mu = base.duals.mu;
    if r <= 0.0 || mu <= MULT_TOL {
        return Ok(PropertyReport::skipped(
            ID,
            format!("μ = {mu:.3e} at r = {r}: RPS not binding"),
        ));
    }
    if !cfg.ess.lossless() {
        return Ok(PropertyReport::skipped(
            ID,
            "storage is lossy; the argument needs unit efficiencies",
        ));
    }
    if !(dr > 0.0) {
        return Err(AnalysisError::Grid(format!(
            "step must be positive, got {dr}"
        )));
    }

    let spread = |s: &[f64]| {
        let m = s.iter().fold(f64::INFINITY, |m, v| m.min(*v));
        s.iter().map(|v| v - m).collect::<Vec<f64>>()
    };
    let d_g = spread(&data.pi_g);
    let d_r = spread(&data.pi_r);
    let pi_r_min = data.pi_r.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let favoured: Vec<usize> = (0..d_g.len())
        .filter(|&t| d_g[t] + r * pi_r_min > d_r[t])
        .collect();

    // Both ends are tie-broken so the comparison is between unique optima,
    // and the step is shrunk until it stays inside one critical region: the
    // claim is about the first response to a tighter requirement.
    let sign = if r + dr <= 1.0 { 1.0 } else { -1.0 };
    let (base_tb, _) = solve_tie_broken(&base.model, Param::R, r, settings)?;
    let fp = fingerprint(&base_tb.problem, &base_tb.solution.x);
    let mut step = dr;
    let mut shifted = None;
    for _ in 0..MAX_SHRINK {
        let (s, _) = solve_tie_broken(&base.model, Param::R, r + sign * step, settings)?;
        if fingerprint(&s.problem, &s.solution.x) == fp {
            shifted = Some(s);
            break;
        }
        step /= 4.0;
    }
    let Some(shifted) = shifted else {
        return Ok(PropertyReport::informational(
            ID,
            0.0,
            None,
            format!("active set changes within a step of {step:.3e} in r; no single region to compare in"),
        ));
    };
    let (lo, hi) = if sign > 0.0 {
        (&base_tb, &shifted)
    } else {
        (&shifted, &base_tb)
    };
    let d_r0 = sum(&hi.plan.rec_retired) - sum(&lo.plan.rec_retired);
    let d_pc = sum(&hi.raw_plan.p_c) - sum(&lo.raw_plan.p_c);
    let expected = step * (sum(&base_tb.raw_plan.p_c) + sum(&data.l));
    let tol = MULT_TOL * (1.0 + sum(&lo.raw_plan.p_c));
    let detail = format!(
        "{} of {} hours satisfy the price condition; step {step:.3e}: ΔΣR_0 = {d_r0:.6}, ΔΣP_c = {d_pc:.6}, expected ΔΣR_0 ≈ {expected:.6}",
        favoured.len(),
        d_g.len()
    );
    let ok = d_r0 > 0.0 && d_pc >= -tol;
    if favoured.is_empty() {
        return Ok(PropertyReport::informational(
            ID,
            d_pc.min(0.0).abs(),
            None,
            detail,
        ));
    }
    let witness = if d_r0 <= 0.0 { d_r0 } else { d_pc };
    Ok(PropertyReport::check(
        ID,
        ok,
        d_pc.min(0.0).abs(),
        Witness {
            hour: None,
            value: witness,
        },
        detail,
    ))
}
