//! One solved scenario with its revenue split and every property report.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    affine_sensitivity, check_prop1, classify_cer, classify_rec, envelope_check,
    rps_priority_check, solve_model, AnalysisError, CaseTable, Param, PropertyReport, SolvedModel,
    PROPERTY_IDS,
};
use crate::model::{DispatchPlan, MarketData, TgParams, ValidatedModel};
use crate::qp::SolverSettings;

/// Profit split by market, in $.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RevenueBreakdown {
    pub rev_g: f64,
    pub rev_r: f64,
    pub rev_c: f64,
    pub cost_g: f64,
    pub profit: f64,
}

impl RevenueBreakdown {
    pub fn from_plan(plan: &DispatchPlan, data: &MarketData, tg: &TgParams) -> Self {
        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        let rev_g = dot(&data.pi_g, &plan.grid);
        let rev_r = dot(&data.pi_r, &plan.rec_trade);
        let rev_c = dot(&data.pi_c, &plan.cer_trade);
        let cost_g = plan.g.iter().map(|g| tg.a * g * g + tg.b * g).sum::<f64>();
        Self {
            rev_g,
            rev_r,
            rev_c,
            cost_g,
            profit: rev_g + rev_r + rev_c - cost_g,
        }
    }

    pub fn components(&self) -> [(&'static str, f64); 5] {
        [
            ("rev_g", self.rev_g),
            ("rev_r", self.rev_r),
            ("rev_c", self.rev_c),
            ("cost_g", self.cost_g),
            ("profit", self.profit),
        ]
    }
}

/// REC and CER trading revenue per 24-hour block.
pub fn daily_certificate_revenue(plan: &DispatchPlan, data: &MarketData) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; plan.horizon().div_ceil(24)];
    for t in 0..plan.horizon() {
        out[t / 24][0] += data.pi_r[t] * plan.rec_trade[t];
        out[t / 24][1] += data.pi_c[t] * plan.cer_trade[t];
    }
    out
}

/// Steps used by the perturbation-based checks.
#[derive(Debug, Clone)]
pub struct ScenarioOptions {
    pub settings: SolverSettings,
    /// Half-width of the 3-point α grid.
    pub alpha_step: f64,
    /// Half-width of the 3-point r grid.
    pub r_step: f64,
    /// Quota increment (tCO₂) of the envelope check.
    pub quota_step: f64,
    /// r increment of the envelope check.
    pub envelope_r_step: f64,
    /// r increment of the RPS-priority check.
    pub priority_step: f64,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            settings: SolverSettings::default(),
            alpha_step: 0.005,
            r_step: 0.005,
            quota_step: 1.0,
            envelope_r_step: 1e-3,
            priority_step: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub solved: SolvedModel,
    pub breakdown: RevenueBreakdown,
    pub cer_table: CaseTable,
    pub rec_table: CaseTable,
    /// One report per entry of [`PROPERTY_IDS`], in that order.
    pub reports: Vec<PropertyReport>,
}

impl ScenarioResult {
    pub fn report(&self, id: &str) -> Option<&PropertyReport> {
        self.reports.iter().find(|r| r.id == id)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyReport> {
        self.reports.iter().filter(|r| !r.holds)
    }
}

/// Three strictly increasing points spaced by `h` around `c`, shifted to stay
/// inside [0, 1].
fn local_grid(c: f64, h: f64) -> [f64; 3] {
    if c - h < 0.0 {
        [c, c + h, c + 2.0 * h]
    } else if c + h > 1.0 {
        [c - 2.0 * h, c - h, c]
    } else {
        [c - h, c, c + h]
    }
}

fn affine_report(
    base: &SolvedModel,
    param: Param,
    h: f64,
    settings: &SolverSettings,
) -> PropertyReport {
    let id = if param == Param::Alpha {
        "prop2"
    } else {
        "prop3"
    };
    let grid = local_grid(param.value(&base.model), h);
    match affine_sensitivity(&base.model, param, &grid, settings) {
        Ok(rep) => rep.report,
        Err(e) => PropertyReport::skipped(id, format!("grid {grid:?} not solvable: {e}")),
    }
}

/// Runs every property check on an already solved model.
pub fn analyse(
    solved: SolvedModel,
    opts: &ScenarioOptions,
) -> Result<ScenarioResult, AnalysisError> {
    let cfg = solved.model.config();
    let breakdown = RevenueBreakdown::from_plan(&solved.plan, solved.model.data(), &cfg.tg);
    let (cer_table, lemma1, cor1) = classify_cer(&solved.model, &solved.plan, &solved.duals);
    let (rec_table, lemma2, cor2, cor3) = classify_rec(&solved.model, &solved.plan, &solved.duals);
    let prop1 = check_prop1(&solved.raw_plan, &solved.duals, cfg.policy.r);
    let s = &opts.settings;
    let prop2 = affine_report(&solved, Param::Alpha, opts.alpha_step, s);
    let prop3 = affine_report(&solved, Param::R, opts.r_step, s);
    let unsolved = |id: &str, e: AnalysisError| {
        PropertyReport::skipped(id, format!("perturbed solve failed: {e}"))
    };
    let prop4 =
        rps_priority_check(&solved, opts.priority_step, s).unwrap_or_else(|e| unsolved("prop4", e));
    let envelope = envelope_check(&solved, opts.quota_step, opts.envelope_r_step, s)
        .unwrap_or_else(|e| unsolved("envelope", e));
    let reports = vec![
        prop1, prop2, prop3, prop4, lemma1, lemma2, cor1, cor2, cor3, envelope,
    ];
    debug_assert!(reports.iter().zip(PROPERTY_IDS).all(|(r, id)| r.id == id));
    Ok(ScenarioResult {
        solved,
        breakdown,
        cer_table,
        rec_table,
        reports,
    })
}

/// Solves the model and runs every property check on the result.
pub fn run_scenario(
    model: &ValidatedModel,
    opts: &ScenarioOptions,
) -> Result<ScenarioResult, AnalysisError> {
    analyse(solve_model(model, &opts.settings)?, opts)
}
