//! The four inventory configurations side by side.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{daily_certificate_revenue, RevenueBreakdown};
use crate::analysis::{solve_model, AnalysisError};
use crate::model::{validate_config, ValidatedModel};
use crate::qp::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InventoryCell {
    None,
    CerOnly,
    RecOnly,
    Both,
}

impl InventoryCell {
    pub const ALL: [InventoryCell; 4] = [Self::None, Self::CerOnly, Self::RecOnly, Self::Both];

    pub fn name(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::CerOnly => "cer-only",
            Self::RecOnly => "rec-only",
            Self::Both => "both",
        }
    }

    /// (REC inventory, CER inventory) enabled.
    pub fn flags(self) -> (bool, bool) {
        match self {
            Self::None => (false, false),
            Self::CerOnly => (false, true),
            Self::RecOnly => (true, false),
            Self::Both => (true, true),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixCell {
    pub cell: InventoryCell,
    pub breakdown: RevenueBreakdown,
    /// Profit change against the no-inventory cell, in percent.
    pub improvement: f64,
    pub mu: f64,
    pub delta: f64,
    /// Whether some trade sits at its cap in some hour.
    pub caps_bind: bool,
    /// Daily (REC, CER) trading revenue.
    pub daily: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InventoryMatrixResult {
    /// In [`InventoryCell::ALL`] order.
    pub cells: Vec<MatrixCell>,
    /// No cell trades at a cap.
    pub caps_slack: bool,
    /// Largest relative spread of rev_g and of cost_g across the cells.
    pub rev_g_spread: f64,
    pub cost_g_spread: f64,
}

/// Relative tolerance for profit comparisons between cells.
pub const NESTING_TOL: f64 = 1e-7;

impl InventoryMatrixResult {
    pub fn cell(&self, c: InventoryCell) -> &MatrixCell {
        &self.cells[InventoryCell::ALL
            .iter()
            .position(|x| *x == c)
            .expect("known cell")]
    }

    /// profit(Both) ≥ profit(single) ≥ profit(None), up to solver tolerance.
    pub fn nesting_holds(&self) -> bool {
        let p = |c| self.cell(c).breakdown.profit;
        let tol = NESTING_TOL * (1.0 + p(InventoryCell::Both).abs());
        let single = [p(InventoryCell::CerOnly), p(InventoryCell::RecOnly)];
        single
            .iter()
            .all(|s| p(InventoryCell::Both) >= s - tol && *s >= p(InventoryCell::None) - tol)
    }

    /// rev_g and cost_g agree across cells to 1e-6 relative.
    pub fn decoupled(&self) -> bool {
        self.rev_g_spread <= 1e-6 && self.cost_g_spread <= 1e-6
    }
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let hi = values.clone().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let scale = values.fold(1.0f64, |m, v| m.max(v.abs()));
    (hi - lo) / scale
}

/// Solves the model four times with the certificate inventories toggled.
pub fn inventory_matrix(
    model: &ValidatedModel,
    settings: &SolverSettings,
) -> Result<InventoryMatrixResult, AnalysisError> {
    let solved = InventoryCell::ALL
        .par_iter()
        .map(|&cell| {
            let (mut cfg, data) = model.clone().into_parts();
            (cfg.rec.enabled, cfg.cer.enabled) = cell.flags();
            solve_model(&validate_config(cfg, data)?, settings).map(|s| (cell, s))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let base_profit =
        RevenueBreakdown::from_plan(&solved[0].1.plan, model.data(), &model.config().tg).profit;
    let cells: Vec<MatrixCell> = solved
        .iter()
        .map(|(cell, s)| {
            let breakdown = RevenueBreakdown::from_plan(&s.plan, model.data(), &model.config().tg);
            let caps = &model.config().caps;
            let at = |v: &[f64], cap: Option<f64>| {
                cap.is_some_and(|c| v.iter().any(|x| x.abs() >= c * (1.0 - 1e-6)))
            };
            MatrixCell {
                cell: *cell,
                improvement: 100.0 * (breakdown.profit - base_profit)
                    / base_profit.abs().max(f64::MIN_POSITIVE),
                breakdown,
                mu: s.duals.mu,
                delta: s.duals.delta,
                caps_bind: at(&s.plan.grid, caps.g_cap)
                    || at(&s.plan.rec_trade, caps.r_cap)
                    || at(&s.plan.cer_trade, caps.c_cap),
                daily: daily_certificate_revenue(&s.plan, model.data()),
            }
        })
        .collect();
    Ok(InventoryMatrixResult {
        caps_slack: cells.iter().all(|c| !c.caps_bind),
        rev_g_spread: spread(cells.iter().map(|c| c.breakdown.rev_g)),
        cost_g_spread: spread(cells.iter().map(|c| c.breakdown.cost_g)),
        cells,
    })
}
