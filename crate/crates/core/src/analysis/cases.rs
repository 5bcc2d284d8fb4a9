//! Per-hour case tables of the certificate prices and the results read off
//! them: the coupling-multiplier lemmas and the shadow-price corollaries.

use serde::{Deserialize, Serialize};

use super::{NamedDuals, PropertyReport, Witness, CAP_REL_TOL, MULT_TOL, REL_TOL};
use crate::model::{DispatchPlan, Role, ValidatedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certificate {
    Rec,
    Cer,
}

/// One hour of a case table.
///
/// Cases: 1 = trade below cap, multiplier 0; 2 = below cap, multiplier > 0;
/// 3 = at cap, multiplier 0; 4 = at cap, multiplier > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub hour: usize,
    pub case: u8,
    pub trade: f64,
    pub at_cap: bool,
    /// `|π_t − (table expression)|`
    pub identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseTable {
    pub certificate: Certificate,
    /// μ for RECs, δ for CERs.
    pub multiplier: f64,
    pub cap: Option<f64>,
    pub rows: Vec<CaseRow>,
}

impl CaseTable {
    pub fn count(&self, case: u8) -> usize {
        self.rows.iter().filter(|r| r.case == case).count()
    }

    pub fn first(&self, case: u8) -> Option<&CaseRow> {
        self.rows.iter().find(|r| r.case == case)
    }

    pub fn max_identity_residual(&self) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m, r| m.max(r.identity_residual))
    }
}

fn build_table(
    certificate: Certificate,
    trade: &[f64],
    cap: Option<f64>,
    multiplier: f64,
    identity: impl Fn(usize) -> f64,
) -> CaseTable {
    let positive = multiplier > MULT_TOL;
    let rows = trade
        .iter()
        .enumerate()
        .map(|(t, &q)| {
            let at_cap = cap.is_some_and(|c| q.abs() >= c - CAP_REL_TOL * c);
            let case = match (at_cap, positive) {
                (false, false) => 1,
                (false, true) => 2,
                (true, false) => 3,
                (true, true) => 4,
            };
            CaseRow {
                hour: t + 1,
                case,
                trade: q,
                at_cap,
                identity_residual: identity(t),
            }
        })
        .collect();
    CaseTable {
        certificate,
        multiplier,
        cap,
        rows,
    }
}

/// Checks `multiplier > ε ⇔ some hour trades strictly inside the cap`.
fn lemma(id: &str, table: &CaseTable, name: &str) -> PropertyReport {
    let Some(cap) = table.cap else {
        return PropertyReport::skipped(id, "trade cap is unbounded");
    };
    let positive = table.multiplier > MULT_TOL;
    let interior = table.rows.iter().find(|r| !r.at_cap);
    let counts = format!(
        "cases 1/2/3/4: {}/{}/{}/{}",
        table.count(1),
        table.count(2),
        table.count(3),
        table.count(4)
    );
    match (positive, interior) {
        (true, Some(_)) | (false, None) => PropertyReport::pass(
            id,
            table.max_identity_residual(),
            format!("{name} = {:.6e}, cap {cap}; {counts}", table.multiplier),
        ),
        (true, None) => PropertyReport::fail(
            id,
            table.multiplier,
            Witness { hour: None, value: table.multiplier },
            format!("{name} = {:.6e} > 0 although every hour trades at the cap {cap}; {counts}", table.multiplier),
        ),
        (false, Some(row)) => PropertyReport::fail(
            id,
            table.multiplier,
            Witness { hour: Some(row.hour), value: row.trade },
            format!(
                "{name} = {:.3e} while hour {} trades {} strictly inside the cap {cap} (case 1); {counts}",
                table.multiplier, row.hour, row.trade
            ),
        ),
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// CER case table, the quota-multiplier lemma and the maximum-price corollary.
pub fn classify_cer(
    model: &ValidatedModel,
    plan: &DispatchPlan,
    duals: &NamedDuals,
) -> (CaseTable, PropertyReport, PropertyReport) {
    let data = model.data();
    let cap = model.config().caps.c_cap;
    let delta = duals.delta;
    let table = build_table(Certificate::Cer, &plan.cer_trade, cap, delta, |t| {
        let expr = delta - duals.gamma_lower(t, Role::CerQuota)
            + duals.gamma_upper(t, Role::CerTrade)
            - duals.gamma_lower(t, Role::CerTrade);
        (data.pi_c[t] - expr).abs()
    });

    let mut lemma1 = lemma("lemma1", &table, "δ");
    // With every hour selling at the cap and a slack quota, the caps must fit
    // inside the quota.
    if let Some(c) = cap {
        if table.count(3) == table.rows.len() {
            let quota = model.quota_cap();
            let need = c * table.rows.len() as f64;
            if need > quota * (1.0 + REL_TOL) + MULT_TOL {
                lemma1 = PropertyReport::fail(
                    "lemma1",
                    need - quota,
                    Witness {
                        hour: None,
                        value: need,
                    },
                    format!(
                        "all hours at the cap with δ = 0 requires C̄·T ≤ Ĉ, but {need} > {quota}"
                    ),
                );
            } else {
                lemma1.detail.push_str(&format!(
                    "; all hours at cap with δ = 0 and C̄·T = {need} ≤ Ĉ = {quota}"
                ));
            }
        }
    }

    let max_price = data.pi_c.iter().fold(f64::NEG_INFINITY, |m, p| m.max(*p));
    let cor1 = if cap.is_some() {
        PropertyReport::skipped("cor1", "CER trades are capped")
    } else if delta <= MULT_TOL {
        PropertyReport::skipped("cor1", format!("δ = {delta:.3e} is zero"))
    } else if plan
        .cer_quota
        .iter()
        .all(|c| *c <= CAP_REL_TOL * (1.0 + model.quota_cap()))
    {
        // No quota is drawn (Ĉ = 0): δ is only bounded below by the prices.
        let ok = delta >= max_price * (1.0 - REL_TOL);
        PropertyReport::informational(
            "cor1",
            rel_gap(delta, max_price),
            (!ok).then_some(Witness {
                hour: None,
                value: delta,
            }),
            format!("no quota drawn, δ = {delta} is not unique; δ ≥ max π_C = {max_price}: {ok}"),
        )
    } else {
        let gap = rel_gap(delta, max_price);
        PropertyReport::check(
            "cor1",
            gap <= REL_TOL,
            gap,
            Witness {
                hour: None,
                value: delta,
            },
            format!("δ = {delta}, max π_C = {max_price}"),
        )
    };
    (table, lemma1, cor1)
}

/// REC case table, the RPS-multiplier lemma and the minimum-price corollaries.
///
/// Returns the table and the reports for the lemma, the shadow-price
/// corollary and the purchase-timing corollary.
pub fn classify_rec(
    model: &ValidatedModel,
    plan: &DispatchPlan,
    duals: &NamedDuals,
) -> (CaseTable, PropertyReport, PropertyReport, PropertyReport) {
    let cfg = model.config();
    let data = model.data();
    let cap = cfg.caps.r_cap;
    let mu = duals.mu;
    let table = build_table(Certificate::Rec, &plan.rec_trade, cap, mu, |t| {
        let expr =
            mu + duals.gamma_lower(t, Role::RecRetired) + duals.gamma_upper(t, Role::RecTrade)
                - duals.gamma_lower(t, Role::RecTrade);
        (data.pi_r[t] - expr).abs()
    });
    if cfg.policy.r == 0.0 {
        let skip = |id| PropertyReport::skipped(id, "r = 0: no portfolio requirement");
        return (table, skip("lemma2"), skip("cor2"), skip("cor3"));
    }
    let lemma2 = lemma("lemma2", &table, "μ");

    let min_price = data.pi_r.iter().fold(f64::INFINITY, |m, p| m.min(*p));
    let retiring = plan.rec_retired.iter().any(|r| *r > MULT_TOL);
    let cor2 = if cap.is_some() {
        PropertyReport::skipped("cor2", "REC trades are capped")
    } else if mu <= MULT_TOL {
        PropertyReport::skipped("cor2", format!("μ = {mu:.3e} is zero"))
    } else if !retiring {
        PropertyReport::informational(
            "cor2",
            rel_gap(mu, min_price),
            None,
            format!("no REC retired, μ = {mu} is not unique"),
        )
    } else {
        let gap = rel_gap(mu, min_price);
        PropertyReport::check(
            "cor2",
            gap <= REL_TOL,
            gap,
            Witness {
                hour: None,
                value: mu,
            },
            format!("μ = {mu}, min π_R = {min_price}"),
        )
    };

    let cor3 = if cap.is_some() {
        PropertyReport::skipped("cor3", "REC trades are capped")
    } else if mu <= MULT_TOL {
        PropertyReport::skipped("cor3", format!("μ = {mu:.3e} is zero"))
    } else {
        let purchase_tol = CAP_REL_TOL * (1.0 + data.e.iter().fold(0.0f64, |m, e| m.max(*e)));
        let offending = (0..plan.horizon()).find(|&t| {
            plan.rec_trade[t] < -purchase_tol
                && data.pi_r[t] > min_price + REL_TOL * min_price.abs().max(1.0)
        });
        let purchases = plan
            .rec_trade
            .iter()
            .filter(|r| **r < -purchase_tol)
            .count();
        let detail =
            |extra: &str| format!("{purchases} purchase hours, min π_R = {min_price}{extra}");
        match offending {
            None => PropertyReport::pass("cor3", 0.0, detail("")),
            Some(t) => {
                // With an inventory the purchase may be stored for a later,
                // dearer sale rather than retired.
                let stored = plan.rec_deposit[t] > purchase_tol;
                PropertyReport::fail(
                    "cor3",
                    data.pi_r[t] - min_price,
                    Witness {
                        hour: Some(t + 1),
                        value: data.pi_r[t],
                    },
                    detail(&format!(
                        "; hour {} buys at {}{}",
                        t + 1,
                        data.pi_r[t],
                        if stored {
                            " and deposits into the inventory"
                        } else {
                            ""
                        }
                    )),
                )
            }
        }
    };
    (table, lemma2, cor2, cor3)
}
