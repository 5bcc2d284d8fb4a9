use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Role, ValidatedModel, VariableLayout};
use crate::qp::QuadraticProgram;

/// Equality rows per hour, in row order.
pub const ROWS_PER_HOUR: usize = 6;
/// Index of the renewable-portfolio row among the inequality rows.
pub const RPS_ROW: usize = 0;
/// Index of the CE-quota row among the inequality rows.
pub const QUOTA_ROW: usize = 1;

/// Identifies a constraint row so its multiplier can be named.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowName {
    /// SoC dynamics at hour t (ω)
    Storage(usize),
    RecInventory(usize),
    CerInventory(usize),
    /// electricity balance (λ_G)
    Power(usize),
    /// REC balance (λ_R)
    RecBalance(usize),
    /// CER balance (λ_C)
    CerBalance(usize),
    /// `r Σ(P_c + L) ≤ Σ R_0` (μ)
    Rps,
    /// `Σ C_0 ≤ Ĉ` (δ)
    Quota,
}

impl RowName {
    /// Position among the equality rows, `None` for the coupling rows.
    pub fn eq_index(self) -> Option<usize> {
        let (t, k) = match self {
            RowName::Storage(t) => (t, 0),
            RowName::RecInventory(t) => (t, 1),
            RowName::CerInventory(t) => (t, 2),
            RowName::Power(t) => (t, 3),
            RowName::RecBalance(t) => (t, 4),
            RowName::CerBalance(t) => (t, 5),
            RowName::Rps | RowName::Quota => return None,
        };
        Some(ROWS_PER_HOUR * t + k)
    }
}

impl fmt::Display for RowName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowName::Storage(t) => write!(f, "storage dynamics, hour {}", t + 1),
            RowName::RecInventory(t) => write!(f, "REC inventory, hour {}", t + 1),
            RowName::CerInventory(t) => write!(f, "CER inventory, hour {}", t + 1),
            RowName::Power(t) => write!(f, "electricity balance, hour {}", t + 1),
            RowName::RecBalance(t) => write!(f, "REC balance, hour {}", t + 1),
            RowName::CerBalance(t) => write!(f, "CER balance, hour {}", t + 1),
            RowName::Rps => write!(f, "renewable portfolio standard"),
            RowName::Quota => write!(f, "CE quota"),
        }
    }
}

/// The scheduling QP together with the maps needed to interpret its solution.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub qp: QuadraticProgram,
    pub layout: VariableLayout,
    pub eq_rows: Vec<RowName>,
    pub in_rows: Vec<RowName>,
}

fn cap(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::INFINITY)
}

/// Builds the maximization QP. Hours are cyclic: the state preceding hour 1
/// is the state at hour T, which closes storage and both inventories.
pub fn assemble_qp(model: &ValidatedModel) -> QpProblem {
    let cfg = model.config();
    let data = model.data();
    let t_len = cfg.horizon;
    let layout = VariableLayout::new(t_len).expect("validated horizon");
    let n = layout.n();
    let mut qp = QuadraticProgram::new(n);
    let (rec_w, rec_d, rec_i) = cfg.rec.effective_caps();
    let (cer_w, cer_d, cer_i) = cfg.cer.effective_caps();
    let (g_cap, r_cap, c_cap) = (
        cap(cfg.caps.g_cap),
        cap(cfg.caps.r_cap),
        cap(cfg.caps.c_cap),
    );
    let v = |t: usize, role: Role| layout.index(t, role);

    for t in 0..t_len {
        let bounds = [
            (Role::G, cfg.tg.g_min, cfg.tg.g_max),
            (Role::GridTrade, -g_cap, g_cap),
            (Role::RecTrade, -r_cap, r_cap),
            (Role::CerTrade, -c_cap, c_cap),
            (Role::Charge, 0.0, cfg.ess.p_c_max),
            (Role::Discharge, 0.0, cfg.ess.p_d_max),
            (Role::Soc, 0.0, cfg.ess.q_max),
            (Role::RecNet, -rec_d, rec_w),
            (Role::RecLevel, 0.0, rec_i),
            (Role::RecRetired, 0.0, f64::INFINITY),
            (Role::CerNet, -cer_d, cer_w),
            (Role::CerLevel, 0.0, cer_i),
            (Role::CerQuota, 0.0, f64::INFINITY),
        ];
        for (role, lo, hi) in bounds {
            let j = v(t, role);
            qp.lower[j] = lo;
            qp.upper[j] = hi;
            qp.var_stage[j] = t;
        }
        let g = v(t, Role::G);
        qp.hess_diag[g] = -2.0 * cfg.tg.a;
        qp.f[g] = -cfg.tg.b;
        qp.f[v(t, Role::GridTrade)] = data.pi_g[t];
        qp.f[v(t, Role::RecTrade)] = data.pi_r[t];
        qp.f[v(t, Role::CerTrade)] = data.pi_c[t];
    }

    let mut eq_rows = Vec::with_capacity(ROWS_PER_HOUR * t_len);
    for t in 0..t_len {
        let p = layout.prev(t);
        qp.add_eq(
            &[
                (v(t, Role::Charge), 1.0 / cfg.ess.eta_c),
                (v(t, Role::Discharge), -cfg.ess.eta_d),
                (v(t, Role::Soc), -1.0),
                (v(p, Role::Soc), 1.0),
            ],
            0.0,
            t,
        );
        qp.add_eq(
            &[
                (v(t, Role::RecNet), -1.0),
                (v(t, Role::RecLevel), -1.0),
                (v(p, Role::RecLevel), 1.0),
            ],
            0.0,
            t,
        );
        qp.add_eq(
            &[
                (v(t, Role::CerNet), -1.0),
                (v(t, Role::CerLevel), -1.0),
                (v(p, Role::CerLevel), 1.0),
            ],
            0.0,
            t,
        );
        qp.add_eq(
            &[
                (v(t, Role::G), 1.0),
                (v(t, Role::Discharge), 1.0),
                (v(t, Role::Charge), -1.0),
                (v(t, Role::GridTrade), -1.0),
            ],
            data.l[t] - data.e[t],
            t,
        );
        qp.add_eq(
            &[
                (v(t, Role::RecNet), 1.0),
                (v(t, Role::RecTrade), -1.0),
                (v(t, Role::RecRetired), -1.0),
            ],
            -data.e[t],
            t,
        );
        qp.add_eq(
            &[
                (v(t, Role::CerTrade), 1.0),
                (v(t, Role::G), cfg.tg.k),
                (v(t, Role::CerNet), -1.0),
                (v(t, Role::CerQuota), -1.0),
            ],
            0.0,
            t,
        );
        eq_rows.extend([
            RowName::Storage(t),
            RowName::RecInventory(t),
            RowName::CerInventory(t),
            RowName::Power(t),
            RowName::RecBalance(t),
            RowName::CerBalance(t),
        ]);
    }

    let r = cfg.policy.r;
    let mut rps = Vec::with_capacity(2 * t_len);
    let mut quota = Vec::with_capacity(t_len);
    for t in 0..t_len {
        rps.push((v(t, Role::Charge), r));
        rps.push((v(t, Role::RecRetired), -1.0));
        quota.push((v(t, Role::CerQuota), 1.0));
    }
    let load: f64 = data.l.iter().sum();
    qp.add_le(&rps, -r * load, t_len);
    qp.add_le(&quota, model.quota_cap(), t_len);

    QpProblem {
        qp,
        layout,
        eq_rows,
        in_rows: vec![RowName::Rps, RowName::Quota],
    }
}

/// Looks for an aggregate conflict that makes the model infeasible and
/// describes it. Returns `None` when none of the known conflicts applies.
pub fn find_conflict(model: &ValidatedModel) -> Option<String> {
    let cfg = model.config();
    let data = model.data();
    let t = cfg.horizon as f64;
    let load: f64 = data.l.iter().sum();
    let res: f64 = data.e.iter().sum();
    // Inventory flows cancel over the cycle, so ΣR_0 = ΣE − ΣR.
    let rec_supply = res + t * cap(cfg.caps.r_cap);
    let rec_need = cfg.policy.r * load;
    if rec_need > rec_supply + 1e-9 * (1.0 + rec_need) {
        return Some(format!(
            "renewable portfolio standard needs at least {rec_need:.6} RECs but renewable output plus REC purchases give at most {rec_supply:.6}"
        ));
    }
    // Likewise ΣC_0 = ΣC + K Σg.
    let min_quota_use = t * (cfg.tg.k * cfg.tg.g_min - cap(cfg.caps.c_cap));
    let quota = model.quota_cap();
    if min_quota_use > quota + 1e-9 * (1.0 + quota) {
        return Some(format!(
            "CE quota {quota:.6} is below the least possible quota draw {min_quota_use:.6} (minimum TG emissions net of CER purchases)"
        ));
    }
    let g_cap = cap(cfg.caps.g_cap);
    for h in 0..cfg.horizon {
        let net = data.l[h] - data.e[h];
        let most = cfg.tg.g_max + cfg.ess.p_d_max + g_cap;
        let least = cfg.tg.g_min - cfg.ess.p_c_max - g_cap;
        if net > most {
            return Some(format!(
                "electricity balance at hour {}: net load {net:.6} exceeds the largest possible supply {most:.6}",
                h + 1
            ));
        }
        if net < least {
            return Some(format!(
                "electricity balance at hour {}: surplus {:.6} exceeds what charging and selling can absorb ({:.6})",
                h + 1,
                -net,
                -least
            ));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_config, MarketData, VppConfig};

    fn small(t: usize) -> ValidatedModel {
        let mut cfg = VppConfig::default();
        cfg.horizon = t;
        validate_config(cfg, MarketData::flat(t, 100.0, 30.0, 50.0, 60.0, 50.0)).unwrap()
    }

    #[test]
    fn two_hour_counts() {
        let p = assemble_qp(&small(2));
        assert_eq!(p.qp.b_eq.len(), 12);
        assert_eq!(p.qp.b_in.len(), 2);
        assert_eq!(p.qp.n(), 26);
        assert_eq!(p.eq_rows.len(), 12);
        for (i, name) in p.eq_rows.iter().enumerate() {
            assert_eq!(name.eq_index(), Some(i));
        }
    }

    #[test]
    fn rps_row_coefficients() {
        let m = small(3);
        let p = assemble_qp(&m);
        let lay = p.layout;
        for t in 0..3 {
            assert_eq!(p.qp.a_in.get(RPS_ROW, lay.index(t, Role::Charge)), 0.9);
            assert_eq!(p.qp.a_in.get(RPS_ROW, lay.index(t, Role::RecRetired)), -1.0);
            assert_eq!(p.qp.a_in.get(QUOTA_ROW, lay.index(t, Role::CerQuota)), 1.0);
        }
        assert_eq!(p.qp.a_in.row(RPS_ROW).count(), 6);
        assert!((p.qp.b_in[RPS_ROW] + 0.9 * 150.0).abs() < 1e-12);
        assert!((p.qp.b_in[QUOTA_ROW] - 80.0 * 0.9 * 3.0 * 0.2).abs() < 1e-12);
    }

    #[test]
    fn storage_row_wraps_to_last_hour() {
        let p = assemble_qp(&small(3));
        let lay = p.layout;
        let row = RowName::Storage(0).eq_index().unwrap();
        assert_eq!(p.qp.a_eq.get(row, lay.index(2, Role::Soc)), 1.0);
        assert_eq!(p.qp.a_eq.get(row, lay.index(0, Role::Soc)), -1.0);
    }

    #[test]
    fn assembly_is_deterministic() {
        let m = small(24);
        assert!(assemble_qp(&m).qp.bit_eq(&assemble_qp(&m).qp));
    }

    #[test]
    fn disabled_inventory_pins_variables() {
        let mut cfg = VppConfig::default();
        cfg.horizon = 2;
        cfg.cer.enabled = false;
        let m = validate_config(cfg, MarketData::flat(2, 1.0, 1.0, 1.0, 1.0, 1.0)).unwrap();
        let p = assemble_qp(&m);
        let j = p.layout.index(1, Role::CerNet);
        assert_eq!((p.qp.lower[j], p.qp.upper[j]), (0.0, 0.0));
        let j = p.layout.index(1, Role::CerLevel);
        assert_eq!((p.qp.lower[j], p.qp.upper[j]), (0.0, 0.0));
    }

    #[test]
    fn rps_conflict_is_named() {
        let mut cfg = VppConfig::default();
        cfg.horizon = 2;
        cfg.policy.r = 1.0;
        cfg.caps.r_cap = Some(0.0);
        let m = validate_config(cfg, MarketData::flat(2, 1.0, 1.0, 1.0, 0.0, 10.0)).unwrap();
        assert!(find_conflict(&m).unwrap().contains("renewable portfolio"));
        assert!(find_conflict(&small(2)).is_none());
    }
}
