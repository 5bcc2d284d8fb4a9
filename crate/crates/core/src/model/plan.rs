use serde::{Deserialize, Serialize};

use super::{ModelError, Role, VariableLayout};

/// Physical schedule, one entry per hour in every series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchPlan {
    pub g: Vec<f64>,
    pub grid: Vec<f64>,
    pub rec_trade: Vec<f64>,
    pub cer_trade: Vec<f64>,
    pub p_c: Vec<f64>,
    pub p_d: Vec<f64>,
    pub soc: Vec<f64>,
    pub rec_withdraw: Vec<f64>,
    pub rec_deposit: Vec<f64>,
    pub rec_level: Vec<f64>,
    pub rec_retired: Vec<f64>,
    pub cer_withdraw: Vec<f64>,
    pub cer_deposit: Vec<f64>,
    pub cer_level: Vec<f64>,
    pub cer_quota: Vec<f64>,
    /// `min(P_c, P_d)` per hour as returned by the solver, before netting.
    pub overlap: Vec<f64>,
    /// Whether simultaneous charge and discharge were netted out.
    pub netted: bool,
}

/// Column names of [`DispatchPlan::columns`], in order.
pub const PLAN_COLUMNS: [&str; 15] = [
    "g", "G", "R", "C", "P_c", "P_d", "Q", "R_w", "R_d", "I_R", "R_0", "C_w", "C_d", "I_C", "C_0",
];

impl DispatchPlan {
    pub fn horizon(&self) -> usize {
        self.g.len()
    }

    pub fn columns(&self) -> [&[f64]; 15] {
        [
            &self.g,
            &self.grid,
            &self.rec_trade,
            &self.cer_trade,
            &self.p_c,
            &self.p_d,
            &self.soc,
            &self.rec_withdraw,
            &self.rec_deposit,
            &self.rec_level,
            &self.rec_retired,
            &self.cer_withdraw,
            &self.cer_deposit,
            &self.cer_level,
            &self.cer_quota,
        ]
    }

    /// Inverse of [`columns`](Self::columns); overlap is recomputed from the
    /// stored charge and discharge.
    pub fn from_columns(cols: [Vec<f64>; 15], netted: bool) -> Result<Self, ModelError> {
        let t = cols[0].len();
        if let Some((i, c)) = cols.iter().enumerate().find(|(_, c)| c.len() != t) {
            return Err(ModelError::Dimension(format!(
                "column {} has {} rows, expected {t}",
                PLAN_COLUMNS[i],
                c.len()
            )));
        }
        let [g, grid, rec_trade, cer_trade, p_c, p_d, soc, rec_withdraw, rec_deposit, rec_level, rec_retired, cer_withdraw, cer_deposit, cer_level, cer_quota] =
            cols;
        let overlap = p_c.iter().zip(&p_d).map(|(c, d)| c.min(*d)).collect();
        Ok(Self {
            g,
            grid,
            rec_trade,
            cer_trade,
            p_c,
            p_d,
            soc,
            rec_withdraw,
            rec_deposit,
            rec_level,
            rec_retired,
            cer_withdraw,
            cer_deposit,
            cer_level,
            cer_quota,
            overlap,
            netted,
        })
    }

    /// Net REC inventory flow `R_w − R_d`.
    pub fn rec_net(&self) -> Vec<f64> {
        self.rec_withdraw
            .iter()
            .zip(&self.rec_deposit)
            .map(|(w, d)| w - d)
            .collect()
    }

    pub fn cer_net(&self) -> Vec<f64> {
        self.cer_withdraw
            .iter()
            .zip(&self.cer_deposit)
            .map(|(w, d)| w - d)
            .collect()
    }

    /// Back to the solver's variable vector (net flows, current charge/discharge).
    pub fn to_vector(&self, layout: &VariableLayout) -> Result<Vec<f64>, ModelError> {
        if self.horizon() != layout.horizon() {
            return Err(ModelError::Dimension(format!(
                "plan covers {} hours, layout {}",
                self.horizon(),
                layout.horizon()
            )));
        }
        let mut x = vec![0.0; layout.n()];
        let rec_net = self.rec_net();
        let cer_net = self.cer_net();
        for t in 0..self.horizon() {
            let vals = [
                (Role::G, self.g[t]),
                (Role::GridTrade, self.grid[t]),
                (Role::RecTrade, self.rec_trade[t]),
                (Role::CerTrade, self.cer_trade[t]),
                (Role::Charge, self.p_c[t]),
                (Role::Discharge, self.p_d[t]),
                (Role::Soc, self.soc[t]),
                (Role::RecNet, rec_net[t]),
                (Role::RecLevel, self.rec_level[t]),
                (Role::RecRetired, self.rec_retired[t]),
                (Role::CerNet, cer_net[t]),
                (Role::CerLevel, self.cer_level[t]),
                (Role::CerQuota, self.cer_quota[t]),
            ];
            for (role, v) in vals {
                x[layout.index(t, role)] = v;
            }
        }
        Ok(x)
    }
}

/// Splits net inventory flows into withdraw/deposit parts and, when `net_storage`
/// is set, removes simultaneous charge and discharge.
///
/// Netting subtracts `min(P_c, P_d)` from both flows, which leaves the
/// electricity balance unchanged and, with unit efficiencies, the SoC row too.
pub fn recover_plan(
    x: &[f64],
    layout: &VariableLayout,
    net_storage: bool,
) -> Result<DispatchPlan, ModelError> {
    let hours = layout.recover(x)?;
    let col = |role: Role| hours.iter().map(|h| h[role.offset()]).collect::<Vec<f64>>();
    let pos = |v: &[f64]| v.iter().map(|x| x.max(0.0)).collect::<Vec<f64>>();
    let neg = |v: &[f64]| v.iter().map(|x| (-x).max(0.0)).collect::<Vec<f64>>();
    let x_r = col(Role::RecNet);
    let x_c = col(Role::CerNet);
    let mut p_c = col(Role::Charge);
    let mut p_d = col(Role::Discharge);
    let overlap: Vec<f64> = p_c.iter().zip(&p_d).map(|(c, d)| c.min(*d)).collect();
    if net_storage {
        for t in 0..p_c.len() {
            let m = overlap[t];
            if m > 0.0 {
                p_c[t] -= m;
                p_d[t] -= m;
            }
        }
    }
    Ok(DispatchPlan {
        g: col(Role::G),
        grid: col(Role::GridTrade),
        rec_trade: col(Role::RecTrade),
        cer_trade: col(Role::CerTrade),
        p_c,
        p_d,
        soc: col(Role::Soc),
        rec_withdraw: pos(&x_r),
        rec_deposit: neg(&x_r),
        rec_level: col(Role::RecLevel),
        rec_retired: col(Role::RecRetired),
        cer_withdraw: pos(&x_c),
        cer_deposit: neg(&x_c),
        cer_level: col(Role::CerLevel),
        cer_quota: col(Role::CerQuota),
        overlap,
        netted: net_storage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_hour(f: impl Fn(&mut [f64; 13])) -> Vec<f64> {
        let mut h = [0.0; 13];
        f(&mut h);
        h.to_vec()
    }

    #[test]
    fn net_flows_split_into_parts() {
        let lay = VariableLayout::new(1).unwrap();
        let x = single_hour(|h| {
            h[Role::RecNet.offset()] = 5.0;
            h[Role::CerNet.offset()] = -3.0;
        });
        let p = recover_plan(&x, &lay, true).unwrap();
        assert_eq!((p.rec_withdraw[0], p.rec_deposit[0]), (5.0, 0.0));
        assert_eq!((p.cer_withdraw[0], p.cer_deposit[0]), (0.0, 3.0));
        let x = single_hour(|h| h[Role::RecNet.offset()] = -3.0);
        let p = recover_plan(&x, &lay, true).unwrap();
        assert_eq!((p.rec_withdraw[0], p.rec_deposit[0]), (0.0, 3.0));
    }

    #[test]
    fn netting_keeps_net_injection() {
        let lay = VariableLayout::new(1).unwrap();
        let x = single_hour(|h| {
            h[Role::Charge.offset()] = 2.0;
            h[Role::Discharge.offset()] = 7.0;
        });
        let p = recover_plan(&x, &lay, true).unwrap();
        assert_eq!((p.p_c[0], p.p_d[0], p.overlap[0]), (0.0, 5.0, 2.0));
        let raw = recover_plan(&x, &lay, false).unwrap();
        assert_eq!((raw.p_c[0], raw.p_d[0]), (2.0, 7.0));
    }

    #[test]
    fn vector_round_trip() {
        let lay = VariableLayout::new(2).unwrap();
        let x: Vec<f64> = (0..26).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let p = recover_plan(&x, &lay, false).unwrap();
        assert_eq!(p.to_vector(&lay).unwrap(), x);
        let cols = p.columns().map(|c| c.to_vec());
        assert_eq!(DispatchPlan::from_columns(cols, false).unwrap(), p);
    }

    #[test]
    fn length_checked() {
        let lay = VariableLayout::new(2).unwrap();
        assert!(recover_plan(&[0.0; 13], &lay, true).is_err());
    }
}
