use serde::{Deserialize, Serialize};

/// Thermal generator: cost `a g² + b g`, output range, emission factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TgParams {
    pub a: f64,
    pub b: f64,
    pub g_min: f64,
    pub g_max: f64,
    /// tCO₂ emitted per MWh.
    pub k: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssParams {
    pub p_c_max: f64,
    pub p_d_max: f64,
    pub q_max: f64,
    pub eta_c: f64,
    pub eta_d: f64,
}

impl EssParams {
    pub fn lossless(&self) -> bool {
        self.eta_c == 1.0 && self.eta_d == 1.0
    }
}

/// Certificate storage. A disabled inventory behaves as if every cap were 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryParams {
    pub w_max: f64,
    pub d_max: f64,
    pub i_max: f64,
    pub enabled: bool,
}

impl InventoryParams {
    /// `(withdraw cap, deposit cap, level cap)` after applying the enable flag.
    pub fn effective_caps(&self) -> (f64, f64, f64) {
        if self.enabled {
            (self.w_max, self.d_max, self.i_max)
        } else {
            (0.0, 0.0, 0.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Share of consumption that retired RECs must cover.
    pub r: f64,
    /// Quota strictness; the quota is `g_max · K · T · alpha`.
    pub alpha: f64,
}

/// Symmetric limits on market trades; `None` leaves the trade unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeCaps {
    pub g_cap: Option<f64>,
    pub r_cap: Option<f64>,
    pub c_cap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VppConfig {
    pub horizon: usize,
    pub tg: TgParams,
    pub ess: EssParams,
    pub rec: InventoryParams,
    pub cer: InventoryParams,
    pub policy: PolicyParams,
    pub caps: TradeCaps,
}

impl Default for VppConfig {
    /// Base-scenario values of the reference case study (one week, hourly).
    fn default() -> Self {
        let inventory = InventoryParams {
            w_max: 400.0,
            d_max: 400.0,
            i_max: 400.0,
            enabled: true,
        };
        Self {
            horizon: 168,
            tg: TgParams {
                a: 1.0,
                b: 80.0,
                g_min: 0.0,
                g_max: 80.0,
                k: 0.9,
            },
            ess: EssParams {
                p_c_max: 40.0,
                p_d_max: 40.0,
                q_max: 80.0,
                eta_c: 1.0,
                eta_d: 1.0,
            },
            rec: inventory.clone(),
            cer: inventory,
            policy: PolicyParams { r: 0.9, alpha: 0.2 },
            caps: TradeCaps {
                g_cap: Some(400.0),
                r_cap: Some(400.0),
                c_cap: Some(400.0),
            },
        }
    }
}

impl VppConfig {
    /// CE quota `Ĉ = g_max · K · T · α` in tCO₂.
    pub fn quota_cap(&self) -> f64 {
        self.tg.g_max * self.tg.k * self.horizon as f64 * self.policy.alpha
    }
}

/// Hourly price and forecast series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketData {
    pub pi_g: Vec<f64>,
    pub pi_r: Vec<f64>,
    pub pi_c: Vec<f64>,
    /// Renewable output, MW.
    pub e: Vec<f64>,
    /// Inflexible load, MW.
    pub l: Vec<f64>,
}

impl MarketData {
    pub fn len(&self) -> usize {
        self.pi_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi_g.is_empty()
    }

    pub fn series(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("pi_g", &self.pi_g),
            ("pi_r", &self.pi_r),
            ("pi_c", &self.pi_c),
            ("e", &self.e),
            ("l", &self.l),
        ]
    }

    /// Constant series of length `t`.
    pub fn flat(t: usize, pi_g: f64, pi_r: f64, pi_c: f64, e: f64, l: f64) -> Self {
        Self {
            pi_g: vec![pi_g; t],
            pi_r: vec![pi_r; t],
            pi_c: vec![pi_c; t],
            e: vec![e; t],
            l: vec![l; t],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quota_matches_hand_arithmetic() {
        let cfg = VppConfig::default();
        assert!((cfg.quota_cap() - 2419.2).abs() < 1e-9);
        let mut cfg = cfg;
        cfg.policy.alpha = 0.0;
        assert_eq!(cfg.quota_cap(), 0.0);
        cfg.policy.alpha = 1.0;
        cfg.horizon = 336;
        assert!((cfg.quota_cap() - 24192.0).abs() < 1e-9);
    }

    #[test]
    fn disabled_inventory_has_zero_caps() {
        let mut inv = VppConfig::default().rec;
        assert_eq!(inv.effective_caps(), (400.0, 400.0, 400.0));
        inv.enabled = false;
        assert_eq!(inv.effective_caps(), (0.0, 0.0, 0.0));
    }
}
