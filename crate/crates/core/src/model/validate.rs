use log::warn;
use thiserror::Error;

use super::{MarketData, VppConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter {key}: {reason}")]
    Parameter { key: &'static str, reason: String },
    #[error("invalid data in series {series} at hour {hour}: {value}")]
    Data {
        series: &'static str,
        hour: usize,
        value: f64,
    },
}

/// Configuration and data that passed every domain check.
#[derive(Debug, Clone)]
pub struct ValidatedModel {
    cfg: VppConfig,
    data: MarketData,
    warnings: Vec<String>,
}

impl ValidatedModel {
    pub fn config(&self) -> &VppConfig {
        &self.cfg
    }

    pub fn data(&self) -> &MarketData {
        &self.data
    }

    pub fn horizon(&self) -> usize {
        self.cfg.horizon
    }

    pub fn quota_cap(&self) -> f64 {
        self.cfg.quota_cap()
    }

    /// Soft issues found during validation (out-of-range K, non-daily prices, r = 0).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn into_parts(self) -> (VppConfig, MarketData) {
        (self.cfg, self.data)
    }
}

fn param(key: &'static str, reason: impl Into<String>) -> ModelError {
    ModelError::Parameter {
        key,
        reason: reason.into(),
    }
}

fn nonneg(key: &'static str, v: f64) -> Result<(), ModelError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(param(key, format!("must be a finite value ≥ 0, got {v}")))
    }
}

/// True when `s` is constant inside every 24-hour block.
pub fn is_daily_blocked(s: &[f64]) -> bool {
    s.chunks(24).all(|day| day.iter().all(|v| *v == day[0]))
}

pub fn validate_config(cfg: VppConfig, data: MarketData) -> Result<ValidatedModel, ModelError> {
    let t = cfg.horizon;
    if t == 0 {
        return Err(param("horizon", "must be at least 1"));
    }
    for (name, s) in data.series() {
        if s.len() != t {
            return Err(ModelError::Dimension(format!(
                "series {name} has {} values, horizon is {t}",
                s.len()
            )));
        }
        if let Some((h, v)) = s
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(ModelError::Data {
                series: name,
                hour: h + 1,
                value: *v,
            });
        }
    }

    let tg = &cfg.tg;
    if !(tg.a.is_finite() && tg.a > 0.0) {
        return Err(param(
            "tg.a",
            format!(
                "must be > 0 for a strictly concave objective in g, got {}",
                tg.a
            ),
        ));
    }
    if !tg.b.is_finite() {
        return Err(param("tg.b", "must be finite"));
    }
    nonneg("tg.g_min", tg.g_min)?;
    nonneg("tg.g_max", tg.g_max)?;
    if tg.g_min > tg.g_max {
        return Err(param(
            "tg.g_min",
            format!("exceeds tg.g_max ({} > {})", tg.g_min, tg.g_max),
        ));
    }
    nonneg("tg.k", tg.k)?;

    let ess = &cfg.ess;
    nonneg("ess.p_c_max", ess.p_c_max)?;
    nonneg("ess.p_d_max", ess.p_d_max)?;
    nonneg("ess.q_max", ess.q_max)?;
    for (key, eta) in [("ess.eta_c", ess.eta_c), ("ess.eta_d", ess.eta_d)] {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(param(key, format!("must lie in (0, 1], got {eta}")));
        }
    }
    for (keys, inv) in [
        (["rec.w_max", "rec.d_max", "rec.i_max"], &cfg.rec),
        (["cer.w_max", "cer.d_max", "cer.i_max"], &cfg.cer),
    ] {
        nonneg(keys[0], inv.w_max)?;
        nonneg(keys[1], inv.d_max)?;
        nonneg(keys[2], inv.i_max)?;
    }
    for (key, cap) in [
        ("caps.g_cap", cfg.caps.g_cap),
        ("caps.r_cap", cfg.caps.r_cap),
        ("caps.c_cap", cfg.caps.c_cap),
    ] {
        if let Some(c) = cap {
            nonneg(key, c)?;
        }
    }
    let pol = &cfg.policy;
    if !(0.0..=1.0).contains(&pol.r) {
        return Err(param(
            "policy.r",
            format!("must lie in [0, 1], got {}", pol.r),
        ));
    }
    if !(0.0..=1.0).contains(&pol.alpha) {
        return Err(param(
            "policy.alpha",
            format!("must lie in [0, 1], got {}", pol.alpha),
        ));
    }

    let mut warnings = Vec::new();
    if !(0.8..=0.9).contains(&tg.k) {
        warnings.push(format!(
            "emission factor K = {} lies outside the usual range [0.8, 0.9]",
            tg.k
        ));
    }
    if !cfg.ess.lossless() {
        warnings.push(format!(
            "storage efficiencies ({}, {}) below 1: the SoC equation P_c/η_c − η_d·P_d gains energy on a round trip",
            cfg.ess.eta_c, cfg.ess.eta_d
        ));
    }
    if pol.r == 0.0 {
        warnings.push("r = 0 removes the renewable portfolio requirement".to_string());
    }
    for (name, s) in [("pi_r", &data.pi_r), ("pi_c", &data.pi_c)] {
        if !is_daily_blocked(s) {
            warnings.push(format!(
                "{name} changes within a 24-hour block; certificate prices are normally daily"
            ));
        }
    }
    for w in &warnings {
        warn!("{w}");
    }
    Ok(ValidatedModel {
        cfg,
        data,
        warnings,
    })
}
