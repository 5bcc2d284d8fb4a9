//! Randomized small instances for cross-checks and property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{find_conflict, validate_config, MarketData, VppConfig};

/// How trade caps are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapMode {
    Finite,
    Unbounded,
    /// each cap independently finite or unbounded
    Mixed,
}

#[derive(Debug, Clone)]
pub struct RandomOptions {
    pub r_range: (f64, f64),
    pub alpha_range: (f64, f64),
    pub caps: CapMode,
    /// Let REC/CER prices change every hour instead of once a day.
    pub hourly_certificate_prices: bool,
    /// Unit storage efficiencies (otherwise drawn from [0.85, 1]).
    pub lossless: bool,
}

impl Default for RandomOptions {
    fn default() -> Self {
        Self {
            r_range: (0.0, 1.0),
            alpha_range: (0.0, 1.0),
            caps: CapMode::Mixed,
            hourly_certificate_prices: false,
            lossless: true,
        }
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Draws a feasible random instance. Candidates that fail validation or have
/// an aggregate conflict are redrawn from the same stream.
pub fn random_instance(seed: u64, horizon: usize, opts: &RandomOptions) -> (VppConfig, MarketData) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let (cfg, data) = candidate(&mut rng, horizon, opts);
        if let Ok(m) = validate_config(cfg, data) {
            if find_conflict(&m).is_none() {
                return m.into_parts();
            }
        }
    }
}

fn candidate(
    rng: &mut ChaCha8Rng,
    horizon: usize,
    opts: &RandomOptions,
) -> (VppConfig, MarketData) {
    let mut cfg = VppConfig::default();
    cfg.horizon = horizon;
    cfg.tg.a = draw(rng, (0.2, 2.0));
    cfg.tg.b = draw(rng, (20.0, 100.0));
    cfg.tg.g_max = draw(rng, (10.0, 80.0));
    cfg.tg.g_min = if rng.random_bool(0.3) {
        draw(rng, (0.0, 0.3)) * cfg.tg.g_max
    } else {
        0.0
    };
    cfg.tg.k = draw(rng, (0.8, 0.9));
    cfg.ess.p_c_max = draw(rng, (5.0, 40.0));
    cfg.ess.p_d_max = draw(rng, (5.0, 40.0));
    cfg.ess.q_max = draw(rng, (10.0, 80.0));
    if !opts.lossless {
        cfg.ess.eta_c = draw(rng, (0.85, 1.0));
        cfg.ess.eta_d = draw(rng, (0.85, 1.0));
    }
    for inv in [&mut cfg.rec, &mut cfg.cer] {
        inv.enabled = rng.random_bool(0.6);
        inv.w_max = draw(rng, (0.0, 50.0));
        inv.d_max = draw(rng, (0.0, 50.0));
        inv.i_max = draw(rng, (0.0, 80.0));
    }
    cfg.policy.r = draw(rng, opts.r_range);
    cfg.policy.alpha = draw(rng, opts.alpha_range);
    let cap = |rng: &mut ChaCha8Rng, range: (f64, f64)| match opts.caps {
        CapMode::Finite => Some(draw(rng, range)),
        CapMode::Unbounded => None,
        CapMode::Mixed => rng.random_bool(0.5).then(|| draw(rng, range)),
    };
    cfg.caps.g_cap = cap(rng, (40.0, 150.0));
    cfg.caps.r_cap = cap(rng, (5.0, 60.0));
    cfg.caps.c_cap = cap(rng, (5.0, 60.0));

    let days = horizon.div_ceil(24);
    let rec_days: Vec<f64> = (0..days).map(|_| draw(rng, (0.0, 60.0))).collect();
    let cer_days: Vec<f64> = (0..days).map(|_| draw(rng, (0.0, 80.0))).collect();
    let mut data = MarketData::flat(horizon, 0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 0..horizon {
        data.pi_g[t] = draw(rng, (0.0, 200.0));
        data.pi_r[t] = if opts.hourly_certificate_prices {
            draw(rng, (0.0, 60.0))
        } else {
            rec_days[t / 24]
        };
        data.pi_c[t] = if opts.hourly_certificate_prices {
            draw(rng, (0.0, 80.0))
        } else {
            cer_days[t / 24]
        };
        data.e[t] = draw(rng, (0.0, 60.0));
        data.l[t] = draw(rng, (0.0, 60.0));
    }
    (cfg, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible_and_valid() {
        let opts = RandomOptions::default();
        for seed in 0..20 {
            let a = random_instance(seed, 3, &opts);
            assert_eq!(a, random_instance(seed, 3, &opts));
            assert!(validate_config(a.0, a.1).is_ok());
        }
    }

    #[test]
    fn cap_modes_respected() {
        let fin = RandomOptions {
            caps: CapMode::Finite,
            ..Default::default()
        };
        let (cfg, _) = random_instance(4, 3, &fin);
        assert!(cfg.caps.r_cap.is_some() && cfg.caps.c_cap.is_some() && cfg.caps.g_cap.is_some());
        let unb = RandomOptions {
            caps: CapMode::Unbounded,
            ..Default::default()
        };
        let (cfg, _) = random_instance(4, 3, &unb);
        assert!(cfg.caps.r_cap.is_none() && cfg.caps.c_cap.is_none());
    }
}
