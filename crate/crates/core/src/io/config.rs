//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Every model key is required;
//! trade caps accept `unbounded`. Any `synth.*` key turns on the synthetic
//! generator, with unspecified generator keys taking their defaults.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::IoError;
use crate::model::{EssParams, InventoryParams, PolicyParams, TgParams, TradeCaps, VppConfig};
use crate::scenarios::SynthSpec;

/// The bundled base-scenario configuration.
pub const DEFAULTS_CFG: &str = include_str!("../../data/defaults.cfg");

/// Everything a configuration file may specify.
#[derive(Debug, Clone, PartialEq)]
pub struct InputConfig {
    pub vpp: VppConfig,
    /// Generator settings; its horizon always equals `vpp.horizon`.
    pub synth: Option<SynthSpec>,
    /// Market data file, relative paths resolved against the config's
    /// directory by [`read_config`].
    pub data: Option<PathBuf>,
}

impl InputConfig {
    pub fn new(vpp: VppConfig) -> Self {
        Self {
            vpp,
            synth: None,
            data: None,
        }
    }
}

struct Entries<'a> {
    map: BTreeMap<&'a str, (usize, &'a str)>,
}

impl<'a> Entries<'a> {
    fn parse(text: &'a str) -> Result<Self, IoError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(IoError::Syntax {
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(IoError::Syntax {
                    line,
                    msg: format!("empty key or value in `{content}`"),
                });
            }
            if map.insert(key, (line, value)).is_some() {
                return Err(IoError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(Self { map })
    }

    fn take_opt(&mut self, key: &str) -> Option<(usize, &'a str)> {
        self.map.remove(key)
    }

    fn take(&mut self, key: &str) -> Result<(usize, &'a str), IoError> {
        self.take_opt(key)
            .ok_or_else(|| IoError::MissingKey(key.to_string()))
    }

    fn value<T: std::str::FromStr>(
        key: &str,
        (line, v): (usize, &str),
        what: &str,
    ) -> Result<T, IoError> {
        v.parse().map_err(|_| IoError::Value {
            line,
            key: key.to_string(),
            msg: format!("expected {what}, got `{v}`"),
        })
    }

    fn f64(&mut self, key: &str) -> Result<f64, IoError> {
        let entry = self.take(key)?;
        Self::finite(key, entry)
    }

    fn finite(key: &str, entry: (usize, &str)) -> Result<f64, IoError> {
        let v: f64 = Self::value(key, entry, "a number")?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(IoError::Value {
                line: entry.0,
                key: key.to_string(),
                msg: format!("must be finite, got `{}`", entry.1),
            })
        }
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, IoError> {
        if self.map.contains_key(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    fn cap(&mut self, key: &str) -> Result<Option<f64>, IoError> {
        let entry = self.take(key)?;
        if entry.1.eq_ignore_ascii_case("unbounded") {
            return Ok(None);
        }
        Self::finite(key, entry).map(Some)
    }

    fn bool(&mut self, key: &str) -> Result<bool, IoError> {
        let entry = self.take(key)?;
        Self::value(key, entry, "true or false")
    }
}

const KEYS: [&str; 41] = [
    "horizon",
    "tg.a",
    "tg.b",
    "tg.g_min",
    "tg.g_max",
    "tg.k",
    "ess.p_c_max",
    "ess.p_d_max",
    "ess.q_max",
    "ess.eta_c",
    "ess.eta_d",
    "rec.w_max",
    "rec.d_max",
    "rec.i_max",
    "rec.enabled",
    "cer.w_max",
    "cer.d_max",
    "cer.i_max",
    "cer.enabled",
    "policy.r",
    "policy.alpha",
    "caps.g",
    "caps.r",
    "caps.c",
    "data",
    "synth.seed",
    "synth.wind_mean",
    "synth.wind_amplitude",
    "synth.wind_phase",
    "synth.pv_peak",
    "synth.load_base",
    "synth.load_morning",
    "synth.load_evening",
    "synth.noise",
    "synth.tou_off",
    "synth.tou_mid",
    "synth.tou_peak",
    "synth.rec_price_min",
    "synth.rec_price_max",
    "synth.cer_price_min",
    "synth.cer_price_max",
];

/// Every key a configuration file may contain.
pub fn config_keys() -> &'static [&'static str] {
    &KEYS
}

fn inventory(e: &mut Entries, prefix: &str) -> Result<InventoryParams, IoError> {
    Ok(InventoryParams {
        w_max: e.f64(&format!("{prefix}.w_max"))?,
        d_max: e.f64(&format!("{prefix}.d_max"))?,
        i_max: e.f64(&format!("{prefix}.i_max"))?,
        enabled: e.bool(&format!("{prefix}.enabled"))?,
    })
}

fn synth(e: &mut Entries, horizon: usize) -> Result<Option<SynthSpec>, IoError> {
    if !e.map.keys().any(|k| k.starts_with("synth.")) {
        return Ok(None);
    }
    let d = SynthSpec::default();
    let seed = match e.take_opt("synth.seed") {
        Some(entry) => Entries::value("synth.seed", entry, "a non-negative integer")?,
        None => d.seed,
    };
    Ok(Some(SynthSpec {
        seed,
        horizon,
        wind_mean: e.f64_or("synth.wind_mean", d.wind_mean)?,
        wind_amplitude: e.f64_or("synth.wind_amplitude", d.wind_amplitude)?,
        wind_phase: e.f64_or("synth.wind_phase", d.wind_phase)?,
        pv_peak: e.f64_or("synth.pv_peak", d.pv_peak)?,
        load_base: e.f64_or("synth.load_base", d.load_base)?,
        load_morning: e.f64_or("synth.load_morning", d.load_morning)?,
        load_evening: e.f64_or("synth.load_evening", d.load_evening)?,
        noise: e.f64_or("synth.noise", d.noise)?,
        tou_off: e.f64_or("synth.tou_off", d.tou_off)?,
        tou_mid: e.f64_or("synth.tou_mid", d.tou_mid)?,
        tou_peak: e.f64_or("synth.tou_peak", d.tou_peak)?,
        rec_price: (
            e.f64_or("synth.rec_price_min", d.rec_price.0)?,
            e.f64_or("synth.rec_price_max", d.rec_price.1)?,
        ),
        cer_price: (
            e.f64_or("synth.cer_price_min", d.cer_price.0)?,
            e.f64_or("synth.cer_price_max", d.cer_price.1)?,
        ),
    }))
}

pub fn parse_config(text: &str) -> Result<InputConfig, IoError> {
    let mut e = Entries::parse(text)?;
    let horizon = {
        let entry = e.take("horizon")?;
        Entries::value("horizon", entry, "a positive integer")?
    };
    let vpp = VppConfig {
        horizon,
        tg: TgParams {
            a: e.f64("tg.a")?,
            b: e.f64("tg.b")?,
            g_min: e.f64("tg.g_min")?,
            g_max: e.f64("tg.g_max")?,
            k: e.f64("tg.k")?,
        },
        ess: EssParams {
            p_c_max: e.f64("ess.p_c_max")?,
            p_d_max: e.f64("ess.p_d_max")?,
            q_max: e.f64("ess.q_max")?,
            eta_c: e.f64("ess.eta_c")?,
            eta_d: e.f64("ess.eta_d")?,
        },
        rec: inventory(&mut e, "rec")?,
        cer: inventory(&mut e, "cer")?,
        policy: PolicyParams {
            r: e.f64("policy.r")?,
            alpha: e.f64("policy.alpha")?,
        },
        caps: TradeCaps {
            g_cap: e.cap("caps.g")?,
            r_cap: e.cap("caps.r")?,
            c_cap: e.cap("caps.c")?,
        },
    };
    let data = e.take_opt("data").map(|(_, v)| PathBuf::from(v));
    let synth = synth(&mut e, horizon)?;
    if let Some((key, (line, _))) = e.map.into_iter().next() {
        return Err(IoError::UnknownKey {
            line,
            key: key.to_string(),
        });
    }
    Ok(InputConfig { vpp, synth, data })
}

fn cap_text(c: Option<f64>) -> String {
    c.map_or_else(|| "unbounded".to_string(), |v| v.to_string())
}

/// Inverse of [`parse_config`]. Numbers are written in their shortest
/// round-trip form, so parsing the output reproduces `cfg` exactly.
pub fn render_config(cfg: &InputConfig) -> String {
    let v = &cfg.vpp;
    let mut s = String::new();
    // writing to a String cannot fail
    let _ = writeln!(s, "horizon = {}", v.horizon);
    let _ = writeln!(
        s,
        "\n# thermal generator: cost a·g² + b·g, emissions k per MWh"
    );
    for (k, x) in [
        ("a", v.tg.a),
        ("b", v.tg.b),
        ("g_min", v.tg.g_min),
        ("g_max", v.tg.g_max),
        ("k", v.tg.k),
    ] {
        let _ = writeln!(s, "tg.{k} = {x}");
    }
    let _ = writeln!(s, "\n# energy storage");
    for (k, x) in [
        ("p_c_max", v.ess.p_c_max),
        ("p_d_max", v.ess.p_d_max),
        ("q_max", v.ess.q_max),
        ("eta_c", v.ess.eta_c),
        ("eta_d", v.ess.eta_d),
    ] {
        let _ = writeln!(s, "ess.{k} = {x}");
    }
    for (name, inv) in [("rec", &v.rec), ("cer", &v.cer)] {
        let _ = writeln!(s, "\n# {} inventory", name.to_uppercase());
        let _ = writeln!(s, "{name}.w_max = {}", inv.w_max);
        let _ = writeln!(s, "{name}.d_max = {}", inv.d_max);
        let _ = writeln!(s, "{name}.i_max = {}", inv.i_max);
        let _ = writeln!(s, "{name}.enabled = {}", inv.enabled);
    }
    let _ = writeln!(s, "\npolicy.r = {}", v.policy.r);
    let _ = writeln!(s, "policy.alpha = {}", v.policy.alpha);
    let _ = writeln!(s, "\n# symmetric trade limits, or `unbounded`");
    let _ = writeln!(s, "caps.g = {}", cap_text(v.caps.g_cap));
    let _ = writeln!(s, "caps.r = {}", cap_text(v.caps.r_cap));
    let _ = writeln!(s, "caps.c = {}", cap_text(v.caps.c_cap));
    if let Some(p) = &cfg.data {
        let _ = writeln!(s, "\ndata = {}", p.display());
    }
    if let Some(g) = &cfg.synth {
        let _ = writeln!(s, "\n# synthetic market data");
        let _ = writeln!(s, "synth.seed = {}", g.seed);
        for (k, x) in [
            ("wind_mean", g.wind_mean),
            ("wind_amplitude", g.wind_amplitude),
            ("wind_phase", g.wind_phase),
            ("pv_peak", g.pv_peak),
            ("load_base", g.load_base),
            ("load_morning", g.load_morning),
            ("load_evening", g.load_evening),
            ("noise", g.noise),
            ("tou_off", g.tou_off),
            ("tou_mid", g.tou_mid),
            ("tou_peak", g.tou_peak),
            ("rec_price_min", g.rec_price.0),
            ("rec_price_max", g.rec_price.1),
            ("cer_price_min", g.cer_price.0),
            ("cer_price_max", g.cer_price.1),
        ] {
            let _ = writeln!(s, "synth.{k} = {x}");
        }
    }
    s
}

/// Reads and parses a configuration file, resolving `data` against the
/// file's directory.
pub fn read_config(path: &Path) -> Result<InputConfig, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    let mut cfg = parse_config(&text).map_err(|e| e.in_file(path))?;
    if let Some(d) = &cfg.data {
        if d.is_relative() {
            cfg.data = Some(path.parent().unwrap_or(Path::new(".")).join(d));
        }
    }
    Ok(cfg)
}

pub fn write_config(path: &Path, cfg: &InputConfig) -> Result<(), IoError> {
    std::fs::write(path, render_config(cfg)).map_err(|e| IoError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_defaults_are_the_base_scenario() {
        let cfg = parse_config(DEFAULTS_CFG).unwrap();
        assert_eq!(cfg.vpp, VppConfig::default());
        assert_eq!(cfg.synth, Some(SynthSpec::default()));
        assert_eq!(cfg.data, None);
    }

    #[test]
    fn render_parse_round_trip() {
        let mut cfg = parse_config(DEFAULTS_CFG).unwrap();
        cfg.vpp.policy.r = 0.1 + 0.2;
        cfg.vpp.caps.r_cap = None;
        cfg.vpp.tg.a = 1.0 / 3.0;
        cfg.data = Some("prices.csv".into());
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
        cfg.synth = None;
        assert_eq!(parse_config(&render_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn missing_key_is_named() {
        let text: String = DEFAULTS_CFG
            .lines()
            .filter(|l| !l.starts_with("policy.r"))
            .map(|l| format!("{l}\n"))
            .collect();
        let err = parse_config(&text).unwrap_err();
        assert!(
            matches!(&err, IoError::MissingKey(k) if k == "policy.r"),
            "{err}"
        );
        assert!(err.to_string().contains("policy.r"));
    }

    #[test]
    fn malformed_lines_report_their_line() {
        let text = format!("{DEFAULTS_CFG}\npolicy.bogus = 3\n");
        assert!(
            matches!(parse_config(&text), Err(IoError::UnknownKey { key, .. }) if key == "policy.bogus")
        );
        let text = DEFAULTS_CFG.replace("tg.a = 1", "tg.a = one");
        assert!(matches!(parse_config(&text), Err(IoError::Value { key, .. }) if key == "tg.a"));
        let text = format!("horizon 168\n{DEFAULTS_CFG}");
        assert!(matches!(
            parse_config(&text),
            Err(IoError::Syntax { line: 1, .. })
        ));
        let text = format!("{DEFAULTS_CFG}\ntg.a = 2\n");
        assert!(
            matches!(parse_config(&text), Err(IoError::DuplicateKey { key, .. }) if key == "tg.a")
        );
    }

    #[test]
    fn every_key_is_listed_once() {
        let mut keys = config_keys().to_vec();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), config_keys().len());
        assert!(keys.iter().all(|k| !k.is_empty()));
    }
}
