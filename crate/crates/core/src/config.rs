//! Line-oriented `key = value` configuration.
//!
//! `#` starts a comment. A key may repeat only with an identical value.
//! `core.variant` is applied first (it selects variant-specific queue sizes
//! and branch penalty), then `core.iq_total`, then every other key; so an
//! explicit `core.q_b` beats the split implied by `core.iq_total`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::memory::{gbps_to_bytes_per_cycle, ns_to_cycles, HierarchyConfig, CLOCK_GHZ};
use crate::pipeline::{CoreConfig, Variant};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown config key '{key}'; valid keys: {valid}")]
    UnknownKey { key: String, valid: String },
    #[error("conflicting values for '{key}': '{first}' vs '{second}'")]
    Conflict { key: String, first: String, second: String },
    #[error("bad value '{value}' for '{key}': {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

pub const KEYS: &[&str] = &[
    "core.variant",
    "core.width",
    "core.window",
    "core.q_a",
    "core.q_b",
    "core.q_y",
    "core.q_y2",
    "core.iq_total",
    "core.sb",
    "core.branch_penalty",
    "fu.int",
    "fu.fp",
    "fu.branch",
    "fu.load",
    "fu.store",
    "ist.capacity",
    "opt.skip_aliased_loads",
    "opt.second_yiq",
    "opt.oracle_load_spec",
    "opt.perfect_frontend",
    "opt.warm_ist",
    "opt.warm_caches",
    "l1.size_kb",
    "l1.assoc",
    "l1.lat",
    "l1.mshrs",
    "llc.size_kb",
    "llc.assoc",
    "llc.lat",
    "dram.lat_ns",
    "dram.bw_gbps",
    "prefetch.llc",
    "prefetch.degree",
];

/// Parsed key/value pairs, sorted by key.
pub type ConfigPairs = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub core: CoreConfig,
    pub mem: HierarchyConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            core: CoreConfig::new(Variant::Freeway),
            mem: HierarchyConfig::default(),
        }
    }
}

fn unknown(key: &str) -> ConfigError {
    ConfigError::UnknownKey {
        key: key.to_string(),
        valid: KEYS.join(", "),
    }
}

/// Inserts `key = value`, rejecting a different value for the same key.
pub fn insert_pair(pairs: &mut ConfigPairs, key: &str, value: &str) -> Result<(), ConfigError> {
    if !KEYS.contains(&key) {
        return Err(unknown(key));
    }
    match pairs.get(key) {
        Some(prev) if prev != value => Err(ConfigError::Conflict {
            key: key.to_string(),
            first: prev.clone(),
            second: value.to_string(),
        }),
        _ => {
            pairs.insert(key.to_string(), value.to_string());
            Ok(())
        }
    }
}

pub fn parse_config_text(text: &str) -> Result<ConfigPairs, ConfigError> {
    let mut pairs = ConfigPairs::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: i + 1,
                reason: format!("expected 'key = value', got '{line}'"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if v.is_empty() {
            return Err(ConfigError::Parse {
                line: i + 1,
                reason: format!("missing value for '{k}'"),
            });
        }
        insert_pair(&mut pairs, k, v)?;
    }
    Ok(pairs)
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn parse_u32(key: &str, value: &str) -> Result<u32, ConfigError> {
    value
        .parse()
        .map_err(|_| bad(key, value, "expected a non-negative integer"))
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(bad(key, value, "expected a non-negative number")),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected on/off")),
    }
}

fn onoff(b: bool) -> String {
    if b { "on" } else { "off" }.to_string()
}

impl SimConfig {
    /// Builds a configuration from defaults plus `pairs`.
    pub fn from_pairs(pairs: &ConfigPairs) -> Result<SimConfig, ConfigError> {
        let mut cfg = SimConfig::default();
        if let Some(v) = pairs.get("core.variant") {
            let variant: Variant = v.parse().map_err(|_| bad("core.variant", v, "unknown variant"))?;
            cfg.core = cfg.core.with_variant(variant);
        }
        if let Some(v) = pairs.get("core.iq_total") {
            cfg.core.set_total_queue_entries(parse_u32("core.iq_total", v)?);
        }
        for (k, v) in pairs {
            if k != "core.variant" && k != "core.iq_total" {
                cfg.set(k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.core.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.mem.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Applies one key. `core.variant` here only switches the variant tag;
    /// use [`SimConfig::from_pairs`] to get variant-specific defaults.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let c = &mut self.core;
        let m = &mut self.mem;
        let u = || parse_u32(key, value);
        let b = || parse_bool(key, value);
        match key {
            "core.variant" => {
                c.variant = value.parse().map_err(|_| bad(key, value, "unknown variant"))?;
            }
            "core.width" => c.issue_width = u()?,
            "core.window" => c.window = u()?,
            "core.q_a" => c.q_a = u()?,
            "core.q_b" => c.q_b = u()?,
            "core.q_y" => c.q_y = u()?,
            "core.q_y2" => c.q_y2 = u()?,
            "core.iq_total" => c.set_total_queue_entries(u()?),
            "core.sb" => c.store_buffer = u()?,
            "core.branch_penalty" => c.branch_penalty = u()?,
            "fu.int" => c.fu.int = u()?,
            "fu.fp" => c.fu.fp = u()?,
            "fu.branch" => c.fu.branch = u()?,
            "fu.load" => c.fu.load = u()?,
            "fu.store" => c.fu.store = u()?,
            "ist.capacity" => c.ist_capacity = u()?,
            "opt.skip_aliased_loads" => c.options.skip_aliased_loads = b()?,
            "opt.second_yiq" => c.options.second_yiq = b()?,
            "opt.oracle_load_spec" => c.options.oracle_load_spec = b()?,
            "opt.perfect_frontend" => c.options.perfect_frontend = b()?,
            "opt.warm_ist" => c.options.warm_ist = b()?,
            "opt.warm_caches" => c.options.warm_caches = b()?,
            "l1.size_kb" => m.l1.size = u()? as u64 * 1024,
            "l1.assoc" => m.l1.assoc = u()?,
            "l1.lat" => m.l1.hit_latency = u()?,
            "l1.mshrs" => m.l1.mshr_count = u()?,
            "llc.size_kb" => m.llc.size = u()? as u64 * 1024,
            "llc.assoc" => m.llc.assoc = u()?,
            "llc.lat" => m.llc.hit_latency = u()?,
            "dram.lat_ns" => m.dram_latency = ns_to_cycles(parse_f64(key, value)?),
            "dram.bw_gbps" => {
                m.dram_bandwidth = if value.eq_ignore_ascii_case("unlimited") {
                    None
                } else {
                    match parse_f64(key, value)? {
                        0.0 => None,
                        gbps => Some(gbps_to_bytes_per_cycle(gbps)),
                    }
                };
            }
            "prefetch.llc" => m.prefetcher_enabled = b()?,
            "prefetch.degree" => m.prefetch_degree = u()?,
            _ => return Err(unknown(key)),
        }
        Ok(())
    }

    /// Current value of `key` in config-file syntax.
    pub fn get(&self, key: &str) -> Result<String, ConfigError> {
        let c = &self.core;
        let m = &self.mem;
        Ok(match key {
            "core.variant" => c.variant.to_string(),
            "core.width" => c.issue_width.to_string(),
            "core.window" => c.window.to_string(),
            "core.q_a" => c.q_a.to_string(),
            "core.q_b" => c.q_b.to_string(),
            "core.q_y" => c.q_y.to_string(),
            "core.q_y2" => c.q_y2.to_string(),
            "core.iq_total" => (c.q_a + c.q_b + c.q_y).to_string(),
            "core.sb" => c.store_buffer.to_string(),
            "core.branch_penalty" => c.branch_penalty.to_string(),
            "fu.int" => c.fu.int.to_string(),
            "fu.fp" => c.fu.fp.to_string(),
            "fu.branch" => c.fu.branch.to_string(),
            "fu.load" => c.fu.load.to_string(),
            "fu.store" => c.fu.store.to_string(),
            "ist.capacity" => c.ist_capacity.to_string(),
            "opt.skip_aliased_loads" => onoff(c.options.skip_aliased_loads),
            "opt.second_yiq" => onoff(c.options.second_yiq),
            "opt.oracle_load_spec" => onoff(c.options.oracle_load_spec),
            "opt.perfect_frontend" => onoff(c.options.perfect_frontend),
            "opt.warm_ist" => onoff(c.options.warm_ist),
            "opt.warm_caches" => onoff(c.options.warm_caches),
            "l1.size_kb" => (m.l1.size / 1024).to_string(),
            "l1.assoc" => m.l1.assoc.to_string(),
            "l1.lat" => m.l1.hit_latency.to_string(),
            "l1.mshrs" => m.l1.mshr_count.to_string(),
            "llc.size_kb" => (m.llc.size / 1024).to_string(),
            "llc.assoc" => m.llc.assoc.to_string(),
            "llc.lat" => m.llc.hit_latency.to_string(),
            "dram.lat_ns" => (m.dram_latency as f64 / CLOCK_GHZ).to_string(),
            "dram.bw_gbps" => match m.dram_bandwidth {
                None => "unlimited".to_string(),
                Some(bpc) => (bpc * CLOCK_GHZ).to_string(),
            },
            "prefetch.llc" => onoff(m.prefetcher_enabled),
            "prefetch.degree" => m.prefetch_degree.to_string(),
            _ => return Err(unknown(key)),
        })
    }

    /// Every key with its current value, one `key = value` per line.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .filter(|k| **k != "core.iq_total")
            .map(|k| format!("{k} = {}\n", self.get(k).expect("listed key")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_baseline_parameters() {
        let c = SimConfig::default();
        assert_eq!(c.core.variant, Variant::Freeway);
        assert_eq!(c.core.issue_width, 2);
        assert_eq!(c.core.window, 64);
        assert_eq!(c.mem.l1.hit_latency, 4);
        assert_eq!(c.mem.dram_latency, 90);
        assert_eq!(c.get("dram.lat_ns").unwrap(), "45");
    }

    #[test]
    fn parses_comments_and_duplicates() {
        let p = parse_config_text("# hi\ncore.variant = lsc  # trailing\n\nl1.lat=6\nl1.lat = 6\n").unwrap();
        let c = SimConfig::from_pairs(&p).unwrap();
        assert_eq!(c.core.variant, Variant::Lsc);
        assert_eq!(c.core.q_b, 64);
        assert_eq!(c.mem.l1.hit_latency, 6);
    }

    #[test]
    fn conflicting_duplicate_is_an_error() {
        let e = parse_config_text("l1.lat = 2\nl1.lat = 4\n").unwrap_err();
        assert!(matches!(e, ConfigError::Conflict { .. }));
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let e = parse_config_text("core.colour = red\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("core.colour") && msg.contains("core.variant") && msg.contains("prefetch.llc"));
    }

    #[test]
    fn malformed_line_reports_number() {
        let e = parse_config_text("core.width = 2\nnonsense\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Parse {
                line: 2,
                reason: "expected 'key = value', got 'nonsense'".into()
            }
        );
    }

    #[test]
    fn iq_total_split_and_explicit_override() {
        let mut p = parse_config_text("core.variant = freeway\ncore.iq_total = 20\n").unwrap();
        let c = SimConfig::from_pairs(&p).unwrap();
        assert_eq!((c.core.q_a, c.core.q_b, c.core.q_y), (10, 5, 5));
        insert_pair(&mut p, "core.q_b", "7").unwrap();
        let c = SimConfig::from_pairs(&p).unwrap();
        assert_eq!((c.core.q_a, c.core.q_b, c.core.q_y), (10, 7, 5));
    }

    #[test]
    fn text_round_trips() {
        let mut p = ConfigPairs::new();
        for (k, v) in [
            ("core.variant", "IDEAL_SOOO"),
            ("dram.bw_gbps", "4"),
            ("prefetch.llc", "off"),
        ] {
            insert_pair(&mut p, k, v).unwrap();
        }
        let c = SimConfig::from_pairs(&p).unwrap();
        let again = SimConfig::from_pairs(&parse_config_text(&c.to_text()).unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(c.mem.dram_bandwidth, Some(2.0));
    }

    #[test]
    fn invalid_values() {
        assert!(parse_config_text("core.width = two\n")
            .and_then(|p| SimConfig::from_pairs(&p))
            .is_err());
        let p = parse_config_text("core.width = 0\n").unwrap();
        assert!(matches!(SimConfig::from_pairs(&p), Err(ConfigError::Invalid(_))));
        let p = parse_config_text("prefetch.llc = maybe\n").unwrap();
        assert!(SimConfig::from_pairs(&p).is_err());
    }
}
