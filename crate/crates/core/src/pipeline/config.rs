use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Ino,
    Lsc,
    Freeway,
    IdealSooo,
    Ooo,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Ino,
        Variant::Lsc,
        Variant::Freeway,
        Variant::IdealSooo,
        Variant::Ooo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ino => "INO",
            Variant::Lsc => "LSC",
            Variant::Freeway => "FREEWAY",
            Variant::IdealSooo => "IDEAL_SOOO",
            Variant::Ooo => "OOO",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match norm.as_str() {
            "ino" | "inorder" | "in_order" => Variant::Ino,
            "lsc" => Variant::Lsc,
            "freeway" => Variant::Freeway,
            "ideal_sooo" | "ideal" | "idealsooo" => Variant::IdealSooo,
            "ooo" => Variant::Ooo,
            _ => return Err(SimError::Config(format!("unknown core variant '{s}'"))),
        })
    }
}

/// Functional units available per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuConfig {
    pub int: u32,
    pub fp: u32,
    pub branch: u32,
    pub load: u32,
    pub store: u32,
}

impl Default for FuConfig {
    fn default() -> Self {
        FuConfig {
            int: 2,
            fp: 1,
            branch: 1,
            load: 1,
            store: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreOptions {
    /// Let FIFO issue look past queue heads that are loads blocked on a
    /// true alias.
    pub skip_aliased_loads: bool,
    /// Steer dependent slices of depth two or more to a second Y-IQ.
    pub second_yiq: bool,
    /// Issue loads past unresolved stores using perfect alias knowledge.
    pub oracle_load_spec: bool,
    /// Ignore branch mispredictions.
    pub perfect_frontend: bool,
    /// Train the IST with one functional pass before timing starts.
    pub warm_ist: bool,
    /// Preload every line the trace touches into both cache levels.
    pub warm_caches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreConfig {
    pub variant: Variant,
    pub issue_width: u32,
    pub window: u32,
    pub q_a: u32,
    pub q_b: u32,
    pub q_y: u32,
    pub q_y2: u32,
    /// Store buffer entries; 0 means one per window entry.
    pub store_buffer: u32,
    pub fu: FuConfig,
    pub branch_penalty: u32,
    /// IST entries; 0 is unbounded.
    pub ist_capacity: u32,
    pub options: CoreOptions,
}

impl CoreConfig {
    /// Baseline parameters for `variant`.
    pub fn new(variant: Variant) -> CoreConfig {
        let (q_a, q_b, q_y) = match variant {
            Variant::Ino => (64, 0, 0),
            Variant::Lsc | Variant::IdealSooo => (64, 64, 0),
            Variant::Freeway => (64, 32, 32),
            Variant::Ooo => (64, 0, 0),
        };
        CoreConfig {
            variant,
            issue_width: 2,
            window: 64,
            q_a,
            q_b,
            q_y,
            q_y2: if variant == Variant::Freeway { 32 } else { 0 },
            store_buffer: 0,
            fu: FuConfig::default(),
            branch_penalty: if variant == Variant::Ino { 7 } else { 9 },
            ist_capacity: 0,
            options: CoreOptions::default(),
        }
    }

    /// Re-targets this configuration to another variant, keeping shared
    /// parameters and resetting the variant-specific queue sizes and
    /// branch penalty.
    pub fn with_variant(&self, variant: Variant) -> CoreConfig {
        let base = CoreConfig::new(variant);
        CoreConfig {
            variant,
            q_a: base.q_a,
            q_b: base.q_b,
            q_y: base.q_y,
            q_y2: base.q_y2,
            branch_penalty: base.branch_penalty,
            ..self.clone()
        }
    }

    /// Splits a total queue budget: 2:1:1 for Freeway, 1:1 for the
    /// two-queue designs, everything to A otherwise.
    pub fn set_total_queue_entries(&mut self, total: u32) {
        match self.variant {
            Variant::Freeway => {
                self.q_a = total / 2;
                self.q_b = total / 4;
                self.q_y = total - self.q_a - self.q_b;
                if self.q_y2 > 0 {
                    self.q_y2 = self.q_y;
                }
            }
            Variant::Lsc | Variant::IdealSooo => {
                self.q_a = total / 2;
                self.q_b = total - self.q_a;
            }
            Variant::Ino | Variant::Ooo => self.q_a = total,
        }
    }

    pub fn store_buffer_entries(&self) -> usize {
        if self.store_buffer == 0 {
            self.window as usize
        } else {
            self.store_buffer as usize
        }
    }

    /// Largest in-flight store sequence distance the store buffer accepts.
    pub fn seq_span(&self) -> u64 {
        (self.window as u64 + 1).next_power_of_two().max(128)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::Config(m));
        if self.issue_width == 0 {
            return err("issue width must be at least 1".into());
        }
        if self.window < 2 {
            return err("window must hold at least 2 entries (a cracked store)".into());
        }
        let fu = self.fu;
        if fu.int == 0 || fu.fp == 0 || fu.branch == 0 || fu.load == 0 || fu.store == 0 {
            return err("every functional unit class needs at least one unit".into());
        }
        let need = |name: &str, v: u32| {
            if v == 0 {
                Err(SimError::Config(format!("{} requires {name} >= 1", self.variant)))
            } else {
                Ok(())
            }
        };
        match self.variant {
            Variant::Ino => need("q_a", self.q_a)?,
            Variant::Lsc | Variant::IdealSooo => {
                need("q_a", self.q_a)?;
                need("q_b", self.q_b)?;
            }
            Variant::Freeway => {
                need("q_a", self.q_a)?;
                need("q_b", self.q_b)?;
                need("q_y", self.q_y)?;
                if self.options.second_yiq {
                    need("q_y2", self.q_y2)?;
                }
            }
            Variant::Ooo => {}
        }
        if self.options.second_yiq && self.variant != Variant::Freeway {
            return err(format!("second_yiq only applies to FREEWAY, not {}", self.variant));
        }
        Ok(())
    }
}
