//! Validated description of a batch run.

use std::fmt;

use serde::{Deserialize, Serialize};
use uplink_bounds::model::SystemParams;
use uplink_bounds::numerics::SchemeMask;

/// Parameter varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweptParam {
    #[serde(rename = "p")]
    PLow,
    #[serde(rename = "alpha")]
    Alpha,
    #[serde(rename = "C")]
    CapLow,
    #[serde(rename = "dC")]
    CapDelta,
    #[serde(rename = "P_db")]
    PowerDb,
}

impl SweptParam {
    pub const NAMES: [&'static str; 5] = ["p", "alpha", "C", "dC", "P_db"];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "p" => SweptParam::PLow,
            "alpha" => SweptParam::Alpha,
            "C" => SweptParam::CapLow,
            "dC" => SweptParam::CapDelta,
            "P_db" => SweptParam::PowerDb,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SweptParam::PLow => "p",
            SweptParam::Alpha => "alpha",
            SweptParam::CapLow => "C",
            SweptParam::CapDelta => "dC",
            SweptParam::PowerDb => "P_db",
        }
    }

    /// Whether `value` lies in the parameter's domain.
    pub fn admits(self, value: f64) -> bool {
        value.is_finite()
            && match self {
                SweptParam::PLow | SweptParam::Alpha => (0.0..=1.0).contains(&value),
                SweptParam::CapLow | SweptParam::CapDelta => value >= 0.0,
                SweptParam::PowerDb => true,
            }
    }

    pub fn domain(self) -> &'static str {
        match self {
            SweptParam::PLow | SweptParam::Alpha => "[0, 1]",
            SweptParam::CapLow | SweptParam::CapDelta => "[0, ∞)",
            SweptParam::PowerDb => "any finite value",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self {
            SweptParam::PLow => p.p_low = value,
            SweptParam::Alpha => p.alpha = value,
            SweptParam::CapLow => p.cap_low = value,
            SweptParam::CapDelta => p.cap_delta = value,
            SweptParam::PowerDb => p.power = db_to_linear(value),
        }
        p
    }
}

impl fmt::Display for SweptParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Nonfading,
    Fading,
}

impl Scenario {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "nonfading" => Some(Scenario::Nonfading),
            "fading" => Some(Scenario::Fading),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Nonfading => "nonfading",
            Scenario::Fading => "fading",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluation mode of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Separate,
    Joint,
    Upper,
    Common,
    Individual,
}

impl Mode {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "separate" => Mode::Separate,
            "joint" => Mode::Joint,
            "upper" => Mode::Upper,
            "common" => Mode::Common,
            "individual" => Mode::Individual,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Separate => "separate",
            Mode::Joint => "joint",
            Mode::Upper => "upper",
            Mode::Common => "common",
            Mode::Individual => "individual",
        }
    }

    pub fn scenario(self) -> Scenario {
        match self {
            Mode::Separate | Mode::Joint | Mode::Upper => Scenario::Nonfading,
            Mode::Common | Mode::Individual => Scenario::Fading,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Layer structure of a row: a power-split mask without fading, a number of
/// broadcast layers with fading.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mask(Vec<usize>),
    Layers(usize),
}

/// Scheme label of upper-bound rows.
pub const BOUND_LABEL: &str = "bound";

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Mask(layers) => layers.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("+"),
            Scheme::Layers(n) => format!("{n}-layer"),
        }
    }

    pub fn mask(&self) -> Option<SchemeMask> {
        match self {
            Scheme::Mask(layers) => SchemeMask::new(5, layers).ok(),
            Scheme::Layers(_) => None,
        }
    }

    /// Parses a label produced by [`Scheme::label`].
    pub fn parse_label(label: &str) -> Option<Self> {
        if let Some(n) = label.strip_suffix("-layer") {
            return n.parse().ok().map(Scheme::Layers);
        }
        label
            .split('+')
            .map(|k| k.parse().ok())
            .collect::<Option<Vec<usize>>>()
            .map(Scheme::Mask)
    }
}

/// The five power-split masks compared without fading.
pub fn default_masks() -> Vec<Scheme> {
    vec![
        Scheme::Mask(vec![1]),
        Scheme::Mask(vec![1, 5]),
        Scheme::Mask(vec![1, 2]),
        Scheme::Mask(vec![1, 2, 5]),
        Scheme::Mask(vec![1, 2, 3, 4, 5]),
    ]
}

/// Swept range: `steps` equally spaced values from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub param: SweptParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Everything that determines the rows of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemParams,
    /// Absent for single-point runs.
    pub sweep: Option<SweepRange>,
    pub scenario: Scenario,
    pub schemes: Vec<Scheme>,
    pub modes: Vec<Mode>,
    pub mc_samples: usize,
    pub seed: u64,
    pub budget: usize,
    pub symmetric_rates: bool,
}

impl SweepSpec {
    /// Swept values, or nothing for single-point runs.
    pub fn values(&self) -> Vec<f64> {
        self.sweep.as_ref().map(SweepRange::values).unwrap_or_default()
    }

    pub fn params_at(&self, value: f64) -> SystemParams {
        match &self.sweep {
            Some(r) => r.param.apply(&self.base, value),
            None => self.base,
        }
    }

    pub fn swept_name(&self) -> &'static str {
        self.sweep.as_ref().map(|r| r.param.name()).unwrap_or("none")
    }
}
