//! Experiment configuration: `[system]`, `[sweep]` and `[run]` sections of
//! `key = value` lines. Unknown sections or keys are rejected, and every
//! validation error names the line and the field.

use serde::Deserialize;
use toml::Spanned;
use uplink_bounds::model::SystemParams;
use uplink_bounds::numerics::SchemeMask;

use crate::error::{CliError, CliResult};
use crate::spec::{db_to_linear, default_masks, Mode, Scenario, Scheme, SweepRange, SweepSpec, SweptParam};

pub const DEFAULT_MC_SAMPLES: usize = 20_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BUDGET: usize = 500;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: RawSystem,
    sweep: Option<RawSweep>,
    run: Option<RawRun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    power_db: Option<Spanned<Number>>,
    power: Option<Spanned<Number>>,
    alpha: Spanned<Number>,
    cap_low: Spanned<Number>,
    cap_delta: Spanned<Number>,
    p_low: Spanned<Number>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    param: Spanned<String>,
    from: Spanned<Number>,
    to: Spanned<Number>,
    steps: Spanned<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    scenario: Option<Spanned<String>>,
    schemes: Option<Spanned<toml::Value>>,
    modes: Option<Spanned<Vec<String>>>,
    mc_samples: Option<Spanned<i64>>,
    seed: Option<Spanned<i64>>,
    budget: Option<Spanned<i64>>,
    symmetric_rates: Option<bool>,
}

/// TOML distinguishes `1` from `1.0`; both are accepted for real fields.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn get(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(x) => x,
        }
    }
}

struct Source<'a>(&'a str);

impl Source<'_> {
    fn line(&self, offset: usize) -> usize {
        let end = offset.min(self.0.len());
        self.0[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn error<T>(&self, spanned: &Spanned<T>, field: &str, message: impl std::fmt::Display) -> CliError {
        CliError::Config(format!(
            "line {}, field `{field}`: {message}",
            self.line(spanned.span().start)
        ))
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub mc_samples: Option<usize>,
    pub budget: Option<usize>,
}

/// Parses and validates a configuration file's contents.
pub fn parse_config(src: &str, overrides: &Overrides) -> CliResult<SweepSpec> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))?;
    let s = Source(src);

    let real = |v: &Spanned<Number>, field: &str, ok: fn(f64) -> bool, expected: &str| -> CliResult<f64> {
        let x = v.get_ref().get();
        if x.is_finite() && ok(x) {
            Ok(x)
        } else {
            Err(s.error(v, field, format!("{x} is outside {expected}")))
        }
    };

    let sys = &raw.system;
    let power = match (&sys.power_db, &sys.power) {
        (Some(db), None) => db_to_linear(real(db, "system.power_db", |_| true, "the finite reals")?),
        (None, Some(p)) => real(p, "system.power", |x| x >= 0.0, "[0, ∞)")?,
        (Some(db), Some(_)) => return Err(s.error(db, "system.power_db", "give either power_db or power, not both")),
        (None, None) => {
            return Err(CliError::Config(
                "section [system]: one of `power_db` or `power` is required".into(),
            ))
        }
    };
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    let nonneg = |x: f64| x >= 0.0;
    let base = SystemParams {
        power,
        alpha: real(&sys.alpha, "system.alpha", unit, "[0, 1]")?,
        cap_low: real(&sys.cap_low, "system.cap_low", nonneg, "[0, ∞)")?,
        cap_delta: real(&sys.cap_delta, "system.cap_delta", nonneg, "[0, ∞)")?,
        p_low: real(&sys.p_low, "system.p_low", unit, "[0, 1]")?,
    };

    let sweep = match &raw.sweep {
        None => None,
        Some(sw) => {
            let param = SweptParam::parse(sw.param.get_ref()).ok_or_else(|| {
                s.error(
                    &sw.param,
                    "sweep.param",
                    format!("unknown parameter `{}` (expected one of {})", sw.param.get_ref(), SweptParam::NAMES.join(", ")),
                )
            })?;
            let bound = |v: &Spanned<Number>, field: &str| -> CliResult<f64> {
                let x = v.get_ref().get();
                if param.admits(x) {
                    Ok(x)
                } else {
                    Err(s.error(v, field, format!("{x} is outside the domain of `{param}`, {}", param.domain())))
                }
            };
            let from = bound(&sw.from, "sweep.from")?;
            let to = bound(&sw.to, "sweep.to")?;
            if from >= to {
                return Err(s.error(&sw.to, "sweep.to", format!("must exceed sweep.from = {from}")));
            }
            let steps = *sw.steps.get_ref();
            if steps < 2 {
                return Err(s.error(&sw.steps, "sweep.steps", format!("must be at least 2 (got {steps})")));
            }
            Some(SweepRange {
                param,
                from,
                to,
                steps: steps as usize,
            })
        }
    };

    let run = raw.run.unwrap_or_default();
    let scenario = match (&run.scenario, overrides.scenario) {
        (None, forced) => forced.unwrap_or(Scenario::Nonfading),
        (Some(name), forced) => {
            let parsed = Scenario::parse(name.get_ref()).ok_or_else(|| {
                s.error(name, "run.scenario", format!("unknown scenario `{}` (expected nonfading or fading)", name.get_ref()))
            })?;
            if let Some(f) = forced.filter(|f| *f != parsed) {
                return Err(s.error(name, "run.scenario", format!("`{parsed}` conflicts with the `{f}` subcommand")));
            }
            parsed
        }
    };

    let schemes = match &run.schemes {
        None => match scenario {
            Scenario::Nonfading => default_masks(),
            Scenario::Fading => vec![Scheme::Layers(1), Scheme::Layers(2)],
        },
        Some(v) => parse_schemes(&s, v, scenario)?,
    };

    let modes = match &run.modes {
        None => match scenario {
            Scenario::Nonfading => vec![Mode::Separate, Mode::Joint, Mode::Upper],
            Scenario::Fading => vec![Mode::Common, Mode::Individual],
        },
        Some(list) => {
            let mut modes = Vec::new();
            for name in list.get_ref() {
                let mode = Mode::parse(name)
                    .filter(|m| m.scenario() == scenario)
                    .ok_or_else(|| s.error(list, "run.modes", format!("`{name}` is not a {scenario} mode")))?;
                if modes.contains(&mode) {
                    return Err(s.error(list, "run.modes", format!("`{name}` listed twice")));
                }
                modes.push(mode);
            }
            if modes.is_empty() {
                return Err(s.error(list, "run.modes", "at least one mode is required"));
            }
            modes
        }
    };

    let count = |v: &Option<Spanned<i64>>, field: &str, default: usize| -> CliResult<usize> {
        match v {
            None => Ok(default),
            Some(n) if *n.get_ref() >= 1 => Ok(*n.get_ref() as usize),
            Some(n) => Err(s.error(n, field, format!("must be at least 1 (got {})", n.get_ref()))),
        }
    };
    let mc_samples = count(&run.mc_samples, "run.mc_samples", DEFAULT_MC_SAMPLES)?;
    let budget = count(&run.budget, "run.budget", DEFAULT_BUDGET)?;
    let seed = match &run.seed {
        None => DEFAULT_SEED,
        Some(n) if *n.get_ref() >= 0 => *n.get_ref() as u64,
        Some(n) => return Err(s.error(n, "run.seed", "must be nonnegative")),
    };

    let mut spec = SweepSpec {
        base,
        sweep,
        scenario,
        schemes,
        modes,
        mc_samples,
        seed,
        budget,
        symmetric_rates: run.symmetric_rates.unwrap_or(true),
    };
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    if let Some(n) = overrides.mc_samples {
        if n == 0 {
            return Err(CliError::Config("--samples must be at least 1".into()));
        }
        spec.mc_samples = n;
    }
    if let Some(b) = overrides.budget {
        spec.budget = b;
    }
    Ok(spec)
}

fn parse_schemes(s: &Source, v: &Spanned<toml::Value>, scenario: Scenario) -> CliResult<Vec<Scheme>> {
    let field = "run.schemes";
    let items = v
        .get_ref()
        .as_array()
        .ok_or_else(|| s.error(v, field, "expected an array"))?;
    if items.is_empty() {
        return Err(s.error(v, field, "at least one scheme is required"));
    }
    let mut out = Vec::new();
    for item in items {
        let scheme = match scenario {
            Scenario::Nonfading => {
                let layers = item
                    .as_array()
                    .and_then(|a| a.iter().map(|k| k.as_integer().map(|k| k as usize)).collect::<Option<Vec<_>>>())
                    .ok_or_else(|| s.error(v, field, format!("`{item}` is not a list of layers such as [1, 2, 5]")))?;
                let mask = SchemeMask::new(5, &layers)
                    .map_err(|e| s.error(v, field, format!("`{item}` is not a valid mask: {e}")))?;
                Scheme::Mask(mask.layers().to_vec())
            }
            Scenario::Fading => match item.as_integer() {
                Some(n @ 1..=2) => Scheme::Layers(n as usize),
                _ => return Err(s.error(v, field, format!("`{item}` is not a layer count (1 or 2)"))),
            },
        };
        if out.contains(&scheme) {
            return Err(s.error(v, field, format!("`{item}` listed twice")));
        }
        out.push(scheme);
    }
    Ok(out)
}
