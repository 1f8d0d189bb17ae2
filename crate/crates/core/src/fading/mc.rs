use std::collections::VecDeque;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{FadingRates, OutageMode, StateChannel, Thresholds};
use crate::model::{sample_gains, state_probability, BackhaulState, ChannelGains, SystemParams};
use crate::numerics::{maximize_screened, Axis, Spacing};
use crate::par::{pairwise_sum, Execution};

/// One fading draw with its channel in each backhaul state, indexed by
/// [`BackhaulState::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSample {
    pub gains: ChannelGains,
    pub channels: [StateChannel; 4],
}

impl FadingSample {
    pub fn new(params: &SystemParams, gains: ChannelGains) -> Result<Self> {
        let mut channels = [StateChannel::new(params, &gains, BackhaulState::LL)?; 4];
        for state in BackhaulState::ALL {
            channels[state.index()] = StateChannel::new(params, &gains, state)?;
        }
        Ok(FadingSample { gains, channels })
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Zero for a single sample.
    pub std_error: f64,
}

impl Estimate {
    /// Mean and standard error, summed in a fixed pairwise order.
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = pairwise_sum(values) / n;
        if values.len() < 2 {
            return Estimate { mean, std_error: 0.0 };
        }
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = pairwise_sum(&dev) / (n - 1.0);
        Estimate {
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

/// How the optimizer parameterizes the rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchShape {
    /// Both users share each layer's rate.
    Symmetric,
    /// All four rates free.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingOptimum {
    pub lambda2: f64,
    pub rates: FadingRates,
    pub estimate: Estimate,
    /// Objective evaluations, nested searches included.
    pub evaluations: usize,
}

/// Grid points on the second-layer power axis.
pub const LAMBDA_GRID_POINTS: usize = 13;
/// Grid points per rate axis with symmetric rates.
pub const RATE_GRID_POINTS: usize = 32;
/// Grid points on the second-layer power axis with free rates.
pub const FULL_LAMBDA_GRID_POINTS: usize = 5;
/// Grid points per rate axis with free rates.
pub const FULL_RATE_GRID_POINTS: usize = 7;
/// Leading draws used to rank the coarse grid.
pub const SCREEN_SAMPLES: usize = 2000;
/// Grid points refined by pattern search.
pub const SEARCH_STARTS: usize = 4;
/// Final pattern-search step in unit grid coordinates.
const MIN_STEP: f64 = 1e-6;
/// Threshold tables kept for reuse across candidates.
const TABLE_CACHE: usize = 8;

/// Thresholds of every draw, one row per draw with one entry per active
/// backhaul state.
type Table = Arc<Vec<Thresholds>>;

/// Monte Carlo evaluator over a fixed set of fading draws. Every candidate
/// is scored on the same draws, so comparisons between candidates share
/// their randomness.
pub struct FadingEvaluator {
    params: SystemParams,
    exec: Execution,
    samples: Vec<FadingSample>,
    /// Backhaul states with positive probability and their weights.
    active: Vec<(BackhaulState, f64)>,
    tables: Mutex<VecDeque<(u64, Table)>>,
}

impl FadingEvaluator {
    /// Draws `n_samples` realizations from stream `seed`; draw `i` depends
    /// only on `(seed, i)`.
    pub fn new(params: &SystemParams, n_samples: usize, seed: u64, exec: Execution) -> Result<Self> {
        params.validate()?;
        if n_samples == 0 {
            return Err(Error::Domain {
                name: "n_samples",
                value: 0.0,
                expected: "at least one sample",
            });
        }
        let samples = exec
            .map_indexed(n_samples, |i| FadingSample::new(params, sample_gains(seed, i as u64)))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        // Without refinement every state sees the same channel.
        let active = if params.cap_delta == 0.0 {
            vec![(BackhaulState::LL, 1.0)]
        } else {
            BackhaulState::ALL
                .into_iter()
                .map(|s| (s, state_probability(s, params.p_low)))
                .filter(|(_, w)| *w > 0.0)
                .collect()
        };
        Ok(FadingEvaluator {
            params: *params,
            exec,
            samples,
            active,
            tables: Mutex::new(VecDeque::new()),
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn samples(&self) -> &[FadingSample] {
        &self.samples
    }

    /// Decoding thresholds of every draw and state at power split `lambda2`.
    pub fn thresholds(&self, lambda2: f64) -> Table {
        let key = lambda2.to_bits();
        {
            let cache = self.tables.lock().expect("table cache poisoned");
            if let Some((_, t)) = cache.iter().find(|(k, _)| *k == key) {
                return Arc::clone(t);
            }
        }
        let rows = self.exec.map_slice(&self.samples, |s| {
            self.active
                .iter()
                .map(|(state, _)| Thresholds::compute(&s.channels[state.index()], lambda2))
                .collect::<Vec<_>>()
        });
        let table: Table = Arc::new(rows.into_iter().flatten().collect());
        let mut cache = self.tables.lock().expect("table cache poisoned");
        if cache.len() == TABLE_CACHE {
            cache.pop_front();
        }
        cache.push_back((key, Arc::clone(&table)));
        table
    }

    /// Backhaul-averaged throughput of every draw.
    pub fn payoffs(&self, lambda2: f64, rates: &FadingRates, mode: OutageMode) -> Vec<f64> {
        self.leading_payoffs(self.samples.len(), lambda2, rates, mode)
    }

    fn leading_payoffs(&self, n: usize, lambda2: f64, rates: &FadingRates, mode: OutageMode) -> Vec<f64> {
        let table = self.thresholds(lambda2);
        let k = self.active.len();
        let rows = &table[..n * k];
        self.exec.map_indexed(n, |i| {
            rows[i * k..(i + 1) * k]
                .iter()
                .zip(&self.active)
                .map(|(th, (_, w))| w * th.decode(rates, mode).throughput)
                .sum()
        })
    }

    pub fn estimate(&self, lambda2: f64, rates: &FadingRates, mode: OutageMode) -> Estimate {
        Estimate::from_samples(&self.payoffs(lambda2, rates, mode))
    }

    /// Largest rate the search considers on any axis.
    pub fn rate_limit(&self) -> f64 {
        (2.0 * (1.0 + 2.0 * self.params.power).log2()).max(1e-9)
    }

    pub fn optimize(&self, mode: OutageMode, layers: usize, shape: SearchShape, budget: usize) -> Result<FadingOptimum> {
        self.optimize_seeded(mode, layers, shape, budget, &[])
    }

    /// Maximizes the estimate over the power split and rates, also trying
    /// each `(lambda2, rates)` in `seeds`. The two-layer search is seeded
    /// with the one-layer optimum and the free-rate search with the
    /// symmetric optimum, so neither can end below its restriction.
    pub fn optimize_seeded(
        &self,
        mode: OutageMode,
        layers: usize,
        shape: SearchShape,
        budget: usize,
        seeds: &[(f64, FadingRates)],
    ) -> Result<FadingOptimum> {
        if layers != 1 && layers != 2 {
            return Err(Error::Domain {
                name: "layers",
                value: layers as f64,
                expected: "1 or 2 layers",
            });
        }
        let mut seeds = seeds.to_vec();
        let mut evaluations = 0;
        if layers == 2 {
            let one = self.optimize(mode, 1, shape, budget)?;
            evaluations += one.evaluations;
            seeds.push((one.lambda2, one.rates));
        }
        if shape == SearchShape::Full {
            let sym = self.optimize(mode, layers, SearchShape::Symmetric, budget)?;
            evaluations += sym.evaluations;
            seeds.push((sym.lambda2, sym.rates));
        }

        let layout = Layout { layers, shape };
        let axes = layout.axes(self.rate_limit());
        let seed_points: Vec<Vec<f64>> = seeds.iter().filter_map(|(l, r)| layout.encode(*l, r)).collect();
        let screen_len = self.samples.len().min(SCREEN_SAMPLES);
        let screen = |x: &[f64]| {
            let (l, r) = layout.decode(x);
            pairwise_sum(&self.leading_payoffs(screen_len, l, &r, mode))
        };
        let objective = |x: &[f64]| {
            let (l, r) = layout.decode(x);
            self.estimate(l, &r, mode).mean
        };
        let out = maximize_screened(
            screen,
            objective,
            &axes,
            |_| true,
            &seed_points,
            SEARCH_STARTS,
            budget,
            MIN_STEP,
            Execution::Sequential,
        )?;
        let (lambda2, rates) = layout.decode(&out.point);
        Ok(FadingOptimum {
            lambda2,
            rates,
            estimate: self.estimate(lambda2, &rates, mode),
            evaluations: evaluations + out.evaluations,
        })
    }
}

#[derive(Clone, Copy)]
struct Layout {
    layers: usize,
    shape: SearchShape,
}

impl Layout {
    fn axes(&self, rate_max: f64) -> Vec<Axis> {
        let (lambda_points, rate_points, rate_axes) = match self.shape {
            SearchShape::Symmetric => (LAMBDA_GRID_POINTS, RATE_GRID_POINTS, self.layers),
            SearchShape::Full => (FULL_LAMBDA_GRID_POINTS, FULL_RATE_GRID_POINTS, 2 * self.layers),
        };
        let mut axes = Vec::new();
        if self.layers == 2 {
            axes.push(Axis {
                lower: 0.0,
                upper: 1.0,
                points: lambda_points,
                spacing: Spacing::Power(3.0),
            });
        }
        axes.extend((0..rate_axes).map(|_| Axis::linear(0.0, rate_max, rate_points)));
        axes
    }

    fn decode(&self, x: &[f64]) -> (f64, FadingRates) {
        let r = |v: f64| v.max(0.0);
        match (self.layers, self.shape) {
            (1, SearchShape::Symmetric) => (0.0, FadingRates::symmetric(r(x[0]), 0.0)),
            (1, SearchShape::Full) => (0.0, FadingRates { r11: r(x[0]), r21: r(x[1]), r12: 0.0, r22: 0.0 }),
            (_, SearchShape::Symmetric) => (x[0].clamp(0.0, 1.0), FadingRates::symmetric(r(x[1]), r(x[2]))),
            (_, SearchShape::Full) => (
                x[0].clamp(0.0, 1.0),
                FadingRates {
                    r11: r(x[1]),
                    r21: r(x[2]),
                    r12: r(x[3]),
                    r22: r(x[4]),
                },
            ),
        }
    }

    /// Search coordinates of a candidate, if the layout can represent it.
    fn encode(&self, lambda2: f64, rates: &FadingRates) -> Option<Vec<f64>> {
        let symmetric = rates.r11 == rates.r21 && rates.r12 == rates.r22;
        match (self.layers, self.shape) {
            (1, _) if lambda2 != 0.0 || rates.r12 != 0.0 || rates.r22 != 0.0 => None,
            (_, SearchShape::Symmetric) if !symmetric => None,
            (1, SearchShape::Symmetric) => Some(vec![rates.r11]),
            (1, SearchShape::Full) => Some(vec![rates.r11, rates.r21]),
            (_, SearchShape::Symmetric) => Some(vec![lambda2, rates.r11, rates.r12]),
            (_, SearchShape::Full) => Some(vec![lambda2, rates.r11, rates.r21, rates.r12, rates.r22]),
        }
    }
}

/// Average throughput over `n_samples` fading draws with the backhaul
/// states averaged exactly.
pub fn mc_average_throughput(
    params: &SystemParams,
    lambda2: f64,
    rates: &FadingRates,
    mode: OutageMode,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&lambda2) {
        return Err(Error::Domain {
            name: "lambda2",
            value: lambda2,
            expected: "0 ≤ lambda2 ≤ 1",
        });
    }
    Ok(FadingEvaluator::new(params, n_samples, seed, exec)?.estimate(lambda2, rates, mode))
}

/// Best estimated throughput with `layers` broadcast layers.
#[allow(clippy::too_many_arguments)]
pub fn optimize_fading(
    params: &SystemParams,
    mode: OutageMode,
    layers: usize,
    shape: SearchShape,
    n_samples: usize,
    seed: u64,
    budget: usize,
    exec: Execution,
) -> Result<FadingOptimum> {
    FadingEvaluator::new(params, n_samples, seed, exec)?.optimize(mode, layers, shape, budget)
}
