//! Two-layer broadcast coding under quasi-static Rayleigh fading with
//! separate decompression: compression noises per realization, decoding
//! regions, common and individual outage decoding, and Monte Carlo
//! evaluation and optimization of the average throughput.

mod mc;

pub use mc::{
    mc_average_throughput, optimize_fading, Estimate, FadingEvaluator, FadingOptimum, FadingSample, SearchShape,
    FULL_LAMBDA_GRID_POINTS, FULL_RATE_GRID_POINTS, LAMBDA_GRID_POINTS, RATE_GRID_POINTS, SCREEN_SAMPLES,
    SEARCH_STARTS,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gain_matrices_fading, BackhaulState, ChannelGains, HermitianM2, SystemParams};
use crate::numerics::logdet_form;

/// Compression noise variances chosen by each base station for the current
/// fading realization; index 0 is base station 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingNoises {
    pub sigma1_sq: [f64; 2],
    pub sigma2_sq: [f64; 2],
}

/// Per-realization noises meeting both backhaul rates with equality.
pub fn fading_noises(params: &SystemParams, gains: &ChannelGains) -> Result<FadingNoises> {
    params.validate()?;
    if !(params.cap_low > 0.0) {
        return Err(Error::DegenerateCapacity {
            cap_low: params.cap_low,
            cap_delta: params.cap_delta,
        });
    }
    let p = params.power;
    let a2 = params.alpha * params.alpha;
    let received = [
        p * (gains.a11.norm_sqr() + a2 * gains.a12.norm_sqr()) + 1.0,
        p * (gains.a22.norm_sqr() + a2 * gains.a21.norm_sqr()) + 1.0,
    ];
    let high = 2f64.powf(params.cap_low + params.cap_delta) - 1.0;
    let ratio = 2f64.powf(params.cap_low) * (2f64.powf(params.cap_delta) - 1.0) / (2f64.powf(params.cap_low) - 1.0);
    let sigma2_sq = received.map(|k| k / high);
    Ok(FadingNoises {
        sigma1_sq: sigma2_sq.map(|s| ratio * s),
        sigma2_sq,
    })
}

/// Equivalent noise `(f1, f2)` at the two base stations: a low link adds
/// both noises, a high link only the refinement noise.
pub fn effective_noise(noises: &FadingNoises, state: BackhaulState) -> [f64; 2] {
    [0, 1].map(|j| {
        if state.is_high(j) {
            1.0 + noises.sigma2_sq[j]
        } else {
            1.0 + noises.sigma1_sq[j] + noises.sigma2_sq[j]
        }
    })
}

/// How a layer counts as delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutageMode {
    /// Only when both users' messages at the layer are decoded.
    Common,
    /// Per user; one message of a layer may be decoded without the other.
    Individual,
}

impl fmt::Display for OutageMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutageMode::Common => "common",
            OutageMode::Individual => "individual",
        })
    }
}

/// Rates `R_{user,layer}` of the two-layer scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingRates {
    pub r11: f64,
    pub r21: f64,
    pub r12: f64,
    pub r22: f64,
}

impl FadingRates {
    pub fn new(r11: f64, r21: f64, r12: f64, r22: f64) -> Result<Self> {
        for (name, v) in [("r11", r11), ("r21", r21), ("r12", r12), ("r22", r22)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    expected: "finite rate ≥ 0",
                });
            }
        }
        Ok(FadingRates { r11, r21, r12, r22 })
    }

    /// Both users at rate `first` on layer 1 and `second` on layer 2.
    pub fn symmetric(first: f64, second: f64) -> Self {
        FadingRates {
            r11: first,
            r21: first,
            r12: second,
            r22: second,
        }
    }

    /// Rate of `user` on `layer`, both 1-based.
    pub fn get(&self, user: usize, layer: usize) -> f64 {
        match (user, layer) {
            (1, 1) => self.r11,
            (2, 1) => self.r21,
            (1, 2) => self.r12,
            (2, 2) => self.r22,
            _ => panic!("no rate for user {user}, layer {layer}"),
        }
    }

    pub fn total(&self) -> f64 {
        self.r11 + self.r21 + self.r12 + self.r22
    }

    /// Rates with the two users relabelled.
    pub fn swapped(&self) -> Self {
        FadingRates {
            r11: self.r21,
            r21: self.r11,
            r12: self.r22,
            r22: self.r12,
        }
    }
}

/// Channel seen by the central processor in one fading and backhaul state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateChannel {
    pub power: f64,
    pub a1: HermitianM2,
    pub a2: HermitianM2,
    pub noise: [f64; 2],
}

impl StateChannel {
    pub fn new(params: &SystemParams, gains: &ChannelGains, state: BackhaulState) -> Result<Self> {
        let noises = fading_noises(params, gains)?;
        let (a1, a2) = gain_matrices_fading(gains, params.alpha);
        Ok(StateChannel {
            power: params.power,
            a1,
            a2,
            noise: effective_noise(&noises, state),
        })
    }

    fn gain(&self, user: usize) -> HermitianM2 {
        if user == 1 {
            self.a1
        } else {
            self.a2
        }
    }

    fn noise_matrix(&self) -> HermitianM2 {
        HermitianM2::diag(self.noise[0], self.noise[1])
    }
}

/// Decoding thresholds of one realization and state at a given power split.
/// Pairs are indexed by user (`[0]` is user 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Joint decoding of both first-layer messages: individual bounds for
    /// users 1 and 2, then the sum bound.
    pub joint1: [f64; 3],
    /// Joint decoding of both second-layer messages after both first-layer
    /// messages: individual bounds, then the sum bound.
    pub joint2: [f64; 3],
    /// First-layer message of one user with everything else as noise.
    pub single1: [f64; 2],
    /// Second-layer message of one user after both first-layer messages,
    /// with the other user's second layer as noise.
    pub after_both: [f64; 2],
    /// Second-layer message of one user after only its own first layer,
    /// with the other user's whole signal as noise.
    pub after_own: [f64; 2],
}

fn mac(num: &HermitianM2, den: &HermitianM2) -> f64 {
    logdet_form(num, den, 1.0).expect("unit channel noise keeps the denominator positive definite")
}

impl Thresholds {
    pub fn compute(ch: &StateChannel, lambda2: f64) -> Self {
        let p = ch.power;
        let l1 = 1.0 - lambda2;
        let (a1, a2) = (ch.a1, ch.a2);
        let d = ch.noise_matrix();
        let sum = a1 + a2;

        let den1 = (lambda2 * p) * sum + d;
        let joint1 = [
            mac(&((l1 * p) * a1), &den1),
            mac(&((l1 * p) * a2), &den1),
            mac(&((l1 * p) * sum), &den1),
        ];
        let joint2 = [
            mac(&((lambda2 * p) * a1), &d),
            mac(&((lambda2 * p) * a2), &d),
            mac(&((lambda2 * p) * sum), &d),
        ];
        let single1 = [1, 2].map(|j| {
            let (own, other) = (ch.gain(j), ch.gain(3 - j));
            mac(&((l1 * p) * own), &((lambda2 * p) * own + p * other + d))
        });
        let after_both = [1, 2].map(|j| {
            let (own, other) = (ch.gain(j), ch.gain(3 - j));
            mac(&((lambda2 * p) * own), &((lambda2 * p) * other + d))
        });
        let after_own = [1, 2].map(|j| {
            let (own, other) = (ch.gain(j), ch.gain(3 - j));
            mac(&((lambda2 * p) * own), &(p * other + d))
        });
        Thresholds {
            joint1,
            joint2,
            single1,
            after_both,
            after_own,
        }
    }

    /// Joint decodability of both messages of `layer`.
    pub fn joint_layer_region(&self, layer: usize, rates: &FadingRates) -> bool {
        let t = if layer == 1 { &self.joint1 } else { &self.joint2 };
        let (r1, r2) = (rates.get(1, layer), rates.get(2, layer));
        r1 <= t[0] && r2 <= t[1] && r1 + r2 <= t[2]
    }

    /// First-layer message of `user` decodable while the other user's is not.
    pub fn single_user_layer1_region(&self, user: usize, rates: &FadingRates) -> bool {
        let other = 3 - user;
        rates.get(user, 1) <= self.single1[user - 1] && rates.get(other, 1) > self.joint1[other - 1]
    }

    /// Second-layer message of `user` decodable while the other user's is
    /// not, once both first-layer messages are known.
    pub fn after_both_region(&self, user: usize, rates: &FadingRates) -> bool {
        let other = 3 - user;
        rates.get(user, 2) <= self.after_both[user - 1] && rates.get(other, 2) > self.joint2[other - 1]
    }

    /// Second-layer message of `user` decodable when only its own first-layer
    /// message is known.
    pub fn after_own_region(&self, user: usize, rates: &FadingRates) -> bool {
        rates.get(user, 2) <= self.after_own[user - 1]
    }

    pub fn decode(&self, rates: &FadingRates, mode: OutageMode) -> DecodeOutcome {
        match mode {
            OutageMode::Common => self.decode_common(rates),
            OutageMode::Individual => self.decode_individual(rates),
        }
    }

    /// Both first-layer messages or nothing; then both second-layer messages
    /// or none.
    pub fn decode_common(&self, rates: &FadingRates) -> DecodeOutcome {
        let mut decoded = [[false; 2]; 2];
        if self.joint_layer_region(1, rates) {
            decoded[0][0] = true;
            decoded[1][0] = true;
            if self.joint_layer_region(2, rates) {
                decoded[0][1] = true;
                decoded[1][1] = true;
            }
        }
        DecodeOutcome::new(decoded, rates)
    }

    /// Successive decoding that may stop one user short of the other.
    pub fn decode_individual(&self, rates: &FadingRates) -> DecodeOutcome {
        let mut decoded = [[false; 2]; 2];
        if self.joint_layer_region(1, rates) {
            decoded[0][0] = true;
            decoded[1][0] = true;
            if self.joint_layer_region(2, rates) {
                decoded[0][1] = true;
                decoded[1][1] = true;
            } else if self.after_both_region(1, rates) {
                decoded[0][1] = true;
            } else if self.after_both_region(2, rates) {
                decoded[1][1] = true;
            }
        } else {
            for user in [1, 2] {
                if self.single_user_layer1_region(user, rates) {
                    decoded[user - 1][0] = true;
                    decoded[user - 1][1] = self.after_own_region(user, rates);
                    break;
                }
            }
        }
        DecodeOutcome::new(decoded, rates)
    }
}

/// Messages delivered in one realization and state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    /// `decoded[user − 1][layer − 1]`.
    pub decoded: [[bool; 2]; 2],
    pub throughput: f64,
}

impl DecodeOutcome {
    fn new(decoded: [[bool; 2]; 2], rates: &FadingRates) -> Self {
        let mut throughput = 0.0;
        for user in [1, 2] {
            for layer in [1, 2] {
                if decoded[user - 1][layer - 1] {
                    throughput += rates.get(user, layer);
                }
            }
        }
        DecodeOutcome { decoded, throughput }
    }

    pub fn contains(&self, user: usize, layer: usize) -> bool {
        self.decoded[user - 1][layer - 1]
    }
}

/// Common outage decoding of one realization in one backhaul state.
pub fn decode_common(
    params: &SystemParams,
    gains: &ChannelGains,
    state: BackhaulState,
    lambda2: f64,
    rates: &FadingRates,
) -> Result<DecodeOutcome> {
    let ch = StateChannel::new(params, gains, state)?;
    Ok(Thresholds::compute(&ch, lambda2).decode_common(rates))
}

/// Individual outage decoding of one realization in one backhaul state.
pub fn decode_individual(
    params: &SystemParams,
    gains: &ChannelGains,
    state: BackhaulState,
    lambda2: f64,
    rates: &FadingRates,
) -> Result<DecodeOutcome> {
    let ch = StateChannel::new(params, gains, state)?;
    Ok(Thresholds::compute(&ch, lambda2).decode_individual(rates))
}
