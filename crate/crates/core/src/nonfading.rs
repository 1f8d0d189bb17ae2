//! Throughput without fading: compression noises, layer-rate bounds, state
//! throughputs, power-allocation search and the genie-aided upper bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{gain_matrices_nf, HermitianM2, SystemParams};
use crate::numerics::{
    logdet_form, max_weight_rates, maximize_on_box, maximize_on_simplex_seeded, positive_quadratic_root, RateWeights,
    SchemeMask, SimplexPoint,
};
use crate::par::Execution;

/// How the coarse descriptions of the two base stations are decompressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompressionMode {
    Separate,
    Joint,
}

impl fmt::Display for DecompressionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecompressionMode::Separate => "separate",
            DecompressionMode::Joint => "joint",
        })
    }
}

/// Quantization noise variances: the refined description carries noise
/// `sigma2_sq`, the coarse one `sigma1_sq + sigma2_sq`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompressionNoises {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
}

impl CompressionNoises {
    pub fn coarse(&self) -> f64 {
        self.sigma1_sq + self.sigma2_sq
    }
}

fn require_capacity(params: &SystemParams) -> Result<()> {
    if params.cap_low > 0.0 {
        Ok(())
    } else {
        Err(Error::DegenerateCapacity {
            cap_low: params.cap_low,
            cap_delta: params.cap_delta,
        })
    }
}

/// Noises for separate decompression: each base station meets its backhaul
/// rates with equality on its own.
pub fn sigma_separate(params: &SystemParams) -> Result<CompressionNoises> {
    params.validate()?;
    require_capacity(params)?;
    let k = params.received_variance_nf();
    let low = 2f64.powf(2.0 * params.cap_low) - 1.0;
    let high = 2f64.powf(2.0 * (params.cap_low + params.cap_delta)) - 1.0;
    let sigma2_sq = k / high;
    let sigma1_sq = if params.cap_delta == 0.0 {
        0.0
    } else {
        2f64.powf(2.0 * params.cap_low) * (2f64.powf(2.0 * params.cap_delta) - 1.0) * k / (low * high)
    };
    Ok(CompressionNoises { sigma1_sq, sigma2_sq })
}

/// Eigenvalues `P(1∓α)²+1` of the received-signal covariance.
fn received_eigenvalues(params: &SystemParams) -> (f64, f64) {
    let p = params.power;
    let a = params.alpha;
    (p * (1.0 - a).powi(2) + 1.0, p * (1.0 + a).powi(2) + 1.0)
}

/// Noise `s` on both coarse descriptions whose joint description rate equals
/// `2·cap` bits: the positive root of `(2^{4·cap}−1)s² − (b1+b2)s − b1·b2`.
pub fn sum_rate_noise(params: &SystemParams, cap: f64) -> Result<f64> {
    let (b1, b2) = received_eigenvalues(params);
    let s = positive_quadratic_root(2f64.powf(4.0 * cap) - 1.0, -(b1 + b2), -b1 * b2)?;
    let residual = 0.5 * (1.0 + b1 / s).log2() + 0.5 * (1.0 + b2 / s).log2() - 2.0 * cap;
    if residual.abs() > 1e-10 * cap.max(1.0) {
        return Err(Error::Residual {
            what: "sum-rate description equation",
            residual,
        });
    }
    Ok(s)
}

/// Noises for joint (binned) decompression of the coarse descriptions.
pub fn sigma_joint(params: &SystemParams) -> Result<CompressionNoises> {
    params.validate()?;
    require_capacity(params)?;
    let k = params.received_variance_nf();
    let s = sum_rate_noise(params, params.cap_low)?;
    let sigma2_sq = s * k / (2f64.powf(2.0 * params.cap_delta) * (k + s) - s);
    let sigma1_sq = (s - sigma2_sq).max(0.0);
    let refinement = 0.5 * (1.0 + sigma1_sq / sigma2_sq).log2() + 0.5 * (1.0 - sigma1_sq / (k + s)).log2();
    let residual = refinement - params.cap_delta;
    if residual.abs() > 1e-10 * params.cap_delta.max(1.0) {
        return Err(Error::Residual {
            what: "refinement-rate equation",
            residual,
        });
    }
    Ok(CompressionNoises { sigma1_sq, sigma2_sq })
}

pub fn noises(params: &SystemParams, mode: DecompressionMode) -> Result<CompressionNoises> {
    match mode {
        DecompressionMode::Separate => sigma_separate(params),
        DecompressionMode::Joint => sigma_joint(params),
    }
}

/// Right-hand sides of the six rate constraints, in bits per channel use.
///
/// `c_a`: layer-1 sum rate (every state); `c_b`: layer-2 sum rate (any link
/// high); `c_c`, `c_d`, `c_e`: the layer-3 rate, layer-4 rate and their cross
/// sum for the pair decoded with one specific link high; `c_f`: layer-5 sum
/// rate (both links high).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerBounds {
    pub c_a: f64,
    pub c_b: f64,
    pub c_c: f64,
    pub c_d: f64,
    pub c_e: f64,
    pub c_f: f64,
}

impl LayerBounds {
    pub fn as_array(&self) -> [f64; 6] {
        [self.c_a, self.c_b, self.c_c, self.c_d, self.c_e, self.c_f]
    }
}

/// Interference covariance `P[(Σ_{k∈I1} λ_k)·A1 + (Σ_{k∈I2} λ_k)·A2]` of the
/// layers still undecoded for user 1 (`I1`) and user 2 (`I2`).
pub fn interference(
    power: f64,
    lambda: &SimplexPoint,
    a1: &HermitianM2,
    a2: &HermitianM2,
    undecoded_1: &[usize],
    undecoded_2: &[usize],
) -> HermitianM2 {
    (power * lambda.sum_over(undecoded_1)) * *a1 + (power * lambda.sum_over(undecoded_2)) * *a2
}

/// Evaluates the six layer-rate bounds. The one-link-high noise profile is
/// the link-1-high one; the link-2-high state is its mirror image.
pub fn layer_bounds(params: &SystemParams, lambda: &SimplexPoint, noises: &CompressionNoises) -> Result<LayerBounds> {
    if lambda.dim() != 5 {
        return Err(Error::InvalidSimplex(format!("expected 5 layers, got {}", lambda.dim())));
    }
    let (a1, a2) = gain_matrices_nf(params.alpha)?;
    let p = params.power;
    let sum = a1 + a2;
    let coarse = 1.0 + noises.coarse();
    let refined = 1.0 + noises.sigma2_sq;
    let one_high = HermitianM2::diag(refined, coarse);

    let den_a = interference(p, lambda, &a1, &a2, &[2, 3, 4, 5], &[2, 3, 4, 5]) + HermitianM2::diag(coarse, coarse);
    let den_b = interference(p, lambda, &a1, &a2, &[3, 4, 5], &[3, 4, 5]) + one_high;
    let den_cde = interference(p, lambda, &a1, &a2, &[4, 5], &[3, 5]) + one_high;
    let den_f = HermitianM2::diag(refined, refined);

    Ok(LayerBounds {
        c_a: logdet_form(&((p * lambda.layer(1)) * sum), &den_a, 0.5)?,
        c_b: logdet_form(&((p * lambda.layer(2)) * sum), &den_b, 0.5)?,
        c_c: logdet_form(&((p * lambda.layer(3)) * a1), &den_cde, 0.5)?,
        c_d: logdet_form(&((p * lambda.layer(4)) * a2), &den_cde, 0.5)?,
        c_e: logdet_form(&((p * lambda.layer(3)) * a1 + (p * lambda.layer(4)) * a2), &den_cde, 0.5)?,
        c_f: logdet_form(&((p * lambda.layer(5)) * sum), &den_f, 0.5)?,
    })
}

/// Per-user, per-layer rates in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateAssignment {
    rates: [[f64; 5]; 2],
}

impl RateAssignment {
    pub fn from_array(rates: [[f64; 5]; 2]) -> Self {
        RateAssignment { rates }
    }

    pub fn uniform(rate: f64) -> Self {
        RateAssignment { rates: [[rate; 5]; 2] }
    }

    /// Rate `R_{user,layer}`, both indices 1-based.
    pub fn get(&self, user: usize, layer: usize) -> f64 {
        self.rates[user - 1][layer - 1]
    }

    /// `(R11..R15, R21..R25)`.
    pub fn as_vector(&self) -> Vec<f64> {
        self.rates.iter().flatten().copied().collect()
    }

    pub fn weighted_sum(&self, weights: &RateWeights) -> f64 {
        self.rates
            .iter()
            .map(|user| user.iter().zip(&weights.0).map(|(r, w)| r * w).sum::<f64>())
            .sum()
    }

    pub fn satisfies(&self, bounds: &LayerBounds, tol: f64) -> bool {
        let r = |u, k| self.get(u, k);
        self.rates.iter().flatten().all(|v| *v >= -tol)
            && r(1, 1) + r(2, 1) <= bounds.c_a + tol
            && r(1, 2) + r(2, 2) <= bounds.c_b + tol
            && r(1, 3) <= bounds.c_c + tol
            && r(2, 3) <= bounds.c_c + tol
            && r(1, 4) <= bounds.c_d + tol
            && r(2, 4) <= bounds.c_d + tol
            && r(1, 3) + r(2, 4) <= bounds.c_e + tol
            && r(2, 3) + r(1, 4) <= bounds.c_e + tol
            && r(1, 5) + r(2, 5) <= bounds.c_f + tol
    }
}

/// Throughput delivered in each backhaul state `(LL, HL, LH, HH)`.
pub fn state_throughputs(rates: &RateAssignment) -> [f64; 4] {
    let r = |u, k| rates.get(u, k);
    let t1 = r(1, 1) + r(2, 1);
    let t12 = t1 + r(1, 2) + r(2, 2);
    let t2 = t12 + r(1, 3) + r(2, 4);
    let t3 = t12 + r(1, 4) + r(2, 3);
    let t4 = rates.as_vector().iter().sum();
    [t1, t2, t3, t4]
}

/// Probability-weighted average of the state throughputs.
pub fn average_throughput(t: &[f64; 4], p_low: f64) -> f64 {
    let q = 1.0 - p_low;
    p_low * p_low * t[0] + p_low * q * (t[1] + t[2]) + q * q * t[3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    /// Throughputs in states `(LL, HL, LH, HH)`.
    pub states: [f64; 4],
    pub average: f64,
    pub lambda: SimplexPoint,
    pub mode: DecompressionMode,
    pub rates: RateAssignment,
    pub noises: CompressionNoises,
    pub bounds: LayerBounds,
}

fn evaluate(
    params: &SystemParams,
    lambda: &SimplexPoint,
    mode: DecompressionMode,
    noises: CompressionNoises,
) -> Result<ThroughputReport> {
    let bounds = layer_bounds(params, lambda, &noises)?;
    let rates = max_weight_rates(&bounds, &RateWeights::from_p_low(params.p_low));
    let states = state_throughputs(&rates);
    Ok(ThroughputReport {
        states,
        average: average_throughput(&states, params.p_low),
        lambda: lambda.clone(),
        mode,
        rates,
        noises,
        bounds,
    })
}

/// Average throughput of the layered scheme at power split `lambda`.
pub fn achievable_throughput(
    params: &SystemParams,
    lambda: &SimplexPoint,
    mode: DecompressionMode,
) -> Result<ThroughputReport> {
    evaluate(params, lambda, mode, noises(params, mode)?)
}

/// Best average throughput over power splits supported on `mask`.
pub fn optimize_scheme(
    params: &SystemParams,
    mode: DecompressionMode,
    mask: &SchemeMask,
    budget: usize,
    exec: Execution,
) -> Result<ThroughputReport> {
    optimize_scheme_seeded(params, mode, mask, &[], budget, exec)
}

/// Like [`optimize_scheme`], but never returns less than the best seed
/// supported on `mask`.
pub fn optimize_scheme_seeded(
    params: &SystemParams,
    mode: DecompressionMode,
    mask: &SchemeMask,
    seeds: &[SimplexPoint],
    budget: usize,
    exec: Execution,
) -> Result<ThroughputReport> {
    if mask.dim() != 5 {
        return Err(Error::InvalidMask(format!("expected a 5-layer mask, got {mask}")));
    }
    let noises = noises(params, mode)?;
    let objective = |lambda: &SimplexPoint| {
        evaluate(params, lambda, mode, noises)
            .map(|r| r.average)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let (lambda, _) = maximize_on_simplex_seeded(objective, mask, seeds, budget, exec);
    evaluate(params, &lambda, mode, noises)
}

/// Components of the genie-aided upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    /// Sum-rate bound with both links low.
    pub t_low: f64,
    /// Sum-rate bound with exactly one link high.
    pub t_mixed: f64,
    /// Sum-rate bound with both links high.
    pub t_high: f64,
    pub average: f64,
    /// Common noise on both descriptions with both links low.
    pub sigma_low_sq: f64,
    /// Noises on the high and the low link's description with one link high.
    pub sigma_mixed_sq: (f64, f64),
    /// Common noise on both descriptions with both links high.
    pub sigma_high_sq: f64,
}

/// Refinement evaluations spent on the mixed-state noise search.
pub const UPPER_BOUND_BUDGET: usize = 400;

/// Description-rate constraints for the mixed state: the high link carries
/// noise `x`, the low one `y`.
pub fn mixed_state_feasible(params: &SystemParams, x: f64, y: f64) -> bool {
    let (k, cross) = mixed_terms(params);
    let n = (k + x) * (k + y) - cross;
    let c = params.cap_low;
    let dc = params.cap_delta;
    0.5 * (n / ((k + y) * x)).log2() <= c + dc
        && 0.5 * (n / ((k + x) * y)).log2() <= c
        && 0.5 * (n / (x * y)).log2() <= 2.0 * c + dc
}

/// Smallest feasible high-link noise for low-link noise `y`, if any.
pub fn mixed_state_best_high_noise(params: &SystemParams, y: f64) -> Option<f64> {
    let (k, cross) = mixed_terms(params);
    let c = params.cap_low;
    let dc = params.cap_delta;
    let a = 2f64.powf(2.0 * (c + dc));
    let b = 2f64.powf(2.0 * (2.0 * c + dc));
    let d = 2f64.powf(2.0 * c);
    let m = k * (k + y) - cross;
    let slack = b * y - k - y;
    if !(y > 0.0) || slack <= 0.0 {
        return None;
    }
    let lo = (m / ((a - 1.0) * (k + y))).max(m / slack) * (1.0 + 1e-12);
    let room = k + y - d * y;
    if room > 0.0 && lo > cross / room - k {
        return None;
    }
    mixed_state_feasible(params, lo, y).then_some(lo)
}

fn mixed_terms(params: &SystemParams) -> (f64, f64) {
    let k = params.received_variance_nf();
    let cross = 4.0 * params.alpha * params.alpha * params.power * params.power;
    (k, cross)
}

/// Upper bound on the average throughput when every node knows the
/// backhaul state.
pub fn upper_bound(params: &SystemParams) -> Result<UpperBoundReport> {
    params.validate()?;
    require_capacity(params)?;
    let (a1, a2) = gain_matrices_nf(params.alpha)?;
    let signal = params.power * (a1 + a2);
    let sum_bound = |s: f64| logdet_form(&signal, &HermitianM2::diag(1.0 + s, 1.0 + s), 0.5);

    let sigma_low_sq = sum_rate_noise(params, params.cap_low)?;
    let sigma_high_sq = sum_rate_noise(params, params.cap_low + params.cap_delta)?;
    let t_low = sum_bound(sigma_low_sq)?;
    let t_high = sum_bound(sigma_high_sq)?;

    // The bound decreases in both noises. For a fixed low-link noise `y` the
    // constraints confine `x` to an interval, so the search runs over `y`
    // alone with `x` at the interval's lower end.
    let k = params.received_variance_nf();
    let floor = 0.5 / (2f64.powf(2.0 * (params.cap_low + params.cap_delta)) - 1.0);
    let ceil = 4.0 * k / (2f64.powf(2.0 * params.cap_low) - 1.0);
    let lower = [1e-6f64.min(floor)];
    let upper = [1e6f64.max(ceil)];
    if !mixed_state_feasible(params, upper[0], upper[0]) {
        return Err(Error::InfeasibleEverywhere);
    }
    let objective = |v: &[f64]| match mixed_state_best_high_noise(params, v[0]) {
        Some(x) => logdet_form(&signal, &HermitianM2::diag(1.0 + x, 1.0 + v[0]), 0.5).unwrap_or(f64::NEG_INFINITY),
        None => f64::NEG_INFINITY,
    };
    let (point, t_mixed) = maximize_on_box(
        objective,
        &lower,
        &upper,
        |v| mixed_state_best_high_noise(params, v[0]).is_some(),
        UPPER_BOUND_BUDGET,
    )?;
    let y = point[0];
    let x = mixed_state_best_high_noise(params, y).ok_or(Error::InfeasibleEverywhere)?;

    let p = params.p_low;
    let q = 1.0 - p;
    Ok(UpperBoundReport {
        t_low,
        t_mixed,
        t_high,
        average: p * p * t_low + 2.0 * p * q * t_mixed + q * q * t_high,
        sigma_low_sq,
        sigma_mixed_sq: (x, y),
        sigma_high_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn nf_point(p: f64) -> SystemParams {
        SystemParams::new(10.0, 0.3, 1.0, 0.5, p).unwrap()
    }

    #[test]
    fn separate_noises_worked_example() {
        let n = sigma_separate(&nf_point(0.1)).unwrap();
        assert_abs_diff_eq!(n.sigma2_sq, 11.9 / 7.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.sigma1_sq, 4.0 * 11.9 / 21.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n.coarse(), 11.9 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn separate_without_refinement() {
        let params = SystemParams::new(10.0, 0.3, 1.0, 0.0, 0.1).unwrap();
        assert_eq!(sigma_separate(&params).unwrap().sigma1_sq, 0.0);
        let params = SystemParams::new(10.0, 0.3, 1.0, 40.0, 0.1).unwrap();
        assert!(sigma_separate(&params).unwrap().sigma2_sq < 1e-20);
    }

    #[test]
    fn degenerate_capacity_is_rejected() {
        let params = SystemParams::new(10.0, 0.3, 0.0, 0.0, 0.1).unwrap();
        assert!(matches!(sigma_separate(&params), Err(Error::DegenerateCapacity { .. })));
        assert!(matches!(sigma_joint(&params), Err(Error::DegenerateCapacity { .. })));
        assert!(matches!(upper_bound(&params), Err(Error::DegenerateCapacity { .. })));
    }

    #[test]
    fn joint_noises_worked_example() {
        let n = sigma_joint(&nf_point(0.1)).unwrap();
        let s = (23.8 + (23.8f64 * 23.8 + 60.0 * 105.61).sqrt()) / 30.0;
        assert_abs_diff_eq!(n.coarse(), s, epsilon = 1e-12);
        assert_abs_diff_eq!(n.sigma2_sq, s * 11.9 / (2.0 * (11.9 + s) - s), epsilon = 1e-12);
        assert_abs_diff_eq!(n.sigma2_sq, 1.5495, epsilon = 1e-4);
        assert_abs_diff_eq!(n.sigma1_sq, 2.0134, epsilon = 1e-4);
        let sep = sigma_separate(&nf_point(0.1)).unwrap();
        assert!(n.coarse() < sep.coarse());
        assert!(n.sigma2_sq <= sep.sigma2_sq);
    }

    #[test]
    fn joint_collapses_without_interference() {
        let params = SystemParams::new(10.0, 0.0, 1.3, 0.5, 0.1).unwrap();
        let s = sigma_joint(&params).unwrap().coarse();
        assert_abs_diff_eq!(0.5 * (1.0 + 11.0 / s).log2(), 1.3, epsilon = 1e-12);
    }

    #[test]
    fn single_layer_bounds() {
        let params = nf_point(0.1);
        let n = sigma_separate(&params).unwrap();
        let b = layer_bounds(&params, &SimplexPoint::vertex(5, 1), &n).unwrap();
        assert_eq!([b.c_b, b.c_c, b.c_d, b.c_e, b.c_f], [0.0; 5]);
        let (a1, a2) = gain_matrices_nf(0.3).unwrap();
        let c = 1.0 + n.coarse();
        let want = logdet_form(&(10.0 * (a1 + a2)), &HermitianM2::diag(c, c), 0.5).unwrap();
        assert_abs_diff_eq!(b.c_a, want, epsilon = 1e-15);

        let b = layer_bounds(&params, &SimplexPoint::vertex(5, 5), &n).unwrap();
        assert_eq!(b.c_a, 0.0);
        let r = 1.0 + n.sigma2_sq;
        let want = logdet_form(&(10.0 * (a1 + a2)), &HermitianM2::diag(r, r), 0.5).unwrap();
        assert_abs_diff_eq!(b.c_f, want, epsilon = 1e-15);
    }

    #[test]
    fn state_throughput_counting() {
        assert_eq!(state_throughputs(&RateAssignment::uniform(0.0)), [0.0; 4]);
        assert_eq!(state_throughputs(&RateAssignment::uniform(1.0)), [2.0, 6.0, 6.0, 10.0]);
        let mut r = [[0.0; 5]; 2];
        r[0][0] = 0.7;
        r[1][0] = 0.7;
        assert_eq!(state_throughputs(&RateAssignment::from_array(r)), [1.4; 4]);
    }

    #[test]
    fn endpoint_probabilities() {
        let lambda = SimplexPoint::uniform(5);
        for mode in [DecompressionMode::Separate, DecompressionMode::Joint] {
            let r = achievable_throughput(&nf_point(1.0), &lambda, mode).unwrap();
            assert_abs_diff_eq!(r.average, r.states[0], epsilon = 1e-12);
            let r = achievable_throughput(&nf_point(0.0), &lambda, mode).unwrap();
            assert_abs_diff_eq!(r.average, r.states[3], epsilon = 1e-12);
        }
    }

    #[test]
    fn report_invariants() {
        let r = achievable_throughput(&nf_point(0.3), &SimplexPoint::uniform(5), DecompressionMode::Joint).unwrap();
        let t = r.states;
        assert!(t[3] >= t[1] && t[3] >= t[2] && t[1] >= t[0] && t[2] >= t[0]);
        let direct = 0.09 * t[0] + 0.21 * (t[1] + t[2]) + 0.49 * t[3];
        assert_abs_diff_eq!(r.average, direct, epsilon = 1e-12);
        assert!(r.rates.satisfies(&r.bounds, 1e-9));
    }

    #[test]
    fn single_layer_optimization_is_one_evaluation() {
        let r = optimize_scheme(
            &nf_point(0.1),
            DecompressionMode::Separate,
            &SchemeMask::one_layer(),
            100,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(r.lambda, SimplexPoint::vertex(5, 1));
    }

    #[test]
    fn upper_bound_low_state_example() {
        let ub = upper_bound(&nf_point(0.1)).unwrap();
        assert_abs_diff_eq!(ub.sigma_low_sq, 3.5628, epsilon = 1e-4);
        assert_abs_diff_eq!(ub.t_low, 1.643, epsilon = 5e-4);
        assert_abs_diff_eq!(ub.sigma_high_sq, 1.4973, epsilon = 1e-4);
        assert_abs_diff_eq!(ub.t_mixed, 1.963716, epsilon = 1e-6);
        assert_abs_diff_eq!(ub.t_high, 2.262007, epsilon = 1e-6);
        assert_abs_diff_eq!(ub.sigma_mixed_sq.0, 1.7, epsilon = 1e-5);
        assert_abs_diff_eq!(ub.sigma_mixed_sq.1, 3.0843, epsilon = 1e-4);
        assert!(mixed_state_feasible(&nf_point(0.1), ub.sigma_mixed_sq.0, ub.sigma_mixed_sq.1));
        assert!(ub.t_low <= ub.t_mixed && ub.t_mixed <= ub.t_high);
    }

    #[test]
    fn upper_bound_without_refinement() {
        for alpha in [0.0, 0.3, 0.6, 1.0] {
            let params = SystemParams::new(10.0, alpha, 1.0, 0.0, 0.4).unwrap();
            let ub = upper_bound(&params).unwrap();
            assert_eq!(ub.sigma_low_sq, ub.sigma_high_sq);
            assert_eq!(ub.t_low, ub.t_high);
            assert_abs_diff_eq!(ub.t_mixed, ub.t_low, epsilon = 1e-7);
        }
    }

    #[test]
    fn mixed_state_constraints_decouple_without_interference() {
        // With α = 0 the optimum meets each single-link rate with equality.
        let params = SystemParams::new(10.0, 0.0, 1.0, 0.5, 0.2).unwrap();
        let ub = upper_bound(&params).unwrap();
        let (x, y) = ub.sigma_mixed_sq;
        assert_abs_diff_eq!(x, 11.0 / 7.0, epsilon = 1e-6);
        assert_abs_diff_eq!(y, 11.0 / 3.0, epsilon = 1e-6);
    }
}
