//! Independent recomputation of every rate threshold as a Gaussian mutual
//! information over the full covariance of codewords, received signals and
//! compressed descriptions.

mod gaussian;

pub use gaussian::{
    assemble_fading, assemble_nf, conditional_logdet, description_label, gaussian_mi, layer_label, JointGaussian,
    JITTER_FLOOR,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::fading::{fading_noises, StateChannel, Thresholds};
use crate::model::{sample_gains, BackhaulState, ChannelGains, SystemParams};
use crate::nonfading::{layer_bounds, noises, sigma_joint, sigma_separate, CompressionNoises, DecompressionMode, LayerBounds};
use crate::numerics::SimplexPoint;
use crate::par::{pairwise_sum, Execution};

/// Agreement required between a closed form and its mutual information.
pub const ORACLE_TOL: f64 = 1e-9;
/// Agreement required for the joint-decompression rate equations.
pub const RESIDUAL_TOL: f64 = 1e-8;

const HALF: f64 = 0.5;

fn labels(items: &[(usize, usize)]) -> Vec<String> {
    items.iter().map(|&(u, k)| layer_label(u, k)).collect()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn mi(jg: &JointGaussian, a: &[String], b: &[String], c: &[String], scale: f64) -> Result<f64> {
    gaussian_mi(jg, &refs(a), &refs(b), &refs(c), scale)
}

fn received(state: BackhaulState) -> Vec<String> {
    [1, 2]
        .map(|bs| description_label(bs, if state.is_high(bs - 1) { 2 } else { 1 }))
        .to_vec()
}

/// Closed-form layer bounds against their mutual informations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop1Report {
    pub params: SystemParams,
    pub lambda: SimplexPoint,
    pub mode: DecompressionMode,
    pub closed_form: LayerBounds,
    /// Recomputed `c_a` to `c_e`.
    pub oracle: [f64; 5],
    /// Recomputed `c_c` to `c_e` in the mirrored one-link-high state.
    pub oracle_mirrored: [f64; 3],
    /// Largest deviation over `c_a` to `c_e`, mirrored state included.
    pub max_deviation: f64,
    /// Layer-5 information given layers 1 to 4 of both users.
    pub f_joint_decoding: f64,
    /// Information carried by layers 1, 2 and 5 of both users given only
    /// layers 3 and 4.
    pub f_layers_3_4_known: f64,
    /// `|f_joint_decoding − c_f|`.
    pub f_deviation: f64,
    pub passed: bool,
}

/// Recomputes the six layer bounds at power split `lambda` from the
/// assembled covariance.
pub fn verify_prop1(params: &SystemParams, lambda: &SimplexPoint, mode: DecompressionMode) -> Result<Prop1Report> {
    verify_prop1_with_offset(params, lambda, mode, 0.0)
}

/// Like [`verify_prop1`], but the covariance is assembled with `offset`
/// added to both compression-noise variances. A nonzero offset must make
/// the check fail; this exercises the tolerance itself.
pub fn verify_prop1_with_offset(
    params: &SystemParams,
    lambda: &SimplexPoint,
    mode: DecompressionMode,
    offset: f64,
) -> Result<Prop1Report> {
    let n = noises(params, mode)?;
    let closed = layer_bounds(params, lambda, &n)?;
    let shifted = CompressionNoises {
        sigma1_sq: n.sigma1_sq + offset,
        sigma2_sq: n.sigma2_sq + offset,
    };
    let jg = assemble_nf(params, lambda, &shifted)?;
    let ll = received(BackhaulState::LL);
    let hl = received(BackhaulState::HL);
    let lh = received(BackhaulState::LH);
    let hh = received(BackhaulState::HH);
    let first = labels(&[(1, 1), (2, 1)]);
    let first_two = labels(&[(1, 1), (2, 1), (1, 2), (2, 2)]);
    let with = |extra: &[(usize, usize)]| {
        let mut v = first_two.clone();
        v.extend(labels(extra));
        v
    };

    let oracle = [
        mi(&jg, &first, &ll, &[], HALF)?,
        mi(&jg, &labels(&[(1, 2), (2, 2)]), &hl, &first, HALF)?,
        mi(&jg, &labels(&[(1, 3)]), &hl, &with(&[(2, 4)]), HALF)?,
        mi(&jg, &labels(&[(2, 4)]), &hl, &with(&[(1, 3)]), HALF)?,
        mi(&jg, &labels(&[(1, 3), (2, 4)]), &hl, &first_two, HALF)?,
    ];
    let oracle_mirrored = [
        mi(&jg, &labels(&[(2, 3)]), &lh, &with(&[(1, 4)]), HALF)?,
        mi(&jg, &labels(&[(1, 4)]), &lh, &with(&[(2, 3)]), HALF)?,
        mi(&jg, &labels(&[(2, 3), (1, 4)]), &lh, &first_two, HALF)?,
    ];
    let f_joint_decoding = mi(
        &jg,
        &labels(&[(1, 5), (2, 5)]),
        &hh,
        &with(&[(1, 3), (1, 4), (2, 3), (2, 4)]),
        HALF,
    )?;
    let f_layers_3_4_known = mi(
        &jg,
        &labels(&[(1, 1), (1, 2), (1, 5), (2, 1), (2, 2), (2, 5)]),
        &hh,
        &labels(&[(1, 3), (1, 4), (2, 3), (2, 4)]),
        HALF,
    )?;

    let c = closed.as_array();
    let mut max_deviation: f64 = 0.0;
    for k in 0..5 {
        max_deviation = max_deviation.max((oracle[k] - c[k]).abs());
    }
    for k in 0..3 {
        max_deviation = max_deviation.max((oracle_mirrored[k] - c[k + 2]).abs());
    }
    let f_deviation = (f_joint_decoding - closed.c_f).abs();
    Ok(Prop1Report {
        params: *params,
        lambda: lambda.clone(),
        mode,
        closed_form: closed,
        oracle,
        oracle_mirrored,
        max_deviation,
        f_joint_decoding,
        f_layers_3_4_known,
        f_deviation,
        passed: max_deviation <= ORACLE_TOL,
    })
}

/// Backhaul rate equations evaluated on the assembled covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackhaulReport {
    pub params: SystemParams,
    /// `I(Y_j; V_{j,1})` per base station with separate-decompression noises.
    pub separate_coarse: [f64; 2],
    /// `I(Y_j; V_{j,2} | V_{j,1})` per base station, same noises.
    pub separate_refine: [f64; 2],
    /// Largest deviation from `C` and `ΔC`.
    pub separate_deviation: f64,
    /// `H(V11, V21) − H(V11 | Y1) − H(V21 | Y2)` with joint-decompression noises.
    pub joint_sum_rate: f64,
    /// `joint_sum_rate − 2C`.
    pub joint_sum_residual: f64,
    /// `I(Y_j; V_{j,2} | V_{j,1}) − ΔC` with joint-decompression noises.
    pub joint_refine_residual: [f64; 2],
    pub passed: bool,
}

pub fn verify_backhaul(params: &SystemParams) -> Result<BackhaulReport> {
    let lambda = SimplexPoint::uniform(5);
    let sep = assemble_nf(params, &lambda, &sigma_separate(params)?)?;
    let y = |bs: usize| vec![format!("Y{bs}")];
    let v = |bs: usize, level: usize| vec![description_label(bs, level)];
    let mut separate_coarse = [0.0; 2];
    let mut separate_refine = [0.0; 2];
    for bs in 1..=2 {
        separate_coarse[bs - 1] = mi(&sep, &y(bs), &v(bs, 1), &[], HALF)?;
        separate_refine[bs - 1] = mi(&sep, &y(bs), &v(bs, 2), &v(bs, 1), HALF)?;
    }
    let separate_deviation = separate_coarse
        .iter()
        .map(|i| (i - params.cap_low).abs())
        .chain(separate_refine.iter().map(|i| (i - params.cap_delta).abs()))
        .fold(0.0, f64::max);

    let joint = assemble_nf(params, &lambda, &sigma_joint(params)?)?;
    let both = [v(1, 1), v(2, 1)].concat();
    let joint_sum_rate = conditional_logdet(&joint, &refs(&both), &[], HALF)?
        - conditional_logdet(&joint, &refs(&v(1, 1)), &refs(&y(1)), HALF)?
        - conditional_logdet(&joint, &refs(&v(2, 1)), &refs(&y(2)), HALF)?;
    let joint_sum_residual = joint_sum_rate - 2.0 * params.cap_low;
    let mut joint_refine_residual = [0.0; 2];
    for bs in 1..=2 {
        joint_refine_residual[bs - 1] = mi(&joint, &y(bs), &v(bs, 2), &v(bs, 1), HALF)? - params.cap_delta;
    }
    let passed = separate_deviation <= ORACLE_TOL
        && joint_sum_residual.abs() <= RESIDUAL_TOL
        && joint_refine_residual.iter().all(|r| r.abs() <= RESIDUAL_TOL);
    Ok(BackhaulReport {
        params: *params,
        separate_coarse,
        separate_refine,
        separate_deviation,
        joint_sum_rate,
        joint_sum_residual,
        joint_refine_residual,
        passed,
    })
}

/// Fading decoding thresholds against their mutual informations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FadingRegionReport {
    pub params: SystemParams,
    pub gains: ChannelGains,
    pub state: BackhaulState,
    pub lambda2: f64,
    pub closed_form: Thresholds,
    pub oracle: Thresholds,
    /// Thresholds of the "other user not decodable" conditions, recomputed
    /// with their own conditioning sets: first layer given only the decoded
    /// user's first layer (users 1, 2), then second layer given the decoded
    /// user's two layers and the other's first layer (users 1, 2).
    pub exclusion: [f64; 4],
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn verify_fading_regions(
    params: &SystemParams,
    gains: &ChannelGains,
    state: BackhaulState,
    lambda2: f64,
) -> Result<FadingRegionReport> {
    let noises = fading_noises(params, gains)?;
    let closed = Thresholds::compute(&StateChannel::new(params, gains, state)?, lambda2);
    let jg = assemble_fading(params, gains, lambda2, &noises)?;
    let v = received(state);
    let w = |u: usize, k: usize| vec![layer_label(u, k)];
    let ws = |items: &[(usize, usize)]| labels(items);
    let one = 1.0;

    let oracle = Thresholds {
        joint1: [
            mi(&jg, &w(1, 1), &v, &w(2, 1), one)?,
            mi(&jg, &w(2, 1), &v, &w(1, 1), one)?,
            mi(&jg, &ws(&[(1, 1), (2, 1)]), &v, &[], one)?,
        ],
        joint2: [
            mi(&jg, &w(1, 2), &v, &ws(&[(1, 1), (2, 1), (2, 2)]), one)?,
            mi(&jg, &w(2, 2), &v, &ws(&[(1, 1), (2, 1), (1, 2)]), one)?,
            mi(&jg, &ws(&[(1, 2), (2, 2)]), &v, &ws(&[(1, 1), (2, 1)]), one)?,
        ],
        single1: [mi(&jg, &w(1, 1), &v, &[], one)?, mi(&jg, &w(2, 1), &v, &[], one)?],
        after_both: [
            mi(&jg, &w(1, 2), &v, &ws(&[(1, 1), (2, 1)]), one)?,
            mi(&jg, &w(2, 2), &v, &ws(&[(1, 1), (2, 1)]), one)?,
        ],
        after_own: [mi(&jg, &w(1, 2), &v, &w(1, 1), one)?, mi(&jg, &w(2, 2), &v, &w(2, 1), one)?],
    };
    let exclusion = [
        mi(&jg, &w(1, 1), &v, &w(2, 1), one)?,
        mi(&jg, &w(2, 1), &v, &w(1, 1), one)?,
        mi(&jg, &w(1, 2), &v, &ws(&[(1, 1), (2, 1), (2, 2)]), one)?,
        mi(&jg, &w(2, 2), &v, &ws(&[(2, 1), (1, 1), (1, 2)]), one)?,
    ];
    let flat = |t: &Thresholds| -> Vec<f64> {
        [&t.joint1[..], &t.joint2[..], &t.single1[..], &t.after_both[..], &t.after_own[..]].concat()
    };
    let mut max_deviation = flat(&closed)
        .iter()
        .zip(flat(&oracle))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let exclusion_closed = [closed.joint1[0], closed.joint1[1], closed.joint2[0], closed.joint2[1]];
    for (a, b) in exclusion.iter().zip(exclusion_closed) {
        max_deviation = max_deviation.max((a - b).abs());
    }
    Ok(FadingRegionReport {
        params: *params,
        gains: *gains,
        state,
        lambda2,
        closed_form: closed,
        oracle,
        exclusion,
        max_deviation,
        passed: max_deviation <= ORACLE_TOL,
    })
}

/// Empirical against analytic covariance of the non-fading model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCovarianceReport {
    pub n_samples: usize,
    /// Largest `|Ŝ_ij − Σ_ij| / √(Σ_ii Σ_jj)`.
    pub max_cov_deviation: f64,
    /// Largest `|mean_i| / √Σ_ii`.
    pub max_mean_deviation: f64,
    /// `5 / √n`.
    pub threshold: f64,
    pub passed: bool,
}

/// Draws per independent random stream in [`sample_covariance_check`].
pub const SAMPLE_BLOCK: usize = 4096;

/// Draws `n_samples` vectors of the non-fading model and compares their
/// empirical moments to the analytic covariance.
pub fn sample_covariance_check(
    params: &SystemParams,
    lambda: &SimplexPoint,
    mode: DecompressionMode,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampleCovarianceReport> {
    let jg = assemble_nf(params, lambda, &noises(params, mode)?)?;
    let d = jg.dim();
    let mix = jg.mixing().map(|c| c.re);
    let std: Vec<f64> = jg.source_var().iter().map(|v| v.sqrt()).collect();
    let blocks = n_samples.div_ceil(SAMPLE_BLOCK);
    // Per block: d sums followed by d·d sums of products.
    let partial = exec.map_indexed(blocks, |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let len = SAMPLE_BLOCK.min(n_samples - b * SAMPLE_BLOCK);
        let mut acc = vec![0.0; d + d * d];
        let mut src = vec![0.0; std.len()];
        let mut x = vec![0.0; d];
        for _ in 0..len {
            for (s, sd) in src.iter_mut().zip(&std) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *s = z * sd;
            }
            for (r, xr) in x.iter_mut().enumerate() {
                *xr = (0..src.len()).map(|c| mix[(r, c)] * src[c]).sum();
            }
            for r in 0..d {
                acc[r] += x[r];
                for c in 0..d {
                    acc[d + r * d + c] += x[r] * x[c];
                }
            }
        }
        acc
    });
    let n = n_samples as f64;
    let total = |k: usize| pairwise_sum(&partial.iter().map(|p| p[k]).collect::<Vec<_>>());
    let cov = jg.cov();
    let mut max_cov_deviation: f64 = 0.0;
    let mut max_mean_deviation: f64 = 0.0;
    for r in 0..d {
        let srr = cov[(r, r)].re;
        max_mean_deviation = max_mean_deviation.max((total(r) / n).abs() / srr.sqrt());
        for c in 0..d {
            let norm = (srr * cov[(c, c)].re).sqrt();
            let dev = (total(d + r * d + c) / n - cov[(r, c)].re).abs() / norm;
            max_cov_deviation = max_cov_deviation.max(dev);
        }
    }
    let threshold = 5.0 / n.sqrt();
    Ok(SampleCovarianceReport {
        n_samples,
        max_cov_deviation,
        max_mean_deviation,
        threshold,
        passed: max_cov_deviation <= threshold && max_mean_deviation <= threshold,
    })
}

fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f72_6163_6c65);
    rng.set_stream(index);
    rng
}

fn random_simplex<R: Rng>(rng: &mut R, dim: usize) -> SimplexPoint {
    let e: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    let mut w: Vec<f64> = e.iter().map(|v| v / s).collect();
    // Absorb rounding so the weights sum to one.
    let head: f64 = w[..dim - 1].iter().sum();
    w[dim - 1] = (1.0 - head).max(0.0);
    SimplexPoint::new(w).expect("normalized exponential draws lie on the simplex")
}

/// Randomized non-fading test case `index` of stream `seed`: power from
/// −10 to 20 dB, α, C in [0.1, 3], ΔC in [0, 3], p and a power split drawn
/// uniformly.
pub fn random_nf_case(seed: u64, index: u64) -> (SystemParams, SimplexPoint) {
    let mut rng = case_rng(seed, index);
    let power = 10f64.powf(rng.random_range(-1.0..2.0));
    let params = SystemParams {
        power,
        alpha: rng.random_range(0.0..=1.0),
        cap_low: rng.random_range(0.1..3.0),
        cap_delta: rng.random_range(0.0..3.0),
        p_low: rng.random_range(0.0..=1.0),
    };
    (params, random_simplex(&mut rng, 5))
}

/// Randomized fading test case `index` of stream `seed`: power from 0 to
/// 30 dB, C in [0.5, 6], ΔC in [0, 6], Rayleigh gains and a uniform `λ2`.
pub fn random_fading_case(seed: u64, index: u64) -> (SystemParams, ChannelGains, f64) {
    let mut rng = case_rng(seed.wrapping_add(1), index);
    let power = 10f64.powf(rng.random_range(0.0..3.0));
    let params = SystemParams {
        power,
        alpha: rng.random_range(0.0..=1.0),
        cap_low: rng.random_range(0.5..6.0),
        cap_delta: rng.random_range(0.0..6.0),
        p_low: rng.random_range(0.0..=1.0),
    };
    let lambda2 = rng.random_range(0.0..=1.0);
    (params, sample_gains(seed, index), lambda2)
}
