//! Oracle-backed verification suite.

use serde::Serialize;
use uplink_bounds::model::{sample_gains, BackhaulState, ChannelGains, SystemParams};
use uplink_bounds::nonfading::DecompressionMode;
use uplink_bounds::numerics::SimplexPoint;
use uplink_bounds::oracle::{
    random_fading_case, random_nf_case, sample_covariance_check, verify_backhaul, verify_fading_regions,
    verify_prop1_with_offset, SampleCovarianceReport,
};
use uplink_bounds::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

pub const FULL_NF_CASES: u64 = 100;
pub const FULL_FADING_CASES: u64 = 1000;
pub const QUICK_COVARIANCE_SAMPLES: usize = 100_000;
pub const FULL_COVARIANCE_SAMPLES: usize = 1_000_000;

/// A check that breached its tolerance or could not be evaluated.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub check: String,
    pub params: SystemParams,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub layer_bound_cases: usize,
    pub layer_bound_max_deviation: f64,
    /// Largest gap between the layer-5 closed form and its mutual
    /// information given layers 1 to 4; informational only.
    pub layer5_max_deviation: f64,
    pub backhaul_cases: usize,
    pub backhaul_max_deviation: f64,
    pub backhaul_max_residual: f64,
    pub fading_cases: usize,
    pub fading_max_deviation: f64,
    pub covariance: Option<SampleCovarianceReport>,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

/// Runs the suite. `sigma_offset` shifts the compression noises seen by
/// the oracle; any nonzero value must produce failures.
pub fn run_verify(level: Level, seed: u64, sigma_offset: f64) -> VerifyReport {
    let nf_point = SystemParams {
        power: 10.0,
        alpha: 0.3,
        cap_low: 1.0,
        cap_delta: 0.5,
        p_low: 0.1,
    };
    let fading_point = SystemParams {
        power: 1000.0,
        alpha: 0.3,
        cap_low: 4.0,
        cap_delta: 6.0,
        p_low: 0.2,
    };
    let nf_cases: Vec<(SystemParams, SimplexPoint)> = match level {
        Level::Quick => {
            let split = SimplexPoint::new(vec![0.4, 0.25, 0.1, 0.05, 0.2]).expect("valid split");
            vec![(nf_point, SimplexPoint::uniform(5)), (nf_point, split)]
        }
        Level::Full => (0..FULL_NF_CASES).map(|i| random_nf_case(seed, i)).collect(),
    };
    let fading_cases: Vec<(SystemParams, ChannelGains, f64)> = match level {
        Level::Quick => {
            let mut v = vec![(fading_point, ChannelGains::unit(), 0.3)];
            v.extend((0..3).map(|i| (fading_point, sample_gains(seed, i), 0.1 + 0.3 * i as f64)));
            v
        }
        Level::Full => (0..FULL_FADING_CASES).map(|i| random_fading_case(seed, i)).collect(),
    };

    let mut report = VerifyReport {
        level,
        seed,
        layer_bound_cases: 0,
        layer_bound_max_deviation: 0.0,
        layer5_max_deviation: 0.0,
        backhaul_cases: 0,
        backhaul_max_deviation: 0.0,
        backhaul_max_residual: 0.0,
        fading_cases: 0,
        fading_max_deviation: 0.0,
        covariance: None,
        failures: Vec::new(),
        passed: false,
    };
    let fail = |failures: &mut Vec<Failure>, check: &str, params: &SystemParams, detail: String| {
        failures.push(Failure {
            check: check.to_string(),
            params: *params,
            detail,
        })
    };

    for (params, lambda) in &nf_cases {
        for mode in [DecompressionMode::Separate, DecompressionMode::Joint] {
            report.layer_bound_cases += 1;
            match verify_prop1_with_offset(params, lambda, mode, sigma_offset) {
                Ok(r) => {
                    report.layer_bound_max_deviation = report.layer_bound_max_deviation.max(r.max_deviation);
                    report.layer5_max_deviation = report.layer5_max_deviation.max(r.f_deviation);
                    if !r.passed {
                        let detail = format!("{mode} decompression, λ = {:?}: deviation {:e}", lambda.weights(), r.max_deviation);
                        fail(&mut report.failures, "layer bounds", params, detail);
                    }
                }
                Err(e) => fail(&mut report.failures, "layer bounds", params, e.to_string()),
            }
        }
        report.backhaul_cases += 1;
        match verify_backhaul(params) {
            Ok(r) => {
                report.backhaul_max_deviation = report.backhaul_max_deviation.max(r.separate_deviation);
                let residual = r
                    .joint_refine_residual
                    .iter()
                    .fold(r.joint_sum_residual.abs(), |m, x| m.max(x.abs()));
                report.backhaul_max_residual = report.backhaul_max_residual.max(residual);
                if !r.passed {
                    let detail = format!("deviation {:e}, residual {residual:e}", r.separate_deviation);
                    fail(&mut report.failures, "backhaul rates", params, detail);
                }
            }
            Err(e) => fail(&mut report.failures, "backhaul rates", params, e.to_string()),
        }
    }

    for (params, gains, lambda2) in &fading_cases {
        for state in BackhaulState::ALL {
            report.fading_cases += 1;
            match verify_fading_regions(params, gains, state, *lambda2) {
                Ok(r) => {
                    report.fading_max_deviation = report.fading_max_deviation.max(r.max_deviation);
                    if !r.passed {
                        let detail = format!("state {state:?}, λ2 = {lambda2}: deviation {:e}", r.max_deviation);
                        fail(&mut report.failures, "fading thresholds", params, detail);
                    }
                }
                Err(e) => fail(&mut report.failures, "fading thresholds", params, e.to_string()),
            }
        }
    }

    let n = match level {
        Level::Quick => QUICK_COVARIANCE_SAMPLES,
        Level::Full => FULL_COVARIANCE_SAMPLES,
    };
    match sample_covariance_check(
        &nf_point,
        &SimplexPoint::uniform(5),
        DecompressionMode::Separate,
        n,
        seed,
        Execution::Parallel,
    ) {
        Ok(r) => {
            if !r.passed {
                let detail = format!(
                    "covariance deviation {:e}, mean deviation {:e}, threshold {:e}",
                    r.max_cov_deviation, r.max_mean_deviation, r.threshold
                );
                fail(&mut report.failures, "sample covariance", &nf_point, detail);
            }
            report.covariance = Some(r);
        }
        Err(e) => fail(&mut report.failures, "sample covariance", &nf_point, e.to_string()),
    }

    report.passed = report.failures.is_empty();
    report
}
