use std::time::Instant;

use uplink_bounds::model::BackhaulState;
use uplink_bounds::nonfading::DecompressionMode;
use uplink_bounds::oracle::{
    random_fading_case, random_nf_case, verify_backhaul, verify_fading_regions, verify_prop1, verify_prop1_with_offset,
    ORACLE_TOL, RESIDUAL_TOL,
};

#[test]
fn layer_bounds_match_mutual_information_on_random_draws() {
    let start = Instant::now();
    for i in 0..100 {
        let (params, lambda) = random_nf_case(7, i);
        for mode in [DecompressionMode::Separate, DecompressionMode::Joint] {
            let r = verify_prop1(&params, &lambda, mode).unwrap();
            assert!(r.max_deviation <= ORACLE_TOL, "case {i} {mode}: {r:?}");
            assert!(r.f_joint_decoding.is_finite() && r.f_layers_3_4_known.is_finite());
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn backhaul_rates_hold_on_random_draws() {
    for i in 0..100 {
        let (params, _) = random_nf_case(7, i);
        let r = verify_backhaul(&params).unwrap();
        assert!(r.separate_deviation <= ORACLE_TOL, "case {i}: {r:?}");
        assert!(r.joint_sum_residual.abs() <= RESIDUAL_TOL, "case {i}: {r:?}");
        assert!(r.joint_refine_residual.iter().all(|x| x.abs() <= RESIDUAL_TOL), "case {i}: {r:?}");
    }
}

#[test]
fn fading_thresholds_match_mutual_information_on_random_draws() {
    let start = Instant::now();
    for i in 0..1000 {
        let (params, gains, lambda2) = random_fading_case(11, i);
        for state in BackhaulState::ALL {
            let r = verify_fading_regions(&params, &gains, state, lambda2).unwrap();
            assert!(r.passed, "case {i} {state:?}: deviation {:e}", r.max_deviation);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn noise_offset_of_one_thousandth_is_detected() {
    let (params, lambda) = random_nf_case(7, 0);
    let r = verify_prop1_with_offset(&params, &lambda, DecompressionMode::Separate, 1e-3).unwrap();
    assert!(!r.passed);
    assert!(r.max_deviation > 1e3 * ORACLE_TOL);
}
