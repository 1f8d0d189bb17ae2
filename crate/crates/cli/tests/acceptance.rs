//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the summary is always printed; exits nonzero on any FAIL.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use uplink_bounds::fading::{Estimate, FadingEvaluator, FadingRates, OutageMode, Thresholds};
use uplink_bounds::model::{BackhaulState, SystemParams};
use uplink_bounds::nonfading::{
    achievable_throughput, noises, optimize_scheme, sigma_joint, sigma_separate, DecompressionMode,
};
use uplink_bounds::numerics::{SchemeMask, SimplexPoint};
use uplink_bounds::oracle::{
    random_fading_case, random_nf_case, verify_backhaul, verify_fading_regions, verify_prop1, ORACLE_TOL,
    RESIDUAL_TOL,
};
use uplink_bounds::Execution;
use uplink_cli::config::{parse_config, Overrides};
use uplink_cli::output::ResultRow;
use uplink_cli::spec::SweepSpec;
use uplink_cli::sweep::{run_sweep, RunOptions};

type Outcome = Result<String, String>;

const MODES: [DecompressionMode; 2] = [DecompressionMode::Separate, DecompressionMode::Joint];

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> SweepSpec {
    let src = std::fs::read_to_string(configs().join(name)).expect("config file");
    parse_config(&src, &Overrides::default()).expect("valid config")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn find<'a>(rows: &'a [ResultRow], value: f64, scheme: &str, mode: &str) -> &'a ResultRow {
    rows.iter()
        .find(|r| r.value == value && r.scheme == scheme && r.mode == mode)
        .unwrap_or_else(|| panic!("missing row {value} {scheme} {mode}"))
}

fn c1_layer_bounds() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut variants = 0;
    for i in 0..100 {
        let (params, lambda) = random_nf_case(2024, i);
        for mode in MODES {
            let r = verify_prop1(&params, &lambda, mode).map_err(|e| format!("case {i}: {e}"))?;
            worst = worst.max(r.max_deviation);
            ensure(r.max_deviation <= ORACLE_TOL, || {
                format!("case {i} {mode}: deviation {:e} at {params:?}", r.max_deviation)
            })?;
            if r.f_joint_decoding.is_finite() && r.f_layers_3_4_known.is_finite() {
                variants += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(variants == 200, || format!("layer-5 variant report missing in {} cases", 200 - variants))?;
    ensure(secs < 10.0, || format!("took {secs:.1} s"))?;
    Ok(format!("200 checks, worst deviation {worst:.1e}, layer-5 variants reported, {secs:.2} s"))
}

fn c2_backhaul() -> Outcome {
    let mut dev: f64 = 0.0;
    let mut res: f64 = 0.0;
    for i in 0..100 {
        let (params, _) = random_nf_case(2024, i);
        let r = verify_backhaul(&params).map_err(|e| format!("case {i}: {e}"))?;
        dev = dev.max(r.separate_deviation);
        res = r.joint_refine_residual.iter().fold(res.max(r.joint_sum_residual.abs()), |m, x| m.max(x.abs()));
    }
    ensure(dev <= ORACLE_TOL && res <= RESIDUAL_TOL, || {
        format!("deviation {dev:e}, residual {res:e}")
    })?;
    Ok(format!("100 draws, rate deviation {dev:.1e}, residual {res:.1e}"))
}

fn c3_fading_regions() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (params, gains, lambda2) = random_fading_case(2024, i);
        for state in BackhaulState::ALL {
            let r = verify_fading_regions(&params, &gains, state, lambda2).map_err(|e| format!("case {i}: {e}"))?;
            worst = worst.max(r.max_deviation);
            ensure(r.passed, || format!("case {i} {state:?}: deviation {:e}", r.max_deviation))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1} s"))?;
    Ok(format!("4000 checks, worst deviation {worst:.1e}, {secs:.2} s"))
}

fn c4_orderings() -> Outcome {
    let start = Instant::now();
    let spec = load("nonfading_p.toml");
    let rows = run_sweep(&spec, RunOptions::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(rows.len() == 21 * 11, || format!("{} rows", rows.len()))?;

    let splits = [
        SimplexPoint::uniform(5),
        SimplexPoint::new(vec![0.5, 0.2, 0.1, 0.1, 0.1]).unwrap(),
        SimplexPoint::new(vec![0.2, 0.3, 0.0, 0.1, 0.4]).unwrap(),
    ];
    let masks = ["1", "1+2", "1+2+5", "1+2+3+4+5"];
    let mut worst_nesting: f64 = 0.0;
    for value in spec.values() {
        let params = spec.params_at(value);
        let ub = find(&rows, value, "bound", "upper").throughput.unwrap();
        for lambda in &splits {
            let sep = achievable_throughput(&params, lambda, DecompressionMode::Separate).map_err(|e| e.to_string())?;
            let joint = achievable_throughput(&params, lambda, DecompressionMode::Joint).map_err(|e| e.to_string())?;
            ensure(sep.average <= joint.average && joint.average <= ub, || {
                format!("p = {value}: separate {} joint {} bound {ub}", sep.average, joint.average)
            })?;
        }
        for mode in ["separate", "joint"] {
            let t: Vec<f64> = masks.iter().map(|m| find(&rows, value, m, mode).throughput.unwrap()).collect();
            for w in t.windows(2) {
                worst_nesting = worst_nesting.max(w[0] - w[1]);
            }
            ensure(t.windows(2).all(|w| w[0] <= w[1] + 1e-3), || format!("p = {value} {mode}: {t:?}"))?;
        }
    }
    let mut worst_rise = f64::NEG_INFINITY;
    let values = spec.values();
    for r in rows.iter().filter(|r| r.value != values[0]) {
        let prev_value = values[values.iter().position(|v| *v == r.value).unwrap() - 1];
        let prev = find(&rows, prev_value, &r.scheme, &r.mode).throughput.unwrap();
        worst_rise = worst_rise.max(r.throughput.unwrap() - prev);
    }
    // Rounding in the closed forms can exceed exact monotonicity by a few ulps.
    ensure(worst_rise <= 1e-12, || format!("throughput rises with p by {worst_rise:e}"))?;
    ensure(secs < 60.0, || format!("sweep took {secs:.1} s"))?;
    Ok(format!(
        "231 rows in {secs:.2} s; largest nesting shortfall {worst_nesting:.1e}; largest rise in p {worst_rise:.1e}"
    ))
}

fn c5_endpoints() -> Outcome {
    let lambda = SimplexPoint::new(vec![0.35, 0.15, 0.1, 0.1, 0.3]).unwrap();
    let at = |p: f64| SystemParams::new(10.0, 0.3, 1.0, 0.5, p).unwrap();
    for mode in MODES {
        let one = achievable_throughput(&at(1.0), &lambda, mode).map_err(|e| e.to_string())?;
        let zero = achievable_throughput(&at(0.0), &lambda, mode).map_err(|e| e.to_string())?;
        ensure((one.average - one.states[0]).abs() <= 1e-12, || format!("{mode}: p = 1 gives {one:?}"))?;
        ensure((zero.average - zero.states[3]).abs() <= 1e-12, || format!("{mode}: p = 0 gives {zero:?}"))?;
    }
    let flat = SystemParams::new(10.0, 0.3, 1.0, 0.0, 0.4).unwrap();
    let s1 = sigma_separate(&flat).map_err(|e| e.to_string())?.sigma1_sq;
    let j1 = sigma_joint(&flat).map_err(|e| e.to_string())?.sigma1_sq;
    ensure(s1 == 0.0 && j1.abs() <= 1e-12, || format!("σ1² = {s1}, {j1}"))?;
    let masks = [
        SchemeMask::one_layer(),
        SchemeMask::scheme1(),
        SchemeMask::scheme2(),
        SchemeMask::three_layer(),
        SchemeMask::five_layer(),
    ];
    let mut spread: f64 = 0.0;
    for mode in MODES {
        let t: Vec<f64> = masks
            .iter()
            .map(|m| optimize_scheme(&flat, mode, m, 500, Execution::Parallel).map(|r| r.average))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let (lo, hi) = t.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
        spread = spread.max(hi - lo);
    }
    ensure(spread <= 1e-6, || format!("scheme optima spread {spread:e} at ΔC = 0"))?;
    Ok(format!("p = 0 and p = 1 exact; ΔC = 0 gives σ1² = 0 and optima spread {spread:.1e}"))
}

fn c6_joint_gain() -> Outcome {
    let mut gaps = Vec::new();
    for k in 1..=10 {
        let params = SystemParams::new(10.0, k as f64 / 10.0, 1.0, 0.5, 0.1).unwrap();
        let sep = noises(&params, DecompressionMode::Separate).map_err(|e| e.to_string())?;
        let joint = noises(&params, DecompressionMode::Joint).map_err(|e| e.to_string())?;
        gaps.push(sep.coarse() - joint.coarse());
    }
    ensure(gaps.iter().all(|g| *g > 0.0), || format!("gaps {gaps:?}"))?;
    ensure(gaps.windows(2).all(|w| w[1] > w[0]), || format!("gaps not increasing: {gaps:?}"))?;
    Ok(format!("gap grows from {:.4} at α = 0.1 to {:.4} at α = 1", gaps[0], gaps[9]))
}

fn c7_fading_dominance() -> Outcome {
    let params = SystemParams::new(1000.0, 0.3, 4.0, 6.0, 0.2).unwrap();
    let ev = FadingEvaluator::new(&params, 100_000, 7, Execution::Parallel).map_err(|e| e.to_string())?;
    let cases = [
        (0.25, FadingRates::symmetric(1.0, 4.0)),
        (0.55, FadingRates::new(1.2, 0.8, 5.0, 6.0).unwrap()),
        (0.0, FadingRates::symmetric(5.0, 0.0)),
    ];
    let mut samples = 0usize;
    for (lambda2, rates) in &cases {
        let common = ev.payoffs(*lambda2, rates, OutageMode::Common);
        let individual = ev.payoffs(*lambda2, rates, OutageMode::Individual);
        if let Some(i) = (0..common.len()).find(|&i| individual[i] < common[i]) {
            return Err(format!("sample {i}: individual {} < common {}", individual[i], common[i]));
        }
        samples += common.len();
    }
    let (lambda2, rates) = cases[1];
    let (mut first, mut both) = (0u64, 0u64);
    for s in ev.samples() {
        for state in BackhaulState::ALL {
            let th = Thresholds::compute(&s.channels[state.index()], lambda2);
            for mode in [OutageMode::Common, OutageMode::Individual] {
                let out = th.decode(&rates, mode);
                for user in [1, 2] {
                    first += out.contains(user, 1) as u64;
                    both += (out.contains(user, 1) && out.contains(user, 2)) as u64;
                    ensure(!out.contains(user, 2) || out.contains(user, 1), || {
                        "second layer decoded without the first".into()
                    })?;
                }
            }
        }
    }
    ensure(first > 0 && both > 0, || format!("degenerate case: {first} first-layer, {both} both-layer decodings"))?;
    ensure(both <= first, || format!("{both} > {first}"))?;
    Ok(format!("{samples} sample comparisons; both layers {both} ≤ first layer {first} decodings"))
}

fn two_se(a: &ResultRow, b: &ResultRow) -> f64 {
    2.0 * a.std_error.unwrap().max(b.std_error.unwrap())
}

fn gap(rows: &[ResultRow], value: f64, mode: &str) -> (f64, f64) {
    let one = find(rows, value, "1-layer", mode);
    let two = find(rows, value, "2-layer", mode);
    (two.throughput.unwrap() - one.throughput.unwrap(), two_se(one, two))
}

/// Standard error of the paired difference between the two-layer and the
/// one-layer optimum on the shared draws.
fn paired_se(spec: &SweepSpec, rows: &[ResultRow], value: f64, mode: &str) -> Result<Estimate, String> {
    let outage = if mode == "common" { OutageMode::Common } else { OutageMode::Individual };
    let ev = FadingEvaluator::new(&spec.params_at(value), spec.mc_samples, spec.seed, Execution::Parallel)
        .map_err(|e| e.to_string())?;
    let one = find(rows, value, "1-layer", mode);
    let two = find(rows, value, "2-layer", mode);
    let r1 = FadingRates::new(one.rates[0], one.rates[1], 0.0, 0.0).map_err(|e| e.to_string())?;
    let r2 = FadingRates::new(two.rates[0], two.rates[1], two.rates[2], two.rates[3]).map_err(|e| e.to_string())?;
    let a = ev.payoffs(0.0, &r1, outage);
    let b = ev.payoffs(two.lambda[1], &r2, outage);
    let diff: Vec<f64> = b.iter().zip(&a).map(|(x, y)| x - y).collect();
    Ok(Estimate::from_samples(&diff))
}

fn c8_fading_trends() -> Outcome {
    let start = Instant::now();
    let fading_point = load("fading_p.toml");
    ensure(fading_point.mc_samples == 20_000 && fading_point.budget == 500, || "p sweep config drifted".into())?;
    let rows = run_sweep(&fading_point, RunOptions::default()).map_err(|e| e.to_string())?;
    let t6 = start.elapsed().as_secs_f64();
    let mut notes = Vec::new();
    for mode in ["common", "individual"] {
        for value in fading_point.values() {
            let (g, se2) = gap(&rows, value, mode);
            ensure(g >= 0.0, || format!("p sweep {mode} p = {value}: two layers below one by {}", -g))?;
            if value <= 0.2 {
                ensure(g > se2, || format!("p sweep {mode} p = {value}: gap {g:.4} within 2·SE {se2:.4}"))?;
            }
        }
        let (g_end, se_end) = gap(&rows, 1.0, mode);
        let (g_low, _) = gap(&rows, 0.2, mode);
        ensure(g_end.abs() <= se_end && g_end < g_low, || {
            format!("p sweep {mode}: gap {g_end:.4} at p = 1 (2·SE {se_end:.4}), {g_low:.4} at p = 0.2")
        })?;
        let within = fading_point.values().into_iter().find(|&v| {
            let (g, s) = gap(&rows, v, mode);
            v > 0.2 && g.abs() <= s
        });
        notes.push(format!("{mode} within 2·SE from p = {}", within.map_or("-".into(), |v| v.to_string())));
    }

    let start7 = Instant::now();
    let mut c_sweep = load("fading_c.toml");
    if let Some(r) = c_sweep.sweep.as_mut() {
        r.steps = 20;
    }
    let c_rows = run_sweep(&c_sweep, RunOptions::default()).map_err(|e| e.to_string())?;
    let t7 = start7.elapsed().as_secs_f64();
    for mode in ["common", "individual"] {
        for value in c_sweep.values() {
            let (g, se2) = gap(&c_rows, value, mode);
            if value <= 1.0 {
                ensure(g.abs() <= se2, || format!("C sweep {mode} C = {value}: gap {g:.4} beyond 2·SE {se2:.4}"))?;
            }
            if value >= 6.0 {
                let paired = paired_se(&c_sweep, &c_rows, value, mode)?;
                ensure((paired.mean - g).abs() <= 1e-9 * g.abs().max(1.0), || {
                    format!("C sweep {mode} C = {value}: paired mean {} vs gap {g}", paired.mean)
                })?;
                ensure(g > 0.0 && g > 2.0 * paired.std_error, || {
                    format!(
                        "C sweep {mode} C = {value}: gap {g:.4}, paired 2·SE {:.4}",
                        2.0 * paired.std_error
                    )
                })?;
            }
        }
    }
    ensure(t6 < 600.0 && t7 < 600.0, || format!("sweeps took {t6:.0} s and {t7:.0} s"))?;
    Ok(format!("p sweep {t6:.0} s ({}); C sweep {t7:.0} s", notes.join(", ")))
}

fn c9_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("uplink-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let fading = dir.join("fading.toml");
    let src = std::fs::read_to_string(configs().join("fading_p.toml")).map_err(|e| e.to_string())?;
    let src = src
        .replace("steps = 6", "steps = 3")
        .replace("mc_samples = 20000", "mc_samples = 2000")
        .replace("budget = 500", "budget = 100");
    std::fs::write(&fading, src).map_err(|e| e.to_string())?;
    let nf_point = configs().join("nonfading_p.toml");
    let run = |cmd: &str, cfg: &PathBuf, jobs: &str| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_uplink"))
            .args([cmd, "--config", cfg.to_str().unwrap(), "--jobs", jobs, "--no-cache"])
            .env("UPLINK_CACHE_DIR", &dir)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        Ok(o.stdout)
    };
    let mut sizes = Vec::new();
    for (cmd, cfg) in [("nf-sweep", &nf_point), ("fading-sweep", &fading)] {
        let base = run(cmd, cfg, "1")?;
        for jobs in ["1", "3"] {
            ensure(run(cmd, cfg, jobs)? == base, || format!("{cmd} output changed with --jobs {jobs}"))?;
        }
        sizes.push(base.len());
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("byte-identical CSV across reruns and job counts ({} and {} bytes)", sizes[0], sizes[1]))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence, non-fading layer bounds", c1_layer_bounds),
        ("backhaul rate equalities", c2_backhaul),
        ("oracle equivalence, fading regions", c3_fading_regions),
        ("dominance and nesting orderings on the p sweep", c4_orderings),
        ("endpoint collapses", c5_endpoints),
        ("joint decompression gain versus α", c6_joint_gain),
        ("per-sample fading dominance", c7_fading_dominance),
        ("fading trends at desk scale", c8_fading_trends),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {}  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
