//! Sweep execution and the ordering guard applied before rows are emitted.

use std::time::Instant;

use rayon::prelude::*;
use uplink_bounds::fading::{FadingEvaluator, FadingOptimum, FadingRates, OutageMode, SearchShape};
use uplink_bounds::model::SystemParams;
use uplink_bounds::nonfading::{optimize_scheme_seeded, upper_bound, DecompressionMode, ThroughputReport};
use uplink_bounds::numerics::{SchemeMask, SimplexPoint};
use uplink_bounds::{Error, Execution};

use crate::error::{CliError, CliResult};
use crate::output::ResultRow;
use crate::spec::{Mode, Scenario, Scheme, SweepSpec, BOUND_LABEL};

/// Relative slack allowed by the ordering guard.
pub const GUARD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Fill the `ms` column with wall-clock times.
    pub timings: bool,
}

/// Evaluates every swept value, points in parallel on the current rayon
/// pool. Rows come out in sweep order whatever the number of threads.
pub fn run_sweep(spec: &SweepSpec, opts: RunOptions) -> CliResult<Vec<ResultRow>> {
    let values = spec.values();
    let points: Vec<CliResult<Vec<ResultRow>>> = values
        .par_iter()
        .map(|&v| run_point(spec, &spec.params_at(v), spec.swept_name(), v, opts))
        .collect();
    let mut rows = Vec::new();
    for p in points {
        rows.extend(p?);
    }
    Ok(rows)
}

/// Rows of one parameter point, in (scheme, mode) declaration order with
/// the upper bound last.
pub fn run_point(
    spec: &SweepSpec,
    params: &SystemParams,
    swept: &str,
    value: f64,
    opts: RunOptions,
) -> CliResult<Vec<ResultRow>> {
    let result = match spec.scenario {
        Scenario::Nonfading => nonfading_point(spec, params, swept, value, opts),
        Scenario::Fading => fading_point(spec, params, swept, value, opts),
    };
    match result {
        Err(CliError::Model(Error::DegenerateCapacity { .. })) => {
            log::warn!("{swept} = {value}: backhaul capacity is degenerate, point skipped");
            Ok(skipped_rows(spec, swept, value))
        }
        other => other,
    }
}

fn skipped_rows(spec: &SweepSpec, swept: &str, value: f64) -> Vec<ResultRow> {
    labels(spec)
        .into_iter()
        .map(|(scheme, mode)| blank_row(spec.scenario, swept, value, scheme, mode))
        .collect()
}

fn labels(spec: &SweepSpec) -> Vec<(String, Mode)> {
    let mut out = Vec::new();
    for scheme in &spec.schemes {
        for &mode in spec.modes.iter().filter(|m| **m != Mode::Upper) {
            out.push((scheme.label(), mode));
        }
    }
    if spec.modes.contains(&Mode::Upper) {
        out.push((BOUND_LABEL.to_string(), Mode::Upper));
    }
    out
}

fn blank_row(scenario: Scenario, swept: &str, value: f64, scheme: String, mode: Mode) -> ResultRow {
    ResultRow {
        swept_param: swept.to_string(),
        value,
        scenario,
        scheme,
        mode: mode.to_string(),
        throughput: None,
        std_error: None,
        lambda: Vec::new(),
        rates: Vec::new(),
        ms: None,
    }
}

fn elapsed_ms(start: Instant, opts: RunOptions) -> Option<f64> {
    opts.timings.then(|| start.elapsed().as_secs_f64() * 1e3)
}

/// Masks run smallest first and separate before joint; each search is
/// seeded with every optimum found so far on a sub-mask, so nesting and
/// joint-over-separate hold exactly.
fn nonfading_point(
    spec: &SweepSpec,
    params: &SystemParams,
    swept: &str,
    value: f64,
    opts: RunOptions,
) -> CliResult<Vec<ResultRow>> {
    let mut order: Vec<usize> = (0..spec.schemes.len()).collect();
    order.sort_by_key(|&i| match &spec.schemes[i] {
        Scheme::Mask(l) => l.len(),
        Scheme::Layers(n) => *n,
    });
    let mut found: Vec<(SchemeMask, SimplexPoint)> = Vec::new();
    let mut reports: Vec<Option<(ThroughputReport, Option<f64>)>> = vec![None; spec.schemes.len() * 2];
    for &i in &order {
        let mask = spec.schemes[i]
            .mask()
            .ok_or_else(|| CliError::Config(format!("scheme `{}` is not a power-split mask", spec.schemes[i].label())))?;
        for (k, mode) in [DecompressionMode::Separate, DecompressionMode::Joint].into_iter().enumerate() {
            let wanted = match mode {
                DecompressionMode::Separate => Mode::Separate,
                DecompressionMode::Joint => Mode::Joint,
            };
            if !spec.modes.contains(&wanted) {
                continue;
            }
            let seeds: Vec<SimplexPoint> = found
                .iter()
                .filter(|(m, _)| m.is_subset_of(&mask))
                .map(|(_, l)| l.clone())
                .collect();
            let start = Instant::now();
            let report = optimize_scheme_seeded(params, mode, &mask, &seeds, spec.budget, Execution::Parallel)?;
            let ms = elapsed_ms(start, opts);
            found.push((mask.clone(), report.lambda.clone()));
            reports[2 * i + k] = Some((report, ms));
        }
    }

    let mut rows = Vec::new();
    for (i, scheme) in spec.schemes.iter().enumerate() {
        for &mode in &spec.modes {
            let k = match mode {
                Mode::Separate => 0,
                Mode::Joint => 1,
                _ => continue,
            };
            let (report, ms) = reports[2 * i + k].clone().expect("every requested scheme and mode was optimized");
            rows.push(ResultRow {
                throughput: Some(report.average),
                lambda: report.lambda.weights().to_vec(),
                rates: report.rates.as_vector(),
                ms,
                ..blank_row(Scenario::Nonfading, swept, value, scheme.label(), mode)
            });
        }
    }
    if spec.modes.contains(&Mode::Upper) {
        let start = Instant::now();
        let ub = upper_bound(params)?;
        rows.push(ResultRow {
            throughput: Some(ub.average),
            ms: elapsed_ms(start, opts),
            ..blank_row(Scenario::Nonfading, swept, value, BOUND_LABEL.to_string(), Mode::Upper)
        });
    }
    Ok(rows)
}

/// Layer counts run ascending and common before individual; each search is
/// seeded with every optimum found so far at this point.
fn fading_point(
    spec: &SweepSpec,
    params: &SystemParams,
    swept: &str,
    value: f64,
    opts: RunOptions,
) -> CliResult<Vec<ResultRow>> {
    let evaluator = FadingEvaluator::new(params, spec.mc_samples, spec.seed, Execution::Parallel)?;
    let shape = if spec.symmetric_rates {
        SearchShape::Symmetric
    } else {
        SearchShape::Full
    };
    let mut layer_counts: Vec<usize> = spec
        .schemes
        .iter()
        .map(|s| match s {
            Scheme::Layers(n) => Ok(*n),
            Scheme::Mask(_) => Err(CliError::Config(format!("scheme `{}` is not a layer count", s.label()))),
        })
        .collect::<CliResult<_>>()?;
    layer_counts.sort_unstable();

    let mut seeds: Vec<(f64, FadingRates)> = Vec::new();
    let mut results: Vec<(usize, Mode, FadingOptimum, Option<f64>)> = Vec::new();
    for &layers in &layer_counts {
        for (mode, outage) in [(Mode::Common, OutageMode::Common), (Mode::Individual, OutageMode::Individual)] {
            if !spec.modes.contains(&mode) {
                continue;
            }
            let start = Instant::now();
            let opt = evaluator.optimize_seeded(outage, layers, shape, spec.budget, &seeds)?;
            let ms = elapsed_ms(start, opts);
            seeds.push((opt.lambda2, opt.rates));
            results.push((layers, mode, opt, ms));
        }
    }

    let mut rows = Vec::new();
    for scheme in &spec.schemes {
        let Scheme::Layers(layers) = *scheme else { unreachable!() };
        for &mode in &spec.modes {
            let (_, _, opt, ms) = results
                .iter()
                .find(|(l, m, _, _)| *l == layers && *m == mode)
                .expect("every requested scheme and mode was optimized");
            let r = &opt.rates;
            let (lambda, rates) = if layers == 1 {
                (vec![1.0], vec![r.r11, r.r21])
            } else {
                (vec![1.0 - opt.lambda2, opt.lambda2], vec![r.r11, r.r21, r.r12, r.r22])
            };
            rows.push(ResultRow {
                throughput: Some(opt.estimate.mean),
                std_error: Some(opt.estimate.std_error),
                lambda,
                rates,
                ms: *ms,
                ..blank_row(Scenario::Fading, swept, value, scheme.label(), mode)
            });
        }
    }
    Ok(rows)
}

fn below(a: f64, b: f64) -> bool {
    a <= b + GUARD_TOL * b.abs().max(1.0)
}

/// Checks the orderings every emitted row set must satisfy at each swept
/// value: the upper bound above every scheme, joint above separate, larger
/// masks above their sub-masks, two layers above one and individual above
/// common decoding. Also checks that exactly the fading rows carry a
/// standard error.
pub fn check_invariants(rows: &[ResultRow]) -> Result<(), String> {
    for row in rows {
        let fading = row.scenario == Scenario::Fading;
        if let Some(t) = row.throughput {
            if !(t.is_finite() && t >= 0.0) {
                return Err(format!("{} = {}: {} has throughput {t}", row.swept_param, row.value, row.series()));
            }
            if row.std_error.is_some() != fading {
                return Err(format!(
                    "{} = {}: {} must {}carry a standard error",
                    row.swept_param,
                    row.value,
                    row.series(),
                    if fading { "" } else { "not " }
                ));
            }
        }
    }
    let done: Vec<&ResultRow> = rows.iter().filter(|r| !r.is_skipped()).collect();
    for a in &done {
        for b in &done {
            if a.value != b.value || a.swept_param != b.swept_param || a.scenario != b.scenario {
                continue;
            }
            if dominated(a, b) {
                let (ta, tb) = (a.throughput.unwrap(), b.throughput.unwrap());
                if !below(ta, tb) {
                    return Err(format!(
                        "{} = {}: {} ({ta}) exceeds {} ({tb})",
                        a.swept_param,
                        a.value,
                        a.series(),
                        b.series()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Whether row `a` can never exceed row `b` at the same point.
fn dominated(a: &ResultRow, b: &ResultRow) -> bool {
    let (ma, mb) = (Mode::parse(&a.mode), Mode::parse(&b.mode));
    let (sa, sb) = (Scheme::parse_label(&a.scheme), Scheme::parse_label(&b.scheme));
    match (ma, mb) {
        (Some(Mode::Separate | Mode::Joint), Some(Mode::Upper)) => true,
        (Some(x @ (Mode::Separate | Mode::Joint)), Some(y @ (Mode::Separate | Mode::Joint))) => {
            let mode_ok = x == y || (x == Mode::Separate && y == Mode::Joint);
            match (sa, sb) {
                (Some(Scheme::Mask(la)), Some(Scheme::Mask(lb))) => {
                    mode_ok && (la != lb || x != y) && la.iter().all(|k| lb.contains(k))
                }
                _ => false,
            }
        }
        (Some(x @ (Mode::Common | Mode::Individual)), Some(y @ (Mode::Common | Mode::Individual))) => {
            let mode_ok = x == y || (x == Mode::Common && y == Mode::Individual);
            match (sa, sb) {
                (Some(Scheme::Layers(na)), Some(Scheme::Layers(nb))) => mode_ok && (na != nb || x != y) && na <= nb,
                _ => false,
            }
        }
        _ => false,
    }
}
