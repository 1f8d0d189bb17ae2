//! Grid-seeded pattern search over axis-aligned boxes.

use crate::error::{Error, Result};
use crate::numerics::simplex::first_argmax;
use crate::par::Execution;

/// How grid coordinates in `[0, 1]` map onto an axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Linear,
    /// Logarithmic; both bounds must be positive.
    Log,
    /// `lower + u^q · (upper − lower)`: denser near the lower bound for `q > 1`.
    Power(f64),
}

/// One search dimension with its coarse grid resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn linear(lower: f64, upper: f64, points: usize) -> Self {
        Axis {
            lower,
            upper,
            points,
            spacing: Spacing::Linear,
        }
    }

    pub fn log(lower: f64, upper: f64, points: usize) -> Self {
        Axis {
            lower,
            upper,
            points,
            spacing: Spacing::Log,
        }
    }

    fn to_value(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.lower;
        }
        if u >= 1.0 {
            return self.upper;
        }
        match self.spacing {
            Spacing::Linear => self.lower + u * (self.upper - self.lower),
            Spacing::Log => (self.lower.ln() + u * (self.upper.ln() - self.lower.ln())).exp(),
            Spacing::Power(q) => self.lower + u.powf(q) * (self.upper - self.lower),
        }
    }

    fn to_unit(&self, x: f64) -> f64 {
        let width = self.upper - self.lower;
        let u = match self.spacing {
            Spacing::Linear => (x - self.lower) / width,
            Spacing::Log => (x.ln() - self.lower.ln()) / (self.upper.ln() - self.lower.ln()),
            Spacing::Power(q) => ((x - self.lower) / width).max(0.0).powf(1.0 / q),
        };
        if u.is_finite() {
            u.clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    fn pitch(&self) -> f64 {
        if self.points > 1 {
            1.0 / (self.points - 1) as f64
        } else {
            0.5
        }
    }

    fn grid(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![0.5];
        }
        (0..self.points).map(|k| k as f64 * self.pitch()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    /// Objective evaluations spent, grid included.
    pub evaluations: usize,
}

fn poll_directions(n: usize) -> Vec<Vec<f64>> {
    if n <= 3 {
        let mut dirs = Vec::new();
        let total = 3usize.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let d: Vec<f64> = (0..n)
                .map(|_| {
                    let digit = c % 3;
                    c /= 3;
                    digit as f64 - 1.0
                })
                .collect();
            if d.iter().any(|v| *v != 0.0) {
                dirs.push(d);
            }
        }
        dirs
    } else {
        let mut dirs = Vec::new();
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut d = vec![0.0; n];
                d[i] = sign;
                dirs.push(d);
            }
        }
        dirs
    }
}

fn cartesian(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let g = axis.grid();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                g.iter().map(move |u| {
                    let mut p = prefix.clone();
                    p.push(*u);
                    p
                })
            })
            .collect();
    }
    out
}

fn feasible_starts<P>(axes: &[Axis], feasible: &P, seeds: &[Vec<f64>]) -> (Vec<(Vec<f64>, Vec<f64>)>, usize)
where
    P: Fn(&[f64]) -> bool,
{
    let mut start = cartesian(axes);
    let grid_len = start.len();
    for seed in seeds {
        start.push(seed.iter().zip(axes).map(|(x, a)| a.to_unit(*x)).collect());
    }
    let mut grid_kept = 0;
    let kept = start
        .into_iter()
        .enumerate()
        .map(|(i, u)| {
            let x = to_values(axes, &u);
            (i, u, x)
        })
        .filter(|(_, _, x)| feasible(x))
        .map(|(i, u, x)| {
            if i < grid_len {
                grid_kept += 1;
            }
            (u, x)
        })
        .collect();
    (kept, grid_kept)
}

fn to_values(axes: &[Axis], u: &[f64]) -> Vec<f64> {
    u.iter().zip(axes).map(|(u, a)| a.to_value(*u)).collect()
}

struct Refined {
    x: Vec<f64>,
    fx: f64,
    used: usize,
}

/// Pattern search from unit-grid point `u` with value `fx`.
#[allow(clippy::too_many_arguments)]
fn pattern_search<F, P>(
    objective: &F,
    axes: &[Axis],
    feasible: &P,
    mut u: Vec<f64>,
    mut fx: f64,
    budget: usize,
    min_step: f64,
    exec: Execution,
) -> Refined
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    P: Fn(&[f64]) -> bool + Sync + Send,
{
    let mut x = to_values(axes, &u);
    let dirs = poll_directions(axes.len());
    let base: Vec<f64> = axes.iter().map(|a| a.pitch()).collect();
    let mut scale = 0.5;
    let mut used = 0usize;
    while used < budget && scale * base.iter().cloned().fold(0.0, f64::max) >= min_step {
        let mut candidates = Vec::new();
        for d in &dirs {
            let v: Vec<f64> = u
                .iter()
                .zip(d)
                .zip(&base)
                .map(|((ui, di), bi)| (ui + di * bi * scale).clamp(0.0, 1.0))
                .collect();
            if v == u {
                continue;
            }
            let xv = to_values(axes, &v);
            if feasible(&xv) {
                candidates.push((v, xv));
            }
        }
        candidates.truncate(budget - used);
        used += candidates.len();
        let vals = exec.map_slice(&candidates, |(_, x)| objective(x));
        let i = first_argmax(&vals);
        if !vals.is_empty() && vals[i] > fx {
            (u, x) = candidates.swap_remove(i);
            fx = vals[i];
        } else {
            scale /= 2.0;
        }
    }
    Refined { x, fx, used }
}

/// Maximizes `objective` over the box spanned by `axes`.
///
/// The full coarse grid (lexicographic, first axis slowest) and any `seeds`
/// are evaluated first; infeasible points are skipped without calling the
/// objective. A pattern search in grid coordinates then polls the current
/// point along axis and diagonal directions, moving to the best improving
/// neighbour and halving the step until it drops below `min_step` (in unit
/// grid coordinates) or `budget` refinement evaluations are spent.
pub fn maximize_on_grid<F, P>(
    objective: F,
    axes: &[Axis],
    feasible: P,
    seeds: &[Vec<f64>],
    budget: usize,
    min_step: f64,
    exec: Execution,
) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    P: Fn(&[f64]) -> bool + Sync + Send,
{
    let (start, _) = feasible_starts(axes, &feasible, seeds);
    if start.is_empty() {
        return Err(Error::InfeasibleEverywhere);
    }
    let values = exec.map_slice(&start, |(_, x)| objective(x));
    let best = first_argmax(&values);
    let out = pattern_search(
        &objective,
        axes,
        &feasible,
        start[best].0.clone(),
        values[best],
        budget,
        min_step,
        exec,
    );
    Ok(SearchOutcome {
        point: out.x,
        value: out.fx,
        evaluations: values.len() + out.used,
    })
}

/// Multi-start variant of [`maximize_on_grid`] for expensive objectives.
///
/// The coarse grid is ranked with the cheaper `screen`. The `starts` best
/// grid points (taking at most one per value of the first axis while
/// enough distinct values exist) and every seed are then evaluated with `objective`, and a
/// pattern search runs from each of the `starts` best of those, sharing
/// `budget` evenly. Evaluations of `screen` are not counted.
#[allow(clippy::too_many_arguments)]
pub fn maximize_screened<S, F, P>(
    screen: S,
    objective: F,
    axes: &[Axis],
    feasible: P,
    seeds: &[Vec<f64>],
    starts: usize,
    budget: usize,
    min_step: f64,
    exec: Execution,
) -> Result<SearchOutcome>
where
    S: Fn(&[f64]) -> f64 + Sync + Send,
    F: Fn(&[f64]) -> f64 + Sync + Send,
    P: Fn(&[f64]) -> bool + Sync + Send,
{
    let starts = starts.max(1);
    let (points, grid_len) = feasible_starts(axes, &feasible, seeds);
    if points.is_empty() {
        return Err(Error::InfeasibleEverywhere);
    }
    let screened = exec.map_slice(&points[..grid_len], |(_, x)| screen(x));
    let mut order: Vec<usize> = (0..grid_len).collect();
    // Stable sort keeps the lexicographic grid order among ties.
    order.sort_by(|&a, &b| screened[b].total_cmp(&screened[a]));
    // Prefer starts on distinct values of the first axis.
    let mut chosen: Vec<usize> = Vec::new();
    for &i in &order {
        if chosen.len() == starts {
            break;
        }
        if chosen.iter().all(|&c| points[c].0[0] != points[i].0[0]) {
            chosen.push(i);
        }
    }
    for &i in &order {
        if chosen.len() == starts {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen.extend(grid_len..points.len());

    let values = exec.map_slice(&chosen, |&i| objective(&points[i].1));
    let mut ranked: Vec<usize> = (0..chosen.len()).collect();
    ranked.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    ranked.truncate(starts);

    let mut evaluations = values.len();
    let mut best: Option<Refined> = None;
    let share = budget / ranked.len();
    for k in ranked {
        let i = chosen[k];
        let out = pattern_search(
            &objective,
            axes,
            &feasible,
            points[i].0.clone(),
            values[k],
            share,
            min_step,
            exec,
        );
        evaluations += out.used;
        if best.as_ref().is_none_or(|b| out.fx > b.fx) {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    Ok(SearchOutcome {
        point: best.x,
        value: best.fx,
        evaluations,
    })
}

/// Points per axis of the logarithmic grid used by [`maximize_on_box`].
pub const BOX_GRID_POINTS: usize = 32;

/// Maximizes `objective` over `[lower, upper]` (componentwise, positive
/// bounds) subject to `feasible`, using a logarithmic grid with
/// [`BOX_GRID_POINTS`] points per axis followed by pattern search.
pub fn maximize_on_box<F, P>(
    objective: F,
    lower: &[f64],
    upper: &[f64],
    feasible: P,
    budget: usize,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    P: Fn(&[f64]) -> bool + Sync + Send,
{
    assert_eq!(lower.len(), upper.len());
    let axes: Vec<Axis> = lower
        .iter()
        .zip(upper)
        .map(|(lo, hi)| Axis::log(*lo, *hi, BOX_GRID_POINTS))
        .collect();
    let out = maximize_on_grid(objective, &axes, feasible, &[], budget, 1e-11, Execution::Sequential)?;
    Ok((out.point, out.value))
}
