use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

/// Coarse grid pitch of the simplex search.
pub const SIMPLEX_GRID_PITCH: f64 = 0.05;
/// Final pattern-search pitch of the simplex search.
pub const SIMPLEX_MIN_PITCH: f64 = 1e-4;

/// Power split over broadcast-coding layers; nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSimplex("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSimplex(format!("negative or non-finite weight {w}")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSimplex(format!("weights sum to {sum}")));
        }
        Ok(SimplexPoint { weights })
    }

    /// All power on layer `layer` (1-based) out of `dim` layers.
    pub fn vertex(dim: usize, layer: usize) -> Self {
        assert!((1..=dim).contains(&layer));
        let mut weights = vec![0.0; dim];
        weights[layer - 1] = 1.0;
        SimplexPoint { weights }
    }

    pub fn uniform(dim: usize) -> Self {
        SimplexPoint {
            weights: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weight of layer `layer` (1-based).
    pub fn layer(&self, layer: usize) -> f64 {
        self.weights[layer - 1]
    }

    /// Summed weight over a set of 1-based layers.
    pub fn sum_over(&self, layers: &[usize]) -> f64 {
        layers.iter().map(|&k| self.layer(k)).sum()
    }
}

/// Layers allowed to carry power. Layer 1 is always present.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeMask {
    dim: usize,
    layers: Vec<usize>,
}

impl SchemeMask {
    pub fn new(dim: usize, layers: &[usize]) -> Result<Self> {
        let mut sorted = layers.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::InvalidMask("empty".into()));
        }
        if sorted[0] != 1 {
            return Err(Error::InvalidMask("layer 1 must be included".into()));
        }
        if sorted.iter().any(|&k| k == 0 || k > dim) {
            return Err(Error::InvalidMask(format!("layers {sorted:?} outside 1..={dim}")));
        }
        Ok(SchemeMask { dim, layers: sorted })
    }

    pub fn one_layer() -> Self {
        Self::new(5, &[1]).unwrap()
    }

    /// Two layers: the common layer plus the layer decoded only when both links are high.
    pub fn scheme1() -> Self {
        Self::new(5, &[1, 5]).unwrap()
    }

    /// Two layers: the common layer plus the layer decoded when any link is high.
    pub fn scheme2() -> Self {
        Self::new(5, &[1, 2]).unwrap()
    }

    pub fn three_layer() -> Self {
        Self::new(5, &[1, 2, 5]).unwrap()
    }

    pub fn five_layer() -> Self {
        Self::new(5, &[1, 2, 3, 4, 5]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> &[usize] {
        &self.layers
    }

    pub fn contains(&self, layer: usize) -> bool {
        self.layers.contains(&layer)
    }

    pub fn is_subset_of(&self, other: &SchemeMask) -> bool {
        self.dim == other.dim && self.layers.iter().all(|k| other.contains(*k))
    }

    fn embed(&self, active: &[f64]) -> SimplexPoint {
        let mut weights = vec![0.0; self.dim];
        for (w, &k) in active.iter().zip(&self.layers) {
            weights[k - 1] = *w;
        }
        SimplexPoint { weights }
    }
}

impl fmt::Display for SchemeMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.layers.iter().map(|k| k.to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Integer compositions of `total` into `parts` nonnegative parts, in
/// lexicographic order.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(parts - 1, total - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Index of the first maximum (ties keep the earliest entry).
pub(crate) fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Maximizes `objective` over simplex points supported on `mask`.
///
/// Evaluates every point of the masked grid with pitch
/// [`SIMPLEX_GRID_PITCH`], then runs a pattern search that moves mass between
/// pairs of active layers, halving the step down to [`SIMPLEX_MIN_PITCH`].
/// `budget` caps the number of refinement evaluations; the grid is always
/// evaluated in full. Ties go to the earliest point in grid/poll order.
pub fn maximize_on_simplex<F>(
    objective: F,
    mask: &SchemeMask,
    budget: usize,
    exec: Execution,
) -> (SimplexPoint, f64)
where
    F: Fn(&SimplexPoint) -> f64 + Sync + Send,
{
    maximize_on_simplex_seeded(objective, mask, &[], budget, exec)
}

/// Like [`maximize_on_simplex`], but also evaluates `seeds` supported on
/// `mask` and starts the refinement from the best of grid and seeds. The
/// result is never below the best admissible seed.
pub fn maximize_on_simplex_seeded<F>(
    objective: F,
    mask: &SchemeMask,
    seeds: &[SimplexPoint],
    budget: usize,
    exec: Execution,
) -> (SimplexPoint, f64)
where
    F: Fn(&SimplexPoint) -> f64 + Sync + Send,
{
    let m = mask.layers.len();
    if m == 1 {
        let point = mask.embed(&[1.0]);
        let value = objective(&point);
        return (point, value);
    }

    let steps = (1.0 / SIMPLEX_GRID_PITCH).round() as usize;
    let grid: Vec<Vec<f64>> = compositions(m, steps)
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / steps as f64).collect())
        .collect();
    let values = exec.map_slice(&grid, |x| objective(&mask.embed(x)));
    let best = first_argmax(&values);
    let mut x = grid[best].clone();
    let mut fx = values[best];
    for seed in seeds {
        if seed.dim() != mask.dim || !(1..=mask.dim).all(|k| mask.contains(k) || seed.layer(k) == 0.0) {
            continue;
        }
        let value = objective(seed);
        if value > fx {
            x = mask.layers.iter().map(|&k| seed.layer(k)).collect();
            fx = value;
        }
    }

    let mut step = SIMPLEX_GRID_PITCH / 2.0;
    let mut used = 0usize;
    while used < budget {
        let mut candidates = Vec::new();
        for to in 0..m {
            for from in 0..m {
                if to == from || x[from] <= 0.0 {
                    continue;
                }
                let delta = step.min(x[from]);
                let mut y = x.clone();
                y[from] = if delta == x[from] { 0.0 } else { x[from] - delta };
                y[to] += delta;
                candidates.push(y);
            }
        }
        candidates.truncate(budget - used);
        used += candidates.len();
        let vals = exec.map_slice(&candidates, |y| objective(&mask.embed(y)));
        let i = first_argmax(&vals);
        if !vals.is_empty() && vals[i] > fx {
            x = candidates.swap_remove(i);
            fx = vals[i];
        } else if step <= SIMPLEX_MIN_PITCH {
            break;
        } else {
            step = (step / 2.0).max(SIMPLEX_MIN_PITCH);
        }
    }
    (mask.embed(&x), fx)
}
