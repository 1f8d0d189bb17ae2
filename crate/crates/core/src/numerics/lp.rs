//! Rate selection over the layer-rate polytope.

use serde::{Deserialize, Serialize};

use crate::nonfading::{LayerBounds, RateAssignment};

/// Objective coefficient of each layer's per-user rates in the average
/// throughput. Every user shares the same coefficient per layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateWeights(pub [f64; 5]);

impl RateWeights {
    /// Layer `k` counts with the probability of the states where it is
    /// decoded: always, any link high, a specific link high (layers 3 and 4),
    /// both links high.
    pub fn from_p_low(p: f64) -> Self {
        let q = 1.0 - p;
        RateWeights([1.0, 1.0 - p * p, q, q, q * q])
    }
}

/// Rates maximizing the weighted sum over the polytope cut out by `bounds`.
///
/// Every weight is nonnegative, so the layer-1, layer-2 and layer-5 sum
/// constraints bind and the layer-3/4 block attains `2·min(c_e, c_c + c_d)`.
/// Each bound is split evenly between the users; within the layer-3/4 block
/// user 1's layer 3 takes as much as its own cap allows and the cross pair
/// mirrors it.
pub fn max_weight_rates(bounds: &LayerBounds, weights: &RateWeights) -> RateAssignment {
    debug_assert!(weights.0.iter().all(|w| *w >= 0.0));
    let mut rates = [[0.0; 5]; 2];
    let pair = bounds.c_e.min(bounds.c_c + bounds.c_d);
    let r3 = bounds.c_c.min(pair);
    let r4 = (pair - r3).max(0.0).min(bounds.c_d);
    for user in 0..2 {
        rates[user][0] = bounds.c_a / 2.0;
        rates[user][1] = bounds.c_b / 2.0;
        rates[user][4] = bounds.c_f / 2.0;
    }
    // (R13, R24) decoded with link 1 high, (R23, R14) with link 2 high.
    rates[0][2] = r3;
    rates[1][3] = r4;
    rates[1][2] = r3;
    rates[0][3] = r4;
    RateAssignment::from_array(rates)
}

/// The rate polytope as `A·x ≤ b` over the variables
/// `(R11..R15, R21..R25)`.
pub fn rate_polytope(bounds: &LayerBounds) -> (Vec<Vec<f64>>, Vec<f64>) {
    let var = |user: usize, layer: usize| user * 5 + (layer - 1);
    let row = |entries: &[(usize, usize)]| {
        let mut r = vec![0.0; 10];
        for &(u, k) in entries {
            r[var(u, k)] = 1.0;
        }
        r
    };
    let a = vec![
        row(&[(0, 1), (1, 1)]),
        row(&[(0, 2), (1, 2)]),
        row(&[(0, 3)]),
        row(&[(1, 3)]),
        row(&[(0, 4)]),
        row(&[(1, 4)]),
        row(&[(0, 3), (1, 4)]),
        row(&[(1, 3), (0, 4)]),
        row(&[(0, 5), (1, 5)]),
    ];
    let b = vec![
        bounds.c_a, bounds.c_b, bounds.c_c, bounds.c_c, bounds.c_d, bounds.c_d, bounds.c_e, bounds.c_e, bounds.c_f,
    ];
    (a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Dense tableau simplex for `max c·x` s.t. `A·x ≤ b`, `x ≥ 0`, with `b ≥ 0`
/// so the origin is a feasible start. Bland's rule prevents cycling.
/// Returns `None` if the problem is unbounded.
pub fn solve_lp(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<LpSolution> {
    const EPS: f64 = 1e-12;
    let m = a.len();
    let n = c.len();
    assert!(b.iter().all(|v| *v >= 0.0), "right-hand sides must be nonnegative");
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = b[i];
    }
    for j in 0..n {
        t[m][j] = -c[j];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter] > EPS {
                let ratio = t[i][width - 1] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][width - 1] / t[l][enter];
                        if ratio < best - EPS || (ratio <= best + EPS && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let leave = leave?;
        let pivot = t[leave][enter];
        for v in t[leave].iter_mut() {
            *v /= pivot;
        }
        let pivot_row = t[leave].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != leave && row[enter] != 0.0 {
                let f = row[enter];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        basis[leave] = enter;
    }

    let mut x = vec![0.0; n];
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][width - 1];
        }
    }
    Some(LpSolution {
        objective: t[m][width - 1],
        x,
    })
}
