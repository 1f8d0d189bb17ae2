use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fading::FadingNoises;
use crate::model::{ChannelGains, SystemParams};
use crate::nonfading::CompressionNoises;
use crate::numerics::SimplexPoint;

/// Relative eigenvalue floor below which a covariance direction counts as
/// degenerate.
pub const JITTER_FLOOR: f64 = 1e-12;

/// Zero-mean jointly Gaussian vector built as a linear map of independent
/// sources: `variables = mixing · sources`, source `i` with variance
/// `source_var[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGaussian {
    labels: Vec<String>,
    mixing: DMatrix<Complex64>,
    source_var: Vec<f64>,
    cov: DMatrix<Complex64>,
    complex: bool,
}

impl JointGaussian {
    pub fn from_linear(labels: Vec<String>, mixing: DMatrix<Complex64>, source_var: Vec<f64>, complex: bool) -> Self {
        assert_eq!(labels.len(), mixing.nrows());
        assert_eq!(source_var.len(), mixing.ncols());
        let scaled = DMatrix::from_fn(mixing.nrows(), mixing.ncols(), |r, c| mixing[(r, c)] * source_var[c]);
        let cov = &scaled * mixing.adjoint();
        JointGaussian {
            labels,
            mixing,
            source_var,
            cov,
            complex,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn cov(&self) -> &DMatrix<Complex64> {
        &self.cov
    }

    pub fn mixing(&self) -> &DMatrix<Complex64> {
        &self.mixing
    }

    pub fn source_var(&self) -> &[f64] {
        &self.source_var
    }

    /// Circularly-symmetric complex variables rather than real ones.
    pub fn is_complex(&self) -> bool {
        self.complex
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn covariance(&self, a: &str, b: &str) -> Option<Complex64> {
        Some(self.cov[(self.index(a)?, self.index(b)?)])
    }

    /// Smallest eigenvalue of the covariance.
    pub fn min_eigenvalue(&self) -> f64 {
        self.cov.clone().symmetric_eigenvalues().min()
    }

    fn indices(&self, set: &[&str]) -> Result<Vec<usize>> {
        set.iter()
            .map(|l| {
                self.index(l)
                    .ok_or_else(|| Error::InvalidMask(format!("unknown variable `{l}`")))
            })
            .collect()
    }
}

fn submatrix(m: &DMatrix<Complex64>, rows: &[usize], cols: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| m[(rows[r], cols[c])])
}

/// Covariance of the variables at `target` given those at `given`, via the
/// Schur complement. A singular conditioning block is inverted on its range.
fn conditional_cov(cov: &DMatrix<Complex64>, target: &[usize], given: &[usize]) -> DMatrix<Complex64> {
    let s_tt = submatrix(cov, target, target);
    if given.is_empty() {
        return s_tt;
    }
    let s_tg = submatrix(cov, target, given);
    let s_gg = submatrix(cov, given, given);
    let solved = match s_gg.clone().cholesky() {
        Some(ch) => ch.solve(&s_tg.adjoint()),
        None => pseudo_inverse(&s_gg) * s_tg.adjoint(),
    };
    let out = s_tt - s_tg * solved;
    // Restore exact Hermitian symmetry.
    (&out + out.adjoint()).map(|v| v * 0.5)
}

fn pseudo_inverse(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = m.clone().symmetric_eigen();
    let floor = JITTER_FLOOR * eig.eigenvalues.amax().max(1.0);
    let inv = eig.eigenvalues.map(|v| if v > floor { 1.0 / v } else { 0.0 });
    let q = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(q.nrows(), q.ncols(), |r, c| q[(r, c)] * inv[c]);
    &scaled * q.adjoint()
}

/// `log₂` pseudo-determinant and number of degenerate directions.
fn pseudo_logdet(m: &DMatrix<Complex64>) -> (f64, usize) {
    if m.nrows() == 0 {
        return (0.0, 0);
    }
    let eig = m.clone().symmetric_eigenvalues();
    let scale = m.diagonal().iter().map(|v| v.re).fold(1.0, f64::max);
    let floor = JITTER_FLOOR * scale;
    let mut logdet = 0.0;
    let mut deficient = 0;
    for v in eig.iter() {
        if *v > floor {
            logdet += v.log2();
        } else {
            deficient += 1;
        }
    }
    (logdet, deficient)
}

/// `scale · log₂ det Σ_{A|C}`: the conditional differential entropy up to a
/// constant per dimension.
pub fn conditional_logdet(jg: &JointGaussian, a: &[&str], c: &[&str], scale: f64) -> Result<f64> {
    let a = jg.indices(a)?;
    let c = jg.indices(c)?;
    let (ld, deficient) = pseudo_logdet(&conditional_cov(&jg.cov, &a, &c));
    if deficient > 0 {
        return Err(Error::SingularConditional);
    }
    Ok(scale * ld)
}

/// Conditional mutual information `I(A; B | C)` in bits,
/// `scale · [log₂det Σ_{A|C} + log₂det Σ_{B|C} − log₂det Σ_{AB|C}]`.
///
/// Use `scale = ½` for real and `1` for circularly-symmetric complex
/// variables. Degenerate directions shared by a marginal and the joint block
/// cancel; a joint deficiency beyond the marginal ones means `A` and `B`
/// share a deterministic component and the information diverges.
pub fn gaussian_mi(jg: &JointGaussian, a: &[&str], b: &[&str], c: &[&str], scale: f64) -> Result<f64> {
    let ia = jg.indices(a)?;
    let ib = jg.indices(b)?;
    let ic = jg.indices(c)?;
    let overlap = ia.iter().any(|i| ib.contains(i) || ic.contains(i)) || ib.iter().any(|i| ic.contains(i));
    if overlap {
        return Err(Error::InvalidMask("variable sets must be disjoint".into()));
    }
    let ab: Vec<usize> = ia.iter().chain(&ib).copied().collect();
    let joint = conditional_cov(&jg.cov, &ab, &ic);
    let na = ia.len();
    let all_a: Vec<usize> = (0..na).collect();
    let all_b: Vec<usize> = (na..ab.len()).collect();
    let (ld_a, def_a) = pseudo_logdet(&submatrix(&joint, &all_a, &all_a));
    let (ld_b, def_b) = pseudo_logdet(&submatrix(&joint, &all_b, &all_b));
    let (ld_ab, def_ab) = pseudo_logdet(&joint);
    if def_ab > def_a + def_b {
        return Err(Error::SingularConditional);
    }
    Ok((scale * (ld_a + ld_b - ld_ab)).max(0.0))
}

pub fn layer_label(user: usize, layer: usize) -> String {
    format!("W{user}{layer}")
}

/// Label of the coarse (`level = 1`) or refined (`level = 2`) description
/// of base station `bs`.
pub fn description_label(bs: usize, level: usize) -> String {
    format!("V{bs}{level}")
}

/// Variables in order `W11..W1K, W21..W2K, Y1, Y2, V11, V12, V21, V22`;
/// sources in order `W.., Z1, Z2, Q11, Q12, Q21, Q22`.
fn assemble(
    layers: usize,
    powers: &[f64],
    h: [[Complex64; 2]; 2],
    q_var: [[f64; 2]; 2],
    complex: bool,
) -> JointGaussian {
    let nw = 2 * layers;
    let n_src = nw + 6;
    let z = |bs: usize| nw + bs;
    let q = |bs: usize, level: usize| nw + 2 + 2 * bs + (level - 1);
    let mut labels = Vec::new();
    for user in 1..=2 {
        for layer in 1..=layers {
            labels.push(layer_label(user, layer));
        }
    }
    labels.push("Y1".into());
    labels.push("Y2".into());
    for bs in 1..=2 {
        for level in 1..=2 {
            labels.push(description_label(bs, level));
        }
    }
    let mut m = DMatrix::<Complex64>::zeros(labels.len(), n_src);
    let zero = Complex64::new(0.0, 0.0);
    for w in 0..nw {
        m[(w, w)] = Complex64::new(1.0, 0.0);
    }
    for bs in 0..2 {
        let y = nw + bs;
        for user in 0..2 {
            for layer in 0..layers {
                m[(y, user * layers + layer)] = h[bs][user] * powers[layer].sqrt();
            }
        }
        m[(y, z(bs))] = Complex64::new(1.0, 0.0);
        let y_row: Vec<Complex64> = (0..n_src).map(|c| m[(y, c)]).collect();
        for level in 1..=2 {
            let v = nw + 2 + 2 * bs + (level - 1);
            for (c, val) in y_row.iter().enumerate() {
                m[(v, c)] = *val;
            }
            m[(v, q(bs, 2))] = Complex64::new(1.0, 0.0);
            m[(v, q(bs, 1))] = if level == 1 { Complex64::new(1.0, 0.0) } else { zero };
        }
    }
    let mut var = vec![1.0; nw + 2];
    for bs in 0..2 {
        var.push(q_var[bs][0]);
        var.push(q_var[bs][1]);
    }
    JointGaussian::from_linear(labels, m, var, complex)
}

/// Real Gaussian model of the five-layer scheme without fading.
pub fn assemble_nf(params: &SystemParams, lambda: &SimplexPoint, noises: &CompressionNoises) -> Result<JointGaussian> {
    params.validate()?;
    if lambda.dim() != 5 {
        return Err(Error::InvalidSimplex(format!("expected 5 layers, got {}", lambda.dim())));
    }
    let powers: Vec<f64> = lambda.weights().iter().map(|l| params.power * l).collect();
    let one = Complex64::new(1.0, 0.0);
    let a = Complex64::new(params.alpha, 0.0);
    let q = [noises.sigma1_sq, noises.sigma2_sq];
    Ok(assemble(5, &powers, [[one, a], [a, one]], [q, q], false))
}

/// Complex Gaussian model of the two-layer scheme for one fading realization.
pub fn assemble_fading(
    params: &SystemParams,
    gains: &ChannelGains,
    lambda2: f64,
    noises: &FadingNoises,
) -> Result<JointGaussian> {
    params.validate()?;
    let powers = [params.power * (1.0 - lambda2), params.power * lambda2];
    let a = params.alpha;
    let h = [[gains.a11, gains.a12 * a], [gains.a21 * a, gains.a22]];
    let q = [0, 1].map(|j| [noises.sigma1_sq[j], noises.sigma2_sq[j]]);
    Ok(assemble(2, &powers, h, q, true))
}
