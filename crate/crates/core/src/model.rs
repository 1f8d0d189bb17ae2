//! System model: parameters, backhaul states, channel gains and the 2×2
//! gain matrices seen by the two base stations.

use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};

/// Physical parameters of the two-cell uplink.
///
/// `power` is linear (not dB). Capacities are in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub power: f64,
    pub alpha: f64,
    pub cap_low: f64,
    pub cap_delta: f64,
    pub p_low: f64,
}

impl SystemParams {
    pub fn new(power: f64, alpha: f64, cap_low: f64, cap_delta: f64, p_low: f64) -> Result<Self> {
        let params = SystemParams {
            power,
            alpha,
            cap_low,
            cap_delta,
            p_low,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_domain("power", self.power, self.power >= 0.0, "power ≥ 0")?;
        check_domain("alpha", self.alpha, (0.0..=1.0).contains(&self.alpha), "0 ≤ alpha ≤ 1")?;
        check_domain("cap_low", self.cap_low, self.cap_low >= 0.0, "C ≥ 0")?;
        check_domain("cap_delta", self.cap_delta, self.cap_delta >= 0.0, "ΔC ≥ 0")?;
        check_domain("p_low", self.p_low, (0.0..=1.0).contains(&self.p_low), "0 ≤ p ≤ 1")
    }

    /// Total variance P(1+α²)+1 of each received signal without fading.
    pub fn received_variance_nf(&self) -> f64 {
        self.power * (1.0 + self.alpha * self.alpha) + 1.0
    }
}

/// Joint state of the two backhaul links. `H` marks the high-capacity link
/// (capacity C+ΔC), `L` the low one (capacity C); the first letter is link 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BackhaulState {
    LL,
    HL,
    LH,
    HH,
}

impl BackhaulState {
    pub const ALL: [BackhaulState; 4] = [
        BackhaulState::LL,
        BackhaulState::HL,
        BackhaulState::LH,
        BackhaulState::HH,
    ];

    /// Whether link `link` (0 or 1) is in the high-capacity state.
    pub fn is_high(self, link: usize) -> bool {
        match (self, link) {
            (BackhaulState::HH, _) => true,
            (BackhaulState::HL, 0) | (BackhaulState::LH, 1) => true,
            _ => false,
        }
    }

    /// Per-link capacities `(c1, c2)`.
    pub fn capacities(self, params: &SystemParams) -> (f64, f64) {
        let cap = |high: bool| {
            if high {
                params.cap_low + params.cap_delta
            } else {
                params.cap_low
            }
        };
        (cap(self.is_high(0)), cap(self.is_high(1)))
    }

    /// The state with link indices swapped.
    pub fn mirror(self) -> Self {
        match self {
            BackhaulState::HL => BackhaulState::LH,
            BackhaulState::LH => BackhaulState::HL,
            s => s,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BackhaulState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Probability of a joint backhaul state when each link is independently
/// low with probability `p_low`.
pub fn state_probability(state: BackhaulState, p_low: f64) -> f64 {
    let q = 1.0 - p_low;
    match state {
        BackhaulState::LL => p_low * p_low,
        BackhaulState::HL | BackhaulState::LH => p_low * q,
        BackhaulState::HH => q * q,
    }
}

/// Channel gains `a_{j,k}` from user `k` to base station `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelGains {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl ChannelGains {
    /// Unit gains of the non-fading scenario.
    pub fn unit() -> Self {
        let one = Complex64::new(1.0, 0.0);
        ChannelGains {
            a11: one,
            a12: one,
            a21: one,
            a22: one,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Gains with the two users and the two base stations relabelled.
    pub fn swapped(&self) -> Self {
        ChannelGains {
            a11: self.a22,
            a12: self.a21,
            a21: self.a12,
            a22: self.a11,
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        ChannelGains {
            a11: self.a11 * t,
            a12: self.a12 * t,
            a21: self.a21 * t,
            a22: self.a22 * t,
        }
    }
}

/// Draws the four gains of fading realization `index` from stream `seed`.
///
/// Each `(seed, index)` pair maps to its own ChaCha stream, so a draw does
/// not depend on which other draws were made or in what order.
pub fn sample_gains(seed: u64, index: u64) -> ChannelGains {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut draw = || {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    };
    ChannelGains {
        a11: draw(),
        a12: draw(),
        a21: draw(),
        a22: draw(),
    }
}

/// 2×2 Hermitian matrix `[[d1, off], [conj(off), d2]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermitianM2 {
    pub d1: f64,
    pub d2: f64,
    pub off: Complex64,
}

impl HermitianM2 {
    pub fn new(d1: f64, d2: f64, off: Complex64) -> Self {
        HermitianM2 { d1, d2, off }
    }

    pub fn zero() -> Self {
        Self::diag(0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub fn diag(d1: f64, d2: f64) -> Self {
        HermitianM2 {
            d1,
            d2,
            off: Complex64::new(0.0, 0.0),
        }
    }

    /// Outer product `h·hᴴ` of a column vector.
    pub fn outer(h: [Complex64; 2]) -> Self {
        HermitianM2 {
            d1: h[0].norm_sqr(),
            d2: h[1].norm_sqr(),
            off: h[0] * h[1].conj(),
        }
    }

    /// Entry `(row, col)` with zero-based indices.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        match (row, col) {
            (0, 0) => Complex64::new(self.d1, 0.0),
            (1, 1) => Complex64::new(self.d2, 0.0),
            (0, 1) => self.off,
            (1, 0) => self.off.conj(),
            _ => panic!("index ({row}, {col}) out of range for a 2×2 matrix"),
        }
    }

    pub fn trace(&self) -> f64 {
        self.d1 + self.d2
    }

    pub fn det(&self) -> f64 {
        self.d1 * self.d2 - self.off.norm_sqr()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.d1 + self.d2);
        let half_gap = 0.5 * (self.d1 - self.d2);
        let r = (half_gap * half_gap + self.off.norm_sqr()).sqrt();
        (mean - r, mean + r)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    pub fn is_finite(&self) -> bool {
        self.d1.is_finite() && self.d2.is_finite() && self.off.re.is_finite() && self.off.im.is_finite()
    }
}

impl Add for HermitianM2 {
    type Output = HermitianM2;

    fn add(self, rhs: HermitianM2) -> HermitianM2 {
        HermitianM2 {
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
            off: self.off + rhs.off,
        }
    }
}

impl Mul<HermitianM2> for f64 {
    type Output = HermitianM2;

    fn mul(self, rhs: HermitianM2) -> HermitianM2 {
        HermitianM2 {
            d1: self * rhs.d1,
            d2: self * rhs.d2,
            off: rhs.off * self,
        }
    }
}

/// Gain matrices `(A1, A2)` of the non-fading scenario.
pub fn gain_matrices_nf(alpha: f64) -> Result<(HermitianM2, HermitianM2)> {
    check_domain("alpha", alpha, (0.0..=1.0).contains(&alpha), "0 ≤ alpha ≤ 1")?;
    Ok(gain_matrices_fading(&ChannelGains::unit(), alpha))
}

/// Gain matrices for a fading realization: `A1 = h1·h1ᴴ` with
/// `h1 = (a11, α·a21)` and `A2 = h2·h2ᴴ` with `h2 = (α·a12, a22)`.
pub fn gain_matrices_fading(gains: &ChannelGains, alpha: f64) -> (HermitianM2, HermitianM2) {
    debug_assert!(gains.is_finite());
    let a1 = HermitianM2::outer([gains.a11, gains.a21 * alpha]);
    let a2 = HermitianM2::outer([gains.a12 * alpha, gains.a22]);
    (a1, a2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_reject_out_of_domain() {
        assert!(SystemParams::new(10.0, 0.3, 1.0, 0.5, 0.1).is_ok());
        assert!(SystemParams::new(-1.0, 0.3, 1.0, 0.5, 0.1).is_err());
        assert!(SystemParams::new(10.0, 1.2, 1.0, 0.5, 0.1).is_err());
        assert!(SystemParams::new(10.0, 0.3, -1.0, 0.5, 0.1).is_err());
        assert!(SystemParams::new(10.0, 0.3, 1.0, -0.5, 0.1).is_err());
        assert!(SystemParams::new(10.0, 0.3, 1.0, 0.5, 1.5).is_err());
        assert!(SystemParams::new(f64::NAN, 0.3, 1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn nf_gain_matrices_at_edges() {
        let (a1, a2) = gain_matrices_nf(0.0).unwrap();
        assert_eq!(a1, HermitianM2::diag(1.0, 0.0));
        assert_eq!(a2, HermitianM2::diag(0.0, 1.0));

        let (a1, a2) = gain_matrices_nf(1.0).unwrap();
        let ones = HermitianM2::new(1.0, 1.0, c(1.0, 0.0));
        assert_eq!(a1, ones);
        assert_eq!(a2, ones);

        let (a1, a2) = gain_matrices_nf(0.3).unwrap();
        assert_abs_diff_eq!(a1.d1, 1.0);
        assert_abs_diff_eq!(a1.d2, 0.09, epsilon = 1e-15);
        assert_abs_diff_eq!(a1.off.re, 0.3);
        assert_abs_diff_eq!(a1.det(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a2.d1, 0.09, epsilon = 1e-15);
        assert_abs_diff_eq!(a2.d2, 1.0);

        assert!(gain_matrices_nf(1.5).is_err());
    }

    #[test]
    fn fading_matrices_unit_modulus_case() {
        let gains = ChannelGains {
            a11: c(0.0, 1.0),
            a12: c(1.0, 0.0),
            a21: c(1.0, 0.0),
            a22: c(1.0, 0.0),
        };
        let (a1, _) = gain_matrices_fading(&gains, 1.0);
        assert_eq!(a1.d1, 1.0);
        assert_eq!(a1.d2, 1.0);
        assert_eq!(a1.off, c(0.0, 1.0));
        assert_eq!(a1.entry(1, 0), c(0.0, -1.0));
        assert_eq!(a1.trace(), 2.0);
    }

    #[test]
    fn fading_with_unit_gains_matches_nf() {
        for alpha in [0.0, 0.2, 0.3, 0.77, 1.0] {
            let nf = gain_matrices_nf(alpha).unwrap();
            let fd = gain_matrices_fading(&ChannelGains::unit(), alpha);
            assert_eq!(nf, fd);
        }
    }

    #[test]
    fn fading_matrices_are_rank_one() {
        for i in 0..200 {
            let g = sample_gains(7, i);
            let alpha = (i as f64) / 200.0;
            let (a1, a2) = gain_matrices_fading(&g, alpha);
            let (lo, hi) = a1.eigenvalues();
            assert_abs_diff_eq!(hi, g.a11.norm_sqr() + alpha * alpha * g.a21.norm_sqr(), epsilon = 1e-12);
            assert!(lo.abs() <= 1e-10 * a1.trace().max(1e-300));
            let (lo2, _) = a2.eigenvalues();
            assert!(lo2.abs() <= 1e-10 * a2.trace().max(1e-300));
        }
    }

    #[test]
    fn state_probabilities() {
        let probs = |p| BackhaulState::ALL.map(|s| state_probability(s, p));
        assert_eq!(probs(1.0), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(probs(0.0), [0.0, 0.0, 0.0, 1.0]);
        let p = probs(0.1);
        for (got, want) in p.iter().zip([0.01, 0.09, 0.09, 0.81]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mirror_states() {
        assert_eq!(BackhaulState::HL.mirror(), BackhaulState::LH);
        assert_eq!(BackhaulState::LL.mirror(), BackhaulState::LL);
        let params = SystemParams::new(1.0, 0.5, 1.0, 2.0, 0.5).unwrap();
        let (c1, c2) = BackhaulState::HL.capacities(&params);
        let (m1, m2) = BackhaulState::LH.capacities(&params);
        assert_eq!((c1, c2), (m2, m1));
        assert_eq!((c1, c2), (3.0, 1.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_gains(42, 17), sample_gains(42, 17));
        assert_ne!(sample_gains(42, 17), sample_gains(42, 18));
        assert_ne!(sample_gains(42, 17), sample_gains(43, 17));
    }
}
