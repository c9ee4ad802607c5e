//! Closed-form expectations and distributions for Hoppe trees.
//!
//! Everything here is deterministic arithmetic: the generalized harmonic sum
//! `h_n^θ = Σ_{j=1}^{n−1} 1/(θ+j)`, the exact expectations of total path
//! length, Wiener index and `U_n = nT_n − W_n`, the recursions they satisfy,
//! the law of the subtree size `K` at vertex 1, and the first two moments of
//! the limit `U′ = lim U_n/n²`. These serve as ground truth for every
//! simulation in the crate.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tree::check_theta;

/// `h_n^θ = Σ_{j=1}^{n−1} 1/(θ+j)`; empty sum for `n = 1`.
///
/// Summed from the smallest terms up to keep rounding error near machine
/// precision even for `n = 10⁶`.
pub fn harmonic_theta(n: usize, theta: f64) -> f64 {
    debug_assert!(theta > 0.0);
    let mut sum = 0.0;
    for j in (1..n).rev() {
        sum += 1.0 / (theta + j as f64);
    }
    sum
}

/// Asymptotic-series coefficients `B_{2k}/(2k)` for the digamma tail.
const DIGAMMA_TAIL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma function `Ψ(x)` for `x > 0`.
///
/// Recurrence `Ψ(x) = Ψ(x+1) − 1/x` shifts the argument to `x ≥ 6`, then the
/// asymptotic expansion `ln x − 1/(2x) − Σ B_{2k}/(2k x^{2k})` finishes.
/// Absolute error stays below 1e−12 on the positive axis.
pub fn digamma(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::DigammaDomain(x));
    }
    let mut result = 0.0;
    let mut z = x;
    while z < 6.0 {
        result -= 1.0 / z;
        z += 1.0;
    }
    result += z.ln() - 0.5 / z;
    let r = 1.0 / (z * z);
    let mut pow = r;
    for c in DIGAMMA_TAIL {
        result -= c * pow;
        pow *= r;
    }
    Ok(result)
}

/// Stirling-series coefficients `B_{2k}/(2k(2k−1))` for the log-gamma tail.
const LN_GAMMA_TAIL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// `ln Γ(x)` for `x > 0`, by recurrence to `x ≥ 10` plus the Stirling series.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    let mut shift = 0.0;
    let mut z = x;
    while z < 10.0 {
        shift -= z.ln();
        z += 1.0;
    }
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    let mut tail = 0.0;
    let r = 1.0 / (z * z);
    let mut pow = 1.0 / z;
    for c in LN_GAMMA_TAIL {
        tail += c * pow;
        pow *= r;
    }
    shift + (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + tail
}

/// Exact `E T_n = (θ+n−1) h_n^θ`.
pub fn expected_t(n: usize, theta: f64) -> f64 {
    (theta + n as f64 - 1.0) * harmonic_theta(n, theta)
}

/// Exact `E U_n`; zero for the single-vertex tree.
pub fn expected_u(n: usize, theta: f64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let nf = n as f64;
    (theta + nf)
        * (theta + nf - 1.0)
        * (2.0 / (1.0 + theta)
            - 1.0 / (theta + nf - 1.0)
            - (1.0 + harmonic_theta(n - 1, theta)) / (theta + nf))
}

/// Exact `E W_n`; zero for the single-vertex tree.
pub fn expected_w(n: usize, theta: f64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let nf = n as f64;
    let h_prev = harmonic_theta(n - 1, theta);
    let h_n = harmonic_theta(n, theta);
    (theta + nf)
        * (theta + nf - 1.0)
        * ((theta - 1.0) * (1.0 / (theta + 1.0) - 1.0 / (theta + nf - 1.0) - h_prev / (theta + nf))
            + h_n
            - 1.0
            + (theta + 1.0) / (theta + nf))
}

/// Exact `E 2R_n = (n−1) E T_n − E W_n`.
pub fn expected_lca_sum(n: usize, theta: f64) -> f64 {
    (n as f64 - 1.0) * expected_t(n, theta) - expected_w(n, theta)
}

/// Outcome of replaying the one-step recursions with the closed forms.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RecursionCheck {
    pub n: usize,
    pub theta: f64,
    /// max over 2..=n of the relative mismatch, one entry per recursion
    pub err_t: f64,
    pub err_r: f64,
    pub err_u: f64,
    pub err_w: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Verify that the closed forms satisfy the unconditioned one-step
/// recursions for every size `2..=n`:
///
/// ```text
/// E T_m = (θ+m−1)/(θ+m−2) · E T_{m−1} + 1
/// E R_m = (θ+m)/(θ+m−2)   · E R_{m−1} + E T_{m−1}/(θ+m−2)
/// E U_m = (θ+m)/(θ+m−2)   · E U_{m−1} + E T_{m−1}/(θ+m−2) + 1
/// E W_m = (θ+m)/(θ+m−2)   · E W_{m−1} + (θ−1) E T_{m−1}/(θ+m−2) + m−1
/// ```
///
/// Mismatches are measured relative to `max(1, |lhs|)`.
pub fn expected_recursion_check(n: usize, theta: f64) -> RecursionCheck {
    const TOL: f64 = 1e-9;
    let rel = |lhs: f64, rhs: f64| (lhs - rhs).abs() / lhs.abs().max(1.0);
    let (mut err_t, mut err_r, mut err_u, mut err_w) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for m in 2..=n {
        let mf = m as f64;
        let grow = (theta + mf) / (theta + mf - 2.0);
        let t_prev = expected_t(m - 1, theta);
        let r_prev = expected_lca_sum(m - 1, theta) / 2.0;
        let u_prev = expected_u(m - 1, theta);
        let w_prev = expected_w(m - 1, theta);

        let t = expected_t(m, theta);
        let r = expected_lca_sum(m, theta) / 2.0;
        let u = expected_u(m, theta);
        let w = expected_w(m, theta);

        err_t = err_t.max(rel(
            t,
            (theta + mf - 1.0) / (theta + mf - 2.0) * t_prev + 1.0,
        ));
        err_r = err_r.max(rel(r, grow * r_prev + t_prev / (theta + mf - 2.0)));
        err_u = err_u.max(rel(u, grow * u_prev + t_prev / (theta + mf - 2.0) + 1.0));
        err_w = err_w.max(rel(
            w,
            grow * w_prev + (theta - 1.0) * t_prev / (theta + mf - 2.0) + mf - 1.0,
        ));
    }
    let pass = err_t < TOL && err_r < TOL && err_u < TOL && err_w < TOL;
    RecursionCheck {
        n,
        theta,
        err_t,
        err_r,
        err_u,
        err_w,
        tolerance: TOL,
        pass,
    }
}

/// `P(K = m)` for the size `K` of the subtree originated at vertex 1 in a
/// Hoppe(θ) tree with `n` vertices:
///
/// ```text
/// P(K=m) = C(n−2, m−1) · θ^{(n−m−1)} (m−1)! / (θ+1)^{(n−2)},   1 ≤ m ≤ n−1,
/// ```
///
/// with rising factorials `x^{(k)} = x(x+1)···(x+k−1)`. The rising
/// factorials telescope: `P(K=1) = θ/(θ+n−2)` and
/// `P(K=m+1)/P(K=m) = (n−1−m)/(θ+n−m−2)`, so the log pmf is accumulated
/// from these O(1) ratios. (Differencing `ln Γ` values near `n = 10³`
/// already costs ~1e−12 of absolute error, more than the pmf itself may
/// carry.)
pub fn k_pmf(n: usize, theta: f64, m: usize) -> Result<f64> {
    check_theta(theta)?;
    if n < 2 || m < 1 || m > n - 1 {
        return Err(Error::SubtreeSizeOutOfRange {
            m,
            max: n.saturating_sub(1),
        });
    }
    let mut ln_p = theta.ln() - (theta + (n - 2) as f64).ln();
    for j in 1..m {
        ln_p += ((n - 1 - j) as f64).ln() - (theta + (n - 2 - j) as f64).ln();
    }
    Ok(ln_p.exp())
}

/// Inversion sampler for the subtree-size law, with the cumulative pmf
/// precomputed once.
#[derive(Debug, Clone)]
pub struct KSampler {
    n: usize,
    cdf: Vec<f64>,
}

impl KSampler {
    pub fn new(n: usize, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        if n < 2 {
            return Err(Error::SubtreeSizeOutOfRange { m: 1, max: 0 });
        }
        let mut cdf = Vec::with_capacity(n - 1);
        let mut ln_p = theta.ln() - (theta + (n - 2) as f64).ln();
        let mut acc = ln_p.exp();
        cdf.push(acc);
        for m in 1..(n - 1) {
            ln_p += ((n - 1 - m) as f64).ln() - (theta + (n - 2 - m) as f64).ln();
            acc += ln_p.exp();
            cdf.push(acc);
        }
        Ok(KSampler { n, cdf })
    }

    /// Total pmf mass (should be 1 up to rounding); sampling normalizes by it.
    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().expect("cdf is nonempty")
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>() * self.total_mass();
        let idx = self.cdf.partition_point(|&c| c < u);
        idx.min(self.n - 2) + 1
    }
}

/// One draw of `K` by cdf inversion. Builds the cumulative pmf on the fly;
/// use [`KSampler`] for repeated draws at fixed `(n, θ)`.
pub fn k_sample<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Result<usize> {
    Ok(KSampler::new(n, theta)?.sample(rng))
}

/// One draw of `K` by the urn route: start with a white ball of weight θ and
/// a red ball of weight 1, draw proportional to weight `n−2` times, adding a
/// unit ball of the drawn colour each time; `K` is the final red count.
pub fn k_sample_urn<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Result<usize> {
    check_theta(theta)?;
    if n < 2 {
        return Err(Error::SubtreeSizeOutOfRange { m: 1, max: 0 });
    }
    let mut red = 1.0f64;
    let mut white = theta;
    for _ in 0..(n - 2) {
        if rng.gen::<f64>() * (red + white) < red {
            red += 1.0;
        } else {
            white += 1.0;
        }
    }
    Ok(red as usize)
}

/// First two moments (and variance) of the limit of `U_n/n²`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LimitMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
}

/// Moments of the distributional limit `U′` of `U_n/n²` for a Hoppe(θ)
/// tree; `θ = 1` is the random recursive tree case with mean 1, second
/// moment 11/9 and variance 2/9.
pub fn limit_moments_u(theta: f64) -> LimitMoments {
    let mean = 2.0 / (1.0 + theta);
    let second_moment = (12.0 * theta + 76.0) / (3.0 * (1.0 + theta) * (2.0 + theta) * (3.0 + theta));
    let variance = (28.0 * theta + 4.0)
        / (3.0 * (1.0 + theta) * (1.0 + theta) * (2.0 + theta) * (3.0 + theta));
    LimitMoments {
        mean,
        second_moment,
        variance,
    }
}
