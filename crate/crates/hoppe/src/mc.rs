//! Monte Carlo harness: streaming moment accumulators, z-score reports
//! against exact targets, and a one-sample Kolmogorov–Smirnov test.
//!
//! Replicates are mapped in fixed-size chunks; each chunk folds serially and
//! chunk results merge in index order, so a report is bit-identical for any
//! number of worker threads.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact;
use crate::pointset::{barycenter, realize, JumpKernel};
use crate::rng::substream;
use crate::tree::{check_theta, HoppeTree};

/// Streaming mean/variance (Welford), mergeable pairwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Welford::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combine two disjoint accumulations (Chan et al. update).
    pub fn merged(&self, other: &Welford) -> Welford {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        let nf = n as f64;
        Welford {
            count: n,
            mean: self.mean + delta * other.count as f64 / nf,
            m2: self.m2
                + other.m2
                + delta * delta * self.count as f64 * other.count as f64 / nf,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (divisor n−1); zero until two values are seen.
    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count > 1 {
            (self.variance() / self.count as f64).sqrt()
        } else {
            0.0
        }
    }
}

/// Streaming central moments up to order four (Pébay update), needed for
/// the standard error of a sample variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments4 {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments4 {
    pub fn new() -> Self {
        Moments4::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merged(&self, other: &Moments4) -> Moments4 {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let na = self.count as f64;
        let nb = other.count as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d2 * delta * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Moments4 {
            count: self.count + other.count,
            mean: self.mean + delta * nb / n,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        }
    }

    pub fn stderr_mean(&self) -> f64 {
        if self.count > 1 {
            (self.variance() / self.count as f64).sqrt()
        } else {
            0.0
        }
    }

    /// Fourth central moment `μ₄`.
    pub fn fourth_central(&self) -> f64 {
        if self.count > 0 {
            self.m4 / self.count as f64
        } else {
            0.0
        }
    }

    /// Standard error of the sample variance,
    /// `√[(μ₄ − s⁴(n−3)/(n−1)) / n]`.
    pub fn stderr_variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let s2 = self.variance();
        let v = (self.fourth_central() - s2 * s2 * (n - 3.0) / (n - 1.0)) / n;
        v.max(0.0).sqrt()
    }
}

/// Replicates per serial chunk. Fixed so that the merge tree (and hence the
/// result bits) do not depend on the thread count.
const CHUNK: u64 = 4096;

/// Fold `step` over replicate indices `0..replicates` with chunk-level
/// parallelism and a deterministic in-order merge.
pub(crate) fn parallel_fold<A, I, S, M>(replicates: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64) + Sync,
    M: Fn(A, A) -> A,
{
    let chunks = replicates.div_ceil(CHUNK);
    let parts: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let hi = ((c + 1) * CHUNK).min(replicates);
            for rep in c * CHUNK..hi {
                step(&mut acc, rep);
            }
            acc
        })
        .collect();
    parts.into_iter().reduce(merge).unwrap_or_else(init)
}

/// A named tree or point functional estimated by [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// total path length `T_n`
    TotalLength,
    /// Wiener index `W_n`
    Wiener,
    /// `U_n = nT_n − W_n`
    U,
    /// `U_n/n²`
    UOverN2,
    /// second moment of the barycenter over fresh (tree, jumps) pairs,
    /// which is `Var(S_n) = σ²E[U_n]/n²` for a centered kernel
    BarycenterVariance,
}

impl Statistic {
    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "t" => Ok(Statistic::TotalLength),
            "w" => Ok(Statistic::Wiener),
            "u" => Ok(Statistic::U),
            "u/n2" | "u/n^2" => Ok(Statistic::UOverN2),
            "sn-var" | "sn_var" | "snvar" => Ok(Statistic::BarycenterVariance),
            _ => Err(Error::UnknownStatistic(name.to_string())),
        }
    }
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Statistic::TotalLength => "T",
            Statistic::Wiener => "W",
            Statistic::U => "U",
            Statistic::UOverN2 => "U/n2",
            Statistic::BarycenterVariance => "sn-var",
        };
        f.write_str(name)
    }
}

/// Estimator, standard error and z-score against a theoretical target.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub target: Option<f64>,
    pub z: Option<f64>,
    pub replicates: u64,
    pub seed: u64,
    pub wall_time: f64,
}

impl ExperimentReport {
    pub fn new(
        name: String,
        estimate: f64,
        stderr: f64,
        target: Option<f64>,
        replicates: u64,
        seed: u64,
        wall_time: f64,
    ) -> Self {
        let z = target.map(|t| {
            let diff = estimate - t;
            if stderr > 0.0 {
                diff / stderr
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            }
        });
        ExperimentReport {
            name,
            estimate,
            stderr,
            target,
            z,
            replicates,
            seed,
            wall_time,
        }
    }

    /// |z| when a target is present, +∞ otherwise-degenerate cases excluded.
    pub fn abs_z(&self) -> Option<f64> {
        self.z.map(f64::abs)
    }
}

/// Estimate a named statistic over fresh replicates and compare it to the
/// exact target. Streaming accumulation, no sample storage.
pub fn estimate(
    stat: Statistic,
    n: usize,
    theta: f64,
    kernel: Option<JumpKernel>,
    replicates: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    check_theta(theta)?;
    if n == 0 {
        return Err(Error::EmptyTree);
    }
    if replicates < 2 {
        return Err(Error::TooFewReplicates {
            need: 2,
            got: replicates,
        });
    }
    let started = Instant::now();
    let nf = n as f64;
    let kernel = match stat {
        Statistic::BarycenterVariance => {
            let k = kernel.unwrap_or(JumpKernel::Normal { sigma2: 1.0 });
            if !k.is_centered() {
                return Err(Error::KernelNotCentered);
            }
            Some(k)
        }
        _ => None,
    };
    let acc = parallel_fold(
        replicates,
        Welford::new,
        |acc, rep| {
            let mut rng = substream(seed, 0xE571, rep);
            let tree = HoppeTree::generate(n, theta, &mut rng).expect("validated parameters");
            let value = match stat {
                Statistic::TotalLength | Statistic::Wiener | Statistic::U | Statistic::UOverN2 => {
                    let s = tree.stats().expect("stat overflow");
                    match stat {
                        Statistic::TotalLength => s.total_length as f64,
                        Statistic::Wiener => s.wiener as f64,
                        Statistic::U => s.u as f64,
                        _ => s.u as f64 / (nf * nf),
                    }
                }
                Statistic::BarycenterVariance => {
                    let x = realize(&tree, kernel.as_ref().expect("kernel set"), &mut rng);
                    let s = barycenter(&x);
                    s * s
                }
            };
            acc.push(value);
        },
        |a, b| a.merged(&b),
    );
    let target = match stat {
        Statistic::TotalLength => exact::expected_t(n, theta),
        Statistic::Wiener => exact::expected_w(n, theta),
        Statistic::U => exact::expected_u(n, theta),
        Statistic::UOverN2 => exact::expected_u(n, theta) / (nf * nf),
        Statistic::BarycenterVariance => {
            kernel.expect("kernel set").variance() * exact::expected_u(n, theta) / (nf * nf)
        }
    };
    Ok(ExperimentReport::new(
        format!("{stat} n={n} theta={theta}"),
        acc.mean(),
        acc.stderr(),
        Some(target),
        replicates,
        seed,
        started.elapsed().as_secs_f64(),
    ))
}

/// Complementary error function (rational approximation, absolute error
/// below 1.3e−7, ample for KS thresholds).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587
                                    + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

/// Standard normal cumulative distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Significance level of [`ks_normal`].
pub const KS_ALPHA: f64 = 0.01;

/// One-sample KS test outcome against a centered normal.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct KsReport {
    /// sup-distance between empirical and target cdf
    pub statistic: f64,
    pub samples: usize,
    /// critical sup-distance at the 1% level (asymptotic)
    pub critical: f64,
    pub pass: bool,
}

/// One-sample Kolmogorov–Smirnov test of `samples` against `N(0, variance)`
/// at the 1% level, using the asymptotic critical value
/// `c(α) = √(−ln(α/2)/2)`.
pub fn ks_normal(samples: &[f64], variance: f64) -> Result<KsReport> {
    if variance <= 0.0 || !variance.is_finite() {
        return Err(Error::NonPositiveVariance(variance));
    }
    if samples.len() < 100 {
        return Err(Error::TooFewSamples {
            need: 100,
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let sd = variance.sqrt();
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = normal_cdf(x / sd);
        sup = sup
            .max((cdf - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - cdf).abs());
    }
    let critical = (-(KS_ALPHA / 2.0).ln() / 2.0).sqrt() / n.sqrt();
    Ok(KsReport {
        statistic: sup,
        samples: sorted.len(),
        critical,
        pass: sup <= critical,
    })
}

/// Mean and variance of the conditional barycenter variance `σ²U_n/n²`
/// over fresh trees, compared to the limit moments.
///
/// The limit variance target scales with σ⁴ (variance of a σ²-scaled
/// quantity); the whole suite runs at σ² = 1 where this is immaterial.
pub fn mixed_normal_variance_report(
    n: usize,
    theta: f64,
    sigma2: f64,
    replicates: u64,
    seed: u64,
) -> Result<(ExperimentReport, ExperimentReport)> {
    check_theta(theta)?;
    if sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(Error::NonPositiveVariance(sigma2));
    }
    if replicates < 2 {
        return Err(Error::TooFewReplicates {
            need: 2,
            got: replicates,
        });
    }
    let started = Instant::now();
    let nf = n as f64;
    let acc = parallel_fold(
        replicates,
        Moments4::new,
        |acc, rep| {
            let mut rng = substream(seed, 0x313E, rep);
            let tree = HoppeTree::generate(n, theta, &mut rng).expect("validated parameters");
            let u = tree.stats().expect("stat overflow").u as f64;
            acc.push(sigma2 * u / (nf * nf));
        },
        |a, b| a.merged(&b),
    );
    let limits = exact::limit_moments_u(theta);
    let elapsed = started.elapsed().as_secs_f64();
    let mean_report = ExperimentReport::new(
        format!("mixing-variance-mean n={n} theta={theta}"),
        acc.mean(),
        acc.stderr_mean(),
        Some(sigma2 * limits.mean),
        replicates,
        seed,
        elapsed,
    );
    let var_report = ExperimentReport::new(
        format!("mixing-variance-var n={n} theta={theta}"),
        acc.variance(),
        acc.stderr_variance(),
        Some(sigma2 * sigma2 * limits.variance),
        replicates,
        seed,
        elapsed,
    );
    Ok((mean_report, var_report))
}
