//! The cross-check suite: every claim the crate makes about exact formulas,
//! oracles, limit laws and covariance structure, bundled as pass/fail
//! criteria with pinned tolerances.
//!
//! Each criterion is deterministic given the master seed. `quick` mode
//! shrinks replicate counts for CI-scale runs; tolerances stay identical.

use rand::Rng;
use rayon::prelude::*;

use crate::exact;
use crate::fixpoint;
use crate::mc::{self, Welford};
use crate::pointset::{self, JumpKernel};
use crate::rng::substream;
use crate::tree::{enumerate_trees, HoppeTree};

/// Suite configuration.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    /// reduced replicate counts (same tolerances)
    pub quick: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: crate::DEFAULT_SEED,
            quick: false,
        }
    }
}

/// Outcome of one criterion.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {:2} {} ({:.2}s): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: u32, name: &'static str, run: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let started = std::time::Instant::now();
    let (pass, detail) = run();
    CriterionResult {
        id,
        name,
        pass,
        detail,
        seconds: started.elapsed().as_secs_f64(),
    }
}

/// 1. Enumeration-weighted E[T], E[W], E[U] match the closed forms to
///    1e−10 for n ≤ 8, θ ∈ {0.5, 1, 2, 5}.
pub fn criterion_enumeration_oracle(_cfg: &VerifyConfig) -> CriterionResult {
    timed(1, "enumeration-oracle", || {
        const TOL: f64 = 1e-10;
        let mut max_err = 0.0f64;
        for &theta in &[0.5, 1.0, 2.0, 5.0] {
            for n in 1..=8 {
                let (mut et, mut ew, mut eu) = (0.0, 0.0, 0.0);
                for (tree, p) in enumerate_trees(n, theta).expect("guarded n") {
                    let s = tree.stats().expect("tiny trees");
                    et += p * s.total_length as f64;
                    ew += p * s.wiener as f64;
                    eu += p * s.u as f64;
                }
                max_err = max_err
                    .max((et - exact::expected_t(n, theta)).abs())
                    .max((ew - exact::expected_w(n, theta)).abs())
                    .max((eu - exact::expected_u(n, theta)).abs());
            }
        }
        (
            max_err <= TOL,
            format!("max abs deviation {max_err:.2e} (tol {TOL:.0e})"),
        )
    })
}

/// 2. O(n) Wiener index equals the quadratic brute force exactly on 10³
///    random trees with n ≤ 200.
pub fn criterion_wiener_oracle(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let trees = if cfg.quick { 300u64 } else { 1_000 };
    timed(2, "wiener-oracle-equivalence", move || {
        let thetas = [0.25, 1.0, 4.0];
        let mismatches: u64 = (0..trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, 0x0002, i);
                let n = 2 + (rng.gen::<u64>() % 199) as usize;
                let theta = thetas[(i % 3) as usize];
                let t = HoppeTree::generate(n, theta, &mut rng).expect("valid");
                u64::from(t.stats().expect("small").wiener != t.wiener_bruteforce().expect("guarded"))
            })
            .sum();
        (
            mismatches == 0,
            format!("{mismatches} mismatches over {trees} trees (n <= 200)"),
        )
    })
}

/// 3. `U = nT − W` and `2R = (n−1)T − W` hold exactly on 10⁴ generated
///    trees with mixed θ.
pub fn criterion_identity_suite(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let trees = if cfg.quick { 2_000u64 } else { 10_000 };
    timed(3, "identity-suite", move || {
        let thetas = [0.25, 1.0, 4.0];
        let violations: u64 = (0..trees)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(seed, 0x0003, i);
                let n = 1 + (rng.gen::<u64>() % 500) as usize;
                let theta = thetas[(i % 3) as usize];
                let s = HoppeTree::generate(n, theta, &mut rng)
                    .expect("valid")
                    .stats()
                    .expect("small");
                let ok = s.u == n as i64 * s.total_length - s.wiener
                    && s.lca_sum == (n as i64 - 1) * s.total_length - s.wiener
                    && s.lca_sum >= 0;
                u64::from(!ok)
            })
            .sum();
        (
            violations == 0,
            format!("{violations} violations over {trees} trees"),
        )
    })
}

/// 4. Monte Carlo means of T₁₀₀, U₁₀₀, W₁₀₀ over 10⁵ trees satisfy |z| < 3
///    against the closed forms for θ ∈ {0.5, 1, 4}.
pub fn criterion_mc_vs_closed_form(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let replicates = if cfg.quick { 10_000u64 } else { 100_000 };
    timed(4, "mc-vs-closed-form", move || {
        const Z_MAX: f64 = 3.0;
        let n = 100usize;
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for &theta in &[0.5f64, 1.0, 4.0] {
            let (t, u, w) = mc::parallel_fold(
                replicates,
                || (Welford::new(), Welford::new(), Welford::new()),
                |acc, rep| {
                    let mut rng = substream(seed, 0x0004 ^ theta.to_bits(), rep);
                    let s = HoppeTree::generate(n, theta, &mut rng)
                        .expect("valid")
                        .stats()
                        .expect("small");
                    acc.0.push(s.total_length as f64);
                    acc.1.push(s.u as f64);
                    acc.2.push(s.wiener as f64);
                },
                |a, b| (a.0.merged(&b.0), a.1.merged(&b.1), a.2.merged(&b.2)),
            );
            let z = |acc: &Welford, target: f64| (acc.mean() - target) / acc.stderr();
            let zt = z(&t, exact::expected_t(n, theta));
            let zu = z(&u, exact::expected_u(n, theta));
            let zw = z(&w, exact::expected_w(n, theta));
            for v in [zt, zu, zw] {
                worst = worst.max(v.abs());
            }
            detail.push_str(&format!(
                "theta={theta}: z(T)={zt:+.2} z(U)={zu:+.2} z(W)={zw:+.2}; "
            ));
        }
        detail.push_str(&format!("({replicates} trees each)"));
        (worst < Z_MAX, detail)
    })
}

/// 5. The U fixed-point pool (10⁵ samples, 40 generations) lands within
///    3 SE of mean 1 and second moment 11/9.
pub fn criterion_u_limit_moments(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let (size, gens) = if cfg.quick { (20_000, 25) } else { (100_000, 40) };
    timed(5, "limit-moments-u", move || {
        let pool = fixpoint::iterate_u(&fixpoint::ScalarPool::u_init(size), gens, seed)
            .expect("valid pool");
        let m = pool.moments();
        let z_mean = (m.mean - 1.0) / m.se_mean;
        let z_second = (m.second_moment - 11.0 / 9.0) / m.se_second;
        (
            z_mean.abs() < 3.0 && z_second.abs() < 3.0,
            format!(
                "mean {:.5} (z {z_mean:+.2}), second {:.5} vs 11/9 (z {z_second:+.2}), pool {size}x{gens}",
                m.mean, m.second_moment
            ),
        )
    })
}

/// 6. U′ pools for θ ∈ {0.5, 2, 4} land within 3 SE of mean 2/(1+θ) and
///    second moment (12θ+76)/(3(1+θ)(2+θ)(3+θ)).
pub fn criterion_u_prime_limit_moments(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let (size, gens) = if cfg.quick { (20_000, 25) } else { (100_000, 40) };
    timed(6, "limit-moments-u-prime", move || {
        // the frozen pool's realized mean error propagates into the U' mean
        // with factor 1/(1+θ); a 4x feeder keeps that term negligible
        let u_pool = fixpoint::iterate_u(
            &fixpoint::ScalarPool::u_init(4 * size),
            gens.max(fixpoint::MIN_CONVERGED_GENERATION),
            seed,
        )
        .expect("valid pool");
        let mut pass = true;
        let mut detail = String::new();
        for &theta in &[0.5, 2.0, 4.0] {
            let init = fixpoint::ScalarPool::u_prime_init(size, theta).expect("valid theta");
            let pool = fixpoint::iterate_u_prime(&init, &u_pool, gens, seed ^ 0x6).expect("valid");
            let m = pool.moments();
            let want = exact::limit_moments_u(theta);
            let z_mean = (m.mean - want.mean) / m.se_mean;
            let z_second = (m.second_moment - want.second_moment) / m.se_second;
            pass &= z_mean.abs() < 3.0 && z_second.abs() < 3.0;
            detail.push_str(&format!("theta={theta}: z={z_mean:+.2}/{z_second:+.2}; "));
        }
        detail.push_str(&format!("(pool {size}x{gens})"));
        (pass, detail)
    })
}

/// 7. At n = 10⁴ over 10⁴ trees, the mean of `U_n/n²` is within 5% + 3 SE
///    of 2/(1+θ) and its variance within 10% + 3 SE of the limit variance,
///    for θ ∈ {1, 4}.
pub fn criterion_mixing_variance(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let (n, replicates) = if cfg.quick { (2_000, 2_000u64) } else { (10_000, 10_000) };
    timed(7, "finite-n-mixing-variance", move || {
        let mut pass = true;
        let mut detail = String::new();
        for &theta in &[1.0, 4.0] {
            let (mean_rep, var_rep) =
                mc::mixed_normal_variance_report(n, theta, 1.0, replicates, seed ^ 0x7)
                    .expect("valid");
            let mt = mean_rep.target.expect("target set");
            let vt = var_rep.target.expect("target set");
            let mean_ok =
                (mean_rep.estimate - mt).abs() <= 0.05 * mt + 3.0 * mean_rep.stderr;
            let var_ok = (var_rep.estimate - vt).abs() <= 0.10 * vt + 3.0 * var_rep.stderr;
            pass &= mean_ok && var_ok;
            detail.push_str(&format!(
                "theta={theta}: mean {:.4} vs {:.4}, var {:.4} vs {:.4}; ",
                mean_rep.estimate, mt, var_rep.estimate, vt
            ));
        }
        detail.push_str(&format!("(n={n}, {replicates} trees)"));
        (pass, detail)
    })
}

/// 8. First and second moments of `U′₅₀` and of `U_K + U′₅₀₋K + K²` agree
///    with |z| < 3 at 10⁵ replicates, θ ∈ {1, 3}.
pub fn criterion_subtree_decomposition(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let replicates = if cfg.quick { 10_000u64 } else { 100_000 };
    timed(8, "subtree-decomposition", move || {
        let mut pass = true;
        let mut detail = String::new();
        for &theta in &[1.0, 3.0] {
            let d = fixpoint::subtree_decomposition_check(50, theta, replicates, seed ^ 0x8)
                .expect("valid");
            pass &= d.max_abs_z() < 3.0;
            detail.push_str(&format!(
                "theta={theta}: z={:+.2}/{:+.2}; ",
                d.z_mean, d.z_second
            ));
        }
        detail.push_str(&format!("({replicates} replicates)"));
        (pass, detail)
    })
}

/// 9. Numeric `E[λ(V)]` stays below the closed-form bound, which stays
///    below 1, across the θ grid; at θ=1 the bound is 0.45 to 1e−12.
pub fn criterion_contraction(_cfg: &VerifyConfig) -> CriterionResult {
    timed(9, "contraction-certificate", || {
        let mut pass = (fixpoint::contraction_bound(1.0) - 0.45).abs() <= 1e-12;
        let mut detail = String::new();
        for &theta in &[0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
            let c = fixpoint::contraction_check(theta).expect("valid theta");
            pass &= c.satisfied;
            detail.push_str(&format!("theta={theta}: {:.4}<={:.4}; ", c.numeric, c.bound));
        }
        (pass, detail)
    })
}

/// 10. On 100 fixture trees (n=200, θ=1) the KS test of 10⁴ barycenter
///     resamples against `N(0, U_n/n²)` passes at the 1% level for ≥ 95%.
pub fn criterion_conditional_normality(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let (trees, resamples) = if cfg.quick { (40usize, 2_500u64) } else { (100, 10_000) };
    timed(10, "conditional-normality", move || {
        let n = 200usize;
        let kernel = JumpKernel::Normal { sigma2: 1.0 };
        let passes: usize = (0..trees)
            .into_par_iter()
            .map(|t| {
                let tree =
                    HoppeTree::generate(n, 1.0, &mut substream(seed, 0x0A00, t as u64))
                        .expect("valid");
                let stats = tree.stats().expect("small");
                let variance = pointset::conditional_variance(&stats, 1.0).expect("sigma2 > 0");
                let samples: Vec<f64> = (0..resamples)
                    .map(|rep| {
                        let mut rng = substream(seed, 0x0A01 ^ ((t as u64) << 16), rep);
                        pointset::barycenter(&pointset::realize(&tree, &kernel, &mut rng))
                    })
                    .collect();
                usize::from(mc::ks_normal(&samples, variance).expect("enough samples").pass)
            })
            .sum();
        let frac = passes as f64 / trees as f64;
        (
            frac >= 0.95,
            format!("{passes}/{trees} trees passed the 1% KS test"),
        )
    })
}

/// 11. Empirical Cov(X₁, X₂) at n=3, θ=1 under the normal kernel matches
///     σ²/2 with |z| < 3 at 10⁵ replicates.
pub fn criterion_covariance_law(cfg: &VerifyConfig) -> CriterionResult {
    let seed = cfg.seed;
    let replicates = if cfg.quick { 20_000u64 } else { 100_000 };
    timed(11, "covariance-law", move || {
        let kernel = JumpKernel::Normal { sigma2: 1.0 };
        let c = pointset::empirical_pair_covariance(1, 2, 3, 1.0, &kernel, replicates, seed ^ 0xB)
            .expect("valid");
        let z = (c.estimate - 0.5) / c.stderr;
        (
            z.abs() < 3.0,
            format!(
                "cov {:.4} vs 0.5 (z {z:+.2}), tree-average theory {:.4}",
                c.estimate, c.theory
            ),
        )
    })
}

/// Run the full suite in order.
pub fn run_all(cfg: &VerifyConfig) -> Vec<CriterionResult> {
    vec![
        criterion_enumeration_oracle(cfg),
        criterion_wiener_oracle(cfg),
        criterion_identity_suite(cfg),
        criterion_mc_vs_closed_form(cfg),
        criterion_u_limit_moments(cfg),
        criterion_u_prime_limit_moments(cfg),
        criterion_mixing_variance(cfg),
        criterion_subtree_decomposition(cfg),
        criterion_contraction(cfg),
        criterion_conditional_normality(cfg),
        criterion_covariance_law(cfg),
    ]
}

/// Convenience: run everything and collapse to a single flag.
pub fn all_pass(results: &[CriterionResult]) -> bool {
    results.iter().all(|r| r.pass)
}
