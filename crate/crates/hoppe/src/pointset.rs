//! Recursive random point sets over Hoppe trees.
//!
//! Given a tree and a covariant jump kernel, a realization attaches one
//! increment `Y_k ~ κ(0,·)` to every edge and sums along root paths, which
//! is equal in law to picking the parent point and jumping from it. For the
//! normal kernel the conditional law of the barycenter given the tree is
//! centered normal with variance `σ²U_n/n²`.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::mc::Welford;
use crate::rng::substream;
use crate::tree::{check_theta, HoppeTree, TreeStats};

/// Largest admissible Poisson rate; the sampler is a sequential inversion
/// search, intended for desk-scale rates only.
pub const MAX_POISSON_LAMBDA: f64 = 30.0;

/// A covariant jump law on ℝ. All four kinds satisfy
/// `κ(x,·) = κ(0,·) shifted by x`, so `m(x) = m(0)+x` and `v(x) = v(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpKernel {
    /// `N(x, σ²)`; centered.
    Normal { sigma2: f64 },
    /// `x + Poisson(λ)`; mean shift λ, variance λ.
    PoissonShift { lambda: f64 },
    /// `δ_{x+1}`; deterministic unit step.
    UnitShift,
    /// `(δ_{x−1} + δ_{x+1})/2`; centered, variance 1.
    SimpleRandomWalk,
}

impl JumpKernel {
    pub fn normal(sigma2: f64) -> Result<Self> {
        if sigma2 > 0.0 && sigma2.is_finite() {
            Ok(JumpKernel::Normal { sigma2 })
        } else {
            Err(Error::BadKernel(format!(
                "normal kernel needs sigma2 > 0, got {sigma2}"
            )))
        }
    }

    pub fn poisson_shift(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::BadKernel(format!(
                "poisson kernel needs lambda > 0, got {lambda}"
            )));
        }
        if lambda > MAX_POISSON_LAMBDA {
            return Err(Error::BadKernel(format!(
                "poisson kernel capped at lambda <= {MAX_POISSON_LAMBDA}, got {lambda}"
            )));
        }
        Ok(JumpKernel::PoissonShift { lambda })
    }

    /// Mean of one increment, `m(0)`.
    pub fn mean_shift(&self) -> f64 {
        match *self {
            JumpKernel::Normal { .. } | JumpKernel::SimpleRandomWalk => 0.0,
            JumpKernel::PoissonShift { lambda } => lambda,
            JumpKernel::UnitShift => 1.0,
        }
    }

    /// Variance of one increment, `v(0)`.
    pub fn variance(&self) -> f64 {
        match *self {
            JumpKernel::Normal { sigma2 } => sigma2,
            JumpKernel::PoissonShift { lambda } => lambda,
            JumpKernel::UnitShift => 0.0,
            JumpKernel::SimpleRandomWalk => 1.0,
        }
    }

    pub fn is_centered(&self) -> bool {
        self.mean_shift() == 0.0
    }

    /// One increment `Y ~ κ(0,·)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpKernel::Normal { sigma2 } => {
                let z: f64 = rng.sample(StandardNormal);
                z * sigma2.sqrt()
            }
            JumpKernel::PoissonShift { lambda } => poisson_inversion(lambda, rng),
            JumpKernel::UnitShift => 1.0,
            JumpKernel::SimpleRandomWalk => {
                if rng.gen::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    /// Parse a kernel spec: `normal:<sigma2>`, `poisson:<lambda>`, `unit`,
    /// `srw`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (kind, arg) = match spec.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (spec, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::BadKernel(format!("'{spec}' is missing a parameter")))?
                .parse()
                .map_err(|_| Error::BadKernel(format!("bad parameter in '{spec}'")))
        };
        match kind {
            "normal" => JumpKernel::normal(num(arg)?),
            "poisson" => JumpKernel::poisson_shift(num(arg)?),
            "unit" => Ok(JumpKernel::UnitShift),
            "srw" => Ok(JumpKernel::SimpleRandomWalk),
            _ => Err(Error::BadKernel(format!("unknown kernel '{spec}'"))),
        }
    }
}

impl std::fmt::Display for JumpKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            JumpKernel::Normal { sigma2 } => write!(f, "normal:{sigma2}"),
            JumpKernel::PoissonShift { lambda } => write!(f, "poisson:{lambda}"),
            JumpKernel::UnitShift => write!(f, "unit"),
            JumpKernel::SimpleRandomWalk => write!(f, "srw"),
        }
    }
}

/// Poisson draw by inversion with sequential search. The iteration guard
/// only protects against the cumulative sum saturating below u in floating
/// point; it is astronomically unlikely to bind for admissible λ.
fn poisson_inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    let u = rng.gen::<f64>();
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u32;
    let cap = (10.0 * lambda) as u32 + 100;
    while u > cdf && k < cap {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k as f64
}

/// Realize points on a fixed tree: `X_0 = 0`, `X_k = X_{parent(k)} + Y_k`
/// in one ascending pass.
pub fn realize<R: Rng + ?Sized>(tree: &HoppeTree, kernel: &JumpKernel, rng: &mut R) -> Vec<f64> {
    let n = tree.n();
    let parents = tree.parents();
    let mut x = vec![0.0f64; n];
    for k in 1..n {
        x[k] = x[parents[k] as usize] + kernel.sample(rng);
    }
    x
}

/// Arithmetic mean of the realized points `X_0..X_{n−1}` (the summand
/// `X_0 = 0` is included; it contributes nothing but fixes the divisor at n).
pub fn barycenter(points: &[f64]) -> f64 {
    debug_assert!(!points.is_empty());
    points.iter().sum::<f64>() / points.len() as f64
}

/// Conditional variance of the barycenter given the tree, `σ²·U_n/n²`.
pub fn conditional_variance(stats: &TreeStats, sigma2: f64) -> Result<f64> {
    if sigma2 <= 0.0 || !sigma2.is_finite() {
        return Err(Error::NonPositiveVariance(sigma2));
    }
    let n = stats.n as f64;
    Ok(sigma2 * stats.u as f64 / (n * n))
}

/// A tree together with one realization of points on it.
#[derive(Debug, Clone)]
pub struct PointRealization {
    pub tree: HoppeTree,
    pub kernel: JumpKernel,
    pub points: Vec<f64>,
}

impl PointRealization {
    pub fn generate<R: Rng + ?Sized>(tree: HoppeTree, kernel: JumpKernel, rng: &mut R) -> Self {
        let points = realize(&tree, &kernel, rng);
        PointRealization {
            tree,
            kernel,
            points,
        }
    }

    pub fn barycenter(&self) -> f64 {
        barycenter(&self.points)
    }

    /// CSV export, one row per vertex: `vertex,parent,depth,x` with `-1` as
    /// the root's parent.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "vertex,parent,depth,x")?;
        let depths = self.tree.depths();
        for (v, depth) in depths.iter().enumerate() {
            let parent = match self.tree.parent_of(v) {
                Some(p) => p as i64,
                None => -1,
            };
            writeln!(out, "{v},{parent},{depth},{}", self.points[v])?;
        }
        Ok(())
    }
}

/// Monte Carlo estimate of `Cov(X_j, X_k)` against the tree-averaged
/// theoretical value `E[D_jk]·σ²`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PairCovariance {
    /// mean of `X_j·X_k` over fresh (tree, jumps) pairs
    pub estimate: f64,
    pub stderr: f64,
    /// `E[D_jk]·σ²` estimated from the same trees
    pub theory: f64,
    pub replicates: u64,
}

/// Estimate `Cov(X_j, X_k)` over `replicates` fresh (tree, jumps) pairs.
///
/// Requires a centered kernel: then `E X_j = 0` and the plain product mean
/// is the covariance. The matching theory value `E[D_jk]·σ²` is estimated
/// from the same trees via LCA depths.
pub fn empirical_pair_covariance(
    j: usize,
    k: usize,
    n: usize,
    theta: f64,
    kernel: &JumpKernel,
    replicates: u64,
    seed: u64,
) -> Result<PairCovariance> {
    check_theta(theta)?;
    if !kernel.is_centered() {
        return Err(Error::KernelNotCentered);
    }
    for v in [j, k] {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
    }
    if replicates < 2 {
        return Err(Error::TooFewReplicates {
            need: 2,
            got: replicates,
        });
    }
    let kernel = *kernel;
    let (product, lca) = crate::mc::parallel_fold(
        replicates,
        || (Welford::new(), Welford::new()),
        move |(product, lca), rep| {
            let mut rng = substream(seed, 0x9A1C, rep);
            let tree = HoppeTree::generate(n, theta, &mut rng).expect("validated parameters");
            let x = realize(&tree, &kernel, &mut rng);
            product.push(x[j] * x[k]);
            lca.push(tree.lca_depth(j, k).expect("validated vertices") as f64);
        },
        |(p1, l1), (p2, l2)| (p1.merged(&p2), l1.merged(&l2)),
    );
    Ok(PairCovariance {
        estimate: product.mean(),
        stderr: product.stderr(),
        theory: lca.mean() * kernel.variance(),
        replicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::tree::HoppeTree;

    fn fixed_tree(n: usize, theta: f64, seed: u64) -> HoppeTree {
        HoppeTree::generate(n, theta, &mut substream(seed, 9, 9)).unwrap()
    }

    #[test]
    fn kernel_descriptors() {
        let k = JumpKernel::normal(2.0).unwrap();
        assert_eq!((k.mean_shift(), k.variance()), (0.0, 2.0));
        assert!(k.is_centered());
        let k = JumpKernel::poisson_shift(3.0).unwrap();
        assert_eq!((k.mean_shift(), k.variance()), (3.0, 3.0));
        assert!(!k.is_centered());
        assert_eq!(
            (JumpKernel::UnitShift.mean_shift(), JumpKernel::UnitShift.variance()),
            (1.0, 0.0)
        );
        assert!(JumpKernel::SimpleRandomWalk.is_centered());

        assert!(JumpKernel::normal(0.0).is_err());
        assert!(JumpKernel::poisson_shift(-1.0).is_err());
        assert!(JumpKernel::poisson_shift(31.0).is_err());
    }

    #[test]
    fn kernel_parse_round_trip() {
        for spec in ["normal:1.5", "poisson:2", "unit", "srw"] {
            let k = JumpKernel::parse(spec).unwrap();
            let back = JumpKernel::parse(&k.to_string()).unwrap();
            assert_eq!(k, back);
        }
        assert!(JumpKernel::parse("levy:1").is_err());
        assert!(JumpKernel::parse("normal").is_err());
        assert!(JumpKernel::parse("normal:x").is_err());
    }

    #[test]
    fn unit_shift_gives_depths() {
        let tree = fixed_tree(40, 0.5, 1);
        let x = realize(&tree, &JumpKernel::UnitShift, &mut substream(1, 0, 0));
        let depths = tree.depths();
        for (xi, di) in x.iter().zip(&depths) {
            assert_eq!(*xi, *di as f64);
        }
        // barycenter is then T/n
        let s = tree.stats().unwrap();
        assert!((barycenter(&x) - s.total_length as f64 / tree.n() as f64).abs() < 1e-12);
    }

    #[test]
    fn random_walk_parity_matches_depth() {
        let tree = fixed_tree(60, 1.0, 2);
        let depths = tree.depths();
        for rep in 0..50u64 {
            let x = realize(&tree, &JumpKernel::SimpleRandomWalk, &mut substream(2, 1, rep));
            for (xi, di) in x.iter().zip(&depths) {
                let diff = xi - *di as f64;
                assert_eq!(diff.rem_euclid(2.0), 0.0);
            }
        }
    }

    #[test]
    fn normal_kernel_variance_on_two_vertices() {
        let tree = HoppeTree::from_parents(1.0, vec![0, 0]).unwrap();
        let kernel = JumpKernel::normal(2.0).unwrap();
        let mut acc = Welford::new();
        let reps = 100_000u64;
        for rep in 0..reps {
            let x = realize(&tree, &kernel, &mut substream(3, 2, rep));
            acc.push(x[1]);
        }
        // sample variance of a normal: SE(s²) = σ²√(2/(R−1))
        let se = 2.0 * (2.0 / (reps as f64 - 1.0)).sqrt();
        assert!((acc.variance() - 2.0).abs() < 3.0 * se);
        assert!(acc.mean().abs() < 3.0 * (2.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn poisson_kernel_moments() {
        let kernel = JumpKernel::poisson_shift(3.0).unwrap();
        let mut acc = Welford::new();
        let mut rng = substream(4, 0, 0);
        let reps = 100_000;
        for _ in 0..reps {
            acc.push(kernel.sample(&mut rng));
        }
        assert!((acc.mean() - 3.0).abs() < 3.0 * acc.stderr());
        // Var = λ; SE of sample variance ≈ √((μ4 − σ⁴)/R), μ4 = λ(1+3λ)
        let se_var = ((3.0f64 * (1.0 + 3.0 * 3.0) ) / reps as f64).sqrt();
        assert!((acc.variance() - 3.0).abs() < 4.0 * se_var);
    }

    #[test]
    fn barycenter_of_single_point_is_zero() {
        let tree = HoppeTree::generate(1, 1.0, &mut substream(5, 0, 0)).unwrap();
        let x = realize(&tree, &JumpKernel::normal(1.0).unwrap(), &mut substream(5, 0, 1));
        assert_eq!(barycenter(&x), 0.0);
    }

    #[test]
    fn conditional_variance_examples() {
        let two = HoppeTree::from_parents(1.0, vec![0, 0]).unwrap().stats().unwrap();
        assert!((conditional_variance(&two, 4.0).unwrap() - 1.0).abs() < 1e-15);
        let path3 = HoppeTree::from_parents(1.0, vec![0, 0, 1]).unwrap().stats().unwrap();
        assert!((conditional_variance(&path3, 9.0).unwrap() - 5.0).abs() < 1e-12);
        let star3 = HoppeTree::from_parents(1.0, vec![0, 0, 0]).unwrap().stats().unwrap();
        assert!((conditional_variance(&star3, 9.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(conditional_variance(&two, 0.0).is_err());
    }

    #[test]
    fn barycenter_variance_on_fixed_tree() {
        // resampling jumps on one tree: Var(S_n) = σ²U_n/n²
        let tree = fixed_tree(30, 1.0, 6);
        let stats = tree.stats().unwrap();
        let kernel = JumpKernel::normal(1.0).unwrap();
        let mut acc = Welford::new();
        let reps = 100_000u64;
        for rep in 0..reps {
            acc.push(barycenter(&realize(&tree, &kernel, &mut substream(6, 3, rep))));
        }
        let target = conditional_variance(&stats, 1.0).unwrap();
        let se = target * (2.0 / (reps as f64 - 1.0)).sqrt();
        assert!(
            (acc.variance() - target).abs() < 3.0 * se,
            "got {}, want {target}",
            acc.variance()
        );
    }

    #[test]
    fn barycenter_mean_tracks_mean_shift() {
        // E[S_n | tree] = m(0)·T_n/n for any covariant kernel
        let tree = fixed_tree(25, 2.0, 7);
        let stats = tree.stats().unwrap();
        let kernel = JumpKernel::poisson_shift(2.0).unwrap();
        let mut acc = Welford::new();
        for rep in 0..100_000u64 {
            acc.push(barycenter(&realize(&tree, &kernel, &mut substream(7, 4, rep))));
        }
        let target = kernel.mean_shift() * stats.total_length as f64 / tree.n() as f64;
        assert!((acc.mean() - target).abs() < 3.0 * acc.stderr());
    }

    #[test]
    fn pair_covariance_examples() {
        let kernel = JumpKernel::normal(1.0).unwrap();
        // Cov(X_1, X_1) = Var(X_1) = σ² (D_1 = 1 always)
        let c = empirical_pair_covariance(1, 1, 3, 1.0, &kernel, 20_000, 11).unwrap();
        assert!((c.estimate - 1.0).abs() < 3.0 * c.stderr);
        assert_eq!(c.theory, 1.0);
        // X_0 ≡ 0
        let c = empirical_pair_covariance(0, 2, 3, 1.0, &kernel, 1_000, 11).unwrap();
        assert_eq!(c.estimate, 0.0);
        assert_eq!(c.theory, 0.0);
        // E[D_12] = 1/2 at n=3, θ=1, so Cov = σ²/2
        let c = empirical_pair_covariance(1, 2, 3, 1.0, &kernel, 100_000, 11).unwrap();
        assert!((c.estimate - 0.5).abs() < 3.0 * c.stderr, "{c:?}");
        assert!((c.theory - 0.5).abs() < 0.02);

        let shifted = JumpKernel::poisson_shift(1.0).unwrap();
        assert!(matches!(
            empirical_pair_covariance(1, 2, 3, 1.0, &shifted, 100, 11),
            Err(Error::KernelNotCentered)
        ));
        assert!(empirical_pair_covariance(1, 5, 3, 1.0, &kernel, 100, 11).is_err());
    }

    #[test]
    fn csv_export_shape() {
        let tree = fixed_tree(5, 1.0, 8);
        let real = PointRealization::generate(tree, JumpKernel::UnitShift, &mut substream(8, 0, 0));
        let mut buf = Vec::new();
        real.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "vertex,parent,depth,x");
        assert_eq!(lines[1], "0,-1,0,0");
    }
}
