//! Population iteration for the distributional fixed points behind the
//! limit laws, and the numeric contraction certificate.
//!
//! The scalar limits satisfy
//!
//! ```text
//! U  ≜ V²U* + (1−V)²U + V²,           V ~ U[0,1]          (θ = 1)
//! U′ ≜ (1−V)²U′ + V²U + V²,           V ~ Beta(1,θ)
//! ```
//!
//! and the joint standardized (Wiener index, path length) limits satisfy the
//! affine 2-D equations with matrices
//!
//! ```text
//! A*(V) = [ (1−V)²  V(1−V) ]     B*(V) = [ V²  V(1−V) ]
//!         [   0      1−V   ]             [ 0     V    ]
//! ```
//!
//! plus an inhomogeneity built from `Esig(v) = v ln v + (1−v) ln(1−v)`.
//!
//! A pool holds a large sample population; one generation draws, for every
//! slot, fresh coefficients and independent (with replacement) picks from
//! the previous population and applies the map. Under the verified
//! contraction condition the pool law converges geometrically in L₂; the
//! resampling dependence between slots is the standard bias source and is
//! controlled by the pool size. Slots are deterministic functions of
//! `(seed, map tag, generation, slot)`, so iteration is reproducible under
//! any parallelism degree.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{digamma, KSampler};
use crate::mc::Welford;
use crate::rng::{substream, SimRng};
use crate::tree::{check_theta, HoppeTree};

/// Generations required of a frozen input pool before it may feed a
/// dependent iteration.
pub const MIN_CONVERGED_GENERATION: u32 = 20;

/// `Esig(v) = v ln v + (1−v) ln(1−v)` with the limit convention
/// `Esig(0) = Esig(1) = 0`.
pub fn esig(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::UnitIntervalDomain(v));
    }
    Ok(esig_raw(v))
}

#[inline]
fn esig_raw(v: f64) -> f64 {
    let mut s = 0.0;
    if v > 0.0 {
        s += v * v.ln();
    }
    if v < 1.0 {
        s += (1.0 - v) * (1.0 - v).ln();
    }
    s
}

/// Inverse cdf of Beta(1, θ): `F⁻¹(u) = 1 − (1−u)^{1/θ}`.
pub fn beta_1_theta_inverse_cdf(theta: f64, u: f64) -> f64 {
    1.0 - (1.0 - u).powf(1.0 / theta)
}

/// One draw `V ~ Beta(1, θ)` by cdf inversion; θ = 1 is uniform.
pub fn sample_beta_1_theta<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    debug_assert!(theta > 0.0);
    beta_1_theta_inverse_cdf(theta, rng.gen::<f64>())
}

/// Which fixed-point map a pool belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum PoolKind {
    U,
    UPrime,
    Wt,
    WtPrime,
}

/// A population of scalar samples approximating a fixed-point law.
#[derive(Debug, Clone)]
pub struct ScalarPool {
    pub kind: PoolKind,
    pub theta: f64,
    pub samples: Vec<f64>,
    pub generation: u32,
}

/// A population of `(W̃, T̃)` pairs approximating a 2-D fixed-point law.
#[derive(Debug, Clone)]
pub struct PairPool {
    pub kind: PoolKind,
    pub theta: f64,
    pub samples: Vec<(f64, f64)>,
    pub generation: u32,
}

impl ScalarPool {
    /// Start the U iteration from the all-ones pool (matches `E U = 1`).
    pub fn u_init(size: usize) -> Self {
        ScalarPool {
            kind: PoolKind::U,
            theta: 1.0,
            samples: vec![1.0; size],
            generation: 0,
        }
    }

    /// Start the U′ iteration from the constant pool at its mean `2/(1+θ)`.
    pub fn u_prime_init(size: usize, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(ScalarPool {
            kind: PoolKind::UPrime,
            theta,
            samples: vec![2.0 / (1.0 + theta); size],
            generation: 0,
        })
    }

    /// A constant pool of arbitrary value, handy for map diagnostics.
    pub fn constant(kind: PoolKind, theta: f64, size: usize, value: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(ScalarPool {
            kind,
            theta,
            samples: vec![value; size],
            generation: 0,
        })
    }

    pub fn moments(&self) -> PoolMoments {
        scalar_moments(&self.samples)
    }
}

impl PairPool {
    pub fn wt_init(size: usize) -> Self {
        PairPool {
            kind: PoolKind::Wt,
            theta: 1.0,
            samples: vec![(0.0, 0.0); size],
            generation: 0,
        }
    }

    pub fn wt_prime_init(size: usize, theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(PairPool {
            kind: PoolKind::WtPrime,
            theta,
            samples: vec![(0.0, 0.0); size],
            generation: 0,
        })
    }

    /// Moments of each component, `[w, t]`.
    pub fn component_moments(&self) -> [PoolMoments; 2] {
        let w: Vec<f64> = self.samples.iter().map(|s| s.0).collect();
        let t: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        [scalar_moments(&w), scalar_moments(&t)]
    }

    /// Scalar pool of `Q·(W̃,T̃) + shift = T̃ − W̃ + shift`, the linear
    /// functional that recovers the U-type limits from the joint one.
    pub fn q_transform(&self, shift: f64) -> Vec<f64> {
        self.samples.iter().map(|&(w, t)| t - w + shift).collect()
    }
}

/// Mean and second moment of a pool with their standard errors.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PoolMoments {
    pub n: usize,
    pub mean: f64,
    pub se_mean: f64,
    pub second_moment: f64,
    pub se_second: f64,
}

/// Welford-based moments of a sample slice.
pub fn scalar_moments(samples: &[f64]) -> PoolMoments {
    let mut first = Welford::new();
    let mut second = Welford::new();
    for &x in samples {
        first.push(x);
        second.push(x * x);
    }
    PoolMoments {
        n: samples.len(),
        mean: first.mean(),
        se_mean: first.stderr(),
        second_moment: second.mean(),
        se_second: second.stderr(),
    }
}

#[inline]
fn draw_index<R: Rng + ?Sized>(rng: &mut R, len: usize) -> usize {
    // multiply-shift keeps the per-slot word budget fixed (no rejection);
    // the bias is O(len/2⁶⁴)
    ((rng.gen::<u64>() as u128 * len as u128) >> 64) as usize
}

const TAG_U: u64 = 1;
const TAG_U_PRIME: u64 = 2;
const TAG_WT: u64 = 3;
const TAG_WT_PRIME: u64 = 4;

fn slot_rng(seed: u64, tag: u64, generation: u32, slot: usize) -> SimRng {
    substream(seed, (tag << 32) | generation as u64, slot as u64)
}

fn expect_kind(kind: PoolKind, want: PoolKind) -> Result<()> {
    if kind == want {
        Ok(())
    } else {
        Err(Error::PoolKindMismatch {
            got: format!("{kind:?}"),
            want: format!("{want:?}"),
        })
    }
}

fn expect_converged(generation: u32, samples: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::EmptyPool);
    }
    if generation < MIN_CONVERGED_GENERATION {
        return Err(Error::PoolNotConverged {
            got: generation,
            need: MIN_CONVERGED_GENERATION,
        });
    }
    Ok(())
}

/// Iterate `U ≜ V²U* + (1−V)²U + V²` for `steps` generations (θ = 1 map).
pub fn iterate_u(pool: &ScalarPool, steps: u32, seed: u64) -> Result<ScalarPool> {
    expect_kind(pool.kind, PoolKind::U)?;
    if pool.samples.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut samples = pool.samples.clone();
    let len = samples.len();
    for g in pool.generation + 1..=pool.generation + steps {
        let prev = samples;
        samples = (0..len)
            .into_par_iter()
            .map(|slot| {
                let mut rng = slot_rng(seed, TAG_U, g, slot);
                let v: f64 = rng.gen();
                let u_star = prev[draw_index(&mut rng, len)];
                let u = prev[draw_index(&mut rng, len)];
                let w = 1.0 - v;
                v * v * u_star + w * w * u + v * v
            })
            .collect();
    }
    Ok(ScalarPool {
        kind: PoolKind::U,
        theta: 1.0,
        samples,
        generation: pool.generation + steps,
    })
}

/// Iterate `U′ ≜ (1−V)²U′ + V²U + V²` with `V ~ Beta(1,θ)` against a frozen,
/// converged U pool.
pub fn iterate_u_prime(
    pool: &ScalarPool,
    u_pool: &ScalarPool,
    steps: u32,
    seed: u64,
) -> Result<ScalarPool> {
    expect_kind(pool.kind, PoolKind::UPrime)?;
    expect_kind(u_pool.kind, PoolKind::U)?;
    expect_converged(u_pool.generation, u_pool.samples.len())?;
    if pool.samples.is_empty() {
        return Err(Error::EmptyPool);
    }
    let theta = pool.theta;
    let inv_theta = 1.0 / theta;
    let mut samples = pool.samples.clone();
    let len = samples.len();
    let frozen = &u_pool.samples;
    for g in pool.generation + 1..=pool.generation + steps {
        let prev = samples;
        samples = (0..len)
            .into_par_iter()
            .map(|slot| {
                let mut rng = slot_rng(seed, TAG_U_PRIME, g, slot);
                let v = 1.0 - (1.0 - rng.gen::<f64>()).powf(inv_theta);
                let u_prime = prev[draw_index(&mut rng, len)];
                let u = frozen[draw_index(&mut rng, frozen.len())];
                let w = 1.0 - v;
                w * w * u_prime + v * v * u + v * v
            })
            .collect();
    }
    Ok(ScalarPool {
        kind: PoolKind::UPrime,
        theta,
        samples,
        generation: pool.generation + steps,
    })
}

/// Project a pair population onto the centered subspace.
///
/// The standardized limits have mean zero by construction, but the mean map
/// of the 2-D recursion is only neutrally stable (eigenvalue 1 along T̃), so
/// an unprojected pool mean would random-walk with the generations.
fn recenter(samples: &mut [(f64, f64)]) {
    let n = samples.len() as f64;
    let (sw, st) = samples
        .iter()
        .fold((0.0, 0.0), |acc, s| (acc.0 + s.0, acc.1 + s.1));
    let (mw, mt) = (sw / n, st / n);
    for s in samples.iter_mut() {
        s.0 -= mw;
        s.1 -= mt;
    }
}

/// Iterate the 2-D map `(W̃,T̃) ≜ A*(V)(W̃*,T̃*) + B*(V)(W̃,T̃) + b*` with
/// uniform `V` and `b* = (3V(1−V)+Esig(V), V+Esig(V))`, recentering after
/// every generation.
pub fn iterate_wt(pool: &PairPool, steps: u32, seed: u64) -> Result<PairPool> {
    expect_kind(pool.kind, PoolKind::Wt)?;
    if pool.samples.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut samples = pool.samples.clone();
    let len = samples.len();
    for g in pool.generation + 1..=pool.generation + steps {
        let prev = samples;
        samples = (0..len)
            .into_par_iter()
            .map(|slot| {
                let mut rng = slot_rng(seed, TAG_WT, g, slot);
                let v: f64 = rng.gen();
                let (w_star, t_star) = prev[draw_index(&mut rng, len)];
                let (w, t) = prev[draw_index(&mut rng, len)];
                let o = 1.0 - v;
                let es = esig_raw(v);
                (
                    o * o * w_star + v * o * t_star + v * v * w + v * o * t + 3.0 * v * o + es,
                    o * t_star + v * t + v + es,
                )
            })
            .collect();
        recenter(&mut samples);
    }
    Ok(PairPool {
        kind: PoolKind::Wt,
        theta: 1.0,
        samples,
        generation: pool.generation + steps,
    })
}

/// Iterate the Hoppe 2-D map `(W̃′,T̃′) ≜ A*(V)(W̃′,T̃′) + c*` with
/// `V ~ Beta(1,θ)`, `c* = B*(V)(W̃,T̃) + b*` drawing `(W̃,T̃)` from a frozen
/// converged pool, and the modified inhomogeneity
///
/// ```text
/// b*₁ = ((θ+5)/(θ+1) − (2θ+4)/(θ+1)·V)·V + Esig(V) + (Ψ(θ+1)−Ψ(2))·V
/// b*₂ = V + Esig(V) + (Ψ(θ+1)−Ψ(2))·V
/// ```
///
/// Recenters after every generation, like [`iterate_wt`].
pub fn iterate_wt_prime(
    pool: &PairPool,
    wt_pool: &PairPool,
    steps: u32,
    seed: u64,
) -> Result<PairPool> {
    expect_kind(pool.kind, PoolKind::WtPrime)?;
    expect_kind(wt_pool.kind, PoolKind::Wt)?;
    expect_converged(wt_pool.generation, wt_pool.samples.len())?;
    if pool.samples.is_empty() {
        return Err(Error::EmptyPool);
    }
    let theta = pool.theta;
    let inv_theta = 1.0 / theta;
    let psi_shift = digamma(theta + 1.0).expect("theta validated") - digamma(2.0).unwrap();
    let c1 = (theta + 5.0) / (theta + 1.0);
    let c2 = (2.0 * theta + 4.0) / (theta + 1.0);
    let mut samples = pool.samples.clone();
    let len = samples.len();
    let frozen = &wt_pool.samples;
    for g in pool.generation + 1..=pool.generation + steps {
        let prev = samples;
        samples = (0..len)
            .into_par_iter()
            .map(|slot| {
                let mut rng = slot_rng(seed, TAG_WT_PRIME, g, slot);
                let v = 1.0 - (1.0 - rng.gen::<f64>()).powf(inv_theta);
                let (w_prime, t_prime) = prev[draw_index(&mut rng, len)];
                let (w, t) = frozen[draw_index(&mut rng, frozen.len())];
                let o = 1.0 - v;
                let es = esig_raw(v);
                let b1 = (c1 - c2 * v) * v + es + psi_shift * v;
                let b2 = v + es + psi_shift * v;
                (
                    o * o * w_prime + v * o * t_prime + v * v * w + v * o * t + b1,
                    o * t_prime + v * t + b2,
                )
            })
            .collect();
        recenter(&mut samples);
    }
    Ok(PairPool {
        kind: PoolKind::WtPrime,
        theta,
        samples,
        generation: pool.generation + steps,
    })
}

/// Composite Simpson rule on `[a, b]`; `intervals` is rounded up to even.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / m as f64;
    let mut sum = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// `E[f(V)]` for uniform `V` by Simpson quadrature; the integrand must be
/// finite on the closed interval (endpoint limits, as for `Esig`).
pub fn mean_under_uniform(f: impl Fn(f64) -> f64, intervals: usize) -> f64 {
    simpson(f, 0.0, 1.0, intervals)
}

/// `E[f(V)]` for `V ~ Beta(1,θ)` by tanh-sinh (double-exponential)
/// quadrature of `f(v)·θ(1−v)^{θ−1}` on `(0,1)`.
///
/// The substitution `v = (1 + tanh((π/2) sinh t))/2` never touches the
/// endpoints and its weights decay double-exponentially, which absorbs the
/// integrable density singularity at `v = 1` for θ < 1. `1−v` and the
/// weight are carried in log form so nothing over- or underflows.
pub fn mean_under_beta(theta: f64, f: impl Fn(f64) -> f64, nodes: usize) -> f64 {
    const T_MAX: f64 = 6.0;
    let m = nodes.max(64);
    let h = 2.0 * T_MAX / m as f64;
    let c = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    for i in 0..=m {
        let t = -T_MAX + i as f64 * h;
        let s = c * t.sinh();
        let q = (-2.0 * s.abs()).exp();
        let (v, ln_one_minus_v) = if s >= 0.0 {
            (1.0 / (1.0 + q), -2.0 * s - q.ln_1p())
        } else {
            (q / (1.0 + q), -q.ln_1p())
        };
        let ln_dvdt = (c * t.cosh()).ln() + std::f64::consts::LN_2
            - 2.0 * s.abs()
            - 2.0 * q.ln_1p();
        let ln_w = (theta - 1.0) * ln_one_minus_v + ln_dvdt;
        if ln_w > -700.0 {
            sum += f(v) * ln_w.exp();
        }
    }
    theta * sum * h
}

/// Larger-in-absolute-value eigenvalue of `(A*)ᵗA*` at coefficient `v`
/// (the minus branch of the root):
/// `λ(v) = (1−v)²·(1 + v² − v(1 − √((1−v)²+1)))`.
pub fn contraction_eigenvalue(v: f64) -> f64 {
    let o = 1.0 - v;
    o * o * (1.0 + v * v - v * (1.0 - (o * o + 1.0).sqrt()))
}

/// Closed-form upper bound for `E[λ(V)]` under `V ~ Beta(1,θ)`:
/// `(θ/(2+θ))·[1 + 1/(3+θ) + 2/((4+θ)(3+θ))]`.
pub fn contraction_bound(theta: f64) -> f64 {
    theta / (2.0 + theta) * (1.0 + 1.0 / (3.0 + theta) + 2.0 / ((4.0 + theta) * (3.0 + theta)))
}

/// Numeric contraction certificate for the 2-D Hoppe map.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ContractionCheck {
    pub theta: f64,
    /// `E[λ(V)]` by quadrature
    pub numeric: f64,
    /// closed-form bound
    pub bound: f64,
    /// `numeric ≤ bound + 1e−6` and `bound < 1`
    pub satisfied: bool,
}

const CONTRACTION_QUAD_NODES: usize = 20_001;

/// Evaluate `E[λ(V)]` by quadrature (2·10⁴ nodes) and compare it to the
/// closed-form bound; both must certify contraction (`< 1`).
pub fn contraction_check(theta: f64) -> Result<ContractionCheck> {
    check_theta(theta)?;
    let numeric = mean_under_beta(theta, contraction_eigenvalue, CONTRACTION_QUAD_NODES);
    let bound = contraction_bound(theta);
    Ok(ContractionCheck {
        theta,
        numeric,
        bound,
        satisfied: numeric <= bound + 1e-6 && bound < 1.0,
    })
}

/// Monte Carlo comparison of the subtree decomposition at vertex 1:
/// `U′_n` over whole Hoppe trees versus `U_K + U′_{n−K} + K²` with
/// independent `K`, a θ=1 branch of size `K` and a Hoppe rest of size
/// `n−K`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DecompositionCheck {
    pub n: usize,
    pub theta: f64,
    pub replicates: u64,
    pub left_mean: f64,
    pub right_mean: f64,
    pub z_mean: f64,
    pub left_second: f64,
    pub right_second: f64,
    pub z_second: f64,
}

impl DecompositionCheck {
    pub fn max_abs_z(&self) -> f64 {
        self.z_mean.abs().max(self.z_second.abs())
    }
}

/// Compare first and second moments of the two sides of the decomposition
/// by z-scores over independent Monte Carlo samples.
pub fn subtree_decomposition_check(
    n: usize,
    theta: f64,
    replicates: u64,
    seed: u64,
) -> Result<DecompositionCheck> {
    check_theta(theta)?;
    if n < 2 {
        return Err(Error::VertexOutOfRange { vertex: 1, n });
    }
    if replicates < 2 {
        return Err(Error::TooFewReplicates {
            need: 2,
            got: replicates,
        });
    }
    let sampler = KSampler::new(n, theta)?;
    type Accs = (Welford, Welford, Welford, Welford);
    let (l1, l2, r1, r2) = crate::mc::parallel_fold(
        replicates,
        || {
            (
                Welford::new(),
                Welford::new(),
                Welford::new(),
                Welford::new(),
            )
        },
        |acc: &mut Accs, rep| {
            let mut rng = substream(seed, 0xDEC0, rep);
            let whole = HoppeTree::generate(n, theta, &mut rng).expect("validated parameters");
            let left = whole.stats().expect("stat overflow").u as f64;
            acc.0.push(left);
            acc.1.push(left * left);

            let k = sampler.sample(&mut rng);
            let branch = HoppeTree::generate(k, 1.0, &mut rng).expect("k >= 1");
            let rest = HoppeTree::generate(n - k, theta, &mut rng).expect("n-k >= 1");
            let right = (branch.stats().expect("stat overflow").u
                + rest.stats().expect("stat overflow").u
                + (k as i64) * (k as i64)) as f64;
            acc.2.push(right);
            acc.3.push(right * right);
        },
        |a, b| {
            (
                a.0.merged(&b.0),
                a.1.merged(&b.1),
                a.2.merged(&b.2),
                a.3.merged(&b.3),
            )
        },
    );
    let z = |a: &Welford, b: &Welford| {
        let se = (a.stderr().powi(2) + b.stderr().powi(2)).sqrt();
        let diff = a.mean() - b.mean();
        if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    };
    Ok(DecompositionCheck {
        n,
        theta,
        replicates,
        left_mean: l1.mean(),
        right_mean: r1.mean(),
        z_mean: z(&l1, &r1),
        left_second: l2.mean(),
        right_second: r2.mean(),
        z_second: z(&l2, &r2),
    })
}
