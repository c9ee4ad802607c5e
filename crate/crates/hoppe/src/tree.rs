//! Hoppe trees and their exact integer statistics.
//!
//! A tree on labels `0..n` is stored as a parent array with `parent[k] < k`
//! for every non-root vertex, which is exactly the recursive growth order:
//! vertex `k` attaches to the root with probability `θ/(θ+k−1)` and to any
//! of `1..k−1` with probability `1/(θ+k−1)` each. All statistics are exact
//! 64-bit integers with overflow-checked arithmetic; random trees are safe
//! well past `n = 10⁶` (`W_n ≈ n² log n`), a worst-case path tree up to
//! `n ≈ 2.6·10⁶` (`W_n = n(n²−1)/6`). Beyond that the checked arithmetic
//! reports [`Error::StatOverflow`] instead of wrapping.

use rand::Rng;

use crate::error::{Error, Result};

/// Sentinel stored in the root's parent slot.
pub const ROOT_SENTINEL: u32 = u32::MAX;

/// Refuse exhaustive enumeration beyond this vertex count (factorial growth;
/// n = 9 already means 8! = 40320 trees).
pub const MAX_ENUM_N: usize = 9;

/// Refuse the quadratic Wiener oracle beyond this vertex count.
pub const MAX_BRUTE_FORCE_N: usize = 10_000;

/// A labeled rooted tree grown by the Hoppe attachment rule.
#[derive(Debug, Clone, PartialEq)]
pub struct HoppeTree {
    theta: f64,
    /// `parent[k] < k` for k >= 1; `parent[0]` is [`ROOT_SENTINEL`].
    parent: Vec<u32>,
}

/// Exact integer statistics of one tree.
///
/// `u = n·total_length − wiener` and `lca_sum = (n−1)·total_length − wiener`
/// hold by construction; `lca_sum` is twice the sum of LCA depths over
/// unordered vertex pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeStats {
    pub n: usize,
    /// Root distance `D_k` per vertex; `depths[0] = 0`.
    pub depths: Vec<u32>,
    /// Total path length `T_n = Σ D_k`.
    pub total_length: i64,
    /// Wiener index `W_n = Σ_{i<j} d(i, j)`.
    pub wiener: i64,
    /// `2R_n = Σ_{i<j} depth(lca(i, j)) · 2 = (n−1)T_n − W_n`.
    pub lca_sum: i64,
    /// `U_n = T_n + 2R_n = nT_n − W_n`.
    pub u: i64,
}

/// Draw the parent of vertex `k` when vertices `0..k` already exist.
///
/// Returns 0 with probability `θ/(θ+k−1)` and each of `1..k−1` with
/// probability `1/(θ+k−1)`.
pub fn sample_parent<R: Rng + ?Sized>(k: usize, theta: f64, rng: &mut R) -> Result<usize> {
    check_theta(theta)?;
    assert!(k >= 1, "vertex 0 is the root and has no parent");
    Ok(sample_parent_unchecked(k, theta, rng))
}

#[inline]
fn sample_parent_unchecked<R: Rng + ?Sized>(k: usize, theta: f64, rng: &mut R) -> usize {
    let x = rng.gen::<f64>() * (theta + (k - 1) as f64);
    if x < theta {
        0
    } else {
        // uniform over 1..k-1; min() guards the top rounding edge
        (1 + (x - theta) as usize).min(k - 1)
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTheta(theta))
    }
}

impl HoppeTree {
    /// Grow a Hoppe(θ) tree with `n` vertices, one parent draw per vertex.
    pub fn generate<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> Result<Self> {
        check_theta(theta)?;
        if n == 0 {
            return Err(Error::EmptyTree);
        }
        let mut parent = Vec::with_capacity(n);
        parent.push(ROOT_SENTINEL);
        for k in 1..n {
            parent.push(sample_parent_unchecked(k, theta, rng) as u32);
        }
        Ok(HoppeTree { theta, parent })
    }

    /// Build a tree from an explicit parent array; `parents[0]` is ignored.
    pub fn from_parents(theta: f64, mut parents: Vec<u32>) -> Result<Self> {
        check_theta(theta)?;
        if parents.is_empty() {
            return Err(Error::EmptyTree);
        }
        parents[0] = ROOT_SENTINEL;
        for (k, &p) in parents.iter().enumerate().skip(1) {
            if p as usize >= k {
                return Err(Error::InvalidParent {
                    vertex: k,
                    parent: p as usize,
                });
            }
        }
        Ok(HoppeTree {
            theta,
            parent: parents,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Parent of `k`, or `None` for the root.
    pub fn parent_of(&self, k: usize) -> Option<usize> {
        if k == 0 || k >= self.n() {
            None
        } else {
            Some(self.parent[k] as usize)
        }
    }

    /// Raw parent array; slot 0 holds [`ROOT_SENTINEL`].
    pub fn parents(&self) -> &[u32] {
        &self.parent
    }

    /// Root distance of every vertex, single ascending pass.
    pub fn depths(&self) -> Vec<u32> {
        let n = self.n();
        let mut depths = vec![0u32; n];
        for k in 1..n {
            depths[k] = depths[self.parent[k] as usize] + 1;
        }
        depths
    }

    /// Subtree size of every vertex, single descending pass (valid because
    /// `parent[k] < k`).
    pub fn subtree_sizes(&self) -> Vec<u32> {
        let n = self.n();
        let mut size = vec![1u32; n];
        for k in (1..n).rev() {
            size[self.parent[k] as usize] += size[k];
        }
        size
    }

    /// All statistics in one O(n) pass pair.
    ///
    /// The Wiener index uses the edge decomposition: the edge above vertex
    /// `k` lies on `size[k] · (n − size[k])` of the pairwise paths.
    pub fn stats(&self) -> Result<TreeStats> {
        let n = self.n();
        let n_i = n as i64;
        let depths = self.depths();
        let mut total: i64 = 0;
        for &d in &depths {
            total = total
                .checked_add(d as i64)
                .ok_or(Error::StatOverflow(n))?;
        }
        let sizes = self.subtree_sizes();
        let mut wiener: i64 = 0;
        for &s in &sizes[1..] {
            let s = s as i64;
            wiener = s
                .checked_mul(n_i - s)
                .and_then(|c| wiener.checked_add(c))
                .ok_or(Error::StatOverflow(n))?;
        }
        let u = n_i
            .checked_mul(total)
            .and_then(|nt| nt.checked_sub(wiener))
            .ok_or(Error::StatOverflow(n))?;
        let lca_sum = u - total; // (n−1)T − W
        Ok(TreeStats {
            n,
            depths,
            total_length: total,
            wiener,
            lca_sum,
            u,
        })
    }

    /// Depth of the last common vertex of the root paths of `i` and `j`.
    ///
    /// Walks the deeper endpoint up until the paths coincide; since parents
    /// carry smaller labels, "deeper" can be read off the labels directly.
    pub fn lca_depth(&self, i: usize, j: usize) -> Result<u32> {
        let n = self.n();
        for v in [i, j] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        let mut a = i;
        let mut b = j;
        while a != b {
            if a > b {
                a = self.parent[a] as usize;
            } else {
                b = self.parent[b] as usize;
            }
        }
        let mut depth = 0u32;
        while a != 0 {
            a = self.parent[a] as usize;
            depth += 1;
        }
        Ok(depth)
    }

    /// Quadratic Wiener-index oracle: sums `D_i + D_j − 2·depth(lca)` over
    /// all pairs. Kept deliberately independent of [`HoppeTree::stats`].
    pub fn wiener_bruteforce(&self) -> Result<i64> {
        let n = self.n();
        if n > MAX_BRUTE_FORCE_N {
            return Err(Error::BruteForceTooLarge {
                n,
                max: MAX_BRUTE_FORCE_N,
            });
        }
        let depths = self.depths();
        let mut sum: i64 = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let mut a = i;
                let mut b = j;
                while a != b {
                    if a > b {
                        a = self.parent[a] as usize;
                    } else {
                        b = self.parent[b] as usize;
                    }
                }
                let d = depths[i] as i64 + depths[j] as i64 - 2 * depths[a] as i64;
                sum = sum.checked_add(d).ok_or(Error::StatOverflow(n))?;
            }
        }
        Ok(sum)
    }

    /// Split off the branch rooted at vertex 1.
    ///
    /// Returns `(branch, rest)` where `branch` is the subtree originated at
    /// vertex 1 (relabeled in increasing label order, θ set to 1 since that
    /// branch grows by uniform attachment) and `rest` is the remainder
    /// containing the root (relabeled likewise, θ kept). Both are valid
    /// recursive parent arrays because relabeling preserves label order.
    pub fn split_at_vertex_one(&self) -> Result<(HoppeTree, HoppeTree)> {
        let n = self.n();
        if n < 2 {
            return Err(Error::VertexOutOfRange { vertex: 1, n });
        }
        let mut in_branch = vec![false; n];
        in_branch[1] = true;
        for k in 2..n {
            in_branch[k] = in_branch[self.parent[k] as usize];
        }
        let mut new_label = vec![0u32; n];
        let mut branch = Vec::new();
        let mut rest = Vec::new();
        for k in 0..n {
            if in_branch[k] {
                new_label[k] = branch.len() as u32;
                branch.push(if k == 1 {
                    ROOT_SENTINEL
                } else {
                    new_label[self.parent[k] as usize]
                });
            } else {
                new_label[k] = rest.len() as u32;
                rest.push(if k == 0 {
                    ROOT_SENTINEL
                } else {
                    new_label[self.parent[k] as usize]
                });
            }
        }
        Ok((
            HoppeTree {
                theta: 1.0,
                parent: branch,
            },
            HoppeTree {
                theta: self.theta,
                parent: rest,
            },
        ))
    }

    /// Plain-text form: `"n theta"` then the space-separated parents of
    /// vertices `1..n−1`. Lines beyond the second are ignored on parse, so
    /// writers may append `#`-style annotations.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n(), self.theta);
        let mut first = true;
        for &p in &self.parent[1..] {
            if !first {
                s.push(' ');
            }
            s.push_str(&p.to_string());
            first = false;
        }
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty tree text".into()))?;
        let mut fields = header.split_whitespace();
        let n: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("missing vertex count".into()))?;
        let theta: f64 = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("missing theta".into()))?;
        if n == 0 {
            return Err(Error::EmptyTree);
        }
        let body = lines.next().unwrap_or("");
        let mut parents = Vec::with_capacity(n);
        parents.push(ROOT_SENTINEL);
        for tok in body.split_whitespace() {
            let p: u32 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad parent entry '{tok}'")))?;
            parents.push(p);
        }
        if parents.len() != n {
            return Err(Error::Parse(format!(
                "expected {} parent entries, found {}",
                n - 1,
                parents.len() - 1
            )));
        }
        HoppeTree::from_parents(theta, parents)
    }
}

/// Exhaustive enumeration of all parent arrays of size `n` with their exact
/// Hoppe(θ) probabilities. Probabilities multiply per vertex, so they sum to
/// one up to rounding.
pub fn enumerate_trees(n: usize, theta: f64) -> Result<TreeEnumeration> {
    check_theta(theta)?;
    if n == 0 {
        return Err(Error::EmptyTree);
    }
    if n > MAX_ENUM_N {
        return Err(Error::EnumerationTooLarge { n, max: MAX_ENUM_N });
    }
    Ok(TreeEnumeration {
        theta,
        n,
        counters: vec![0; n.saturating_sub(1)],
        done: false,
    })
}

/// Iterator produced by [`enumerate_trees`].
pub struct TreeEnumeration {
    theta: f64,
    n: usize,
    /// counters[k-1] is the current parent choice of vertex k
    counters: Vec<u32>,
    done: bool,
}

impl Iterator for TreeEnumeration {
    type Item = (HoppeTree, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut parents = Vec::with_capacity(self.n);
        parents.push(ROOT_SENTINEL);
        parents.extend_from_slice(&self.counters);
        let mut prob = 1.0;
        for (k, &p) in self.counters.iter().enumerate() {
            let k = k + 1;
            let total = self.theta + (k - 1) as f64;
            prob *= if p == 0 { self.theta / total } else { 1.0 / total };
        }
        // odometer increment: counters[k-1] ranges over 0..k
        let mut pos = self.counters.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            let limit = pos as u32; // vertex pos+1 has pos+1 choices: 0..=pos
            if self.counters[pos] < limit {
                self.counters[pos] += 1;
                for c in self.counters[pos + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
            self.counters[pos] = 0;
        }
        Some((
            HoppeTree {
                theta: self.theta,
                parent: parents,
            },
            prob,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path(n: usize) -> HoppeTree {
        HoppeTree::from_parents(1.0, (0..n as u32).map(|k| k.saturating_sub(1)).collect())
            .unwrap()
    }

    fn star(n: usize) -> HoppeTree {
        HoppeTree::from_parents(1.0, vec![0; n]).unwrap()
    }

    #[test]
    fn sample_parent_k1_is_always_root() {
        let mut rng = substream(1, 0, 0);
        for _ in 0..100 {
            assert_eq!(sample_parent(1, 0.37, &mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn sample_parent_rejects_bad_theta() {
        let mut rng = substream(1, 0, 1);
        assert!(matches!(
            sample_parent(3, 0.0, &mut rng),
            Err(Error::NonPositiveTheta(_))
        ));
        assert!(sample_parent(3, -1.0, &mut rng).is_err());
        assert!(sample_parent(3, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn sample_parent_frequencies_match_the_law() {
        // k=2, θ=1: both parents equally likely; k=3, θ=2: P(0)=1/2, P(1)=P(2)=1/4
        let reps = 100_000;
        let mut rng = substream(42, 0, 2);
        let mut hits2 = [0u32; 2];
        let mut hits3 = [0u32; 3];
        for _ in 0..reps {
            hits2[sample_parent(2, 1.0, &mut rng).unwrap()] += 1;
            hits3[sample_parent(3, 2.0, &mut rng).unwrap()] += 1;
        }
        let se = |p: f64| (p * (1.0 - p) / reps as f64).sqrt();
        let freq = |h: u32| h as f64 / reps as f64;
        assert!((freq(hits2[0]) - 0.5).abs() < 3.0 * se(0.5));
        assert!((freq(hits3[0]) - 0.5).abs() < 3.0 * se(0.5));
        assert!((freq(hits3[1]) - 0.25).abs() < 3.0 * se(0.25));
        assert!((freq(hits3[2]) - 0.25).abs() < 3.0 * se(0.25));
    }

    #[test]
    fn generate_small_trees() {
        let mut rng = substream(7, 0, 0);
        let t1 = HoppeTree::generate(1, 2.0, &mut rng).unwrap();
        let s = t1.stats().unwrap();
        assert_eq!(
            (s.total_length, s.wiener, s.lca_sum, s.u),
            (0, 0, 0, 0)
        );
        let t2 = HoppeTree::generate(2, 0.5, &mut rng).unwrap();
        assert_eq!(t2.parent_of(1), Some(0));
        assert!(HoppeTree::generate(0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn generate_is_deterministic_given_seed() {
        let a = HoppeTree::generate(50, 1.5, &mut substream(9, 3, 1)).unwrap();
        let b = HoppeTree::generate(50, 1.5, &mut substream(9, 3, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn root_attachment_frequency_n3() {
        // θ=1, n=3: parent of vertex 2 is 0 or 1 with probability 1/2 each
        let reps = 100_000;
        let mut root = 0u32;
        for i in 0..reps {
            let t = HoppeTree::generate(3, 1.0, &mut substream(11, 0, i)).unwrap();
            if t.parent_of(2) == Some(0) {
                root += 1;
            }
        }
        let se = (0.25f64 / reps as f64).sqrt();
        assert!((root as f64 / reps as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn stats_on_path_and_star() {
        let s = path(3).stats().unwrap();
        assert_eq!(
            (s.total_length, s.wiener, s.lca_sum, s.u),
            (3, 4, 2, 5)
        );
        let s = star(3).stats().unwrap();
        assert_eq!(
            (s.total_length, s.wiener, s.lca_sum, s.u),
            (2, 4, 0, 2)
        );
        assert_eq!(path(4).stats().unwrap().wiener, 10);
        assert_eq!(star(4).stats().unwrap().wiener, 9);
    }

    #[test]
    fn wiener_bruteforce_examples_and_guard() {
        assert_eq!(star(4).wiener_bruteforce().unwrap(), 9);
        assert_eq!(path(4).wiener_bruteforce().unwrap(), 10);
        let big = HoppeTree::from_parents(1.0, vec![0; MAX_BRUTE_FORCE_N + 1]).unwrap();
        assert!(matches!(
            big.wiener_bruteforce(),
            Err(Error::BruteForceTooLarge { .. })
        ));
    }

    #[test]
    fn fast_wiener_agrees_with_bruteforce() {
        let thetas = [0.25, 1.0, 4.0];
        for i in 0..300u64 {
            let theta = thetas[(i % 3) as usize];
            let mut rng = substream(13, 1, i);
            let n = 2 + (rng.gen::<u64>() % 199) as usize;
            let t = HoppeTree::generate(n, theta, &mut rng).unwrap();
            assert_eq!(t.stats().unwrap().wiener, t.wiener_bruteforce().unwrap());
        }
    }

    #[test]
    fn identities_hold_exactly() {
        for i in 0..200u64 {
            let mut rng = substream(17, 2, i);
            let n = 1 + (rng.gen::<u64>() % 400) as usize;
            let theta = [0.25, 1.0, 4.0][(i % 3) as usize];
            let t = HoppeTree::generate(n, theta, &mut rng).unwrap();
            let s = t.stats().unwrap();
            let n_i = n as i64;
            assert_eq!(s.u, n_i * s.total_length - s.wiener);
            assert_eq!(s.lca_sum, (n_i - 1) * s.total_length - s.wiener);
            assert!(s.lca_sum >= 0);
            assert_eq!(s.total_length, s.depths.iter().map(|&d| d as i64).sum::<i64>());
            if n >= 2 {
                assert!(s.wiener >= s.total_length);
            }
        }
    }

    #[test]
    fn lca_depth_examples() {
        let t = path(3);
        assert_eq!(t.lca_depth(1, 2).unwrap(), 1);
        assert_eq!(t.lca_depth(2, 2).unwrap(), 2); // lca(k,k) = D_k
        assert_eq!(t.lca_depth(0, 2).unwrap(), 0);
        assert!(matches!(
            t.lca_depth(0, 3),
            Err(Error::VertexOutOfRange { .. })
        ));
    }

    #[test]
    fn enumeration_small_cases() {
        let trees: Vec<_> = enumerate_trees(2, 3.0).unwrap().collect();
        assert_eq!(trees.len(), 1);
        assert!((trees[0].1 - 1.0).abs() < 1e-15);

        let trees: Vec<_> = enumerate_trees(3, 1.0).unwrap().collect();
        assert_eq!(trees.len(), 2);
        for (_, p) in &trees {
            assert!((p - 0.5).abs() < 1e-15);
        }
        assert!(matches!(
            enumerate_trees(MAX_ENUM_N + 1, 1.0),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn enumeration_probabilities_sum_to_one() {
        for &theta in &[0.5, 1.0, 2.0, 5.0] {
            for n in 1..=8 {
                let total: f64 = enumerate_trees(n, theta).unwrap().map(|(_, p)| p).sum();
                assert!(
                    (total - 1.0).abs() < 1e-12,
                    "n={n} theta={theta}: total {total}"
                );
            }
        }
    }

    #[test]
    fn split_at_vertex_one_is_exact() {
        // U_n = U_K + U'_{n−K} + K² and 2R_n = 2R_K + 2R'_{n−K} + K(K−1),
        // pathwise, where K is the size of the branch at vertex 1.
        for i in 0..200u64 {
            let mut rng = substream(23, 4, i);
            let n = 2 + (rng.gen::<u64>() % 120) as usize;
            let theta = [0.5, 1.0, 3.0][(i % 3) as usize];
            let t = HoppeTree::generate(n, theta, &mut rng).unwrap();
            let k = t.subtree_sizes()[1] as i64;
            let (branch, rest) = t.split_at_vertex_one().unwrap();
            assert_eq!(branch.n() as i64, k);
            assert_eq!(rest.n() as i64, n as i64 - k);
            let s = t.stats().unwrap();
            let sb = branch.stats().unwrap();
            let sr = rest.stats().unwrap();
            assert_eq!(s.u, sb.u + sr.u + k * k);
            assert_eq!(s.lca_sum, sb.lca_sum + sr.lca_sum + k * (k - 1));
            assert_eq!(s.total_length, sb.total_length + sr.total_length + k);
        }
    }

    #[test]
    fn text_round_trip() {
        let t = HoppeTree::generate(12, 0.5, &mut substream(3, 0, 0)).unwrap();
        let text = t.to_text();
        let back = HoppeTree::from_text(&text).unwrap();
        assert_eq!(t, back);

        let one = HoppeTree::generate(1, 2.0, &mut substream(3, 0, 1)).unwrap();
        assert_eq!(HoppeTree::from_text(&one.to_text()).unwrap(), one);

        // annotations after the parent line are ignored
        let annotated = format!("{}# T=3 W=4\n", t.to_text());
        assert_eq!(HoppeTree::from_text(&annotated).unwrap(), t);

        assert!(HoppeTree::from_text("").is_err());
        assert!(HoppeTree::from_text("3 1.0\n0\n").is_err()); // wrong count
        assert!(HoppeTree::from_text("3 1.0\n0 2\n").is_err()); // parent not smaller
    }

    #[test]
    fn from_parents_validates() {
        assert!(HoppeTree::from_parents(1.0, vec![]).is_err());
        assert!(HoppeTree::from_parents(0.0, vec![0, 0]).is_err());
        assert!(matches!(
            HoppeTree::from_parents(1.0, vec![0, 0, 5]),
            Err(Error::InvalidParent { vertex: 2, .. })
        ));
    }

    #[test]
    fn stats_overflow_is_reported() {
        // a path tree overflows W = n(n²−1)/6 past n ≈ 2.6·10⁶
        let t = path(4_000_000);
        assert!(matches!(t.stats(), Err(Error::StatOverflow(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = HoppeTree::generate(100_000, 1.0, &mut rng).unwrap();
        assert!(t.stats().is_ok());
    }

    proptest::proptest! {
        #[test]
        fn prop_identities_and_text(seed in 0u64..1000, n in 1usize..200) {
            let theta = [0.5, 1.0, 2.0][(seed % 3) as usize];
            let t = HoppeTree::generate(n, theta, &mut substream(101, 0, seed)).unwrap();
            let s = t.stats().unwrap();
            proptest::prop_assert_eq!(s.u, n as i64 * s.total_length - s.wiener);
            proptest::prop_assert_eq!(s.lca_sum, (n as i64 - 1) * s.total_length - s.wiener);
            let back = HoppeTree::from_text(&t.to_text()).unwrap();
            proptest::prop_assert_eq!(t, back);
        }
    }
}
