//! Bond percolation clusters on the binary tree `T` (root degree 2) and on
//! `T*` (root degree 1), size-conditioned critical clusters, and uniform
//! random trees.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Bernoulli, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;
use crate::tree::OrderedRootedTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Substrate {
    /// Rooted binary tree: every vertex, the root included, has two children.
    T,
    /// Binary tree whose root has a single child.
    TStar,
}

impl Substrate {
    fn root_slots(self) -> usize {
        match self {
            Substrate::T => 2,
            Substrate::TStar => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationParams {
    pub p: f64,
    pub substrate: Substrate,
}

impl PercolationParams {
    pub fn new(p: f64, substrate: Substrate) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return invalid(format!("p must lie in (0, 1], got {p}"));
        }
        Ok(PercolationParams { p, substrate })
    }

    pub fn critical_tstar() -> Self {
        PercolationParams {
            p: 0.5,
            substrate: Substrate::TStar,
        }
    }
}

/// A finite subtree of `T` or `T*` together with the position (0 = left,
/// 1 = right) each non-root vertex occupies among its parent's substrate
/// children. Children are listed left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedTree {
    pub tree: OrderedRootedTree,
    pub slots: Vec<u8>,
}

impl EmbeddedTree {
    /// Key identifying the subtree of the substrate (shape plus slots).
    pub fn shape_key(&self) -> String {
        let mut key = self.tree.to_parens();
        key.push(':');
        for &s in &self.slots[1..] {
            key.push(if s == 0 { 'L' } else { 'R' });
        }
        key
    }
}

/// Outcome of a size-only cluster exploration with a vertex cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterSize {
    Finite(usize),
    /// The exploration reached the cap; the cluster has at least this many vertices.
    AtLeast(usize),
}

impl ClusterSize {
    pub fn exceeds(&self, u: usize) -> bool {
        match *self {
            ClusterSize::Finite(n) => n > u,
            ClusterSize::AtLeast(n) => n > u,
        }
    }
}

pub fn sample_cluster(params: PercolationParams, cap: Option<usize>, rng: &mut SimRng) -> Result<OrderedRootedTree> {
    sample_cluster_embedded(params, cap, rng).map(|e| e.tree)
}

/// Percolation cluster of the root, explored depth first. Supercritical
/// parameters require a cap; exceeding the cap is an error.
pub fn sample_cluster_embedded(
    params: PercolationParams,
    cap: Option<usize>,
    rng: &mut SimRng,
) -> Result<EmbeddedTree> {
    if params.p > 0.5 && cap.is_none() {
        return invalid("supercritical percolation needs a vertex cap");
    }
    let cap = cap.unwrap_or(usize::MAX);
    let coin = Bernoulli::new(params.p).expect("p checked");
    let mut degrees = Vec::new();
    let mut slots = Vec::new();
    // (slot, child slots available)
    let mut stack: Vec<(u8, usize)> = vec![(0, params.substrate.root_slots())];
    while let Some((slot, avail)) = stack.pop() {
        if degrees.len() == cap {
            return Err(Error::CapExceeded(cap));
        }
        slots.push(slot);
        let open: Vec<u8> = (0..avail as u8).filter(|_| coin.sample(rng)).collect();
        degrees.push(open.len());
        for &s in open.iter().rev() {
            stack.push((s, 2));
        }
    }
    Ok(EmbeddedTree {
        tree: OrderedRootedTree::from_preorder_degrees(&degrees)?,
        slots,
    })
}

/// Size of the root cluster, exploring at most `cap` vertices.
pub fn sample_cluster_size(params: PercolationParams, cap: usize, rng: &mut SimRng) -> ClusterSize {
    let coin = Bernoulli::new(params.p).expect("p checked");
    let mut pending = params.substrate.root_slots();
    let mut size = 1usize;
    while pending > 0 {
        pending -= 1;
        if coin.sample(rng) {
            if size == cap {
                return ClusterSize::AtLeast(cap);
            }
            size += 1;
            pending += 2;
        }
    }
    ClusterSize::Finite(size)
}

/// Laplace transform `E[exp(-lambda N_p)]` of the `T*` cluster size,
/// `(1 - sqrt(1 - 4p(1-p)e^{-lambda})) / (2p)`, valid for `p <= 1/2`.
pub fn cluster_size_laplace(p: f64, lambda: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return invalid(format!("closed form needs 0 < p <= 1/2, got {p}"));
    }
    if !(lambda >= 0.0) {
        return invalid(format!("lambda must be nonnegative, got {lambda}"));
    }
    let disc = (1.0 - 4.0 * p * (1.0 - p) * (-lambda).exp()).max(0.0);
    Ok((1.0 - disc.sqrt()) / (2.0 * p))
}

/// Dual parameter of a supercritical `p`: the conditioned-finite cluster is
/// a `1 - p` cluster.
pub fn dual_parameter(p: f64) -> Result<f64> {
    if !(p > 0.5 && p < 1.0) {
        return invalid(format!("dual parameter needs 1/2 < p < 1, got {p}"));
    }
    Ok(1.0 - p)
}

/// Space and time scales `(d, q) = (1/(pi eps^2), pi eps^3)`.
pub fn scales(epsilon: f64) -> Result<(f64, f64)> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return invalid(format!("epsilon must lie in (0, 1], got {epsilon}"));
    }
    let pi = std::f64::consts::PI;
    Ok((1.0 / (pi * epsilon * epsilon), pi * epsilon.powi(3)))
}

/// Index after which the cyclic rotation of the Lukasiewicz word with child
/// counts `counts` (summing to `len - trees`) encodes a forest of `trees`
/// trees. Among the `trees` valid rotations one is chosen uniformly; for a
/// single tree this is the rotation after the first minimal prefix.
fn cycle_lemma_start(counts: &[usize], trees: usize, rng: &mut SimRng) -> usize {
    let n = counts.len();
    let mut s = vec![0i64; n + 1];
    for i in 0..n {
        s[i + 1] = s[i] + counts[i] as i64 - 1;
    }
    debug_assert_eq!(s[n], -(trees as i64));
    if trees == 1 {
        let mut best = 0;
        for j in 1..n {
            if s[j] < s[best] {
                best = j;
            }
        }
        return best;
    }
    let l = trees as i64;
    let mut sufmin = vec![i64::MAX; n + 2];
    for k in (1..=n).rev() {
        sufmin[k] = sufmin[k + 1].min(s[k]);
    }
    let mut valid = Vec::with_capacity(trees);
    let mut premin = i64::MAX; // min of s[1..j-1]
    let mut inner0 = i64::MAX; // min of s[1..n-1]
    for k in 1..n {
        inner0 = inner0.min(s[k]);
    }
    for j in 0..n {
        let window = if j == 0 {
            inner0
        } else {
            sufmin[j + 1].min(premin.saturating_sub(l))
        };
        if s[j] - l < window {
            valid.push(j);
        }
        if j >= 1 {
            premin = premin.min(s[j]);
        }
    }
    debug_assert_eq!(valid.len(), trees);
    valid[rng.random_range(0..valid.len())]
}

fn rotate(counts: &[usize], start: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(counts.len());
    out.extend_from_slice(&counts[start..]);
    out.extend_from_slice(&counts[..start]);
    out
}

/// Split `m` vertices of a Binomial(2, 1/2) tree into counts of vertices
/// with 0, 1 and 2 children, conditioned on `n2 = n0 - 1`.
fn binary_count_split(m: usize, rng: &mut SimRng) -> (usize, usize, usize) {
    let lg = |k: usize| libm::lgamma(k as f64 + 1.0);
    let ln2 = std::f64::consts::LN_2;
    let max_n0 = m.div_ceil(2);
    let logw: Vec<f64> = (1..=max_n0)
        .map(|n0| {
            let n2 = n0 - 1;
            let n1 = m - n0 - n2;
            lg(m) - lg(n0) - lg(n1) - lg(n2) + n1 as f64 * ln2
        })
        .collect();
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut n0 = max_n0;
    for (i, wi) in w.iter().enumerate() {
        if u < *wi {
            n0 = i + 1;
            break;
        }
        u -= wi;
    }
    (n0, m + 1 - 2 * n0, n0 - 1)
}

/// Critical `T*` cluster conditioned to have exactly `n` vertices: a root of
/// degree one above a Binomial(2, 1/2) Galton-Watson tree of `n - 1`
/// vertices. Uniform over the `n`-vertex subtrees of `T*` containing the root.
pub fn sample_conditioned_cluster(n: usize, rng: &mut SimRng) -> Result<OrderedRootedTree> {
    sample_conditioned_cluster_embedded(n, rng).map(|e| e.tree)
}

pub fn sample_conditioned_cluster_embedded(n: usize, rng: &mut SimRng) -> Result<EmbeddedTree> {
    if n == 0 {
        return invalid("conditioned cluster needs n >= 1");
    }
    if n == 1 {
        return Ok(EmbeddedTree {
            tree: OrderedRootedTree::single(),
            slots: vec![0],
        });
    }
    let m = n - 1;
    let (n0, n1, n2) = binary_count_split(m, rng);
    let mut counts = Vec::with_capacity(m);
    counts.extend(std::iter::repeat_n(0usize, n0));
    counts.extend(std::iter::repeat_n(1usize, n1));
    counts.extend(std::iter::repeat_n(2usize, n2));
    counts.shuffle(rng);
    let start = cycle_lemma_start(&counts, 1, rng);
    let mut degrees = Vec::with_capacity(n);
    degrees.push(1);
    degrees.extend(rotate(&counts, start));
    let tree = OrderedRootedTree::from_preorder_degrees(&degrees)?;
    let mut slots = vec![0u8; n];
    for v in 0..n {
        let kids = tree.children(v);
        match kids.len() {
            1 if v > 0 => slots[kids[0] as usize] = rng.random_range(0..2u8),
            2 => slots[kids[1] as usize] = 1,
            _ => {}
        }
    }
    Ok(EmbeddedTree { tree, slots })
}

fn multinomial_uniform(balls: usize, boxes: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut counts = vec![0usize; boxes];
    for _ in 0..balls {
        counts[rng.random_range(0..boxes)] += 1;
    }
    counts
}

/// Poisson(1) Galton-Watson tree conditioned on `n` vertices (the uniform
/// rooted labelled tree, forgetting labels).
pub fn sample_uniform_tree(n: usize, rng: &mut SimRng) -> Result<OrderedRootedTree> {
    if n == 0 {
        return invalid("uniform tree needs n >= 1");
    }
    let counts = multinomial_uniform(n - 1, n, rng);
    let start = cycle_lemma_start(&counts, 1, rng);
    OrderedRootedTree::from_preorder_degrees(&rotate(&counts, start))
}

/// A root of degree one above a uniform tree on `n - 1` vertices.
pub fn sample_planted_uniform_tree(n: usize, rng: &mut SimRng) -> Result<OrderedRootedTree> {
    if n == 0 {
        return invalid("planted tree needs n >= 1");
    }
    if n == 1 {
        return Ok(OrderedRootedTree::single());
    }
    let counts = multinomial_uniform(n - 2, n - 1, rng);
    let start = cycle_lemma_start(&counts, 1, rng);
    let mut degrees = Vec::with_capacity(n);
    degrees.push(1);
    degrees.extend(rotate(&counts, start));
    OrderedRootedTree::from_preorder_degrees(&degrees)
}

/// Sizes of the `trees` components of a Poisson(1) Galton-Watson forest
/// conditioned on `total` vertices, in forest order.
pub fn sample_forest_sizes(trees: usize, total: usize, rng: &mut SimRng) -> Result<Vec<usize>> {
    if trees == 0 || total < trees {
        return invalid(format!("need 1 <= trees <= total, got {trees} trees, {total} vertices"));
    }
    let counts = multinomial_uniform(total - trees, total, rng);
    let start = cycle_lemma_start(&counts, trees, rng);
    let word = rotate(&counts, start);
    let mut sizes = Vec::with_capacity(trees);
    let mut open = 0i64;
    let mut size = 0usize;
    for c in word {
        if open == 0 {
            open = 1;
        }
        size += 1;
        open += c as i64 - 1;
        if open == 0 {
            sizes.push(size);
            size = 0;
        }
    }
    debug_assert_eq!(sizes.len(), trees);
    Ok(sizes)
}
