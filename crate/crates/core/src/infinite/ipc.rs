use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use super::envelope::{sample_envelope, EnvelopeProcess};
use crate::cluster::{dual_parameter, sample_cluster, sample_cluster_size, ClusterSize, PercolationParams, Substrate};
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;
use crate::tree::{reduce, OrderedRootedTree};

/// A finite stage of invasion percolation on the binary tree `T`.
///
/// `weights[v]` is the uniform weight of the edge from `v` to its parent
/// (the root carries `0`). `invasion_order[i]` is the vertex invaded at
/// step `i`, so `invasion_order[0]` is the root.
#[derive(Clone, Debug)]
pub struct IPCInstance {
    pub tree: OrderedRootedTree,
    pub weights: Vec<f64>,
    pub invasion_order: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Boundary {
    key: u64,
    parent: u32,
    /// `depth << 1 | slot` of the boundary vertex
    meta: u32,
}

impl Ord for Boundary {
    // reversed: BinaryHeap pops the smallest key first
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key).then_with(|| other.parent.cmp(&self.parent))
    }
}

impl PartialOrd for Boundary {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const KEY_BITS: u32 = 53;

fn key_weight(key: u64) -> f64 {
    (key as f64 + 0.5) / (1u64 << KEY_BITS) as f64
}

/// Invasion in discovery order: vertex `i` is the `i`-th invaded.
struct RawInvasion {
    parent: Vec<u32>,
    slot: Vec<u8>,
    key: Vec<u64>,
    depth: Vec<u32>,
}

/// Boundary split by a key threshold: only keys below it live in the heap,
/// the rest wait in a flat list. The threshold tracks the recent invasion
/// level, which settles just above 1/2.
struct SplitBoundary {
    heap: BinaryHeap<Boundary>,
    overflow: Vec<Boundary>,
    threshold: u64,
    recent_max: u64,
    rebuild_at: usize,
}

const MIN_REBUILD: usize = 4096;

impl SplitBoundary {
    fn new() -> Self {
        SplitBoundary {
            heap: BinaryHeap::new(),
            overflow: Vec::new(),
            threshold: Self::level(0.504),
            recent_max: 0,
            rebuild_at: MIN_REBUILD,
        }
    }

    fn level(w: f64) -> u64 {
        (w.min(1.0) * (1u64 << KEY_BITS) as f64) as u64
    }

    /// `1/2 + 2 (key - 1/2)`, at least `1/2 + margin`.
    fn widened(key: u64) -> u64 {
        let half = Self::level(0.5);
        let margin = Self::level(0.002);
        (half + 2 * key.saturating_sub(half).max(margin)).min(1u64 << KEY_BITS)
    }

    fn push(&mut self, b: Boundary) {
        if b.key < self.threshold {
            self.heap.push(b);
        } else {
            self.overflow.push(b);
        }
    }

    fn pop(&mut self) -> Boundary {
        if self.heap.len() > self.rebuild_at {
            self.tighten();
        }
        while self.heap.is_empty() {
            self.threshold = Self::widened(self.threshold);
            let t = self.threshold;
            let mut i = 0;
            while i < self.overflow.len() {
                if self.overflow[i].key < t {
                    self.heap.push(self.overflow.swap_remove(i));
                } else {
                    i += 1;
                }
            }
        }
        let b = self.heap.pop().unwrap();
        self.recent_max = self.recent_max.max(b.key);
        b
    }

    /// Moves heap entries far above the recent invasion level to the overflow.
    fn tighten(&mut self) {
        let t = Self::widened(self.recent_max);
        if t < self.threshold {
            self.threshold = t;
            let mut keep = Vec::with_capacity(self.heap.len());
            for b in std::mem::take(&mut self.heap).into_vec() {
                if b.key < t {
                    keep.push(b);
                } else {
                    self.overflow.push(b);
                }
            }
            self.heap = BinaryHeap::from(keep);
        }
        self.recent_max = 0;
        self.rebuild_at = (2 * self.heap.len()).max(MIN_REBUILD);
    }
}

fn run_raw(rng: &mut SimRng, mut stop: impl FnMut(usize, u32) -> bool) -> Result<RawInvasion> {
    let mut raw = RawInvasion {
        parent: vec![u32::MAX],
        slot: vec![0],
        key: vec![0],
        depth: vec![0],
    };
    let mut boundary = SplitBoundary::new();
    let push_children = |boundary: &mut SplitBoundary, v: u32, depth: u32, rng: &mut SimRng| {
        for s in 0..2u32 {
            let key = rng.random::<u64>() >> (64 - KEY_BITS);
            boundary.push(Boundary {
                key,
                parent: v,
                meta: (depth + 1) << 1 | s,
            });
        }
    };
    push_children(&mut boundary, 0, 0, rng);
    while !stop(raw.parent.len(), *raw.depth.last().unwrap()) {
        let b = boundary.pop();
        let v = raw.parent.len() as u32;
        if v == u32::MAX - 1 {
            return Err(Error::CapExceeded(v as usize));
        }
        let depth = b.meta >> 1;
        raw.parent.push(b.parent);
        raw.slot.push((b.meta & 1) as u8);
        raw.key.push(b.key);
        raw.depth.push(depth);
        push_children(&mut boundary, v, depth, rng);
    }
    Ok(raw)
}

fn run_invasion(rng: &mut SimRng, stop: impl FnMut(usize, u32) -> bool) -> Result<IPCInstance> {
    let raw = run_raw(rng, stop)?;
    let n = raw.parent.len();
    let mut lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 1..n {
        lists[raw.parent[v] as usize].push(v);
    }
    for l in &mut lists {
        l.sort_by_key(|&c| raw.slot[c]);
    }
    let (tree, map) = OrderedRootedTree::from_child_lists(&lists, 0)?;
    let mut weights = vec![0.0; n];
    for v in 1..n {
        weights[map[v]] = key_weight(raw.key[v]);
    }
    Ok(IPCInstance {
        tree,
        weights,
        invasion_order: map,
    })
}

fn depth_stop(depth: usize, max_vertices: usize, exceeded: &mut bool) -> impl FnMut(usize, u32) -> bool + '_ {
    move |count, d| {
        if d as usize >= depth {
            return true;
        }
        if count >= max_vertices {
            *exceeded = true;
            return true;
        }
        false
    }
}

/// Envelope statistics `k (2 M_{ceil(k t)} - 1)` of one invasion run to
/// `depth`, computed without building the tree. Same values as
/// [`estimate_backbone`] followed by [`BackboneEstimate::envelope_statistic`].
pub fn envelope_statistics_until_depth(
    depth: usize,
    max_vertices: usize,
    trim: f64,
    ts: &[f64],
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    if !(trim > 0.0 && trim < 1.0) || depth < 2 {
        return invalid("need depth >= 2 and trim in (0, 1)");
    }
    let mut exceeded = false;
    let raw = run_raw(rng, depth_stop(depth, max_vertices, &mut exceeded))?;
    if exceeded {
        return Err(Error::CapExceeded(max_vertices));
    }
    // the last invaded vertex is the unique deepest one
    let mut path = vec![raw.parent.len() as u32 - 1];
    while let Some(&v) = path.last() {
        if v == 0 {
            break;
        }
        path.push(raw.parent[v as usize]);
    }
    path.reverse();
    let k = ((trim * depth as f64).floor() as usize).max(1);
    let mut later_max = vec![0u64; raw.key.len()];
    for i in (0..raw.key.len() - 1).rev() {
        later_max[i] = later_max[i + 1].max(raw.key[i + 1]);
    }
    ts.iter()
        .map(|&t| {
            let j = (k as f64 * t).ceil() as usize;
            if !(t > 0.0) || j > k {
                return invalid(format!("t = {t} outside (0, 1]"));
            }
            Ok(k as f64 * (2.0 * key_weight(later_max[path[j] as usize]) - 1.0))
        })
        .collect()
}

/// Invades `n` vertices (the root included).
pub fn invade(n: usize, rng: &mut SimRng) -> Result<IPCInstance> {
    if n == 0 {
        return invalid("vertex budget must be >= 1");
    }
    run_invasion(rng, |count, _| count >= n)
}

/// Invades until a vertex at `depth` is reached, failing after `max_vertices`.
pub fn invade_until_depth(depth: usize, max_vertices: usize, rng: &mut SimRng) -> Result<IPCInstance> {
    let mut exceeded = false;
    let inst = run_invasion(rng, depth_stop(depth, max_vertices, &mut exceeded))?;
    if exceeded {
        return Err(Error::CapExceeded(max_vertices));
    }
    Ok(inst)
}

/// Ancestral path of the deepest invaded vertex with backbone weights and
/// forward maxima.
#[derive(Clone, Debug, PartialEq)]
pub struct BackboneEstimate {
    /// Vertices `0..=k` of the trimmed path, root first.
    pub path: Vec<usize>,
    /// `weights[l]` is the weight of the `l`-th path vertex over the full
    /// untrimmed ancestry (`weights[0] = 0` for the root).
    pub weights: Vec<f64>,
    /// `forward_max[j]` is the largest weight invaded after path vertex `j`,
    /// the finite-run estimate of `M_j = sup { P_l : l > j }`.
    pub forward_max: Vec<f64>,
    /// Depth of the deepest invaded vertex.
    pub depth: usize,
}

impl BackboneEstimate {
    pub fn trimmed_length(&self) -> usize {
        self.path.len() - 1
    }

    /// `k (2 M_{ceil(k t)} - 1)` with `k` the trimmed length.
    pub fn envelope_statistic(&self, t: f64) -> Result<f64> {
        let k = self.trimmed_length();
        let j = (k as f64 * t).ceil() as usize;
        if !(t > 0.0) || j > k {
            return invalid(format!("t = {t} outside (0, 1]"));
        }
        Ok(k as f64 * (2.0 * self.forward_max[j] - 1.0))
    }
}

fn deepest_vertex(tree: &OrderedRootedTree) -> usize {
    let mut best = 0;
    for v in 1..tree.vertex_count() {
        if tree.depth(v) > tree.depth(best) {
            best = v;
        }
    }
    best
}

fn ancestry(tree: &OrderedRootedTree, mut v: usize) -> Vec<usize> {
    let mut path = vec![v];
    while let Some(p) = tree.parent(v) {
        path.push(p);
        v = p;
    }
    path.reverse();
    path
}

pub fn estimate_backbone(inst: &IPCInstance, trim: f64) -> Result<BackboneEstimate> {
    if !(trim > 0.0 && trim < 1.0) {
        return invalid(format!("trim fraction must lie in (0, 1), got {trim}"));
    }
    let deepest = deepest_vertex(&inst.tree);
    let depth = inst.tree.depth(deepest);
    if depth < 2 {
        return Err(Error::Degenerate(format!("invaded depth {depth} < 2")));
    }
    let full = ancestry(&inst.tree, deepest);
    let weights: Vec<f64> = full.iter().map(|&v| inst.weights[v]).collect();
    let k = ((trim * depth as f64).floor() as usize).max(1);
    // everything invaded after backbone vertex j weighs at most M_j, and the
    // outlet realizing M_j is invaded after j
    let n = inst.invasion_order.len();
    let mut time = vec![0usize; n];
    for (i, &v) in inst.invasion_order.iter().enumerate() {
        time[v] = i;
    }
    let mut later_max = vec![0.0f64; n];
    for i in (0..n - 1).rev() {
        later_max[i] = later_max[i + 1].max(inst.weights[inst.invasion_order[i + 1]]);
    }
    let forward_max = full[..=k].iter().map(|&v| later_max[time[v]]).collect();
    Ok(BackboneEstimate {
        path: full[..=k].to_vec(),
        weights,
        forward_max,
        depth,
    })
}

/// Backbone index of every vertex: the depth of its projection onto the
/// ancestry of the deepest vertex.
pub fn backbone_projection(tree: &OrderedRootedTree) -> Vec<u32> {
    let idx = reduce(tree, &[deepest_vertex(tree)]).expect("valid anchor");
    (0..tree.vertex_count())
        .map(|v| tree.depth(idx.project(v)) as u32)
        .collect()
}

/// Dual parameter `(1 - E_{k/k_max} / k_max) / 2` of the branch at index `k`,
/// or `None` when it is not positive (the branch is the root alone).
pub fn structural_parameter(envelope: &EnvelopeProcess, k: usize, k_max: usize) -> Option<f64> {
    let e = envelope.value(k as f64 / k_max as f64);
    let p = 0.5 * (1.0 - e / k_max as f64);
    (p > 0.0).then_some(p)
}

fn structural_params(k_max: usize, rng: &mut SimRng) -> Result<(EnvelopeProcess, Vec<Option<f64>>)> {
    if k_max == 0 {
        return invalid("k_max must be >= 1");
    }
    let x_min = 1.0 / k_max as f64;
    // the envelope domain must be nonempty even for k_max = 1
    let env = sample_envelope(x_min, x_min.max(1.0) + f64::EPSILON, rng)?;
    let params = (1..=k_max).map(|k| structural_parameter(&env, k, k_max)).collect();
    Ok((env, params))
}

/// Branches `L_1..L_{k_max}` of the limit-regime IPC surrogate, each a
/// subcritical `T*` cluster driven by a fresh envelope.
pub fn structural_ipc_branches(k_max: usize, rng: &mut SimRng) -> Result<(EnvelopeProcess, Vec<OrderedRootedTree>)> {
    let (env, params) = structural_params(k_max, rng)?;
    let mut out = Vec::with_capacity(k_max);
    for p in params {
        out.push(match p {
            Some(p) => sample_cluster(PercolationParams::new(p, Substrate::TStar)?, None, rng)?,
            None => OrderedRootedTree::single(),
        });
    }
    Ok((env, out))
}

/// Sizes of the structural branches, without building the trees.
pub fn structural_ipc_branch_sizes(k_max: usize, rng: &mut SimRng) -> Result<(EnvelopeProcess, Vec<u64>)> {
    let (env, params) = structural_params(k_max, rng)?;
    let sizes = params
        .into_iter()
        .map(|p| match p {
            Some(p) => match sample_cluster_size(PercolationParams::new(p, Substrate::TStar).unwrap(), usize::MAX, rng)
            {
                ClusterSize::Finite(n) | ClusterSize::AtLeast(n) => n as u64,
            },
            None => 1,
        })
        .collect();
    Ok((env, sizes))
}

/// Dual of the supercritical parameter `M_k = (1 + E/k_max) / 2`.
pub fn structural_dual(level: f64, k_max: usize) -> Result<f64> {
    dual_parameter(0.5 * (1.0 + level / k_max as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn small_budgets() {
        let mut rng = rng_from_seed(31);
        let one = invade(1, &mut rng).unwrap();
        assert_eq!(one.tree.vertex_count(), 1);
        assert!(invade(0, &mut rng).is_err());
        for _ in 0..100 {
            let two = invade(2, &mut rng).unwrap();
            assert_eq!(two.tree.vertex_count(), 2);
            assert_eq!(two.invasion_order, vec![0, 1]);
        }
    }

    /// Replays the invasion with a naive boundary scan.
    #[test]
    fn greedy_rule_holds() {
        let mut rng = rng_from_seed(32);
        let inst = invade(400, &mut rng).unwrap();
        let t = &inst.tree;
        let mut invaded = vec![false; t.vertex_count()];
        invaded[0] = true;
        for &v in &inst.invasion_order[1..] {
            let p = t.parent(v).unwrap();
            assert!(invaded[p]);
            // every invaded-tree vertex on the current boundary has weight >= w_v
            for u in 1..t.vertex_count() {
                if !invaded[u] && invaded[t.parent(u).unwrap()] {
                    assert!(inst.weights[u] >= inst.weights[v]);
                }
            }
            invaded[v] = true;
        }
        assert!(inst.weights[1..].iter().all(|&w| w > 0.0 && w < 1.0));
    }

    #[test]
    fn until_depth_and_cap() {
        let mut rng = rng_from_seed(33);
        let inst = invade_until_depth(50, 1_000_000, &mut rng).unwrap();
        assert_eq!(inst.tree.height(), 50);
        assert!(matches!(
            invade_until_depth(10_000, 100, &mut rng),
            Err(Error::CapExceeded(100))
        ));
    }

    #[test]
    fn lean_statistics_match_full_estimate() {
        for seed in 0..5 {
            let inst = invade_until_depth(300, 10_000_000, &mut rng_from_seed(40 + seed)).unwrap();
            let est = estimate_backbone(&inst, 0.4).unwrap();
            let full: Vec<f64> = [0.5, 1.0].iter().map(|&t| est.envelope_statistic(t).unwrap()).collect();
            let lean =
                envelope_statistics_until_depth(300, 10_000_000, 0.4, &[0.5, 1.0], &mut rng_from_seed(40 + seed))
                    .unwrap();
            assert_eq!(full, lean);
        }
    }

    #[test]
    fn bare_path_backbone() {
        let tree = OrderedRootedTree::path(11).unwrap();
        let weights: Vec<f64> = (0..11)
            .map(|i| if i == 0 { 0.0 } else { 1.0 - i as f64 / 20.0 })
            .collect();
        let inst = IPCInstance {
            tree,
            weights,
            invasion_order: (0..11).collect(),
        };
        let est = estimate_backbone(&inst, 0.5).unwrap();
        assert_eq!(est.path, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(est.forward_max[0], inst.weights[1]);
        assert_eq!(est.forward_max[5], inst.weights[6]);
        let short = IPCInstance {
            tree: OrderedRootedTree::path(2).unwrap(),
            weights: vec![0.0, 0.5],
            invasion_order: vec![0, 1],
        };
        assert!(matches!(estimate_backbone(&short, 0.5), Err(Error::Degenerate(_))));
    }

    #[test]
    fn deepest_tie_takes_smaller_id() {
        let tree = OrderedRootedTree::from_parens("((())(()))").unwrap();
        let inst = IPCInstance {
            tree,
            weights: vec![0.0, 0.4, 0.3, 0.45, 0.2],
            invasion_order: vec![0, 1, 2, 3, 4],
        };
        let est = estimate_backbone(&inst, 0.9).unwrap();
        assert_eq!(est.path, vec![0, 1]);
        assert_eq!(est.weights, vec![0.0, 0.4, 0.3]);
    }

    #[test]
    fn projection_is_backbone_depth() {
        let mut rng = rng_from_seed(34);
        let inst = invade(5000, &mut rng).unwrap();
        let phi = backbone_projection(&inst.tree);
        let est = estimate_backbone(&inst, 0.99).unwrap();
        for (l, &v) in est.path.iter().enumerate() {
            assert_eq!(phi[v] as usize, l);
        }
    }

    #[test]
    fn early_weights_settle_near_half() {
        let mut rng = rng_from_seed(35);
        let mut ok = 0;
        let runs = 100;
        for _ in 0..runs {
            let inst = invade(20_000, &mut rng).unwrap();
            let late = inst.invasion_order[1000..]
                .iter()
                .map(|&v| inst.weights[v])
                .fold(0.0, f64::max);
            ok += usize::from(late < 0.6);
        }
        assert!(ok >= 95, "{ok}/{runs}");
    }

    #[test]
    fn structural_branch_mean() {
        // fixed level e = 1: E[size] = (1 - p)/(1 - 2p) with 1 - 2p = 1/k_max, about k_max/2
        let mut rng = rng_from_seed(36);
        let k_max = 100;
        let p = 0.5 * (1.0 - 1.0 / k_max as f64);
        assert!((structural_dual(1.0, k_max).unwrap() - p).abs() < 1e-15);
        let params = PercolationParams::new(p, Substrate::TStar).unwrap();
        let runs = 200_000;
        let sizes: Vec<f64> = (0..runs)
            .map(|_| match sample_cluster_size(params, usize::MAX, &mut rng) {
                ClusterSize::Finite(n) | ClusterSize::AtLeast(n) => n as f64,
            })
            .collect();
        let mean = sizes.iter().sum::<f64>() / runs as f64;
        let var = sizes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        let exact = (1.0 - p) / (1.0 - 2.0 * p);
        assert!(
            (mean - exact).abs() < 3.0 * (var / runs as f64).sqrt(),
            "{mean} vs {exact}"
        );
        assert!((mean / k_max as f64 - 0.5).abs() < 0.15 * 0.5);
    }

    #[test]
    fn structural_outputs() {
        let mut rng = rng_from_seed(37);
        let (env, branches) = structural_ipc_branches(200, &mut rng).unwrap();
        assert_eq!(branches.len(), 200);
        assert!(env.levels.windows(2).all(|w| w[0] > w[1]));
        let (_, sizes) = structural_ipc_branch_sizes(200, &mut rng).unwrap();
        assert!(sizes.iter().all(|&s| s >= 1));
        assert!(structural_ipc_branches(0, &mut rng).is_err());
        let (_, one) = structural_ipc_branches(1, &mut rng).unwrap();
        assert_eq!(one.len(), 1);
    }
}
