use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::excursion::ExcursionGrid;
use crate::error::{invalid, Error, Result};
use crate::rng::SimRng;
use crate::tree::{OrderedRootedTree, ReducedSubtreeIndex};

const ROOT_PARENT: usize = usize::MAX;

/// A finite metric tree: node 0 is the root, every other node `v` owns the
/// edge from `parent(v)` to `v`. Leaves carry labels `0..K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTreeSkeleton {
    parent: Vec<usize>,
    length: Vec<f64>,
    leaf: Vec<Option<usize>>,
}

/// A point on an edge, `offset` measured from the parent end.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonPoint {
    pub edge: usize,
    pub offset: f64,
}

impl MetricTreeSkeleton {
    fn rooted() -> Self {
        MetricTreeSkeleton {
            parent: vec![ROOT_PARENT],
            length: vec![0.0],
            leaf: vec![None],
        }
    }

    fn push(&mut self, parent: usize, length: f64, leaf: Option<usize>) -> usize {
        self.parent.push(parent);
        self.length.push(length);
        self.leaf.push(leaf);
        self.parent.len() - 1
    }

    /// Validated construction; `parent[0]` is ignored.
    pub fn from_parts(parent: Vec<usize>, length: Vec<f64>, leaf: Vec<Option<usize>>) -> Result<Self> {
        let mut s = MetricTreeSkeleton { parent, length, leaf };
        if s.parent.is_empty() {
            return invalid("skeleton needs a root");
        }
        s.parent[0] = ROOT_PARENT;
        s.length[0] = 0.0;
        s.validate()?;
        Ok(s)
    }

    /// Connected, acyclic, positive lengths, labels `0..K` on exactly the
    /// non-root leaves.
    pub fn validate(&self) -> Result<()> {
        let n = self.parent.len();
        if self.length.len() != n || self.leaf.len() != n {
            return invalid("skeleton arrays differ in length");
        }
        for v in 1..n {
            if self.parent[v] >= n || !(self.length[v] > 0.0) || !self.length[v].is_finite() {
                return invalid(format!("edge {v} has a bad parent or length"));
            }
            let mut u = v;
            for _ in 0..n {
                u = self.parent[u];
                if u == 0 {
                    break;
                }
            }
            if u != 0 {
                return invalid(format!("node {v} does not reach the root"));
            }
        }
        let children = self.children();
        let mut labels: Vec<usize> = Vec::new();
        for v in 1..n {
            match (children[v].is_empty(), self.leaf[v]) {
                (true, Some(l)) => labels.push(l),
                (true, None) => return invalid(format!("leaf {v} is unlabelled")),
                (false, Some(_)) => return invalid(format!("inner node {v} is labelled")),
                (false, None) => {}
            }
        }
        labels.sort_unstable();
        if labels.iter().enumerate().any(|(i, &l)| i != l) || self.leaf[0].is_some() {
            return invalid("leaf labels must be 0..K");
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf.iter().filter(|l| l.is_some()).count()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (v != 0).then(|| self.parent[v])
    }

    /// Length of the edge ending at `v`.
    pub fn length(&self, v: usize) -> f64 {
        self.length[v]
    }

    pub fn leaf_label(&self, v: usize) -> Option<usize> {
        self.leaf[v]
    }

    /// Node carrying leaf label `label`.
    pub fn leaf_node(&self, label: usize) -> Option<usize> {
        self.leaf.iter().position(|&l| l == Some(label))
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.node_count()];
        for v in 1..self.node_count() {
            c[self.parent[v]].push(v);
        }
        c
    }

    /// Edges `(parent, child, length)` in depth-first order from the root.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let children = self.children();
        let mut out = Vec::with_capacity(self.node_count() - 1);
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            for &c in children[v].iter().rev() {
                stack.push(c);
            }
            if v != 0 {
                out.push((self.parent[v], v, self.length[v]));
            }
        }
        out
    }

    pub fn total_length(&self) -> f64 {
        self.length.iter().sum()
    }

    /// Distance from the root to node `v`.
    pub fn height(&self, mut v: usize) -> f64 {
        let mut h = 0.0;
        while v != 0 {
            h += self.length[v];
            v = self.parent[v];
        }
        h
    }

    pub fn point_height(&self, p: SkeletonPoint) -> f64 {
        self.height(self.parent[p.edge]) + p.offset
    }

    fn ancestors(&self, mut v: usize) -> Vec<usize> {
        let mut path = vec![v];
        while v != 0 {
            v = self.parent[v];
            path.push(v);
        }
        path
    }

    /// Path distance between two nodes.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let pa = self.ancestors(a);
        let pb = self.ancestors(b);
        let lca = *pa.iter().find(|v| pb.contains(v)).expect("common root");
        self.height(a) + self.height(b) - 2.0 * self.height(lca)
    }

    pub fn scaled(&self, c: f64) -> MetricTreeSkeleton {
        let mut s = self.clone();
        s.length.iter_mut().for_each(|l| *l *= c);
        s
    }

    /// Point at arc length `t` along the edges taken in [`Self::edges`] order.
    pub fn point_at_length(&self, t: f64) -> SkeletonPoint {
        let edges = self.edges();
        let mut acc = 0.0;
        for &(_, e, len) in &edges {
            if t < acc + len {
                return SkeletonPoint {
                    edge: e,
                    offset: (t - acc).max(0.0),
                };
            }
            acc += len;
        }
        let &(_, e, len) = edges.last().expect("skeleton has an edge");
        SkeletonPoint { edge: e, offset: len }
    }
}

/// Reduced tree spanned by the root and `k` uniform grid times of `w`.
/// Leaf `i` is the `i`-th sampled time. Samples with coincident times or a
/// zero-length edge are redrawn.
pub fn reduced_tree_from_excursion(w: &ExcursionGrid, k: usize, rng: &mut SimRng) -> Result<MetricTreeSkeleton> {
    let m = w.grid_size();
    if k == 0 {
        return invalid("need at least one leaf");
    }
    if k > m - 1 {
        return invalid("more leaves than interior grid points");
    }
    for _ in 0..1000 {
        let times: Vec<usize> = (0..k).map(|_| rng.random_range(1..m)).collect();
        if let Some(s) = reduced_tree_at(w, &times) {
            return Ok(s);
        }
    }
    Err(Error::Degenerate("could not draw a non-degenerate reduced tree".into()))
}

/// Reduced tree for fixed grid times; `None` if degenerate.
pub fn reduced_tree_at(w: &ExcursionGrid, times: &[usize]) -> Option<MetricTreeSkeleton> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by_key(|&i| times[i]);
    if order.windows(2).any(|p| times[p[0]] == times[p[1]]) {
        return None;
    }
    let heights: Vec<f64> = order.iter().map(|&i| w.values[times[i]]).collect();
    let mins: Vec<f64> = order
        .windows(2)
        .map(|p| w.min_between(times[p[0]], times[p[1]]))
        .collect();
    let mut s = MetricTreeSkeleton::rooted();
    build_cartesian(&mut s, &order, &heights, &mins, 0, order.len() - 1, 0, 0.0);
    s.length[1..].iter().all(|&l| l > 0.0).then_some(s)
}

#[allow(clippy::too_many_arguments)]
fn build_cartesian(
    s: &mut MetricTreeSkeleton,
    labels: &[usize],
    heights: &[f64],
    mins: &[f64],
    l: usize,
    r: usize,
    parent: usize,
    parent_height: f64,
) {
    if l == r {
        s.push(parent, heights[l] - parent_height, Some(labels[l]));
        return;
    }
    let j = (l..r).min_by(|&a, &b| mins[a].total_cmp(&mins[b])).expect("nonempty");
    let node = s.push(parent, mins[j] - parent_height, None);
    build_cartesian(s, labels, heights, mins, l, j, node, mins[j]);
    build_cartesian(s, labels, heights, mins, j + 1, r, node, mins[j]);
}

/// Cut times `C_i = sqrt(2 Gamma_i)` of a rate-`t` Poisson process.
pub fn line_breaking_cuts(k: usize, rng: &mut SimRng) -> Vec<f64> {
    let mut gamma = 0.0;
    (0..k)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            gamma += e;
            (2.0 * gamma).sqrt()
        })
        .collect()
}

/// Line-breaking construction: an edge of length `C_1`, then for each later
/// cut an edge of length `C_{i+1} - C_i` glued at a uniform point.
pub fn line_breaking(k: usize, rng: &mut SimRng) -> Result<MetricTreeSkeleton> {
    if k == 0 {
        return invalid("need at least one leaf");
    }
    let cuts = line_breaking_cuts(k, rng);
    let mut s = MetricTreeSkeleton::rooted();
    s.push(0, cuts[0], Some(0));
    for i in 1..k {
        let u = rng.random::<f64>() * cuts[i - 1];
        let p = s.point_at_length(u);
        let e = p.edge;
        let branch = if p.offset <= 0.0 {
            s.parent[e]
        } else if p.offset >= s.length[e] {
            e
        } else {
            let b = s.push(s.parent[e], p.offset, None);
            s.parent[e] = b;
            s.length[e] -= p.offset;
            b
        };
        s.push(branch, cuts[i] - cuts[i - 1], Some(i));
    }
    Ok(s)
}

/// `(edge, steps from the parent node)` on a skeleton.
pub type EdgePosition = (usize, usize);

/// Metric skeleton of a discrete reduced subtree: branch points, anchors
/// and the root become nodes, graph distances are multiplied by `scale`.
/// Returns the skeleton and, for each member vertex of the reduced tree,
/// its location as `(edge, steps from the parent node)`; the root maps to
/// `(0, 0)`.
pub fn skeleton_from_reduced(
    tree: &OrderedRootedTree,
    index: &ReducedSubtreeIndex,
    anchors: &[usize],
    scale: f64,
) -> Result<(MetricTreeSkeleton, Vec<Option<EdgePosition>>)> {
    let n = tree.vertex_count();
    let member_children = |v: usize| {
        tree.children(v)
            .iter()
            .map(|&c| c as usize)
            .filter(|&c| index.member[c])
    };
    let mut label = vec![None; n];
    for (i, &a) in anchors.iter().enumerate() {
        if a >= n || !index.member[a] {
            return Err(Error::InvalidVertex(a));
        }
        if a == 0 {
            return invalid("anchors must differ from the root");
        }
        if label[a].is_some() {
            return invalid("anchors must be distinct");
        }
        label[a] = Some(i);
    }
    for v in 1..n {
        if index.member[v] && member_children(v).count() == 0 && label[v].is_none() {
            return invalid(format!("reduced leaf {v} is not an anchor"));
        }
    }
    let mut s = MetricTreeSkeleton::rooted();
    let mut loc = vec![None; n];
    loc[0] = Some((0, 0));
    // (vertex, skeleton node above)
    let mut stack: Vec<(usize, usize)> = member_children(0).map(|c| (c, 0)).collect();
    while let Some((start, above)) = stack.pop() {
        let mut path = vec![start];
        let mut v = start;
        loop {
            let kids: Vec<usize> = member_children(v).collect();
            if kids.len() == 1 && label[v].is_none() {
                v = kids[0];
                path.push(v);
            } else {
                let node = s.push(above, scale * path.len() as f64, label[v]);
                for (j, &u) in path.iter().enumerate() {
                    loc[u] = Some((node, j + 1));
                }
                for &c in &kids {
                    stack.push((c, node));
                }
                break;
            }
        }
    }
    // anchors that are ancestors of other anchors sit inside the tree
    if s.leaf
        .iter()
        .enumerate()
        .any(|(v, l)| l.is_some() && s.parent.contains(&v))
    {
        return Err(Error::Degenerate("an anchor lies on another anchor's root path".into()));
    }
    Ok((s, loc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::excursion::{crt_pseudometric, sample_excursion};
    use crate::rng::rng_from_seed;
    use crate::tree::reduce;

    #[test]
    fn single_leaf_from_excursion() {
        let w = ExcursionGrid {
            values: vec![0.0, 1.0, 2.0, 1.0, 0.0],
        };
        let s = reduced_tree_at(&w, &[2]).unwrap();
        assert_eq!(s.node_count(), 2);
        assert_eq!(s.length(1), 2.0);
        assert_eq!(s.leaf_label(1), Some(0));
    }

    #[test]
    fn tent_with_three_leaves() {
        let w = ExcursionGrid {
            values: vec![0.0, 1.0, 2.0, 1.0, 2.0, 3.0, 2.0, 2.5, 0.0],
        };
        let s = reduced_tree_at(&w, &[5, 2, 7]).unwrap();
        s.validate().unwrap();
        assert_eq!(s.node_count(), 6);
        assert_eq!(s.total_length(), 1.0 + 1.0 + 1.0 + 1.0 + 0.5);
        let l = |i| s.leaf_node(i).unwrap();
        assert_eq!(s.distance(l(0), l(1)), 3.0);
        assert_eq!(s.distance(l(0), l(2)), 1.5);
        assert_eq!(s.distance(l(1), l(2)), 2.5);
        assert_eq!(s.parent(l(0)), s.parent(l(2)));
    }

    #[test]
    fn distances_match_pseudometric() {
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            let w = sample_excursion(2000, &mut rng).unwrap();
            let times: Vec<usize> = (0..5).map(|_| rng.random_range(1..2000)).collect();
            let Some(s) = reduced_tree_at(&w, &times) else { continue };
            s.validate().unwrap();
            for i in 0..5 {
                assert!((s.height(s.leaf_node(i).unwrap()) - w.values[times[i]]).abs() < 1e-12);
                for j in 0..5 {
                    let d = s.distance(s.leaf_node(i).unwrap(), s.leaf_node(j).unwrap());
                    assert!((d - crt_pseudometric(&w, times[i], times[j]).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn line_breaking_shapes() {
        let mut rng = rng_from_seed(2);
        let one = line_breaking(1, &mut rng).unwrap();
        assert_eq!(one.node_count(), 2);
        for k in 2..8 {
            let s = line_breaking(k, &mut rng).unwrap();
            s.validate().unwrap();
            assert_eq!(s.leaf_count(), k);
            assert_eq!(s.node_count(), 2 * k);
        }
        assert!(line_breaking(0, &mut rng).is_err());
    }

    #[test]
    fn first_cut_void_probability() {
        let mut rng = rng_from_seed(3);
        let n = 100_000;
        let hits = (0..n).filter(|_| line_breaking_cuts(1, &mut rng)[0] > 1.0).count() as f64 / n as f64;
        let p = (-0.5f64).exp();
        assert!((hits - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt());
    }

    #[test]
    fn total_length_equals_last_cut() {
        let mut rng = rng_from_seed(4);
        let s = line_breaking(6, &mut rng).unwrap();
        let mut rng2 = rng_from_seed(4);
        let cuts = line_breaking_cuts(6, &mut rng2);
        assert!((s.total_length() - cuts[5]).abs() < 1e-12);
    }

    #[test]
    fn discrete_reduction() {
        // root - 1 - 2 - {3, 4 - 5}
        let t = OrderedRootedTree::from_parens("(((()(()))))").unwrap();
        let idx = reduce(&t, &[3, 5]).unwrap();
        let (s, loc) = skeleton_from_reduced(&t, &idx, &[3, 5], 0.5).unwrap();
        s.validate().unwrap();
        assert_eq!(s.node_count(), 4);
        assert_eq!(s.total_length(), 0.5 * 5.0);
        assert_eq!(loc[2].unwrap().1, 2);
        assert_eq!(s.height(s.leaf_node(1).unwrap()), 2.0);
        let ancestor = reduce(&t, &[2, 3]).unwrap();
        assert!(skeleton_from_reduced(&t, &ancestor, &[2, 3], 1.0).is_err());
    }
}
