use rand::Rng;

use crate::error::{invalid, Result};
use crate::rng::SimRng;
use crate::tree::{OrderedRootedTree, NONE};

/// A finite branch; `complete` is false when generation stopped at the cap.
#[derive(Clone, Debug)]
pub struct Branch {
    pub tree: OrderedRootedTree,
    pub complete: bool,
}

/// Backbone `0..K` with an independent critical `T*` cluster glued by its
/// root to every backbone vertex.
#[derive(Clone, Debug)]
pub struct IICInstance {
    pub branches: Vec<Branch>,
}

/// Critical `T*` cluster explored depth first, stopping after `cap` vertices.
pub(crate) fn critical_branch(cap: usize, rng: &mut SimRng) -> Branch {
    let mut degrees: Vec<usize> = Vec::new();
    // (parent index, child slots of the new vertex)
    let mut stack: Vec<(usize, usize)> = vec![(usize::MAX, 1)];
    while let Some((parent, avail)) = stack.pop() {
        if degrees.len() == cap {
            // unexplored slots are always the trailing children of their parents
            stack.push((parent, avail));
            for &(p, _) in &stack {
                degrees[p] -= 1;
            }
            let tree = OrderedRootedTree::from_preorder_degrees(&degrees).expect("closed word");
            return Branch { tree, complete: false };
        }
        let v = degrees.len();
        let bits = rng.random::<u32>();
        let open = (0..avail).filter(|i| bits >> i & 1 == 1).count();
        degrees.push(open);
        stack.extend(std::iter::repeat_n((v, 2usize), open));
    }
    let tree = OrderedRootedTree::from_preorder_degrees(&degrees).expect("closed word");
    Branch { tree, complete: true }
}

impl IICInstance {
    pub fn backbone_length(&self) -> usize {
        self.branches.len()
    }

    /// The truncated IIC as one tree, with the backbone index of every vertex.
    pub fn materialize(&self) -> (OrderedRootedTree, Vec<u32>) {
        let k = self.branches.len();
        let total: usize = self.branches.iter().map(|b| b.tree.vertex_count()).sum();
        let mut lists: Vec<Vec<usize>> = Vec::with_capacity(total);
        let mut phi = Vec::with_capacity(total);
        let mut offsets = Vec::with_capacity(k);
        for (i, b) in self.branches.iter().enumerate() {
            let off = lists.len();
            offsets.push(off);
            for v in 0..b.tree.vertex_count() {
                lists.push(b.tree.children(v).iter().map(|&c| c as usize + off).collect());
                phi.push(i as u32);
            }
        }
        for i in 0..k.saturating_sub(1) {
            lists[offsets[i]].insert(0, offsets[i + 1]);
        }
        let (tree, map) = OrderedRootedTree::from_child_lists(&lists, 0).expect("connected");
        let mut phi_new = vec![0u32; total];
        for (old, &new) in map.iter().enumerate() {
            phi_new[new] = phi[old];
        }
        (tree, phi_new)
    }
}

pub fn build_iic(k: usize, branch_cap: usize, rng: &mut SimRng) -> Result<IICInstance> {
    if k == 0 {
        return invalid("backbone length must be >= 1");
    }
    if branch_cap == 0 {
        return invalid("branch cap must be >= 1");
    }
    Ok(IICInstance {
        branches: (0..k).map(|_| critical_branch(branch_cap, rng)).collect(),
    })
}

/// The infinite IIC grown on demand: a vertex's children are sampled the
/// first time a walk stands on it, so only the visited region exists.
#[derive(Clone, Debug, Default)]
pub struct LazyIic {
    nbr: Vec<[u32; 3]>,
    deg: Vec<u8>,
    expanded: Vec<bool>,
    backbone: Vec<bool>,
    phi: Vec<u32>,
}

impl LazyIic {
    pub fn new() -> Self {
        let mut g = LazyIic::default();
        g.reset();
        g
    }

    /// Forget everything but keep allocations.
    pub fn reset(&mut self) {
        self.nbr.clear();
        self.deg.clear();
        self.expanded.clear();
        self.backbone.clear();
        self.phi.clear();
        self.push(NONE, true, 0);
    }

    fn push(&mut self, parent: u32, on_backbone: bool, phi: u32) -> u32 {
        let id = self.deg.len() as u32;
        let mut nbr = [NONE; 3];
        let mut deg = 0u8;
        if parent != NONE {
            nbr[0] = parent;
            deg = 1;
        }
        self.nbr.push(nbr);
        self.deg.push(deg);
        self.expanded.push(false);
        self.backbone.push(on_backbone);
        self.phi.push(phi);
        id
    }

    fn attach(&mut self, v: u32, child: u32) {
        let d = self.deg[v as usize] as usize;
        self.nbr[v as usize][d] = child;
        self.deg[v as usize] += 1;
    }

    fn expand(&mut self, v: u32, rng: &mut SimRng) {
        let vi = v as usize;
        self.expanded[vi] = true;
        let phi = self.phi[vi];
        let bits = rng.random::<u32>();
        if self.backbone[vi] {
            let next = self.push(v, true, phi + 1);
            self.attach(v, next);
            if bits & 1 == 1 {
                let c = self.push(v, false, phi);
                self.attach(v, c);
            }
        } else {
            for i in 0..2 {
                if bits >> i & 1 == 1 {
                    let c = self.push(v, false, phi);
                    self.attach(v, c);
                }
            }
        }
    }

    /// One simple-random-walk step from `v`.
    #[inline]
    pub fn step(&mut self, v: u32, rng: &mut SimRng) -> u32 {
        if !self.expanded[v as usize] {
            self.expand(v, rng);
        }
        let d = self.deg[v as usize] as u32;
        let i = if d == 1 { 0 } else { rng.random_range(0..d) };
        self.nbr[v as usize][i as usize]
    }

    /// Backbone index of `v`.
    #[inline]
    pub fn phi(&self, v: u32) -> u32 {
        self.phi[v as usize]
    }

    pub fn vertex_count(&self) -> usize {
        self.deg.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn truncated_branch_is_a_valid_tree() {
        let mut rng = rng_from_seed(21);
        let mut saw_truncated = false;
        for _ in 0..2000 {
            let b = critical_branch(20, &mut rng);
            assert!(b.tree.vertex_count() <= 20);
            assert!(b.tree.child_count(0) <= 1);
            if !b.complete {
                saw_truncated = true;
                assert_eq!(b.tree.vertex_count(), 20);
            }
        }
        assert!(saw_truncated);
    }

    #[test]
    fn materialized_iic_projects_to_backbone() {
        let mut rng = rng_from_seed(22);
        let iic = build_iic(30, 1000, &mut rng).unwrap();
        let (t, phi) = iic.materialize();
        let total: usize = iic.branches.iter().map(|b| b.tree.vertex_count()).sum();
        assert_eq!(t.vertex_count(), total);
        // backbone vertex k is the unique vertex with phi = k at depth k
        for k in 0..30u32 {
            let on: Vec<usize> = (0..total)
                .filter(|&v| phi[v] == k && t.depth(v) == k as usize)
                .collect();
            assert_eq!(on.len(), 1);
        }
        assert!(build_iic(0, 10, &mut rng).is_err());
    }

    #[test]
    fn lazy_iic_walk_moves_to_neighbours() {
        let mut rng = rng_from_seed(23);
        let mut g = LazyIic::new();
        let mut v = 0u32;
        for _ in 0..10_000 {
            let w = g.step(v, &mut rng);
            let (a, b) = (g.phi(v) as i64, g.phi(w) as i64);
            assert!((a - b).abs() <= 1);
            v = w;
        }
        assert!(g.vertex_count() > 1);
        g.reset();
        assert_eq!(g.vertex_count(), 1);
    }
}
