use rand::Rng;

use super::step;
use crate::rng::SimRng;
use crate::tree::{Adjacency, OrderedRootedTree};

/// Length of one excursion from the root. The one-vertex tree has no
/// excursions; it reports `2`, the reflected step out and back.
pub fn sample_sigma(adj: &Adjacency, rng: &mut SimRng) -> u64 {
    if adj.degree(0) == 0 {
        return 2;
    }
    let mut v = step(adj, 0, rng);
    let mut n = 1;
    while v != 0 {
        v = step(adj, v, rng);
        n += 1;
    }
    n
}

/// Exit time through one of two extra leaves attached to the root.
pub fn sample_sigma_tilde(adj: &Adjacency, rng: &mut SimRng) -> u64 {
    sample_sigma_tilde_capped(adj, u64::MAX, rng).expect("uncapped")
}

/// As [`sample_sigma_tilde`], giving up (`None`) after `cap` steps.
pub fn sample_sigma_tilde_capped(adj: &Adjacency, cap: u64, rng: &mut SimRng) -> Option<u64> {
    let root_deg = adj.degree(0) as u32;
    let mut v = 0u32;
    let mut n = 0u64;
    loop {
        if n == cap {
            return None;
        }
        n += 1;
        if v == 0 {
            let i = rng.random_range(0..root_deg + 2);
            if i >= root_deg {
                return Some(n);
            }
            v = adj.neighbours(0)[i as usize];
        } else {
            v = step(adj, v, rng);
        }
    }
}

/// `E[sigma_tilde]` by eliminating the first-passage system from the leaves
/// up: every non-root vertex satisfies `E_v = a_v + b_v E_parent`.
pub fn expected_exit_time_exact(tree: &OrderedRootedTree) -> f64 {
    let n = tree.vertex_count();
    let mut a = vec![0.0f64; n];
    let mut b = vec![0.0f64; n];
    // children have larger preorder ids than their parent
    for v in (0..n).rev() {
        let kids = tree.children(v);
        let d = (kids.len() + if v == 0 { 2 } else { 1 }) as f64;
        let sa: f64 = kids.iter().map(|&c| a[c as usize]).sum();
        let sb: f64 = kids.iter().map(|&c| b[c as usize]).sum();
        let denom = 1.0 - sb / d;
        a[v] = (1.0 + sa / d) / denom;
        b[v] = if v == 0 { 0.0 } else { 1.0 / d / denom };
    }
    a[0]
}

/// `E[sigma] = 2 (n - 1) / deg(root)`, the stationary-measure identity.
pub fn expected_return_time_exact(tree: &OrderedRootedTree) -> f64 {
    let n = tree.vertex_count();
    if n == 1 {
        return 2.0;
    }
    2.0 * (n - 1) as f64 / tree.child_count(0) as f64
}
