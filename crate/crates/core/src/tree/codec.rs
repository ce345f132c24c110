use super::OrderedRootedTree;
use crate::error::{Error, Result};

/// Depth of the depth-first walk around a tree, sampled at `i / 2n`.
///
/// `values` has `2n + 1` entries: a leading `0`, the `2n - 1` depths of the
/// contour walk, and a trailing `0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchDepthCurve {
    pub n: usize,
    pub values: Vec<u32>,
}

impl SearchDepthCurve {
    /// Wraps raw values; validity is checked on decoding.
    pub fn from_values(values: Vec<u32>) -> Self {
        let n = values.len() / 2;
        SearchDepthCurve { n, values }
    }

    /// Curve as a function on `[0, 1]`, rescaled by `scale` (e.g. `n^{-1/2}`).
    pub fn rescaled(&self, scale: f64) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64 * scale).collect()
    }
}

pub fn search_depth(tree: &OrderedRootedTree) -> SearchDepthCurve {
    let n = tree.vertex_count();
    let mut values = Vec::with_capacity(2 * n + 1);
    values.push(0);
    values.push(0);
    // preorder ids: moving to the next vertex means climbing to its parent's depth, then one step down
    for v in 1..n {
        let target = tree.depth(v) as u32;
        let mut d = *values.last().unwrap();
        while d + 1 > target {
            d -= 1;
            values.push(d);
        }
        values.push(target);
    }
    let mut d = *values.last().unwrap();
    while d > 0 {
        d -= 1;
        values.push(d);
    }
    values.push(0);
    SearchDepthCurve { n, values }
}

pub fn tree_from_search_depth(curve: &SearchDepthCurve) -> Result<OrderedRootedTree> {
    let v = &curve.values;
    let len = v.len();
    if len < 3 || len.is_multiple_of(2) {
        return Err(Error::InvalidCurve(format!("length {len} is not 2n+1 with n >= 1")));
    }
    let n = (len - 1) / 2;
    if curve.n != n {
        return Err(Error::InvalidCurve(format!("n = {} but length implies {n}", curve.n)));
    }
    if v[0] != 0 || v[1] != 0 || v[len - 1] != 0 || v[len - 2] != 0 {
        return Err(Error::InvalidCurve("endpoints must be 0".into()));
    }
    let mut degrees = vec![0usize];
    let mut path: Vec<usize> = vec![0];
    for i in 1..len - 2 {
        let (a, b) = (v[i], v[i + 1]);
        if b == a + 1 {
            let parent = *path.last().unwrap();
            degrees[parent] += 1;
            path.push(degrees.len());
            degrees.push(0);
        } else if a > 0 && b == a - 1 {
            path.pop();
        } else {
            return Err(Error::InvalidCurve(format!("step {a} -> {b} at index {i}")));
        }
    }
    if degrees.len() != n {
        return Err(Error::InvalidCurve(format!(
            "curve encodes {} vertices, not {n}",
            degrees.len()
        )));
    }
    OrderedRootedTree::from_preorder_degrees(&degrees)
}
