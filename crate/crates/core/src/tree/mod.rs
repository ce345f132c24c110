//! Finite ordered rooted trees.
//!
//! Vertex ids are always the depth-first (preorder) discovery order, so the
//! root is `0`, every parent id is smaller than its children's ids, and the
//! subtree of `v` is the contiguous id range `v..v + subtree_size(v)`.

mod codec;
mod reduce;

pub use codec::{search_depth, tree_from_search_depth, SearchDepthCurve};
pub use reduce::{graph_distance, reduce, ReducedSubtreeIndex};

use crate::error::{Error, Result};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedRootedTree {
    parent: Vec<u32>,
    child_start: Vec<u32>,
    children: Vec<u32>,
    depth: Vec<u32>,
}

impl OrderedRootedTree {
    /// The one-vertex tree.
    pub fn single() -> Self {
        Self::from_preorder_degrees(&[0]).expect("valid")
    }

    /// A path `0 - 1 - ... - (n-1)` rooted at an end.
    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("path needs n >= 1".into()));
        }
        let mut d = vec![1usize; n];
        d[n - 1] = 0;
        Self::from_preorder_degrees(&d)
    }

    /// Root with `k` leaf children.
    pub fn star(k: usize) -> Self {
        let mut d = vec![0usize; k + 1];
        d[0] = k;
        Self::from_preorder_degrees(&d).expect("valid")
    }

    /// Builds a tree from child counts listed in preorder (a Lukasiewicz word).
    pub fn from_preorder_degrees(degrees: &[usize]) -> Result<Self> {
        let n = degrees.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty degree sequence".into()));
        }
        if n > u32::MAX as usize - 1 {
            return Err(Error::InvalidArgument("tree too large".into()));
        }
        let mut parent = vec![NONE; n];
        let mut depth = vec![0u32; n];
        let mut child_count = vec![0u32; n];
        // stack of (vertex, remaining child slots)
        let mut stack: Vec<(u32, usize)> = Vec::new();
        for (v, &d) in degrees.iter().enumerate() {
            if v > 0 {
                let top = match stack.last_mut() {
                    Some(t) => t,
                    None => return Err(Error::InvalidArgument("degree sequence closes before the end".into())),
                };
                let p = top.0;
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
                parent[v] = p;
                depth[v] = depth[p as usize] + 1;
                child_count[p as usize] += 1;
            }
            if d > 0 {
                stack.push((v as u32, d));
            }
        }
        if !stack.is_empty() {
            return Err(Error::InvalidArgument("degree sequence leaves open child slots".into()));
        }
        let mut child_start = vec![0u32; n + 1];
        for v in 0..n {
            child_start[v + 1] = child_start[v] + child_count[v];
        }
        let mut fill = child_start.clone();
        let mut children = vec![0u32; n - 1];
        for v in 1..n {
            let p = parent[v] as usize;
            children[fill[p] as usize] = v as u32;
            fill[p] += 1;
        }
        Ok(OrderedRootedTree {
            parent,
            child_start,
            children,
            depth,
        })
    }

    /// Builds a tree from arbitrary ids and ordered child lists, relabelling
    /// to preorder. Returns the tree and the map `old id -> new id`.
    pub fn from_child_lists(children: &[Vec<usize>], root: usize) -> Result<(Self, Vec<usize>)> {
        let n = children.len();
        if root >= n {
            return Err(Error::InvalidVertex(root));
        }
        let mut new_id = vec![usize::MAX; n];
        let mut degrees = Vec::with_capacity(n);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if new_id[v] != usize::MAX {
                return Err(Error::InvalidArgument(format!("vertex {v} reached twice")));
            }
            new_id[v] = degrees.len();
            degrees.push(children[v].len());
            for &c in children[v].iter().rev() {
                if c >= n {
                    return Err(Error::InvalidVertex(c));
                }
                stack.push(c);
            }
        }
        if degrees.len() != n {
            return Err(Error::InvalidArgument("child lists are not connected".into()));
        }
        Ok((Self::from_preorder_degrees(&degrees)?, new_id))
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NONE => None,
            p => Some(p as usize),
        }
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.children[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }

    pub fn child_count(&self, v: usize) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    /// Number of neighbours of `v` inside the tree.
    pub fn degree(&self, v: usize) -> usize {
        self.child_count(v) + usize::from(v != 0)
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.vertex_count()
    }

    /// Child counts in preorder.
    pub fn preorder_degrees(&self) -> Vec<usize> {
        (0..self.vertex_count()).map(|v| self.child_count(v)).collect()
    }

    /// Sizes of all subtrees, indexed by vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut size = vec![1usize; n];
        for v in (1..n).rev() {
            size[self.parent[v] as usize] += size[v];
        }
        size
    }

    /// Balanced-parenthesis encoding: `(` on entering a vertex, `)` on leaving.
    pub fn to_parens(&self) -> String {
        let n = self.vertex_count();
        let mut out = String::with_capacity(2 * n);
        let mut open: Vec<usize> = Vec::new();
        for v in 0..n {
            let d = self.depth(v);
            while open.len() > d {
                open.pop();
                out.push(')');
            }
            out.push('(');
            open.push(v);
        }
        while open.pop().is_some() {
            out.push(')');
        }
        out
    }

    pub fn from_parens(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        if bytes.is_empty() || bytes[0] != b'(' {
            return Err(Error::InvalidEncoding("must start with '('".into()));
        }
        let mut degrees: Vec<usize> = Vec::with_capacity(bytes.len() / 2);
        let mut open: Vec<usize> = Vec::new();
        for (i, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => {
                    if let Some(&p) = open.last() {
                        degrees[p] += 1;
                    } else if i > 0 {
                        return Err(Error::InvalidEncoding("more than one root".into()));
                    }
                    open.push(degrees.len());
                    degrees.push(0);
                }
                b')' => {
                    if open.pop().is_none() {
                        return Err(Error::InvalidEncoding(format!("unbalanced at {i}")));
                    }
                }
                _ => return Err(Error::InvalidEncoding(format!("bad byte at {i}"))),
            }
        }
        if !open.is_empty() {
            return Err(Error::InvalidEncoding("unclosed '('".into()));
        }
        Self::from_preorder_degrees(&degrees)
    }

    /// Neighbour lists (parent first, then children) for walk simulation.
    pub fn adjacency(&self) -> Adjacency {
        let n = self.vertex_count();
        let mut start = Vec::with_capacity(n + 1);
        let mut nbrs = Vec::with_capacity(2 * n);
        start.push(0u32);
        for v in 0..n {
            if v != 0 {
                nbrs.push(self.parent[v]);
            }
            nbrs.extend_from_slice(self.children(v));
            start.push(nbrs.len() as u32);
        }
        Adjacency { start, nbrs }
    }
}

/// Compressed neighbour lists of a tree.
#[derive(Clone, Debug)]
pub struct Adjacency {
    start: Vec<u32>,
    nbrs: Vec<u32>,
}

impl Adjacency {
    #[inline]
    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.nbrs[self.start[v] as usize..self.start[v + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        (self.start[v + 1] - self.start[v]) as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.start.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_agree() {
        let cherry = OrderedRootedTree::star(2);
        assert_eq!(cherry.to_parens(), "(()())");
        assert_eq!(OrderedRootedTree::from_parens("(()())").unwrap(), cherry);
        let p = OrderedRootedTree::path(3).unwrap();
        assert_eq!(p.to_parens(), "((()))");
        assert_eq!(p.height(), 2);
        assert_eq!(p.parent(2), Some(1));
        assert_eq!(p.parent(0), None);
    }

    #[test]
    fn relabels_to_preorder() {
        // root 3 with children [1, 0]; 1 has child 2
        let lists = vec![vec![], vec![2], vec![], vec![1, 0]];
        let (t, map) = OrderedRootedTree::from_child_lists(&lists, 3).unwrap();
        assert_eq!(map, vec![3, 1, 2, 0]);
        assert_eq!(t.to_parens(), "((())())");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(OrderedRootedTree::from_preorder_degrees(&[2, 0]).is_err());
        assert!(OrderedRootedTree::from_preorder_degrees(&[0, 0]).is_err());
        assert!(OrderedRootedTree::from_parens("()()").is_err());
        assert!(OrderedRootedTree::from_parens("(()").is_err());
        assert!(OrderedRootedTree::from_parens("").is_err());
        let cyclic = vec![vec![1], vec![0]];
        assert!(OrderedRootedTree::from_child_lists(&cyclic, 0).is_err());
    }

    #[test]
    fn subtree_sizes_and_adjacency() {
        let t = OrderedRootedTree::from_parens("((())())").unwrap();
        assert_eq!(t.subtree_sizes(), vec![4, 2, 1, 1]);
        let a = t.adjacency();
        assert_eq!(a.neighbours(0), &[1, 3]);
        assert_eq!(a.neighbours(1), &[0, 2]);
        assert_eq!(a.degree(3), 1);
        assert_eq!(t.degree(0), 2);
    }
}
