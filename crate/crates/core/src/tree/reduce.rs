use super::OrderedRootedTree;
use crate::error::{Error, Result};

/// Members of a reduced subtree (union of root-to-anchor paths) and the
/// nearest-member projection of every vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedSubtreeIndex {
    pub member: Vec<bool>,
    pub projection: Vec<u32>,
}

impl ReducedSubtreeIndex {
    pub fn project(&self, v: usize) -> usize {
        self.projection[v] as usize
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.member.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v)
    }

    pub fn member_count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }
}

pub fn reduce(tree: &OrderedRootedTree, anchors: &[usize]) -> Result<ReducedSubtreeIndex> {
    if anchors.is_empty() {
        return Err(Error::EmptyAnchors);
    }
    let n = tree.vertex_count();
    let mut member = vec![false; n];
    member[0] = true;
    for &a in anchors {
        if a >= n {
            return Err(Error::InvalidVertex(a));
        }
        let mut v = a;
        while !member[v] {
            member[v] = true;
            v = tree.parent(v).expect("non-root has a parent");
        }
    }
    // parents precede children in preorder
    let mut projection = vec![0u32; n];
    for v in 1..n {
        projection[v] = if member[v] {
            v as u32
        } else {
            projection[tree.parent(v).unwrap()]
        };
    }
    Ok(ReducedSubtreeIndex { member, projection })
}

pub fn graph_distance(tree: &OrderedRootedTree, u: usize, v: usize) -> Result<usize> {
    for x in [u, v] {
        if !tree.contains(x) {
            return Err(Error::InvalidVertex(x));
        }
    }
    let (mut a, mut b) = (u, v);
    let mut dist = 0;
    while tree.depth(a) > tree.depth(b) {
        a = tree.parent(a).unwrap();
        dist += 1;
    }
    while tree.depth(b) > tree.depth(a) {
        b = tree.parent(b).unwrap();
        dist += 1;
    }
    while a != b {
        a = tree.parent(a).unwrap();
        b = tree.parent(b).unwrap();
        dist += 2;
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_anchor() {
        let t = OrderedRootedTree::from_parens("((())())").unwrap();
        let r = reduce(&t, &[0]).unwrap();
        assert_eq!(r.member_count(), 1);
        assert!(r.projection.iter().all(|&p| p == 0));
    }

    #[test]
    fn path_middle_anchor() {
        let t = OrderedRootedTree::path(3).unwrap();
        let r = reduce(&t, &[1]).unwrap();
        assert_eq!(r.members().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(r.project(2), 1);
    }

    #[test]
    fn cherry_left_anchor() {
        let t = OrderedRootedTree::star(2);
        let r = reduce(&t, &[1]).unwrap();
        assert_eq!(r.project(2), 0);
        assert_eq!(r.project(1), 1);
    }

    #[test]
    fn errors() {
        let t = OrderedRootedTree::star(2);
        assert!(matches!(reduce(&t, &[]), Err(Error::EmptyAnchors)));
        assert!(matches!(reduce(&t, &[5]), Err(Error::InvalidVertex(5))));
        assert!(graph_distance(&t, 0, 9).is_err());
    }

    #[test]
    fn distances() {
        let t = OrderedRootedTree::star(2);
        assert_eq!(graph_distance(&t, 0, 0).unwrap(), 0);
        assert_eq!(graph_distance(&t, 1, 2).unwrap(), 2);
        let p = OrderedRootedTree::path(3).unwrap();
        assert_eq!(graph_distance(&p, 0, 2).unwrap(), 2);
        assert_eq!(graph_distance(&p, 2, 0).unwrap(), 2);
    }
}
