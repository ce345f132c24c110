use super::WalkPath;
use crate::error::{Error, Result};
use crate::tree::{ReducedSubtreeIndex, NONE};

/// A map from host-tree vertices to the index set of a projected walk.
pub trait Projection {
    fn project_vertex(&self, v: usize) -> Option<u32>;
}

/// Projection onto the members of a reduced subtree.
impl Projection for ReducedSubtreeIndex {
    fn project_vertex(&self, v: usize) -> Option<u32> {
        self.projection.get(v).copied()
    }
}

/// An explicit map such as the backbone index `Phi`; `u32::MAX` marks
/// uncovered vertices.
impl Projection for [u32] {
    fn project_vertex(&self, v: usize) -> Option<u32> {
        self.get(v).copied().filter(|&x| x != NONE)
    }
}

impl Projection for Vec<u32> {
    fn project_vertex(&self, v: usize) -> Option<u32> {
        self.as_slice().project_vertex(v)
    }
}

/// The projected trajectory at integer times.
pub fn project_walk<P: Projection + ?Sized>(path: &WalkPath, index: &P) -> Result<Vec<u32>> {
    path.vertices
        .iter()
        .map(|&v| index.project_vertex(v as usize).ok_or(Error::Uncovered(v as usize)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infinite::build_iic;
    use crate::rng::rng_from_seed;
    use crate::tree::{reduce, OrderedRootedTree};
    use crate::walk::walk;

    #[test]
    fn confined_walk_is_constant() {
        let mut rng = rng_from_seed(1);
        let iic = build_iic(3, 100, &mut rng).unwrap();
        let (t, phi) = iic.materialize();
        // a walk that never leaves the root's branch: vertices with phi = 0 only
        let branch0: Vec<u32> = (0..t.vertex_count() as u32).filter(|&v| phi[v as usize] == 0).collect();
        let path = WalkPath {
            vertices: branch0.clone(),
        };
        assert!(project_walk(&path, &phi).unwrap().iter().all(|&x| x == 0));
    }

    #[test]
    fn backbone_walk_is_identity() {
        let t = OrderedRootedTree::path(6).unwrap();
        let phi: Vec<u32> = (0..6).collect();
        let path = WalkPath {
            vertices: vec![0, 1, 2, 3, 2, 3, 4],
        };
        assert_eq!(project_walk(&path, &phi).unwrap(), vec![0, 1, 2, 3, 2, 3, 4]);
        let idx = reduce(&t, &[5]).unwrap();
        assert_eq!(project_walk(&path, &idx).unwrap(), vec![0, 1, 2, 3, 2, 3, 4]);
    }

    #[test]
    fn uncovered_vertex() {
        let path = WalkPath {
            vertices: vec![0, 1, 2],
        };
        let phi = vec![0u32, 1];
        assert!(matches!(project_walk(&path, &phi), Err(Error::Uncovered(2))));
        let holes = vec![0u32, NONE, 1];
        assert!(matches!(project_walk(&path, &holes), Err(Error::Uncovered(1))));
    }

    #[test]
    fn reduced_projection_of_random_walk() {
        let t = OrderedRootedTree::from_parens("((()())(()))").unwrap();
        let idx = reduce(&t, &[2]).unwrap();
        let p = walk(&t.adjacency(), 500, &mut rng_from_seed(2));
        for (&v, &x) in p.vertices.iter().zip(&project_walk(&p, &idx).unwrap()) {
            assert_eq!(x as usize, idx.project(v as usize));
            assert!(idx.member[x as usize]);
        }
    }
}
