use serde::{Deserialize, Serialize};

use super::skeleton::{MetricTreeSkeleton, SkeletonPoint};
use crate::cluster::sample_forest_sizes;
use crate::error::{invalid, Result};
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassAtom {
    pub point: SkeletonPoint,
    pub mass: f64,
}

/// Unit-mass atomic measure on a metric skeleton.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeMassMeasure {
    pub atoms: Vec<MassAtom>,
}

impl TreeMassMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Atoms at or above `cut`, and the summed mass of the rest.
    pub fn split_at(&self, cut: f64) -> (Vec<MassAtom>, f64) {
        let big: Vec<MassAtom> = self.atoms.iter().copied().filter(|a| a.mass >= cut).collect();
        let small = self.atoms.iter().filter(|a| a.mass < cut).map(|a| a.mass).sum();
        (big, small)
    }
}

/// Hanging-branch masses along a skeleton, from the discrete picture of a
/// uniform `n`-vertex tree with the skeleton as its reduced subtree.
///
/// The skeleton of total length `C` becomes `L = round(C sqrt(n))` evenly
/// spaced vertices; the rest of the tree is a Poisson(1) Galton-Watson forest
/// of `L` trees conditioned on `n` vertices in total, one tree per skeleton
/// vertex. Masses are the tree sizes divided by `n`.
pub fn sample_branch_mass_measure(
    skeleton: &MetricTreeSkeleton,
    n: usize,
    rng: &mut SimRng,
) -> Result<TreeMassMeasure> {
    skeleton.validate()?;
    if skeleton.leaf_count() == 0 {
        return invalid("skeleton has no leaves");
    }
    if n == 0 {
        return invalid("resolution must be positive");
    }
    let c = skeleton.total_length();
    let l = ((c * (n as f64).sqrt()).round() as usize).clamp(1, n);
    let sizes = sample_forest_sizes(l, n, rng)?;
    let edges = skeleton.edges();
    let mut atoms = Vec::with_capacity(l);
    let (mut e, mut acc) = (0usize, 0.0);
    for (i, &size) in sizes.iter().enumerate() {
        let t = (i as f64 + 0.5) * c / l as f64;
        while e + 1 < edges.len() && t >= acc + edges[e].2 {
            acc += edges[e].2;
            e += 1;
        }
        let offset = (t - acc).clamp(0.0, edges[e].2);
        atoms.push(MassAtom {
            point: SkeletonPoint {
                edge: edges[e].1,
                offset,
            },
            mass: size as f64 / n as f64,
        });
    }
    Ok(TreeMassMeasure { atoms })
}
