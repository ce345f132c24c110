//! Simple random walks on finite trees, root local times, exit times and
//! the randomly trapped random walk on the integers.

mod exit;
mod project;
mod rtrw;

pub use exit::{
    expected_exit_time_exact, expected_return_time_exact, sample_sigma, sample_sigma_tilde, sample_sigma_tilde_capped,
};
pub use project::{project_walk, Projection};
pub use rtrw::{rtrw, ConstantLandscape, Domain, IicLandscape, RTRWTrajectory, SingleTrapLandscape, TrappingLandscape};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::SimRng;
use crate::tree::Adjacency;

/// Vertices visited by a walk, starting at the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkPath {
    pub vertices: Vec<u32>,
}

impl WalkPath {
    pub fn step_count(&self) -> usize {
        self.vertices.len() - 1
    }
}

#[inline]
pub(crate) fn step(adj: &Adjacency, v: u32, rng: &mut SimRng) -> u32 {
    let nb = adj.neighbours(v as usize);
    match nb.len() {
        1 => nb[0],
        d => nb[rng.random_range(0..d as u32) as usize],
    }
}

/// Simple random walk from the root for `steps` steps. The one-vertex tree
/// has no neighbours, so the walk stays put.
pub fn walk(adj: &Adjacency, steps: usize, rng: &mut SimRng) -> WalkPath {
    let mut vertices = Vec::with_capacity(steps + 1);
    vertices.push(0);
    let mut v = 0u32;
    let isolated = adj.degree(0) == 0;
    for _ in 0..steps {
        if !isolated {
            v = step(adj, v, rng);
        }
        vertices.push(v);
    }
    WalkPath { vertices }
}

/// Number of visits to the root among times `0..=steps`, without storing the path.
pub fn root_local_time(adj: &Adjacency, steps: u64, rng: &mut SimRng) -> u64 {
    if adj.degree(0) == 0 {
        return steps + 1;
    }
    let mut v = 0u32;
    let mut count = 1;
    for _ in 0..steps {
        v = step(adj, v, rng);
        count += u64::from(v == 0);
    }
    count
}

/// `samples[t]` is the number of root visits among times `0..=t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalTimeCurve {
    pub samples: Vec<u64>,
}

impl LocalTimeCurve {
    /// `min { s : l_s > t }`, or `None` if the curve never exceeds `t`.
    pub fn inverse(&self, t: u64) -> Option<usize> {
        let s = self.samples.partition_point(|&l| l <= t);
        (s < self.samples.len()).then_some(s)
    }
}

pub fn local_time_root(path: &WalkPath) -> LocalTimeCurve {
    let mut count = 0;
    let samples = path
        .vertices
        .iter()
        .map(|&v| {
            count += u64::from(v == 0);
            count
        })
        .collect();
    LocalTimeCurve { samples }
}
