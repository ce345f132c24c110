use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::SimRng;

/// Reflected simple random walk on `{0, dx, 2 dx, ...}` with time step
/// `dx^2`; a surrogate for reflected Brownian motion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeReflectedPath {
    pub grid_step: f64,
    /// Site index at each step `k = 0..=steps`.
    pub sites: Vec<u32>,
}

impl LatticeReflectedPath {
    pub fn time_step(&self) -> f64 {
        self.grid_step * self.grid_step
    }

    pub fn steps(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn position(&self, k: usize) -> f64 {
        self.sites[k] as f64 * self.grid_step
    }

    /// `dx` times the number of visits to `site` during steps `0..k`.
    pub fn local_time(&self, site: u32, k: usize) -> f64 {
        self.grid_step * self.sites[..k].iter().filter(|&&s| s == site).count() as f64
    }

    /// Local times of every site at the final time.
    pub fn local_time_field(&self) -> Vec<f64> {
        let top = self.sites.iter().copied().max().unwrap_or(0) as usize;
        let mut field = vec![0.0; top + 1];
        for &s in &self.sites[..self.steps()] {
            field[s as usize] += self.grid_step;
        }
        field
    }
}

/// Streams the reflected walk: from 0 always to 1, elsewhere up or down
/// with probability 1/2.
pub(crate) struct ReflectedWalker {
    pub site: u32,
    bits: u64,
    left: u32,
}

impl ReflectedWalker {
    pub fn new() -> Self {
        ReflectedWalker {
            site: 0,
            bits: 0,
            left: 0,
        }
    }

    #[inline]
    pub fn step(&mut self, rng: &mut SimRng) -> u32 {
        if self.site == 0 {
            self.site = 1;
            return 1;
        }
        if self.left == 0 {
            self.bits = rng.next_u64();
            self.left = 64;
        }
        let up = self.bits & 1 == 1;
        self.bits >>= 1;
        self.left -= 1;
        self.site = if up { self.site + 1 } else { self.site - 1 };
        self.site
    }
}

pub fn reflected_lattice_bm(grid_step: f64, horizon: f64, rng: &mut SimRng) -> Result<LatticeReflectedPath> {
    if !(grid_step > 0.0) || !(horizon >= 0.0) {
        return invalid("need a positive grid step and a nonnegative horizon");
    }
    let steps = (horizon / (grid_step * grid_step)).round() as usize;
    let mut walker = ReflectedWalker::new();
    let mut sites = Vec::with_capacity(steps + 1);
    sites.push(0);
    for _ in 0..steps {
        sites.push(walker.step(rng));
    }
    Ok(LatticeReflectedPath { grid_step, sites })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn occupation_identity_and_reflection() {
        let dx = 0.05;
        let p = reflected_lattice_bm(dx, 2.0, &mut rng_from_seed(1)).unwrap();
        assert_eq!(p.steps(), 800);
        let occupied: f64 = p.local_time_field().iter().map(|l| l * dx).sum();
        assert!((occupied - 2.0).abs() < 1e-9);
        assert!(p.sites.windows(2).all(|w| w[0].abs_diff(w[1]) == 1));
        assert_eq!(*p.sites.iter().min().unwrap(), 0);
        assert!(p.position(p.steps()) >= 0.0);
        assert!((p.local_time(0, p.steps()) - p.local_time_field()[0]).abs() < 1e-12);
    }

    #[test]
    fn origin_local_time_mean() {
        let mut rng = rng_from_seed(2);
        let runs = 4000;
        let mean = (0..runs)
            .map(|_| {
                let p = reflected_lattice_bm(0.01, 1.0, &mut rng).unwrap();
                p.local_time(0, p.steps())
            })
            .sum::<f64>()
            / runs as f64;
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean / target - 1.0).abs() < 0.15, "{mean}");
    }
}
