use serde::{Deserialize, Serialize};

use crate::cluster::{sample_conditioned_cluster, sample_planted_uniform_tree};
use crate::error::{invalid, Result};
use crate::rng::SimRng;
use crate::stoch::{AtomicMeasure, SubordinatorPath};
use crate::tree::Adjacency;
use crate::walk::sample_sigma;

/// A nondecreasing clock `S(u)` that may be extended lazily; calls must come
/// with nondecreasing `u` only when the implementation says so.
pub trait ClockSubordinator {
    fn value(&mut self, u: f64) -> f64;
}

/// Builds one clock per trap from its index, mass and a dedicated stream.
pub trait SubordinatorFactory {
    type Clock: ClockSubordinator;
    fn create(&self, trap: usize, mass: f64, rng: SimRng) -> Self::Clock;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityClock;

impl ClockSubordinator for IdentityClock {
    fn value(&mut self, u: f64) -> f64 {
        u
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityFactory;

impl SubordinatorFactory for IdentityFactory {
    type Clock = IdentityClock;
    fn create(&self, _: usize, _: f64, _: SimRng) -> IdentityClock {
        IdentityClock
    }
}

/// Trees whose root inverse local time drives a trap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeFamily {
    /// Critical `T*` cluster conditioned on its size.
    CriticalBinary,
    /// Root of degree one above a uniform tree.
    PlantedUniform,
}

impl TreeFamily {
    fn sample(self, m: usize, rng: &mut SimRng) -> Result<Adjacency> {
        Ok(match self {
            TreeFamily::CriticalBinary => sample_conditioned_cluster(m, rng)?,
            TreeFamily::PlantedUniform => sample_planted_uniform_tree(m, rng)?,
        }
        .adjacency())
    }
}

/// `S(u) = m^{-3/2} tau(floor(m^{1/2} u / 2))`, where `tau(r)` is the time of
/// the `r`-th return to the root of a walk on an `m`-vertex tree. The tree
/// is drawn on first use and returns are generated on demand.
pub struct CrtInverseLocalTime {
    m: usize,
    family: TreeFamily,
    adj: Option<Adjacency>,
    returns: Vec<u64>,
    rng: SimRng,
}

impl CrtInverseLocalTime {
    pub fn new(m: usize, family: TreeFamily, rng: SimRng) -> Result<Self> {
        if m == 0 {
            return invalid("trap tree needs at least one vertex");
        }
        Ok(CrtInverseLocalTime {
            m,
            family,
            adj: None,
            returns: vec![0],
            rng,
        })
    }

    pub fn tree_size(&self) -> usize {
        self.m
    }

    /// Time of the `r`-th return to the root.
    pub fn return_time(&mut self, r: usize) -> u64 {
        if self.adj.is_none() {
            self.adj = Some(self.family.sample(self.m, &mut self.rng).expect("m >= 1"));
        }
        let adj = self.adj.as_ref().unwrap();
        while self.returns.len() <= r {
            let last = *self.returns.last().unwrap();
            self.returns.push(last + sample_sigma(adj, &mut self.rng));
        }
        self.returns[r]
    }

    /// Largest `r` with `u_r = r * (2 / m^{1/2}) <= u`, computed the same way
    /// as the jump locations of the sampled path.
    fn excursions_at(&self, u: f64) -> usize {
        let step = 2.0 / (self.m as f64).sqrt();
        let mut r = (u / step).floor().max(0.0) as usize;
        while (r + 1) as f64 * step <= u {
            r += 1;
        }
        while r > 0 && r as f64 * step > u {
            r -= 1;
        }
        r
    }
}

impl ClockSubordinator for CrtInverseLocalTime {
    fn value(&mut self, u: f64) -> f64 {
        let r = self.excursions_at(u);
        self.return_time(r) as f64 / (self.m as f64).powf(1.5)
    }
}

/// How large a trap's tree is.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrapSize {
    Fixed(usize),
    /// `round(mass * resolution)` clamped to `[min, max]`.
    Proportional {
        resolution: f64,
        min: usize,
        max: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrtFactory {
    pub family: TreeFamily,
    pub size: TrapSize,
}

impl SubordinatorFactory for CrtFactory {
    type Clock = CrtInverseLocalTime;
    fn create(&self, _: usize, mass: f64, rng: SimRng) -> CrtInverseLocalTime {
        let m = match self.size {
            TrapSize::Fixed(m) => m,
            TrapSize::Proportional { resolution, min, max } => ((mass * resolution).round() as usize).clamp(min, max),
        };
        CrtInverseLocalTime::new(m.max(1), self.family, rng).expect("m >= 1")
    }
}

/// The rescaled inverse local time on `[0, u_max]` as a step path with a
/// jump at every `u_r = 2 r / m^{1/2}`.
pub fn crt_inverse_local_time_sampler(
    m: usize,
    family: TreeFamily,
    u_max: f64,
    rng: SimRng,
) -> Result<SubordinatorPath> {
    if !(u_max >= 0.0) {
        return invalid("horizon must be nonnegative");
    }
    let mut clock = CrtInverseLocalTime::new(m, family, rng)?;
    let r_max = clock.excursions_at(u_max);
    let scale = (m as f64).powf(-1.5);
    let step = 2.0 / (m as f64).sqrt();
    let mut atoms = Vec::with_capacity(r_max);
    for r in 1..=r_max {
        let jump = (clock.return_time(r) - clock.return_time(r - 1)) as f64 * scale;
        atoms.push((r as f64 * step, jump));
    }
    SubordinatorPath::new(0.0, AtomicMeasure::from_atoms(atoms)?, u_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::stats::ks_two_sample;
    use crate::rng::{rng_from_seed, SeedStream};

    #[test]
    fn starts_at_zero_and_increases() {
        let p = crt_inverse_local_time_sampler(1000, TreeFamily::CriticalBinary, 3.0, rng_from_seed(1)).unwrap();
        assert_eq!(p.value(0.0), 0.0);
        let mut last = 0.0;
        for i in 0..=300 {
            let v = p.value(i as f64 * 0.01);
            assert!(v >= last);
            last = v;
        }
        assert_eq!(p.jumps.len(), (1000f64.sqrt() * 1.5).floor() as usize);
    }

    #[test]
    fn lazy_clock_matches_path() {
        let p = crt_inverse_local_time_sampler(400, TreeFamily::PlantedUniform, 2.0, rng_from_seed(2)).unwrap();
        let mut c = CrtInverseLocalTime::new(400, TreeFamily::PlantedUniform, rng_from_seed(2)).unwrap();
        for u in [0.0, 0.05, 0.1, 0.5, 1.0, 1.7, 2.0] {
            assert!((c.value(u) - p.value(u)).abs() < 1e-12, "{u}");
        }
    }

    #[test]
    fn unit_mean_rate() {
        let s = SeedStream::new(3, "unit-rate");
        let runs = 2000;
        let m = 200;
        let xs: Vec<f64> = (0..runs)
            .map(|i| {
                CrtInverseLocalTime::new(m, TreeFamily::PlantedUniform, s.rng(i))
                    .unwrap()
                    .value(1.0)
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / runs as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
        // E S(u) = m^{-3/2} floor(m^{1/2} u / 2) 2 (m - 1)
        let r = ((m as f64).sqrt() / 2.0).floor();
        let exact = r * 2.0 * (m - 1) as f64 / (m as f64).powf(1.5);
        assert!(
            (mean - exact).abs() < 3.0 * sd / (runs as f64).sqrt(),
            "{mean} vs {exact}"
        );
    }

    #[test]
    fn law_stabilises_across_doublings() {
        let s = SeedStream::new(4, "doubling");
        let sample = |m: usize, label: &str| -> Vec<f64> {
            let st = s.child(label);
            (0..3000)
                .map(|i| {
                    CrtInverseLocalTime::new(m, TreeFamily::CriticalBinary, st.rng(i))
                        .unwrap()
                        .value(1.0)
                })
                .collect()
        };
        let a = sample(250, "a");
        let b = sample(500, "b");
        let c = sample(1000, "c");
        let d = sample(2000, "d");
        let d1 = ks_two_sample(&a, &b).unwrap().distance;
        let d2 = ks_two_sample(&c, &d).unwrap().distance;
        assert!(d2 < d1 + 0.02, "{d1} {d2}");
    }

    #[test]
    fn factory_sizes() {
        let f = CrtFactory {
            family: TreeFamily::PlantedUniform,
            size: TrapSize::Proportional {
                resolution: 1000.0,
                min: 5,
                max: 50,
            },
        };
        assert_eq!(f.create(0, 0.001, rng_from_seed(0)).tree_size(), 5);
        assert_eq!(f.create(0, 0.02, rng_from_seed(0)).tree_size(), 20);
        assert_eq!(f.create(0, 1.0, rng_from_seed(0)).tree_size(), 50);
        assert_eq!(IdentityFactory.create(0, 1.0, rng_from_seed(0)).value(0.3), 0.3);
    }
}
