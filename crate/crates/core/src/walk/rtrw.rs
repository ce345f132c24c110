use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSize;
use crate::error::{invalid, Result};
use crate::rng::SimRng;
use crate::tree::NONE;

/// Site-indexed holding-time laws `pi_x` of a trapped walk.
pub trait TrappingLandscape {
    /// One holding time at `site`. Landscapes that simulate the holding
    /// time may return `None` once it is known to exceed `cap`.
    fn sample_holding(&mut self, site: i64, cap: f64, rng: &mut SimRng) -> Option<f64>;

    /// Mean `m(pi_x)` when it is finite and computable.
    fn mean_depth(&mut self, site: i64, rng: &mut SimRng) -> Option<f64>;
}

/// `pi_x = delta_c` at every site.
#[derive(Clone, Copy, Debug)]
pub struct ConstantLandscape(pub f64);

impl TrappingLandscape for ConstantLandscape {
    fn sample_holding(&mut self, _: i64, _: f64, _: &mut SimRng) -> Option<f64> {
        Some(self.0)
    }

    fn mean_depth(&mut self, _: i64, _: &mut SimRng) -> Option<f64> {
        Some(self.0)
    }
}

/// Holding `depth` at `site`, `1` elsewhere.
#[derive(Clone, Copy, Debug)]
pub struct SingleTrapLandscape {
    pub site: i64,
    pub depth: f64,
}

impl TrappingLandscape for SingleTrapLandscape {
    fn sample_holding(&mut self, site: i64, _: f64, _: &mut SimRng) -> Option<f64> {
        Some(if site == self.site { self.depth } else { 1.0 })
    }

    fn mean_depth(&mut self, site: i64, _: &mut SimRng) -> Option<f64> {
        Some(if site == self.site { self.depth } else { 1.0 })
    }
}

/// A critical `T*` cluster whose vertices are sampled when first visited.
#[derive(Clone, Debug)]
struct LazyBranch {
    nbr: Vec<[u32; 3]>,
    deg: Vec<u8>,
    expanded: Vec<bool>,
}

impl Default for LazyBranch {
    fn default() -> Self {
        LazyBranch {
            nbr: vec![[NONE; 3]],
            deg: vec![0],
            expanded: vec![false],
        }
    }
}

impl LazyBranch {
    fn expand(&mut self, v: u32, rng: &mut SimRng) {
        let vi = v as usize;
        self.expanded[vi] = true;
        let slots = if v == 0 { 1 } else { 2 };
        let bits = rng.random::<u32>();
        for i in 0..slots {
            if bits >> i & 1 == 1 {
                let c = self.deg.len() as u32;
                self.nbr.push([v, NONE, NONE]);
                self.deg.push(1);
                self.expanded.push(false);
                let d = self.deg[vi] as usize;
                self.nbr[vi][d] = c;
                self.deg[vi] += 1;
            }
        }
    }

    /// Steps until the walk leaves through one of `exits` extra root edges.
    fn exit_time(&mut self, exits: u32, cap: u64, rng: &mut SimRng) -> Option<u64> {
        let mut v = 0u32;
        let mut n = 0u64;
        loop {
            if n == cap {
                return None;
            }
            n += 1;
            if !self.expanded[v as usize] {
                self.expand(v, rng);
            }
            let d = self.deg[v as usize] as u32;
            if v == 0 {
                let i = rng.random_range(0..d + exits);
                if i >= d {
                    return Some(n);
                }
                v = self.nbr[0][i as usize];
            } else {
                v = self.nbr[v as usize][if d == 1 { 0 } else { rng.random_range(0..d) as usize }];
            }
        }
    }

    fn size(&mut self, cap: usize, rng: &mut SimRng) -> ClusterSize {
        let mut stack = vec![0u32];
        while let Some(v) = stack.pop() {
            if !self.expanded[v as usize] {
                if self.deg.len() >= cap {
                    return ClusterSize::AtLeast(self.deg.len());
                }
                self.expand(v, rng);
            }
            let start = usize::from(v != 0);
            stack.extend_from_slice(&self.nbr[v as usize][start..self.deg[v as usize] as usize]);
        }
        ClusterSize::Finite(self.deg.len())
    }
}

/// The IIC landscape `nu_tilde[B_x]`: every site owns an independent
/// critical branch, grown lazily and kept for the whole trajectory, and
/// every visit runs a fresh exit experiment on it.
///
/// At site `0` of the half-line the branch root has a single exit (towards
/// site `1`), matching the walk on the one-sided IIC.
#[derive(Clone, Debug, Default)]
pub struct IicLandscape {
    branches: HashMap<i64, LazyBranch>,
    half_line: bool,
    size_cap: usize,
    cache: Option<usize>,
    pools: HashMap<i64, Vec<f64>>,
}

impl IicLandscape {
    /// `size_cap` bounds the exploration done by [`TrappingLandscape::mean_depth`].
    pub fn new(half_line: bool, size_cap: usize) -> Self {
        IicLandscape {
            half_line,
            size_cap,
            ..Default::default()
        }
    }

    /// Approximate mode: each site draws `pool` exit times once and then
    /// resamples them uniformly.
    pub fn with_sample_cache(mut self, pool: usize) -> Self {
        self.cache = Some(pool.max(1));
        self
    }

    fn exits(&self, site: i64) -> u32 {
        if self.half_line && site == 0 {
            1
        } else {
            2
        }
    }

    /// Size of the branch at `site`, exploring at most `cap` vertices.
    pub fn branch_size(&mut self, site: i64, cap: usize, rng: &mut SimRng) -> ClusterSize {
        self.branches.entry(site).or_default().size(cap, rng)
    }
}

impl TrappingLandscape for IicLandscape {
    fn sample_holding(&mut self, site: i64, cap: f64, rng: &mut SimRng) -> Option<f64> {
        let exits = self.exits(site);
        let branch = self.branches.entry(site).or_default();
        if let Some(pool) = self.cache {
            let samples = self.pools.entry(site).or_insert_with(|| {
                (0..pool)
                    .map(|_| branch.exit_time(exits, u64::MAX, rng).unwrap() as f64)
                    .collect()
            });
            return Some(samples[rng.random_range(0..samples.len())]);
        }
        let cap = if cap >= u64::MAX as f64 {
            u64::MAX
        } else {
            cap.floor().max(0.0) as u64
        };
        branch.exit_time(exits, cap, rng).map(|n| n as f64)
    }

    fn mean_depth(&mut self, site: i64, rng: &mut SimRng) -> Option<f64> {
        if self.exits(site) != 2 {
            return None;
        }
        match self.branch_size(site, self.size_cap, rng) {
            ClusterSize::Finite(n) => Some(n as f64),
            ClusterSize::AtLeast(_) => None,
        }
    }
}

/// State space of the trapped walk. Reflection resamples moves that would
/// leave the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Integers,
    HalfLine,
    /// Sites `0..=max`.
    Segment(i64),
}

/// Sites visited and the times at which each was left. A final departure
/// of `inf` means the last holding time was cut at the horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RTRWTrajectory {
    pub sites: Vec<i64>,
    pub departures: Vec<f64>,
}

impl RTRWTrajectory {
    /// Site occupied at time `t` (right-continuous).
    pub fn position_at(&self, t: f64) -> i64 {
        let i = self.departures.partition_point(|&d| d <= t);
        self.sites[i.min(self.sites.len() - 1)]
    }

    /// Largest site visited by time `t`.
    pub fn running_max(&self, t: f64) -> i64 {
        let i = self.departures.partition_point(|&d| d <= t);
        self.sites[..=i.min(self.sites.len() - 1)]
            .iter()
            .copied()
            .max()
            .unwrap()
    }
}

/// Randomly trapped random walk started at `0`, run until time `horizon`.
pub fn rtrw<L: TrappingLandscape + ?Sized>(
    landscape: &mut L,
    horizon: f64,
    domain: Domain,
    rng: &mut SimRng,
) -> Result<RTRWTrajectory> {
    if !(horizon > 0.0) {
        return invalid(format!("horizon must be positive, got {horizon}"));
    }
    if let Domain::Segment(max) = domain {
        if max < 1 {
            return invalid("segment needs at least two sites");
        }
    }
    let mut sites = Vec::new();
    let mut departures = Vec::new();
    let mut x = 0i64;
    let mut t = 0.0f64;
    loop {
        sites.push(x);
        match landscape.sample_holding(x, horizon - t, rng) {
            None => {
                departures.push(f64::INFINITY);
                break;
            }
            Some(h) => {
                t += h;
                departures.push(t);
            }
        }
        if t > horizon {
            break;
        }
        x = match domain {
            Domain::Integers => x + if rng.random::<bool>() { 1 } else { -1 },
            Domain::HalfLine if x == 0 => 1,
            Domain::HalfLine => x + if rng.random::<bool>() { 1 } else { -1 },
            Domain::Segment(_) if x == 0 => 1,
            Domain::Segment(max) if x == max => max - 1,
            Domain::Segment(_) => x + if rng.random::<bool>() { 1 } else { -1 },
        };
    }
    Ok(RTRWTrajectory { sites, departures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn unit_holding_is_simple_walk() {
        let mut rng = rng_from_seed(1);
        let mut land = ConstantLandscape(1.0);
        let runs = 4000;
        let t = 100.0;
        let mut sq = 0.0;
        for _ in 0..runs {
            let tr = rtrw(&mut land, t, Domain::Integers, &mut rng).unwrap();
            assert!(tr.sites.windows(2).all(|w| (w[0] - w[1]).abs() == 1));
            assert!(tr.departures.windows(2).all(|w| w[1] - w[0] == 1.0));
            sq += (tr.position_at(t) as f64).powi(2);
        }
        // E[S_100^2] = 100, Var(S^2) = 2 * 100^2 - 2 * 100
        let se = ((2.0 * t * t - 2.0 * t) / runs as f64).sqrt();
        assert!((sq / runs as f64 - t).abs() < 3.0 * se);
    }

    #[test]
    fn single_trap_renewal_fraction() {
        // on 0..=L with reflection, visit frequencies are proportional to
        // degree: 1 at the ends, 2 inside
        let mut rng = rng_from_seed(2);
        let (l, m) = (5i64, 20.0);
        let mut land = SingleTrapLandscape { site: 0, depth: m };
        let horizon = 2e6;
        let tr = rtrw(&mut land, horizon, Domain::Segment(l), &mut rng).unwrap();
        let mut at0 = 0.0;
        let mut prev = 0.0;
        for (&x, &d) in tr.sites.iter().zip(&tr.departures) {
            let end = d.min(horizon);
            if x == 0 {
                at0 += end - prev;
            }
            prev = end;
        }
        let oracle = m / (m + 2.0 * (l - 1) as f64 + 1.0);
        assert!((at0 / horizon - oracle).abs() < 0.01, "{} vs {oracle}", at0 / horizon);
    }

    #[test]
    fn half_line_reflection() {
        let mut rng = rng_from_seed(3);
        let tr = rtrw(&mut ConstantLandscape(1.0), 10_000.0, Domain::HalfLine, &mut rng).unwrap();
        assert!(tr.sites.iter().all(|&x| x >= 0));
        assert!(tr.sites.windows(2).all(|w| w[0] != 0 || w[1] == 1));
        assert!(rtrw(&mut ConstantLandscape(1.0), 0.0, Domain::HalfLine, &mut rng).is_err());
    }

    #[test]
    fn iic_landscape_exit_means() {
        // E[sigma_tilde] equals the branch size
        let mut rng = rng_from_seed(4);
        let mut land = IicLandscape::new(true, 1 << 20);
        let mut checked = 0;
        for site in 1..200 {
            let Some(n) = land.mean_depth(site, &mut rng) else {
                continue;
            };
            if !(5.0..200.0).contains(&n) {
                continue;
            }
            let runs = 20_000;
            let xs: Vec<f64> = (0..runs)
                .map(|_| land.sample_holding(site, f64::INFINITY, &mut rng).unwrap())
                .collect();
            let mean = xs.iter().sum::<f64>() / runs as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / runs as f64;
            assert!(
                (mean - n).abs() < 4.0 * (var / runs as f64).sqrt(),
                "site {site}: {mean} vs {n}"
            );
            checked += 1;
        }
        assert!(checked >= 3);
        assert_eq!(land.mean_depth(0, &mut rng), None);
    }

    #[test]
    fn cached_landscape_reuses_pool() {
        let mut rng = rng_from_seed(5);
        let mut land = IicLandscape::new(false, 1000).with_sample_cache(4);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            seen.insert(land.sample_holding(3, f64::INFINITY, &mut rng).unwrap() as u64);
        }
        assert!(seen.len() <= 4);
    }

    #[test]
    fn censored_holding() {
        let mut rng = rng_from_seed(6);
        let mut land = IicLandscape::new(true, 1000);
        let tr = rtrw(&mut land, 50.0, Domain::HalfLine, &mut rng).unwrap();
        let last = *tr.departures.last().unwrap();
        assert!(last > 50.0);
        assert!(tr.departures.windows(2).all(|w| w[0] < w[1]));
    }
}
