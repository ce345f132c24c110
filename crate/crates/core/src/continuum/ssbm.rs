use serde::{Deserialize, Serialize};

use super::clock::{ClockSubordinator, SubordinatorFactory};
use super::mass::TreeMassMeasure;
use super::skeleton::{MetricTreeSkeleton, SkeletonPoint};
use crate::error::{invalid, Error, Result};
use crate::rng::{SeedStream, SimRng};
use crate::stoch::{AtomicMeasure, ReflectedWalker};
use crate::tree::{Adjacency, OrderedRootedTree};
use crate::walk::step as tree_step;

/// Clock, inverse clock and position of a spatially subordinated walk,
/// sampled at the requested clock times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SSBMPath {
    pub clock_times: Vec<f64>,
    /// Distance from the origin (or root) at each clock time.
    pub positions: Vec<f64>,
    /// Skeleton location at each clock time (tree-valued runs only).
    pub points: Option<Vec<SkeletonPoint>>,
    /// `psi(t)`: Brownian time at which the clock first exceeds `t`.
    pub psi: Vec<f64>,
    /// `(Brownian time, phi)` recorded along the run.
    pub phi_trace: Vec<(f64, f64)>,
    /// Part of the final clock contributed by explicit traps.
    pub trap_clock: f64,
    /// Part contributed by the mass below the cut.
    pub drift_clock: f64,
    /// Brownian time elapsed when the run stopped.
    pub elapsed: f64,
    /// Total rounding of edge lengths to the lattice.
    pub length_perturbation: f64,
}

impl SSBMPath {
    pub fn running_max(&self) -> Vec<f64> {
        let mut m = 0.0f64;
        self.positions
            .iter()
            .map(|&x| {
                m = m.max(x);
                m
            })
            .collect()
    }
}

/// Run length and observation times of an SSBM simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsbmSettings {
    pub lattice_step: f64,
    /// Brownian-time horizon.
    pub horizon: f64,
    /// Increasing clock times at which to record the position.
    pub clock_times: Vec<f64>,
    pub seed: u64,
}

impl SsbmSettings {
    fn check(&self) -> Result<()> {
        if !(self.lattice_step > 0.0) || !(self.horizon > 0.0) {
            return invalid("lattice step and horizon must be positive");
        }
        if self.clock_times.windows(2).any(|w| !(w[0] < w[1])) || self.clock_times.iter().any(|&t| !(t >= 0.0)) {
            return invalid("clock times must be nonnegative and increasing");
        }
        Ok(())
    }
}

trait LatticeWalk {
    fn site(&self) -> usize;
    fn step(&mut self, rng: &mut SimRng);
}

struct HalfLine {
    walker: ReflectedWalker,
}

impl LatticeWalk for HalfLine {
    fn site(&self) -> usize {
        self.walker.site as usize
    }
    fn step(&mut self, rng: &mut SimRng) {
        self.walker.step(rng);
    }
}

struct TreeLattice {
    adj: Adjacency,
    at: u32,
}

impl LatticeWalk for TreeLattice {
    fn site(&self) -> usize {
        self.at as usize
    }
    fn step(&mut self, rng: &mut SimRng) {
        if self.adj.degree(self.at as usize) > 0 {
            self.at = tree_step(&self.adj, self.at, rng);
        }
    }
}

struct Trap<C> {
    mass: f64,
    clock: C,
    last: f64,
}

struct Outcome {
    sites: Vec<usize>,
    psi: Vec<f64>,
    phi_trace: Vec<(f64, f64)>,
    trap_clock: f64,
    drift_clock: f64,
    elapsed: f64,
}

const TRACE_POINTS: u64 = 1024;

/// Drives the clock `phi = sum_i y_i^{3/2} S^i(y_i^{-1/2} l(x_i, t)) + drift`
/// along a lattice walk. `traps[s]` lists the traps at site `s`; `small[s]`
/// is mass below the cut at `s`, charged at its mean rate; `density` is a
/// uniform small-mass density per unit length.
#[allow(clippy::too_many_arguments)]
fn run_clock<W: LatticeWalk, C: ClockSubordinator>(
    walk: &mut W,
    traps: &mut [Vec<Trap<C>>],
    small: &[f64],
    density: f64,
    dx: f64,
    horizon: f64,
    clock_times: &[f64],
    rng: &mut SimRng,
) -> Result<Outcome> {
    let dt = dx * dx;
    let max_steps = (horizon / dt).ceil() as u64;
    let trace_every = (max_steps / TRACE_POINTS).max(1);
    let mut local: Vec<f64> = vec![0.0; traps.len().max(small.len())];
    let (mut trap_clock, mut drift_clock) = (0.0f64, 0.0f64);
    let mut sites = Vec::with_capacity(clock_times.len());
    let mut psi = Vec::with_capacity(clock_times.len());
    let mut phi_trace = vec![(0.0, 0.0)];
    let mut next = 0;
    let mut k = 0u64;
    while next < clock_times.len() {
        if k == max_steps {
            return Err(Error::HorizonExceeded {
                reached: trap_clock + drift_clock,
                target: clock_times[next],
            });
        }
        let s = walk.site();
        let before = trap_clock + drift_clock;
        drift_clock += density * dt;
        if s < local.len() {
            let l_old = local[s];
            let l_new = l_old + dx;
            local[s] = l_new;
            if let Some(here) = traps.get_mut(s) {
                for t in here.iter_mut() {
                    let v = t.clock.value(l_new / t.mass.sqrt());
                    trap_clock += t.mass.powf(1.5) * (v - t.last);
                    t.last = v;
                }
            }
            if let Some(&m) = small.get(s) {
                drift_clock += m * dx;
            }
        }
        k += 1;
        let phi = trap_clock + drift_clock;
        while next < clock_times.len() && phi > clock_times[next] {
            let frac = (clock_times[next] - before) / (phi - before);
            psi.push(((k - 1) as f64 + frac.clamp(0.0, 1.0)) * dt);
            sites.push(s);
            next += 1;
        }
        if k.is_multiple_of(trace_every) {
            phi_trace.push((k as f64 * dt, phi));
        }
        walk.step(rng);
    }
    Ok(Outcome {
        sites,
        psi,
        phi_trace,
        trap_clock,
        drift_clock,
        elapsed: k as f64 * dt,
    })
}

/// Traps on the half-line with a reflected lattice walk. Atoms are snapped
/// to the nearest site; `deficit_density` is the mean mass per unit length
/// missing below the truncation cut.
pub fn ssbm_simulate<F: SubordinatorFactory>(
    traps: &AtomicMeasure,
    deficit_density: f64,
    factory: &F,
    settings: &SsbmSettings,
) -> Result<SSBMPath> {
    settings.check()?;
    if traps.atoms().first().is_some_and(|a| a.0 < 0.0) {
        return invalid("half-line traps need nonnegative locations");
    }
    if !(deficit_density >= 0.0) {
        return invalid("deficit density must be nonnegative");
    }
    let dx = settings.lattice_step;
    let streams = SeedStream::new(settings.seed, "ssbm");
    let trap_streams = streams.child("traps");
    let snapped = traps.snapped(dx);
    let top = snapped.atoms().last().map_or(0, |a| (a.0 / dx).round() as usize);
    let mut per_site: Vec<Vec<Trap<F::Clock>>> = (0..=top).map(|_| Vec::new()).collect();
    for (i, &(x, y)) in snapped.atoms().iter().enumerate() {
        let clock = factory.create(i, y, trap_streams.rng(i as u64));
        per_site[(x / dx).round() as usize].push(Trap {
            mass: y,
            clock,
            last: 0.0,
        });
    }
    let mut walk = HalfLine {
        walker: ReflectedWalker::new(),
    };
    let mut rng = streams.rng(0);
    let out = run_clock(
        &mut walk,
        &mut per_site,
        &[],
        deficit_density,
        dx,
        settings.horizon,
        &settings.clock_times,
        &mut rng,
    )?;
    Ok(SSBMPath {
        clock_times: settings.clock_times.clone(),
        positions: out.sites.iter().map(|&s| s as f64 * dx).collect(),
        points: None,
        psi: out.psi,
        phi_trace: out.phi_trace,
        trap_clock: out.trap_clock,
        drift_clock: out.drift_clock,
        elapsed: out.elapsed,
        length_perturbation: 0.0,
    })
}

/// Lattice version of a metric skeleton: every edge is cut into
/// `max(1, round(length / dx))` steps of length `dx`.
struct SkeletonLattice {
    tree: OrderedRootedTree,
    /// lattice site of `(edge, step)`; step 0 is the parent node
    edge_sites: Vec<Vec<usize>>,
    /// `(edge, step)` of each lattice site
    location: Vec<(usize, usize)>,
    perturbation: f64,
}

fn skeleton_lattice(skeleton: &MetricTreeSkeleton, dx: f64) -> Result<SkeletonLattice> {
    let nodes = skeleton.node_count();
    let children = skeleton.children();
    let mut child_lists: Vec<Vec<usize>> = vec![Vec::new()];
    let mut location = vec![(0usize, 0usize)];
    let mut node_site = vec![usize::MAX; nodes];
    node_site[0] = 0;
    let mut edge_sites = vec![Vec::new(); nodes];
    let mut perturbation = 0.0;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        for &c in &children[v] {
            let len = skeleton.length(c);
            let steps = ((len / dx).round() as usize).max(1);
            perturbation += (steps as f64 * dx - len).abs();
            let mut sites = vec![node_site[v]];
            let mut prev = node_site[v];
            for j in 1..=steps {
                let id = child_lists.len();
                child_lists.push(Vec::new());
                location.push((c, j));
                child_lists[prev].push(id);
                sites.push(id);
                prev = id;
            }
            node_site[c] = prev;
            edge_sites[c] = sites;
            stack.push(c);
        }
    }
    let (tree, relabel) = OrderedRootedTree::from_child_lists(&child_lists, 0)?;
    let mut loc_new = vec![(0, 0); location.len()];
    for (old, &new) in relabel.iter().enumerate() {
        loc_new[new] = location[old];
    }
    for sites in edge_sites.iter_mut() {
        for s in sites.iter_mut() {
            *s = relabel[*s];
        }
    }
    Ok(SkeletonLattice {
        tree,
        edge_sites,
        location: loc_new,
        perturbation,
    })
}

/// SSBM on a metric skeleton: a lattice walk with equiprobable moves at
/// branch points, reflected at the root and the leaves. Atoms of mass at
/// least `mass_cut` get their own clock; lighter atoms are charged at their
/// mean rate `y` per unit local time.
pub fn k_ssbm_simulate<F: SubordinatorFactory>(
    skeleton: &MetricTreeSkeleton,
    masses: &TreeMassMeasure,
    mass_cut: f64,
    factory: &F,
    settings: &SsbmSettings,
) -> Result<SSBMPath> {
    settings.check()?;
    skeleton.validate()?;
    let dx = settings.lattice_step;
    let lattice = skeleton_lattice(skeleton, dx)?;
    let n_sites = lattice.tree.vertex_count();
    let site_of = |p: SkeletonPoint| -> Result<usize> {
        let sites = lattice
            .edge_sites
            .get(p.edge)
            .filter(|s| !s.is_empty())
            .ok_or(Error::InvalidVertex(p.edge))?;
        let steps = sites.len() - 1;
        let j = ((p.offset / skeleton.length(p.edge)) * steps as f64).round() as usize;
        Ok(sites[j.min(steps)])
    };
    let streams = SeedStream::new(settings.seed, "k-ssbm");
    let trap_streams = streams.child("traps");
    let mut per_site: Vec<Vec<Trap<F::Clock>>> = (0..n_sites).map(|_| Vec::new()).collect();
    let mut small = vec![0.0; n_sites];
    for (i, a) in masses.atoms.iter().enumerate() {
        let s = site_of(a.point)?;
        if a.mass >= mass_cut {
            let clock = factory.create(i, a.mass, trap_streams.rng(i as u64));
            per_site[s].push(Trap {
                mass: a.mass,
                clock,
                last: 0.0,
            });
        } else {
            small[s] += a.mass;
        }
    }
    let mut walk = TreeLattice {
        adj: lattice.tree.adjacency(),
        at: 0,
    };
    let mut rng = streams.rng(0);
    let out = run_clock(
        &mut walk,
        &mut per_site,
        &small,
        0.0,
        dx,
        settings.horizon,
        &settings.clock_times,
        &mut rng,
    )?;
    let first_edge = skeleton.children()[0][0];
    let points: Vec<SkeletonPoint> = out
        .sites
        .iter()
        .map(|&s| match lattice.location[s] {
            (0, _) => SkeletonPoint {
                edge: first_edge,
                offset: 0.0,
            },
            (edge, j) => {
                let steps = lattice.edge_sites[edge].len() - 1;
                SkeletonPoint {
                    edge,
                    offset: skeleton.length(edge) * j as f64 / steps as f64,
                }
            }
        })
        .collect();
    Ok(SSBMPath {
        clock_times: settings.clock_times.clone(),
        positions: points.iter().map(|&p| skeleton.point_height(p)).collect(),
        points: Some(points),
        psi: out.psi,
        phi_trace: out.phi_trace,
        trap_clock: out.trap_clock,
        drift_clock: out.drift_clock,
        elapsed: out.elapsed,
        length_perturbation: lattice.perturbation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::clock::{CrtFactory, IdentityFactory, TrapSize, TreeFamily};
    use crate::continuum::mass::{sample_branch_mass_measure, MassAtom};
    use crate::continuum::skeleton::line_breaking;
    use crate::rng::rng_from_seed;
    use crate::stoch::{sample_stable_ppp, IIC_INTENSITY};

    fn settings(times: Vec<f64>, horizon: f64, seed: u64) -> SsbmSettings {
        SsbmSettings {
            lattice_step: 0.05,
            horizon,
            clock_times: times,
            seed,
        }
    }

    #[test]
    fn single_identity_trap_at_origin_never_moves() {
        let traps = AtomicMeasure::from_atoms(vec![(0.0, 1.0)]).unwrap();
        let times: Vec<f64> = (1..50).map(|i| i as f64 * 0.02).collect();
        let p = ssbm_simulate(&traps, 0.0, &IdentityFactory, &settings(times.clone(), 100.0, 1)).unwrap();
        assert!(p.positions.iter().all(|&x| x == 0.0));
        assert_eq!(p.drift_clock, 0.0);
        // psi(phi(s)) >= s: the clock at psi(t) has just passed t
        for (t, &s) in times.iter().zip(&p.psi) {
            let before = p
                .phi_trace
                .iter()
                .filter(|q| q.0 <= s - 0.0025)
                .map(|q| q.1)
                .next_back()
                .unwrap_or(0.0);
            assert!(before <= *t + 1e-12);
        }
        assert!(p.psi.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn clock_is_monotone_and_conserved() {
        let mut rng = rng_from_seed(2);
        let field = sample_stable_ppp((0.0, 2.0), 0.01, IIC_INTENSITY, 0.5, &mut rng).unwrap();
        let factory = CrtFactory {
            family: TreeFamily::CriticalBinary,
            size: TrapSize::Fixed(200),
        };
        let density = field.deficit_mean / 2.0;
        let p = ssbm_simulate(
            &field.measure,
            density,
            &factory,
            &settings(vec![0.5, 1.0, 2.0], 1e4, 3),
        )
        .unwrap();
        assert!(p.phi_trace.windows(2).all(|w| w[0].1 <= w[1].1 && w[0].0 < w[1].0));
        let last = p.trap_clock + p.drift_clock;
        assert!(last > 2.0);
        assert!((p.drift_clock - density * p.elapsed).abs() < 1e-9 * (1.0 + p.drift_clock));
        assert!(p.positions.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let field = sample_stable_ppp((0.0, 1.0), 0.01, IIC_INTENSITY, 0.5, &mut rng_from_seed(4)).unwrap();
        let factory = CrtFactory {
            family: TreeFamily::CriticalBinary,
            size: TrapSize::Fixed(100),
        };
        let s = settings(vec![0.1, 0.2], 1e4, 5);
        let a = ssbm_simulate(&field.measure, 0.0, &factory, &s).unwrap();
        let b = ssbm_simulate(&field.measure, 0.0, &factory, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn horizon_exceeded() {
        let traps = AtomicMeasure::from_atoms(vec![(1.0, 0.1)]).unwrap();
        let r = ssbm_simulate(&traps, 0.0, &IdentityFactory, &settings(vec![100.0], 1.0, 6));
        assert!(matches!(r, Err(Error::HorizonExceeded { .. })));
        assert!(ssbm_simulate(&traps, 0.0, &IdentityFactory, &settings(vec![2.0, 1.0], 1.0, 6)).is_err());
    }

    #[test]
    fn segment_with_only_small_mass_is_a_reflected_walk() {
        let sk = line_breaking(1, &mut rng_from_seed(7)).unwrap();
        let m = sample_branch_mass_measure(&sk, 10_000, &mut rng_from_seed(8)).unwrap();
        let times: Vec<f64> = (1..=20).map(|i| i as f64 * 0.05).collect();
        let p = k_ssbm_simulate(&sk, &m, 2.0, &IdentityFactory, &settings(times, 1e3, 9)).unwrap();
        assert_eq!(p.trap_clock, 0.0);
        let len = sk.total_length();
        assert!(p.positions.iter().all(|&x| (0.0..=len + 1e-9).contains(&x)));
        assert!(p.length_perturbation <= 0.025 + 1e-12);
        assert!(p.drift_clock > 1.0);
        assert!(p.phi_trace.last().unwrap().1 <= p.drift_clock);
    }

    #[test]
    fn tree_positions_lie_on_the_skeleton() {
        let sk = line_breaking(3, &mut rng_from_seed(10)).unwrap();
        let m = sample_branch_mass_measure(&sk, 10_000, &mut rng_from_seed(11)).unwrap();
        let factory = CrtFactory {
            family: TreeFamily::PlantedUniform,
            size: TrapSize::Proportional {
                resolution: 10_000.0,
                min: 1,
                max: 10_000,
            },
        };
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.01).collect();
        let p = k_ssbm_simulate(&sk, &m, 1e-3, &factory, &settings(times, 1e3, 12)).unwrap();
        for (pt, &x) in p.points.as_ref().unwrap().iter().zip(&p.positions) {
            assert!(pt.offset >= 0.0 && pt.offset <= sk.length(pt.edge) + 1e-12);
            assert!((sk.point_height(*pt) - x).abs() < 1e-12);
        }
        let bad = TreeMassMeasure {
            atoms: vec![MassAtom {
                point: SkeletonPoint { edge: 99, offset: 0.0 },
                mass: 1.0,
            }],
        };
        assert!(k_ssbm_simulate(&sk, &bad, 0.5, &factory, &settings(vec![0.1], 1.0, 1)).is_err());
    }
}
