//! The cross-scale experiments: Assumption-L stabilisation, the IPC
//! envelope statistic, local-time scaling, the K-projection comparison and
//! the displacement runs behind the exponent checks.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{ks_one_sample, ks_two_sample, mean_and_se, KsResult};
use crate::cluster::{sample_conditioned_cluster, sample_uniform_tree, scales};
use crate::continuum::{
    k_ssbm_simulate, line_breaking, sample_branch_mass_measure, CrtFactory, SsbmSettings, TrapSize, TreeFamily,
};
use crate::error::{invalid, Result};
use crate::infinite::{
    backbone_projection, envelope_statistics_until_depth, invade_until_depth, structural_ipc_branch_sizes, LazyIic,
};
use crate::rng::{SeedStream, SimRng};
use crate::stoch::{empirical_laplace, psi_epsilon};
use crate::tree::reduce;
use crate::walk::{root_local_time, sample_sigma_tilde, step};

/// Runs `f` on replicates `0..count`, each with its own stream, and returns
/// the results in replicate order whatever the scheduling.
pub fn replicate_map<T, F>(stream: &SeedStream, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync + Send,
{
    (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.rng(i);
            f(i, &mut rng)
        })
        .collect()
}

pub fn try_replicate_map<T, F>(stream: &SeedStream, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> Result<T> + Sync + Send,
{
    replicate_map(stream, count, f).into_iter().collect()
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] > w[1])
}

/// `Psi_eps` at one grid level: `(lambda, value, standard error)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiLevel {
    pub epsilon: f64,
    pub tree_size: usize,
    pub curve: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionLReport {
    pub levels: Vec<PsiLevel>,
    /// Sup-norm distance between the curves of consecutive levels.
    pub gaps: Vec<f64>,
    pub gaps_decreasing: bool,
    /// Every curve is nonnegative, nondecreasing and concave on the grid.
    pub shape_ok: bool,
}

/// Annealed `Psi_eps` curves of `sigma_tilde` on `B^{d(eps)}`, one fresh
/// tree per sample, for each `eps` in a decreasing grid.
pub fn assumption_l_statistic(
    eps_grid: &[f64],
    lambda_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<AssumptionLReport> {
    if eps_grid.len() < 2 || !strictly_decreasing(eps_grid) {
        return invalid("eps grid needs at least two strictly decreasing values");
    }
    if lambda_grid.is_empty() || lambda_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("lambda grid must be nonempty and increasing");
    }
    if samples < 2 {
        return invalid("need at least two samples per level");
    }
    let root = SeedStream::new(seed, "assumption-l");
    let mut levels = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let (d, q) = scales(eps)?;
        let n = (d.round() as usize).max(1);
        let stream = root.child(&format!("n={n}"));
        let taus = try_replicate_map(&stream, samples, |_, rng| {
            let t = sample_conditioned_cluster(n, rng)?;
            Ok(sample_sigma_tilde(&t.adjacency(), rng) as f64)
        })?;
        let values = psi_epsilon(&taus, eps, lambda_grid)?;
        let curve = values
            .into_iter()
            .map(|(lambda, v)| (lambda, v, empirical_laplace(&taus, q * lambda).1 / eps))
            .collect();
        levels.push(PsiLevel {
            epsilon: eps,
            tree_size: n,
            curve,
        });
    }
    let gaps: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            w[0].curve
                .iter()
                .zip(&w[1].curve)
                .map(|(a, b)| (a.1 - b.1).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let shape_ok = levels.iter().all(|l| {
        let c = &l.curve;
        let nonneg = c.iter().all(|p| p.1 >= 0.0);
        let monotone = c.windows(2).all(|w| w[1].1 >= w[0].1);
        let concave = c.windows(3).all(|w| {
            let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
            s2 <= s1 + 1e-12
        });
        nonneg && monotone && concave
    });
    Ok(AssumptionLReport {
        gaps_decreasing: strictly_decreasing(&gaps),
        levels,
        gaps,
        shape_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpcEnvelopeParams {
    /// Trimmed backbone lengths `k`; the invasion runs to depth `k / trim`.
    pub k_grid: Vec<usize>,
    pub trim: f64,
    /// Second trim fraction for the sensitivity comparison.
    pub alt_trim: Option<f64>,
    pub ts: Vec<f64>,
    pub runs: usize,
    /// Grid for the `eps^2 V^IPC_{1/eps}` transform; empty to skip.
    pub v_eps_grid: Vec<f64>,
    pub v_lambda: f64,
    pub v_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeKs {
    pub k: usize,
    pub depth: usize,
    pub trim: f64,
    pub t: f64,
    pub ks: KsResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpcEnvelopeReport {
    pub ks: Vec<EnvelopeKs>,
    /// KS change between `trim` and `alt_trim` at the same depth, per `(k, t)`.
    pub trim_sensitivity: Vec<(usize, f64, f64)>,
    /// `(eps, transform, standard error)` of `eps^2 V^IPC_{1/eps}`.
    pub v_transform: Vec<(f64, f64, f64)>,
    /// Consecutive transforms agree within three combined standard errors.
    pub v_stable: bool,
}

fn envelope_ks(depth: usize, trim: f64, ts: &[f64], runs: usize, stream: &SeedStream) -> Result<Vec<KsResult>> {
    let stats = try_replicate_map(stream, runs, |_, rng| {
        envelope_statistics_until_depth(depth, usize::MAX, trim, ts, rng)
    })?;
    ts.iter()
        .enumerate()
        .map(|(j, &t)| {
            let xs: Vec<f64> = stats.iter().map(|s| s[j]).collect();
            ks_one_sample(&xs, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-t * x).exp() })
        })
        .collect()
}

/// `k (2 M_{ceil(k t)} - 1)` against `Exp(t)` and the cross-scale stability
/// of the structural `V^IPC` transform.
pub fn ipc_envelope_experiment(params: &IpcEnvelopeParams, seed: u64) -> Result<IpcEnvelopeReport> {
    if params.k_grid.is_empty() || params.k_grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("k grid must be nonempty and increasing");
    }
    if params.runs == 0 || params.ts.is_empty() {
        return invalid("need runs and t values");
    }
    let root = SeedStream::new(seed, "ipc-envelope");
    let mut ks = Vec::new();
    let mut trim_sensitivity = Vec::new();
    for &k in &params.k_grid {
        let depth = (k as f64 / params.trim).ceil() as usize;
        let stream = root.child(&format!("depth={depth}"));
        let base = envelope_ks(depth, params.trim, &params.ts, params.runs, &stream)?;
        if let Some(alt) = params.alt_trim {
            // same invasion runs, different trimming
            let other = envelope_ks(depth, alt, &params.ts, params.runs, &stream)?;
            for ((&t, a), b) in params.ts.iter().zip(&base).zip(&other) {
                trim_sensitivity.push((k, t, (a.distance - b.distance).abs()));
            }
        }
        for (&t, r) in params.ts.iter().zip(base) {
            ks.push(EnvelopeKs {
                k,
                depth,
                trim: params.trim,
                t,
                ks: r,
            });
        }
    }
    let mut v_transform = Vec::new();
    for &eps in &params.v_eps_grid {
        if !(eps > 0.0 && eps < 1.0) {
            return invalid(format!("eps = {eps} outside (0, 1)"));
        }
        let k_max = (1.0 / eps).round() as usize;
        let stream = root.child(&format!("v k_max={k_max}"));
        let vs = try_replicate_map(&stream, params.v_runs, |_, rng| {
            let (_, sizes) = structural_ipc_branch_sizes(k_max, rng)?;
            Ok(eps * eps * sizes.iter().sum::<u64>() as f64)
        })?;
        let (m, se) = empirical_laplace(&vs, params.v_lambda);
        v_transform.push((eps, m, se));
    }
    let v_stable = v_transform
        .windows(2)
        .all(|w| (w[0].1 - w[1].1).abs() <= 3.0 * w[0].2.hypot(w[1].2));
    Ok(IpcEnvelopeReport {
        ks,
        trim_sensitivity,
        v_transform,
        v_stable,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalTimeReport {
    pub sizes: Vec<usize>,
    /// Mean and standard error of `n^{-1/2} l_{n^{3/2}}` per size.
    pub means: Vec<(f64, f64)>,
    /// KS distance between consecutive sizes.
    pub ks: Vec<KsResult>,
    pub ks_decreasing: bool,
}

/// Samples of `n^{-1/2} l[B^n]_{floor(n^{3/2})}` with a fresh tree per replicate.
pub fn local_time_samples(n: usize, replicates: usize, stream: &SeedStream) -> Result<Vec<f64>> {
    let steps = (n as f64).powf(1.5).floor() as u64;
    let scale = (n as f64).sqrt();
    try_replicate_map(stream, replicates, |_, rng| {
        let t = sample_conditioned_cluster(n, rng)?;
        Ok(root_local_time(&t.adjacency(), steps, rng) as f64 / scale)
    })
}

pub fn local_time_scaling(sizes: &[usize], replicates: usize, seed: u64) -> Result<LocalTimeReport> {
    if sizes.len() < 2 || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("need at least two increasing sizes");
    }
    let root = SeedStream::new(seed, "local-time");
    let mut laws = Vec::with_capacity(sizes.len());
    for &n in sizes {
        laws.push(local_time_samples(n, replicates, &root.child(&format!("n={n}")))?);
    }
    let means = laws.iter().map(|l| mean_and_se(l)).collect();
    let ks = laws
        .windows(2)
        .map(|w| ks_two_sample(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let d: Vec<f64> = ks.iter().map(|r| r.distance).collect();
    Ok(LocalTimeReport {
        sizes: sizes.to_vec(),
        means,
        ks,
        ks_decreasing: strictly_decreasing(&d),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KProjectionParams {
    pub n_grid: Vec<usize>,
    pub leaves: usize,
    /// Clock time `t`; the discrete walk runs `floor(n^{3/2} t)` steps.
    pub clock_time: f64,
    pub replicates: usize,
    pub ssbm_replicates: usize,
    pub lattice_step: f64,
    pub mass_cut: f64,
    /// Brownian-time budget of each K-SSBM run.
    pub horizon: f64,
    pub offspring_variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KProjectionReport {
    /// Rescaled distance from the root of the projected walk, per `n`.
    pub discrete: Vec<(usize, Vec<f64>)>,
    /// KS between consecutive `n`.
    pub stability: Vec<KsResult>,
    pub ssbm: Vec<f64>,
    /// Largest `n` against the K-SSBM.
    pub versus_ssbm: KsResult,
}

/// Projected-walk positions `(2/sigma^2) n^{-1/2} |pi(X_{n^{3/2} t})|` on
/// uniform trees.
pub fn projected_walk_samples(
    n: usize,
    leaves: usize,
    clock_time: f64,
    factor: f64,
    replicates: usize,
    stream: &SeedStream,
) -> Result<Vec<f64>> {
    let steps = ((n as f64).powf(1.5) * clock_time).floor() as u64;
    let scale = factor / (n as f64).sqrt();
    try_replicate_map(stream, replicates, |_, rng| {
        let t = sample_uniform_tree(n, rng)?;
        let anchors: Vec<usize> = (0..leaves).map(|_| rng.random_range(0..n)).collect();
        let idx = reduce(&t, &anchors)?;
        let adj = t.adjacency();
        let mut v = 0u32;
        if adj.degree(0) > 0 {
            for _ in 0..steps {
                v = step(&adj, v, rng);
            }
        }
        Ok(t.depth(idx.project(v as usize)) as f64 * scale)
    })
}

/// K-SSBM distances from the root at the clock time, on line-breaking
/// skeletons with branch masses at resolution `n`.
pub fn k_ssbm_samples(params: &KProjectionParams, n: usize, stream: &SeedStream) -> Result<Vec<f64>> {
    let factor = 2.0 / params.offspring_variance;
    let factory = CrtFactory {
        family: TreeFamily::PlantedUniform,
        size: TrapSize::Proportional {
            resolution: n as f64,
            min: 1,
            max: usize::MAX,
        },
    };
    try_replicate_map(stream, params.ssbm_replicates, |_, rng| {
        let skeleton = line_breaking(params.leaves, rng)?;
        let masses = sample_branch_mass_measure(&skeleton, n, rng)?;
        let settings = SsbmSettings {
            lattice_step: params.lattice_step,
            horizon: params.horizon,
            clock_times: vec![params.clock_time],
            seed: rng.next_u64(),
        };
        let path = k_ssbm_simulate(&skeleton, &masses, params.mass_cut, &factory, &settings)?;
        Ok(factor * path.positions[0])
    })
}

pub fn k_projection_experiment(params: &KProjectionParams, seed: u64) -> Result<KProjectionReport> {
    if params.leaves == 0 || params.n_grid.is_empty() || params.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("need K >= 1 and an increasing n grid");
    }
    if params.offspring_variance != 1.0 {
        return invalid("the discrete side uses Poisson(1) trees, so the offspring variance must be 1");
    }
    if !(params.clock_time > 0.0) || params.replicates == 0 || params.ssbm_replicates == 0 {
        return invalid("clock time and replicate counts must be positive");
    }
    let factor = 2.0 / params.offspring_variance;
    let root = SeedStream::new(seed, "k-projection");
    let mut discrete = Vec::with_capacity(params.n_grid.len());
    for &n in &params.n_grid {
        let s = projected_walk_samples(
            n,
            params.leaves,
            params.clock_time,
            factor,
            params.replicates,
            &root.child(&format!("n={n}")),
        )?;
        discrete.push((n, s));
    }
    let stability = discrete
        .windows(2)
        .map(|w| ks_two_sample(&w[0].1, &w[1].1))
        .collect::<Result<Vec<_>>>()?;
    let (n_max, last) = discrete.last().expect("nonempty grid");
    let ssbm = k_ssbm_samples(params, *n_max, &root.child("k-ssbm"))?;
    let versus_ssbm = ks_two_sample(last, &ssbm)?;
    Ok(KProjectionReport {
        discrete,
        stability,
        ssbm,
        versus_ssbm,
    })
}

/// Integer times `round(10^{a + i (b - a) / (points - 1)})`.
pub fn log_time_grid(from: f64, to: f64, points: usize) -> Vec<u64> {
    let (a, b) = (from.log10(), to.log10());
    (0..points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64).round() as u64)
        .collect()
}

/// Running maximum of the projected IIC walk at each grid time.
pub fn iic_running_max(grid: &[u64], replicates: usize, stream: &SeedStream) -> Vec<Vec<f64>> {
    let t_max = grid.last().copied().unwrap_or(0);
    replicate_map(stream, replicates, |_, rng| {
        let mut g = LazyIic::new();
        let (mut v, mut m, mut gi) = (0u32, 0u32, 0usize);
        let mut out = Vec::with_capacity(grid.len());
        for t in 1..=t_max {
            v = g.step(v, rng);
            m = m.max(g.phi(v));
            while gi < grid.len() && grid[gi] == t {
                out.push(m as f64);
                gi += 1;
            }
        }
        out
    })
}

/// Running maximum of the projected IPC walk on an invasion grown to
/// `depth`, with the largest backbone index reached by any replicate.
pub fn ipc_running_max(
    grid: &[u64],
    depth: usize,
    replicates: usize,
    stream: &SeedStream,
) -> Result<(Vec<Vec<f64>>, u32)> {
    let t_max = grid.last().copied().unwrap_or(0);
    let runs = try_replicate_map(stream, replicates, |_, rng| {
        let inst = invade_until_depth(depth, usize::MAX, rng)?;
        let adj = inst.tree.adjacency();
        let phi = backbone_projection(&inst.tree);
        let (mut v, mut m, mut gi) = (0u32, 0u32, 0usize);
        let mut out = Vec::with_capacity(grid.len());
        for t in 1..=t_max {
            v = step(&adj, v, rng);
            m = m.max(phi[v as usize]);
            while gi < grid.len() && grid[gi] == t {
                out.push(m as f64);
                gi += 1;
            }
        }
        Ok((out, m))
    })?;
    let reached = runs.iter().map(|r| r.1).max().unwrap_or(0);
    Ok((runs.into_iter().map(|r| r.0).collect(), reached))
}

/// Running maximum of the simple random walk on the integers.
pub fn srw_running_max(grid: &[u64], replicates: usize, stream: &SeedStream) -> Vec<Vec<f64>> {
    let t_max = grid.last().copied().unwrap_or(0);
    replicate_map(stream, replicates, |_, rng| {
        let (mut x, mut m, mut gi) = (0i64, 0i64, 0usize);
        let mut out = Vec::with_capacity(grid.len());
        let mut bits = 0u64;
        for t in 1..=t_max {
            if (t - 1) % 64 == 0 {
                bits = rng.next_u64();
            }
            x += if bits & 1 == 1 { 1 } else { -1 };
            bits >>= 1;
            m = m.max(x);
            while gi < grid.len() && grid[gi] == t {
                out.push(m as f64);
                gi += 1;
            }
        }
        out
    })
}
