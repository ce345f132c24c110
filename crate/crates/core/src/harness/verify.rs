//! The thirteen acceptance criteria. [`preset`] gives each criterion's
//! acceptance-scale config (sizes, replicate counts, tolerances);
//! [`run_criterion`] executes it and returns a report whose checks carry
//! the name of the tolerance they used.

use std::f64::consts::{PI, SQRT_2};

use super::config::ExperimentConfig;
use super::experiments::{
    assumption_l_statistic, iic_running_max, ipc_running_max, k_projection_experiment, local_time_scaling,
    log_time_grid, replicate_map, srw_running_max, try_replicate_map, KProjectionParams,
};
use super::report::{Metric, StatReport};
use super::stats::{batch_means, displacement_exponent, ks_one_sample, ks_two_sample, mean_and_se};
use crate::cluster::{
    cluster_size_laplace, sample_cluster_size, sample_conditioned_cluster, sample_uniform_tree, ClusterSize,
    PercolationParams, Substrate,
};
use crate::continuum::{line_breaking, reduced_tree_from_excursion, sample_excursion};
use crate::error::{Error, Result};
use crate::infinite::{envelope_statistics_until_depth, sample_envelope, EnvelopeProcess};
use crate::rng::{SeedStream, SimRng};
use crate::stoch::{
    empirical_laplace, inverse_gaussian_laplace, mu_ipc, mu_ipc_interval_laplace, sample_inverse_gaussian,
    sample_stable_ppp, stable_subordinator_marginal_check, IIC_INTENSITY,
};
use crate::tree::{search_depth, tree_from_search_depth};
use crate::walk::{expected_exit_time_exact, sample_sigma, sample_sigma_tilde};

pub const CRITERIA: [u8; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

pub fn title(id: u8) -> &'static str {
    match id {
        1 => "cluster-size Laplace transform",
        2 => "heavy-tail constant",
        3 => "exit-time identity",
        4 => "geometric-sum Laplace relation",
        5 => "subdiffusive exponent (IIC and IPC)",
        6 => "diffusive null",
        7 => "envelope laws",
        8 => "inverse-Gaussian sampler and mu_IPC",
        9 => "stable trap field",
        10 => "codec round trip",
        11 => "local-time scaling stability",
        12 => "Assumption-L proxy",
        13 => "continuum-tree equivalences",
        _ => "unknown",
    }
}

pub fn experiment_id(id: u8) -> String {
    format!("criterion-{id}")
}

/// Criterion number of an experiment id such as `criterion-7`.
pub fn parse_id(experiment_id: &str) -> Option<u8> {
    experiment_id
        .strip_prefix("criterion-")?
        .parse()
        .ok()
        .filter(|n| CRITERIA.contains(n))
}

/// Acceptance-scale config of criterion `id`.
pub fn preset(id: u8, seed: u64) -> Result<ExperimentConfig> {
    let c = |reps| ExperimentConfig::new(&experiment_id(id), seed, reps);
    let cfg = match id {
        1 => c(1_000_000)
            .with_lambdas(vec![0.1, 0.5, 1.0, 2.0])
            .with_setting("size_cap", 1000.0)
            .with_tolerance("se_multiplier", 3.0),
        2 => c(10_000_000)
            .with_sizes(vec![100, 1000])
            .with_tolerance("relative_error", 0.15),
        3 => c(10_000)
            .with_sizes((1..=100).map(|i| 10 * i).collect())
            .with_tolerance("exact_abs", 1e-9)
            .with_tolerance("se_multiplier", 3.0)
            .with_tolerance("family_error_rate", 0.0027),
        4 => c(100_000)
            .with_sizes(vec![2, 3, 5, 8, 13, 21, 34, 55, 89, 144])
            .with_lambdas(vec![0.1, 1.0])
            .with_tolerance("se_multiplier", 3.0),
        5 => c(1000)
            .with_setting("t_min", 1e3)
            .with_setting("t_max", 1e6)
            .with_setting("grid_points", 13.0)
            .with_setting("ipc_depth", 2000.0)
            .with_tolerance("slope_target", 1.0 / 3.0)
            .with_tolerance("slope_abs", 0.05),
        6 => c(1000)
            .with_setting("t_min", 1e3)
            .with_setting("t_max", 1e6)
            .with_setting("grid_points", 13.0)
            .with_tolerance("slope_target", 0.5)
            .with_tolerance("slope_abs", 0.03),
        7 => c(1_000_000)
            .with_sizes(vec![1000])
            .with_setting("trim", 0.1)
            .with_setting("ipc_runs", 500.0)
            .with_tolerance("se_multiplier", 3.0)
            .with_tolerance("ks_max", 0.05),
        8 => c(100_000)
            .with_lambdas(vec![0.5, 2.0])
            .with_setting("mu_ipc_samples", 20_000.0)
            .with_setting("mass_cut", 1e-6)
            .with_tolerance("se_multiplier", 3.0),
        9 => c(100_000)
            .with_lambdas(vec![0.0, 1.0, 4.0])
            .with_setting("count_cut", 0.01)
            .with_setting("mass_cut", 1e-4)
            .with_tolerance("se_multiplier", 3.0),
        10 => c(10_000).with_sizes(vec![10_000]).with_tolerance("max_failures", 0.0),
        11 => c(40_000).with_sizes(vec![1000, 2000, 4000, 8000]),
        12 => c(400_000)
            .with_eps(vec![0.2, 0.1, 0.05, 0.025])
            .with_lambdas(vec![0.5, 1.0, 2.0, 4.0, 8.0]),
        13 => c(10_000)
            .with_sizes(vec![100_000])
            .with_setting("leaves", 2.0)
            .with_setting("excursion_grid", 16384.0)
            .with_setting("clock_time", 0.05)
            .with_setting("walk_replicates", 2000.0)
            .with_setting("lattice_step", 0.01)
            .with_setting("mass_cut", 1e-3)
            .with_setting("horizon", 1e3)
            .with_tolerance("ks_trees", 0.05)
            .with_tolerance("ks_projection", 0.07),
        _ => return Err(Error::Config(format!("no criterion {id}"))),
    };
    Ok(cfg)
}

/// Runs the criterion named by `config.experiment_id`.
pub fn run_criterion(config: &ExperimentConfig) -> Result<StatReport> {
    config.validate()?;
    let id = parse_id(&config.experiment_id)
        .ok_or_else(|| Error::Config(format!("{} is not a criterion", config.experiment_id)))?;
    let mut r = StatReport::new(config);
    let s = SeedStream::new(config.seed, &config.experiment_id);
    match id {
        1 => c1(config, &s, &mut r)?,
        2 => c2(config, &s, &mut r)?,
        3 => c3(config, &s, &mut r)?,
        4 => c4(config, &s, &mut r)?,
        5 => c5(config, &s, &mut r)?,
        6 => c6(config, &s, &mut r)?,
        7 => c7(config, &s, &mut r)?,
        8 => c8(config, &s, &mut r)?,
        9 => c9(config, &s, &mut r)?,
        10 => c10(config, &s, &mut r)?,
        11 => c11(config, &mut r)?,
        12 => c12(config, &mut r)?,
        13 => c13(config, &s, &mut r)?,
        _ => unreachable!("parse_id filters"),
    }
    Ok(r)
}

/// `total` draws of `f`, generated in chunks of `chunk` per stream.
fn chunked<T: Send>(
    stream: &SeedStream,
    total: usize,
    chunk: usize,
    f: impl Fn(&mut SimRng) -> T + Sync + Send,
) -> Vec<T> {
    let chunks = total.div_ceil(chunk);
    replicate_map(stream, chunks, |i, rng| {
        let len = chunk.min(total - i as usize * chunk);
        (0..len).map(|_| f(rng)).collect::<Vec<T>>()
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Mean and batch-means standard error (50 batches when possible).
fn mean_se(xs: &[f64]) -> (f64, f64) {
    if xs.len() >= 500 {
        batch_means(xs, 50).expect("enough samples")
    } else {
        mean_and_se(xs)
    }
}

fn within(est: f64, se: f64, exact: f64, k: f64) -> bool {
    (est - exact).abs() <= k * se
}

fn c1(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let k = cfg.tolerance("se_multiplier")?;
    let cap = cfg.count("size_cap")?;
    for p in [0.3, 0.5] {
        let params = PercolationParams::new(p, Substrate::TStar)?;
        // clusters beyond the cap contribute exp(-lambda cap) < 1e-40 and are counted as 0
        let sizes = chunked(
            &s.child(&format!("p={p}")),
            cfg.replicates,
            10_000,
            |rng| match sample_cluster_size(params, cap, rng) {
                ClusterSize::Finite(n) => n as f64,
                ClusterSize::AtLeast(_) => f64::INFINITY,
            },
        );
        for &lambda in cfg.lambda_grid()? {
            let xs: Vec<f64> = sizes.iter().map(|&n| (-lambda * n).exp()).collect();
            let (m, se) = mean_se(&xs);
            let exact = cluster_size_laplace(p, lambda)?;
            r.metric(format!("laplace p={p} lambda={lambda}"), Metric::se(m, se));
            r.check(
                format!("p={p} lambda={lambda}"),
                within(m, se, exact, k),
                "se_multiplier",
                format!("empirical {m:.6} exact {exact:.6} se {se:.2e}"),
            );
        }
    }
    Ok(())
}

fn c2(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let tol = cfg.tolerance("relative_error")?;
    let us = cfg.sizes()?;
    let cap = us.iter().max().copied().unwrap_or(0) + 1;
    let params = PercolationParams::critical_tstar();
    let sizes = chunked(s, cfg.replicates, 10_000, |rng| {
        match sample_cluster_size(params, cap, rng) {
            ClusterSize::Finite(n) => n,
            ClusterSize::AtLeast(_) => cap + 1,
        }
    });
    let n = sizes.len() as f64;
    let target = 1.0 / PI.sqrt();
    for &u in us {
        let p = sizes.iter().filter(|&&x| x > u).count() as f64 / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let c = (u as f64).sqrt() * p;
        r.metric(
            format!("sqrt(u) P[N > u], u={u}"),
            Metric::se(c, (u as f64).sqrt() * se),
        );
        r.check(
            format!("u={u}"),
            (c / target - 1.0).abs() <= tol,
            "relative_error",
            format!("{c:.5} vs pi^-1/2 = {target:.5} (relative {:+.3})", c / target - 1.0),
        );
    }
    Ok(())
}

/// Two-sided standard normal quantile by bisection on `erfc`.
fn normal_quantile_upper(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if libm::erfc(mid / SQRT_2) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c3(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let exact_tol = cfg.tolerance("exact_abs")?;
    let k = cfg.tolerance("se_multiplier")?;
    let alpha = cfg.tolerance("family_error_rate")?;
    let sizes = cfg.sizes()?;
    let results = try_replicate_map(&s.child("trees"), sizes.len(), |i, rng| {
        let n = sizes[i as usize];
        let t = sample_conditioned_cluster(n, rng)?;
        let exact = expected_exit_time_exact(&t);
        let adj = t.adjacency();
        let xs: Vec<f64> = (0..cfg.replicates)
            .map(|_| sample_sigma_tilde(&adj, rng) as f64)
            .collect();
        let (m, se) = mean_se(&xs);
        Ok((n, exact, m, se))
    })?;
    let worst_exact = results
        .iter()
        .map(|&(n, e, _, _)| (e - n as f64).abs())
        .fold(0.0, f64::max);
    r.metric(
        "max |E[sigma~] - |T||, exact solve",
        Metric::exact(worst_exact, exact_tol),
    );
    r.check(
        "exact solve",
        worst_exact <= exact_tol,
        "exact_abs",
        format!("worst deviation {worst_exact:.2e} over {} trees", results.len()),
    );
    let zs: Vec<f64> = results.iter().map(|&(n, _, m, se)| (m - n as f64) / se).collect();
    let pooled = zs.iter().sum::<f64>() / (zs.len() as f64).sqrt();
    let bound = normal_quantile_upper(alpha / zs.len() as f64);
    let max_z = zs.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let outside = zs.iter().filter(|z| z.abs() > k).count();
    r.metric("pooled z of Monte Carlo means", Metric::se(pooled, 1.0));
    r.metric("max |z| per tree", Metric::se(max_z, 1.0));
    r.check(
        "Monte Carlo means",
        pooled.abs() <= k && max_z <= bound,
        "se_multiplier",
        format!(
            "pooled z {pooled:+.3} (|z| <= {k}), max per-tree |z| {max_z:.3} <= {bound:.3} (Bonferroni), {outside} of {} trees beyond {k} SE",
            zs.len()
        ),
    );
    Ok(())
}

fn c4(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let k = cfg.tolerance("se_multiplier")?;
    let lambdas = cfg.lambda_grid()?.to_vec();
    let sizes = cfg.sizes()?;
    let rows = try_replicate_map(&s.child("trees"), sizes.len(), |i, rng| {
        let n = sizes[i as usize];
        let t = sample_conditioned_cluster(n, rng)?;
        let adj = t.adjacency();
        let sig: Vec<f64> = (0..cfg.replicates).map(|_| sample_sigma(&adj, rng) as f64).collect();
        let til: Vec<f64> = (0..cfg.replicates)
            .map(|_| sample_sigma_tilde(&adj, rng) as f64)
            .collect();
        Ok(lambdas
            .iter()
            .map(|&l| {
                let (nu, nu_se) = empirical_laplace(&sig, l);
                let (nt, nt_se) = empirical_laplace(&til, l);
                let pred = 2.0 * (-l).exp() / (3.0 - nu);
                let dpred = 2.0 * (-l).exp() / (3.0 - nu).powi(2);
                (n, l, nt, pred, nt_se.hypot(dpred * nu_se))
            })
            .collect::<Vec<_>>())
    })?;
    let mut worst = 0.0f64;
    let mut fails = 0;
    for (n, l, nt, pred, se) in rows.into_iter().flatten() {
        let z = (nt - pred) / se;
        worst = worst.max(z.abs());
        fails += usize::from(z.abs() > k);
        r.metric(
            format!("n={n} lambda={l}: empirical minus predicted"),
            Metric::se(nt - pred, se),
        );
    }
    r.check(
        "relation at every tree and lambda",
        fails == 0,
        "se_multiplier",
        format!(
            "{fails} of {} comparisons beyond {k} SE, largest |z| {worst:.3}",
            sizes.len() * lambdas.len()
        ),
    );
    Ok(())
}

fn exponent_check(
    r: &mut StatReport,
    label: &str,
    curves: &[Vec<f64>],
    grid: &[u64],
    target: f64,
    tol: f64,
) -> Result<()> {
    let t: Vec<f64> = grid.iter().map(|&x| x as f64).collect();
    let fit = displacement_exponent(curves, &t)?;
    r.metric(format!("{label} slope"), Metric::se(fit.slope, fit.stderr));
    r.check(
        format!("{label} slope"),
        (fit.slope - target).abs() <= tol,
        "slope_abs",
        format!(
            "slope {:.4} +- {:.4}, target {target:.4} +- {tol}",
            fit.slope, fit.stderr
        ),
    );
    Ok(())
}

fn time_grid(cfg: &ExperimentConfig) -> Result<Vec<u64>> {
    Ok(log_time_grid(
        cfg.setting("t_min")?,
        cfg.setting("t_max")?,
        cfg.count("grid_points")?,
    ))
}

fn c5(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let (target, tol) = (cfg.tolerance("slope_target")?, cfg.tolerance("slope_abs")?);
    let grid = time_grid(cfg)?;
    let iic = iic_running_max(&grid, cfg.replicates, &s.child("iic"));
    exponent_check(r, "IIC", &iic, &grid, target, tol)?;
    let depth = cfg.count("ipc_depth")?;
    let (ipc, reached) = ipc_running_max(&grid, depth, cfg.replicates, &s.child("ipc"))?;
    exponent_check(r, "IPC", &ipc, &grid, target, tol)?;
    r.metric("IPC largest backbone index reached", Metric::exact(reached as f64, 0.0));
    r.check(
        "IPC walk inside the invaded region",
        (reached as usize) < depth,
        "",
        format!("largest index {reached} < invasion depth {depth}"),
    );
    Ok(())
}

fn c6(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let grid = time_grid(cfg)?;
    let curves = srw_running_max(&grid, cfg.replicates, s);
    exponent_check(
        r,
        "simple random walk",
        &curves,
        &grid,
        cfg.tolerance("slope_target")?,
        cfg.tolerance("slope_abs")?,
    )
}

fn c7(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let k = cfg.tolerance("se_multiplier")?;
    let hits = chunked(&s.child("envelope"), cfg.replicates, 10_000, |rng| {
        let e = sample_envelope(0.5, 1.0, rng).expect("valid domain");
        f64::from(u8::from(e.value(1.0) > 1.0))
    });
    let (p, se) = mean_se(&hits);
    let exact = (-1.0f64).exp();
    r.metric("P[E_1 > 1]", Metric::se(p, se));
    r.check(
        "P[E_1 > 1] = 1/e",
        within(p, se, exact, k),
        "se_multiplier",
        format!("{p:.5} vs {exact:.5}, se {se:.2e}"),
    );
    let ks_max = cfg.tolerance("ks_max")?;
    let trim = cfg.setting("trim")?;
    let runs = cfg.count("ipc_runs")?;
    let ts = [0.5, 1.0];
    for &kk in cfg.sizes()? {
        let depth = (kk as f64 / trim).ceil() as usize;
        let stats = try_replicate_map(&s.child(&format!("ipc k={kk}")), runs, |_, rng| {
            envelope_statistics_until_depth(depth, usize::MAX, trim, &ts, rng)
        })?;
        for (j, &t) in ts.iter().enumerate() {
            let xs: Vec<f64> = stats.iter().map(|v| v[j]).collect();
            let ks = ks_one_sample(&xs, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-t * x).exp() })?;
            r.metric(format!("KS k(2M-1) vs Exp({t}), k={kk}"), Metric::ks(ks));
            r.check(
                format!("IPC backbone k={kk} t={t}"),
                ks.distance < ks_max,
                "ks_max",
                format!(
                    "KS {:.4} (p {:.3}) over {runs} runs at depth {depth}",
                    ks.distance, ks.p_value
                ),
            );
        }
    }
    Ok(())
}

fn c8(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let k = cfg.tolerance("se_multiplier")?;
    let lambdas = cfg.lambda_grid()?.to_vec();
    let mut fails = Vec::new();
    let mut total = 0;
    for delta in [0.5, 1.0 / SQRT_2, 2.0] {
        for gamma in [0.0, 1.0, SQRT_2] {
            let xs = chunked(
                &s.child(&format!("ig {delta} {gamma}")),
                cfg.replicates,
                10_000,
                |rng| sample_inverse_gaussian(delta, gamma, 1.0, rng),
            );
            for &l in &lambdas {
                let (m, se) = empirical_laplace(&xs, l);
                let exact = inverse_gaussian_laplace(delta, gamma, 1.0, l);
                r.metric(
                    format!("IG delta={delta:.4} gamma={gamma:.4} lambda={l}"),
                    Metric::se(m, se),
                );
                total += 1;
                if !within(m, se, exact, k) {
                    fails.push(format!(
                        "(delta {delta:.3}, gamma {gamma:.3}, lambda {l}): {m:.5} vs {exact:.5}"
                    ));
                }
            }
        }
    }
    r.check(
        "IG transform grid",
        fails.is_empty(),
        "se_multiplier",
        if fails.is_empty() {
            format!("{total} comparisons within {k} SE")
        } else {
            fails.join("; ")
        },
    );
    let env = EnvelopeProcess::from_levels(0.5, 2.0, vec![0.5, 1.0], vec![2.0, 1.0])?;
    let cut = cfg.setting("mass_cut")?;
    let draws = try_replicate_map(&s.child("mu-ipc"), cfg.count("mu_ipc_samples")?, |_, rng| {
        mu_ipc(&env, cut, rng)
    })?;
    let totals: Vec<f64> = draws.iter().map(|d| d.corrected_total()).collect();
    for &l in &lambdas {
        let (m, se) = empirical_laplace(&totals, l);
        let exact: f64 = env
            .intervals()
            .map(|(a, b, level)| mu_ipc_interval_laplace(level, b - a, l))
            .product();
        let bound = draws[0].laplace_error_bound(l);
        r.metric(format!("mu_IPC total mass transform lambda={l}"), Metric::se(m, se));
        r.check(
            format!("mu_IPC lambda={l}"),
            (m - exact).abs() <= k * se + bound,
            "se_multiplier",
            format!("{m:.5} vs composed {exact:.5}, se {se:.2e}, truncation {bound:.1e}"),
        );
    }
    Ok(())
}

fn c9(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let k = cfg.tolerance("se_multiplier")?;
    let h = cfg.setting("count_cut")?;
    let counts = try_replicate_map(&s.child("counts"), cfg.replicates.div_ceil(1000), |i, rng| {
        let len = 1000.min(cfg.replicates - i as usize * 1000);
        (0..len)
            .map(|_| Ok(sample_stable_ppp((0.0, 1.0), h, IIC_INTENSITY, 0.5, rng)?.measure.len() as f64))
            .collect::<Result<Vec<f64>>>()
    })?
    .concat();
    let (m, se) = mean_se(&counts);
    let exact = 1.0 / (PI * h).sqrt();
    r.metric(format!("atom count, h={h}"), Metric::se(m, se));
    r.check(
        "atom count mean",
        within(m, se, exact, k),
        "se_multiplier",
        format!("{m:.4} vs {exact:.4}, se {se:.2e}"),
    );
    let checks = stable_subordinator_marginal_check(
        cfg.lambda_grid()?,
        cfg.replicates,
        cfg.setting("mass_cut")?,
        &mut s.rng(1),
    )?;
    for c in checks {
        r.metric(
            format!("V_1 transform lambda={}", c.lambda),
            Metric::se(c.empirical, c.std_error),
        );
        r.check(
            format!("V_1 transform lambda={}", c.lambda),
            c.within(k),
            "se_multiplier",
            format!(
                "{:.5} vs exp(-sqrt(lambda)) = {:.5}, se {:.2e}, truncation {:.1e}",
                c.empirical, c.exact, c.std_error, c.truncation_bound
            ),
        );
    }
    Ok(())
}

fn c10(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let max_n = cfg.sizes()?[0];
    let failures: usize = try_replicate_map(s, cfg.replicates, |i, rng| {
        use rand::Rng;
        let n = rng.random_range(1..=max_n);
        let t = if i % 2 == 0 {
            sample_conditioned_cluster(n, rng)?
        } else {
            sample_uniform_tree(n, rng)?
        };
        let back = tree_from_search_depth(&search_depth(&t));
        Ok(usize::from(back.map_or(true, |b| b != t)))
    })?
    .into_iter()
    .sum();
    let allowed = cfg.tolerance("max_failures")?;
    r.metric("round-trip failures", Metric::exact(failures as f64, 0.0));
    r.check(
        "tree -> search depth -> tree",
        failures as f64 <= allowed,
        "max_failures",
        format!("{failures} failures over {} trees of size <= {max_n}", cfg.replicates),
    );
    Ok(())
}

fn c11(cfg: &ExperimentConfig, r: &mut StatReport) -> Result<()> {
    let rep = local_time_scaling(cfg.sizes()?, cfg.replicates, cfg.seed)?;
    for (n, &(m, se)) in rep.sizes.iter().zip(&rep.means) {
        r.metric(format!("mean n^-1/2 l, n={n}"), Metric::se(m, se));
    }
    for (w, ks) in rep.sizes.windows(2).zip(&rep.ks) {
        r.metric(format!("KS n={} vs {}", w[0], w[1]), Metric::ks(*ks));
    }
    let d: Vec<String> = rep.ks.iter().map(|k| format!("{:.4}", k.distance)).collect();
    r.check(
        "KS(n, 2n) strictly decreasing",
        rep.ks_decreasing,
        "",
        format!(
            "KS sequence [{}] with {} replicates per size",
            d.join(", "),
            cfg.replicates
        ),
    );
    Ok(())
}

fn c12(cfg: &ExperimentConfig, r: &mut StatReport) -> Result<()> {
    let rep = assumption_l_statistic(cfg.eps_grid()?, cfg.lambda_grid()?, cfg.replicates, cfg.seed)?;
    for l in &rep.levels {
        for &(lambda, v, se) in &l.curve {
            r.metric(format!("Psi eps={} lambda={lambda}", l.epsilon), Metric::se(v, se));
        }
    }
    let g: Vec<String> = rep.gaps.iter().map(|x| format!("{x:.4}")).collect();
    r.check(
        "sup-norm gaps strictly decreasing",
        rep.gaps_decreasing,
        "",
        format!("gaps [{}]", g.join(", ")),
    );
    r.check(
        "curves nonnegative, nondecreasing, concave",
        rep.shape_ok,
        "",
        "Laplace-exponent shape on the grid",
    );
    Ok(())
}

fn c13(cfg: &ExperimentConfig, s: &SeedStream, r: &mut StatReport) -> Result<()> {
    let leaves = cfg.count("leaves")?;
    let m = cfg.count("excursion_grid")?;
    let lb = try_replicate_map(&s.child("line-breaking"), cfg.replicates, |_, rng| {
        Ok(line_breaking(leaves, rng)?.total_length())
    })?;
    let ex = try_replicate_map(&s.child("excursion"), cfg.replicates, |_, rng| {
        let w = sample_excursion(m, rng)?;
        // line-breaking builds the tree coded by twice the excursion
        Ok(2.0 * reduced_tree_from_excursion(&w, leaves, rng)?.total_length())
    })?;
    let ks = ks_two_sample(&lb, &ex)?;
    let tol = cfg.tolerance("ks_trees")?;
    r.metric(format!("KS total length K={leaves}"), Metric::ks(ks));
    r.check(
        "line-breaking vs excursion-reduced total length",
        ks.distance < tol,
        "ks_trees",
        format!(
            "KS {:.4} (p {:.3}) over {} draws each",
            ks.distance, ks.p_value, cfg.replicates
        ),
    );
    let walk_reps = cfg.count("walk_replicates")?;
    let params = KProjectionParams {
        n_grid: cfg.sizes()?.to_vec(),
        leaves,
        clock_time: cfg.setting("clock_time")?,
        replicates: walk_reps,
        ssbm_replicates: walk_reps,
        lattice_step: cfg.setting("lattice_step")?,
        mass_cut: cfg.setting("mass_cut")?,
        horizon: cfg.setting("horizon")?,
        offspring_variance: cfg.offspring_variance,
    };
    let rep = k_projection_experiment(&params, cfg.seed)?;
    let tol = cfg.tolerance("ks_projection")?;
    let n = params.n_grid.last().copied().unwrap_or(0);
    r.metric(
        format!("KS projected walk n={n} vs K-SSBM"),
        Metric::ks(rep.versus_ssbm),
    );
    r.check(
        "K-projection vs K-SSBM",
        rep.versus_ssbm.distance < tol,
        "ks_projection",
        format!(
            "KS {:.4} (p {:.3}) over {walk_reps} runs each",
            rep.versus_ssbm.distance, rep.versus_ssbm.p_value
        ),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for id in CRITERIA {
            let c = preset(id, 1).unwrap();
            c.validate().unwrap();
            assert_eq!(parse_id(&c.experiment_id), Some(id));
        }
        assert!(preset(14, 1).is_err());
        assert_eq!(parse_id("criterion-0"), None);
        assert_eq!(parse_id("k-projection"), None);
    }

    #[test]
    fn normal_quantile() {
        assert!((normal_quantile_upper(0.05) - 1.959964).abs() < 1e-5);
        assert!((normal_quantile_upper(0.0027) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn chunking_covers_every_draw() {
        let s = SeedStream::new(1, "c");
        let xs = chunked(&s, 25, 10, |_| 1u8);
        assert_eq!(xs.len(), 25);
    }

    #[test]
    fn small_runs_are_deterministic() {
        let mut c = preset(10, 5).unwrap();
        c.replicates = 20;
        c.sizes = Some(vec![200]);
        let a = run_criterion(&c).unwrap();
        let b = run_criterion(&c).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.passed());
        let mut c1 = preset(1, 5).unwrap();
        c1.replicates = 2000;
        assert_eq!(run_criterion(&c1).unwrap().criteria.len(), 8);
    }
}
