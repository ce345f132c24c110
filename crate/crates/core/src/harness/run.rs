use std::path::PathBuf;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiments::{
    assumption_l_statistic, ipc_envelope_experiment, k_projection_experiment, local_time_scaling, IpcEnvelopeParams,
    KProjectionParams,
};
use super::report::{Metric, StatReport};
use super::verify;
use crate::error::{Error, Result};
use crate::io::{write_file, write_laplace_curve};

/// Experiment ids accepted by [`run`] besides `criterion-N`.
pub const EXPERIMENTS: [&str; 4] = ["assumption-l", "ipc-envelope", "local-time", "k-projection"];

/// Default config of a named experiment.
pub fn experiment_preset(id: &str, seed: u64) -> Result<ExperimentConfig> {
    let c = |reps| ExperimentConfig::new(id, seed, reps);
    let cfg = match id {
        "assumption-l" => c(100_000)
            .with_eps(vec![0.2, 0.1, 0.05, 0.025])
            .with_lambdas(vec![0.5, 1.0, 2.0, 4.0, 8.0]),
        "ipc-envelope" => c(200)
            .with_sizes(vec![250, 500, 1000])
            .with_setting("trim", 0.1)
            .with_setting("alt_trim", 0.2)
            .with_setting("v_lambda", 1.0)
            .with_setting("v_runs", 2000.0)
            .with_eps(vec![0.02, 0.01, 0.005])
            .with_tolerance("ks_max", 0.05)
            .with_tolerance("trim_sensitivity", 0.02),
        "local-time" => c(10_000).with_sizes(vec![1000, 2000, 4000, 8000]),
        "k-projection" => c(1000)
            .with_sizes(vec![12_500, 25_000, 50_000, 100_000])
            .with_setting("leaves", 1.0)
            .with_setting("clock_time", 0.05)
            .with_setting("lattice_step", 0.01)
            .with_setting("mass_cut", 1e-3)
            .with_setting("horizon", 1e3)
            .with_tolerance("ks_projection", 0.07),
        _ => return Err(Error::Config(format!("unknown experiment {id}"))),
    };
    Ok(cfg)
}

/// Default config for a criterion number or an experiment name.
pub fn preset(id: &str, seed: u64) -> Result<ExperimentConfig> {
    match id.parse::<u8>() {
        Ok(n) => verify::preset(n, seed),
        Err(_) => match verify::parse_id(id) {
            Some(n) => verify::preset(n, seed),
            None => experiment_preset(id, seed),
        },
    }
}

/// Report and data files written by one run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: StatReport,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct MetricRow<'a> {
    name: &'a str,
    value: f64,
    uncertainty: f64,
    kind: super::report::Uncertainty,
}

/// Runs the experiment named in `config` and writes `<id>.json`,
/// `<id>.metrics.csv` and any raw data files into `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let (report, files) = execute(config)?;
    let dir = &config.output_dir;
    let mut written = vec![report.write(dir)?];
    let path = dir.join(format!("{}.metrics.csv", config.experiment_id));
    write_file(&path, |w| {
        let mut out = csv::Writer::from_writer(w);
        for (name, m) in &report.metrics {
            out.serialize(MetricRow {
                name,
                value: m.value,
                uncertainty: m.uncertainty,
                kind: m.kind,
            })?;
        }
        out.flush()?;
        Ok(())
    })?;
    written.push(path);
    for (name, data) in files {
        let path = dir.join(name);
        std::fs::write(&path, data)?;
        written.push(path);
    }
    Ok(RunOutput { report, files: written })
}

/// Raw outputs of a run as `(file name, bytes)`.
pub type Artifacts = Vec<(String, Vec<u8>)>;

/// Runs without touching the file system; returns the report and the raw
/// CSV files as `(file name, contents)`.
pub fn execute(config: &ExperimentConfig) -> Result<(StatReport, Artifacts)> {
    config.validate()?;
    if verify::parse_id(&config.experiment_id).is_some() {
        return Ok((verify::run_criterion(config)?, Vec::new()));
    }
    match config.experiment_id.as_str() {
        "assumption-l" => assumption_l(config),
        "ipc-envelope" => ipc_envelope(config),
        "local-time" => local_time(config),
        "k-projection" => k_projection(config),
        other => Err(Error::Config(format!("unknown experiment {other}"))),
    }
}

fn csv_bytes<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn assumption_l(cfg: &ExperimentConfig) -> Result<(StatReport, Artifacts)> {
    let rep = assumption_l_statistic(cfg.eps_grid()?, cfg.lambda_grid()?, cfg.replicates, cfg.seed)?;
    let mut r = StatReport::new(cfg);
    let mut files = Vec::new();
    for l in &rep.levels {
        for &(lambda, v, se) in &l.curve {
            r.metric(format!("Psi eps={} lambda={lambda}", l.epsilon), Metric::se(v, se));
        }
        let mut buf = Vec::new();
        let curve: Vec<(f64, f64)> = l.curve.iter().map(|p| (p.0, p.1)).collect();
        write_laplace_curve(&mut buf, &curve)?;
        files.push((format!("assumption-l.psi.eps={}.csv", l.epsilon), buf));
    }
    for (i, g) in rep.gaps.iter().enumerate() {
        r.metric(format!("gap {i}"), Metric::exact(*g, 0.0));
    }
    r.check(
        "gaps strictly decreasing",
        rep.gaps_decreasing,
        "",
        format!("{:?}", rep.gaps),
    );
    r.check("curve shape", rep.shape_ok, "", "nonnegative, nondecreasing, concave");
    Ok((r, files))
}

fn ipc_envelope(cfg: &ExperimentConfig) -> Result<(StatReport, Artifacts)> {
    let params = IpcEnvelopeParams {
        k_grid: cfg.sizes()?.to_vec(),
        trim: cfg.setting("trim")?,
        alt_trim: cfg.setting("alt_trim").ok(),
        ts: vec![0.5, 1.0],
        runs: cfg.replicates,
        v_eps_grid: cfg.eps_grid.clone().unwrap_or_default(),
        v_lambda: cfg.setting("v_lambda")?,
        v_runs: cfg.count("v_runs")?,
    };
    let rep = ipc_envelope_experiment(&params, cfg.seed)?;
    let mut r = StatReport::new(cfg);
    let ks_max = cfg.tolerance("ks_max")?;
    for e in &rep.ks {
        r.metric(format!("KS k={} t={}", e.k, e.t), Metric::ks(e.ks));
        r.check(
            format!("k={} t={}", e.k, e.t),
            e.ks.distance < ks_max,
            "ks_max",
            format!("KS {:.4} at depth {}", e.ks.distance, e.depth),
        );
    }
    let sens_max = cfg.tolerance("trim_sensitivity")?;
    for &(k, t, d) in &rep.trim_sensitivity {
        r.metric(format!("trim sensitivity k={k} t={t}"), Metric::exact(d, 0.0));
        r.check(
            format!("trim sensitivity k={k} t={t}"),
            d < sens_max,
            "trim_sensitivity",
            format!("KS change {d:.4}"),
        );
    }
    for &(eps, v, se) in &rep.v_transform {
        r.metric(format!("V transform eps={eps}"), Metric::se(v, se));
    }
    if !rep.v_transform.is_empty() {
        r.check(
            "V transform stable across eps",
            rep.v_stable,
            "",
            "consecutive levels within 3 combined SE",
        );
    }
    let rows = rep
        .ks
        .iter()
        .map(|e| (e.k, e.depth, e.trim, e.t, e.ks.distance, e.ks.p_value));
    let files = vec![(
        "ipc-envelope.ks.csv".to_string(),
        csv_bytes(&["k", "depth", "trim", "t", "ks", "pValue"], rows)?,
    )];
    Ok((r, files))
}

fn local_time(cfg: &ExperimentConfig) -> Result<(StatReport, Artifacts)> {
    let rep = local_time_scaling(cfg.sizes()?, cfg.replicates, cfg.seed)?;
    let mut r = StatReport::new(cfg);
    for (n, &(m, se)) in rep.sizes.iter().zip(&rep.means) {
        r.metric(format!("mean n={n}"), Metric::se(m, se));
    }
    for (w, ks) in rep.sizes.windows(2).zip(&rep.ks) {
        r.metric(format!("KS n={} vs {}", w[0], w[1]), Metric::ks(*ks));
    }
    r.check(
        "KS strictly decreasing",
        rep.ks_decreasing,
        "",
        format!("{:?}", rep.ks.iter().map(|k| k.distance).collect::<Vec<_>>()),
    );
    Ok((r, Vec::new()))
}

fn k_projection(cfg: &ExperimentConfig) -> Result<(StatReport, Artifacts)> {
    let params = KProjectionParams {
        n_grid: cfg.sizes()?.to_vec(),
        leaves: cfg.count("leaves")?,
        clock_time: cfg.setting("clock_time")?,
        replicates: cfg.replicates,
        ssbm_replicates: cfg.replicates,
        lattice_step: cfg.setting("lattice_step")?,
        mass_cut: cfg.setting("mass_cut")?,
        horizon: cfg.setting("horizon")?,
        offspring_variance: cfg.offspring_variance,
    };
    let rep = k_projection_experiment(&params, cfg.seed)?;
    let mut r = StatReport::new(cfg);
    for (w, ks) in params.n_grid.windows(2).zip(&rep.stability) {
        r.metric(format!("KS n={} vs {}", w[0], w[1]), Metric::ks(*ks));
    }
    let d: Vec<f64> = rep.stability.iter().map(|k| k.distance).collect();
    if params.leaves == 1 && d.len() >= 2 {
        r.check(
            "n-doubling KS decreasing",
            d.windows(2).all(|w| w[1] < w[0]),
            "",
            format!("{d:?}"),
        );
    }
    let tol = cfg.tolerance("ks_projection")?;
    r.metric("KS versus K-SSBM", Metric::ks(rep.versus_ssbm));
    r.check(
        "K-projection vs K-SSBM",
        rep.versus_ssbm.distance < tol,
        "ks_projection",
        format!("KS {:.4}", rep.versus_ssbm.distance),
    );
    let mut rows: Vec<(String, usize, f64)> = Vec::new();
    for (n, xs) in &rep.discrete {
        rows.extend(xs.iter().map(|&x| ("discrete".to_string(), *n, x)));
    }
    rows.extend(rep.ssbm.iter().map(|&x| ("kssbm".to_string(), 0, x)));
    let files = vec![(
        "k-projection.positions.csv".to_string(),
        csv_bytes(&["source", "n", "position"], rows)?,
    )];
    Ok((r, files))
}
