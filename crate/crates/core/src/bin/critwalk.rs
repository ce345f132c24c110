use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;

use critwalk::cluster::{sample_conditioned_cluster, sample_uniform_tree};
use critwalk::continuum::{
    k_ssbm_simulate, line_breaking, sample_branch_mass_measure, ssbm_simulate, CrtFactory, SsbmSettings, TrapSize,
    TreeFamily,
};
use critwalk::harness::verify::{self, CRITERIA};
use critwalk::harness::{self, ExperimentConfig, StatReport};
use critwalk::infinite::{invade, sample_envelope, LazyIic};
use critwalk::io::{
    write_file, write_ipc_edges, write_local_time, write_measure, write_skeleton, write_ssbm_path, write_trajectory,
    write_walk,
};
use critwalk::rng::{rng_from_seed, SimRng};
use critwalk::stoch::{sample_stable_ppp, IIC_INTENSITY};
use critwalk::tree::search_depth;
use critwalk::walk::{local_time_root, rtrw, walk, Domain, IicLandscape, RTRWTrajectory};
use critwalk::Result;

#[derive(Parser)]
#[command(
    name = "critwalk",
    version,
    about = "Critical percolation trees, trapped walks and their scaling limits"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// JSON experiment config (used by `verify`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the replicate count of `verify` runs.
    #[arg(long, global = true)]
    replicates: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeKind {
    /// Critical binary cluster conditioned on its size.
    Critical,
    /// Uniform ordered tree.
    Uniform,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a tree; writes its search-depth curve and parenthesis word.
    GenTree {
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, value_enum, default_value_t = TreeKind::Critical)]
        kind: TreeKind,
    },
    /// Walk on the incipient infinite cluster; writes the projected trajectory.
    Iic {
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Keep every `stride`-th step.
        #[arg(long, default_value_t = 100)]
        stride: u64,
    },
    /// Grow invasion percolation; writes the invaded edges.
    Ipc {
        #[arg(long, default_value_t = 10_000)]
        vertices: usize,
    },
    /// Sample the envelope process on `[x-min, x-max]`.
    Envelope {
        #[arg(long, default_value_t = 0.01)]
        x_min: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
    },
    /// Simple random walk on a sampled tree; writes the path and root local time.
    Walk {
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = TreeKind::Critical)]
        kind: TreeKind,
    },
    /// Randomly trapped walk with critical-branch traps.
    Rtrw {
        #[arg(long, default_value_t = 1e5)]
        horizon: f64,
        #[arg(long)]
        half_line: bool,
    },
    /// Half-line SSBM with a stable trap field.
    Ssbm {
        #[arg(long, default_value_t = 5.0)]
        length: f64,
        #[arg(long, default_value_t = 1e-3)]
        cut: f64,
        #[arg(long, default_value_t = 0.01)]
        lattice_step: f64,
        #[arg(long, default_value_t = 1.0)]
        clock_time: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// SSBM on a K-leaf line-breaking tree.
    Kssbm {
        #[arg(long, default_value_t = 2)]
        leaves: usize,
        #[arg(long, default_value_t = 10_000)]
        resolution: usize,
        #[arg(long, default_value_t = 1e-3)]
        cut: f64,
        #[arg(long, default_value_t = 0.01)]
        lattice_step: f64,
        #[arg(long, default_value_t = 0.1)]
        clock_time: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Run acceptance criteria (`1`..`13`, `all`) or a named experiment.
    Verify {
        #[arg(default_value = "all")]
        target: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    let mut rng = rng_from_seed(g.seed);
    let out = &g.out;
    match &cli.command {
        Command::GenTree { size, kind } => {
            let t = sample_tree(*kind, *size, &mut rng)?;
            let curve = search_depth(&t);
            let path = out.join("tree.search_depth.csv");
            write_file(&path, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["index", "depth"])?;
                for (i, d) in curve.values.iter().enumerate() {
                    c.serialize((i, d))?;
                }
                c.flush()?;
                Ok(())
            })?;
            written(&path);
            let path = out.join("tree.parens.txt");
            std::fs::write(&path, t.to_parens())?;
            written(&path);
            println!("vertices {} height {}", t.vertex_count(), t.height());
        }
        Command::Iic { steps, stride } => {
            let mut g = LazyIic::new();
            let mut v = 0u32;
            let mut rows = vec![(0u64, 0u32)];
            for t in 1..=*steps {
                v = g.step(v, &mut rng);
                if t % stride.max(&1) == 0 || t == *steps {
                    rows.push((t, g.phi(v)));
                }
            }
            let path = out.join("iic.trajectory.csv");
            write_file(&path, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["time", "site"])?;
                for r in &rows {
                    c.serialize(r)?;
                }
                c.flush()?;
                Ok(())
            })?;
            written(&path);
            println!("vertices explored {}", g.vertex_count());
        }
        Command::Ipc { vertices } => {
            let inst = invade(*vertices, &mut rng)?;
            let path = out.join("ipc.edges.csv");
            write_file(&path, |w| write_ipc_edges(w, &inst))?;
            written(&path);
            println!("height {}", inst.tree.height());
        }
        Command::Envelope { x_min, x_max } => {
            let e = sample_envelope(*x_min, *x_max, &mut rng)?;
            let path = out.join("envelope.csv");
            write_file(&path, |w| {
                let mut c = csv::Writer::from_writer(w);
                c.write_record(["x", "value"])?;
                for (a, _, level) in e.intervals() {
                    c.serialize((a, level))?;
                }
                c.serialize((*x_max, e.value(*x_max)))?;
                c.flush()?;
                Ok(())
            })?;
            written(&path);
        }
        Command::Walk { size, steps, kind } => {
            let t = sample_tree(*kind, *size, &mut rng)?;
            let p = walk(&t.adjacency(), *steps, &mut rng);
            let path = out.join("walk.trajectory.csv");
            write_file(&path, |w| write_walk(w, &p))?;
            written(&path);
            let path = out.join("walk.local_time.csv");
            let stride = (*steps / 10_000).max(1);
            write_file(&path, |w| write_local_time(w, &local_time_root(&p), stride))?;
            written(&path);
        }
        Command::Rtrw { horizon, half_line } => {
            let mut land = IicLandscape::new(*half_line, 1 << 20);
            let domain = if *half_line { Domain::HalfLine } else { Domain::Integers };
            let tr: RTRWTrajectory = rtrw(&mut land, *horizon, domain, &mut rng)?;
            let path = out.join("rtrw.trajectory.csv");
            write_file(&path, |w| write_trajectory(w, &tr))?;
            written(&path);
        }
        Command::Ssbm {
            length,
            cut,
            lattice_step,
            clock_time,
            points,
        } => {
            let field = sample_stable_ppp((0.0, *length), *cut, IIC_INTENSITY, 0.5, &mut rng)?;
            let factory = CrtFactory {
                family: TreeFamily::CriticalBinary,
                size: TrapSize::Proportional {
                    resolution: 1e4,
                    min: 1,
                    max: usize::MAX,
                },
            };
            let settings = settings(*lattice_step, *clock_time, *points, &mut rng);
            let p = ssbm_simulate(&field.measure, field.deficit_mean / length, &factory, &settings)?;
            let path = out.join("ssbm.traps.csv");
            write_file(&path, |w| write_measure(w, &field.measure))?;
            written(&path);
            let path = out.join("ssbm.path.csv");
            write_file(&path, |w| write_ssbm_path(w, &p))?;
            written(&path);
        }
        Command::Kssbm {
            leaves,
            resolution,
            cut,
            lattice_step,
            clock_time,
            points,
        } => {
            let sk = line_breaking(*leaves, &mut rng)?;
            let masses = sample_branch_mass_measure(&sk, *resolution, &mut rng)?;
            let factory = CrtFactory {
                family: TreeFamily::PlantedUniform,
                size: TrapSize::Proportional {
                    resolution: *resolution as f64,
                    min: 1,
                    max: usize::MAX,
                },
            };
            let settings = settings(*lattice_step, *clock_time, *points, &mut rng);
            let p = k_ssbm_simulate(&sk, &masses, *cut, &factory, &settings)?;
            let path = out.join("kssbm.skeleton.csv");
            write_file(&path, |w| write_skeleton(w, &sk))?;
            written(&path);
            let path = out.join("kssbm.path.csv");
            write_file(&path, |w| write_ssbm_path(w, &p))?;
            written(&path);
        }
        Command::Verify { target } => return verify_cmd(g, target),
    }
    Ok(true)
}

fn sample_tree(kind: TreeKind, n: usize, rng: &mut SimRng) -> Result<critwalk::tree::OrderedRootedTree> {
    match kind {
        TreeKind::Critical => sample_conditioned_cluster(n, rng),
        TreeKind::Uniform => sample_uniform_tree(n, rng),
    }
}

fn settings(lattice_step: f64, clock_time: f64, points: usize, rng: &mut SimRng) -> SsbmSettings {
    let points = points.max(1);
    SsbmSettings {
        lattice_step,
        horizon: 1e4,
        clock_times: (1..=points).map(|i| clock_time * i as f64 / points as f64).collect(),
        seed: rng.next_u64(),
    }
}

fn verify_cmd(g: &Global, target: &str) -> Result<bool> {
    let configs: Vec<ExperimentConfig> = match (&g.config, target) {
        (Some(path), _) => vec![ExperimentConfig::load(path)?],
        (None, "all") => CRITERIA
            .iter()
            .map(|&n| verify::preset(n, g.seed))
            .collect::<Result<_>>()?,
        (None, t) => vec![harness::preset(t, g.seed)?],
    };
    let mut all = true;
    for mut cfg in configs {
        if let Some(r) = g.replicates {
            cfg.replicates = r;
        }
        cfg.output_dir = g.out.clone();
        let out = harness::run(&cfg)?;
        print_report(&out.report);
        all &= out.report.passed();
    }
    Ok(all)
}

fn print_report(r: &StatReport) {
    let title = verify::parse_id(&r.experiment_id).map(verify::title).unwrap_or("");
    println!("{} {title}", r.experiment_id);
    for c in &r.criteria {
        println!("  {} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
}
