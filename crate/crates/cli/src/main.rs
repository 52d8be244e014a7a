//! `graphgen`: datasets, training, sampling, baselines and evaluation for GraphRNN.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use graphrnn::baselines::{fit_ba, fit_er, sample_baseline, BaselineFit};
use graphrnn::config::{Auto, ExperimentConfig, ModelSettings};
use graphrnn::datasets::DatasetKind;
use graphrnn::eval::{clustering_coefficients, evaluate_sets, orbit_counts, EvalParams, NUM_ORBITS};
use graphrnn::io::{read_graphs, write_atomic, write_graphs};
use graphrnn::pipeline::{choose_m, run_pipeline, run_robustness, train_model, RobustnessConfig};
use graphrnn::{checkpoint, par, Error, Graph, Result, Variant};

#[derive(Parser)]
#[command(name = "graphgen", version, about = "Train GraphRNN models and evaluate generated graphs")]
struct Cli {
    /// Master seed; overrides any `seed` in a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Er,
    Ba,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset into `<out>/<kind>.txt`.
    Datasets {
        /// Config file; only the dataset keys and `seed` are used.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Estimate the adjacency-row width M for a graph set.
    EstimateM {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0.999)]
        percentile: f64,
    },
    /// Train a model and write the lowest-loss checkpoint to `--out`.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        variant: Option<Variant>,
        /// `auto` or a positive integer.
        #[arg(long)]
        m: Option<Auto>,
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Sample graphs from a checkpoint into `<out>/graphs.txt`.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        count: usize,
    },
    /// Fit a baseline to a graph set and sample from it into `<out>/<kind>.txt`.
    Baseline {
        #[arg(long, value_enum)]
        kind: BaselineKind,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        count: usize,
    },
    /// MMD report (JSON) between a test set and a generated set.
    Eval {
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        gen: PathBuf,
        /// Config file supplying kernel settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Mean per-graph NLL of a graph set under a checkpoint.
    Nll {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 4)]
        orderings: usize,
    },
    /// Per-graph degree, clustering and orbit summaries as CSV.
    Stats {
        #[arg(long)]
        data: PathBuf,
    },
    /// Edge-perturbation sweep on B-A graphs; writes `robustness.csv`.
    Robustness {
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        train_count: Option<usize>,
        #[arg(long)]
        test_count: Option<usize>,
    },
    /// Full experiment from a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        steps: Option<u64>,
    },
}

fn need_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref().ok_or_else(|| Error::InvalidArgument("--out is required for this command".into()))
}

fn need_input(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{} does not exist", path.display())))
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `text` to `out` if given, otherwise prints it.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stats_csv(graphs: &[Graph]) -> String {
    let mut s = String::from("graph,nodes,edges,mean_degree,mean_clustering");
    for o in 0..NUM_ORBITS {
        write!(s, ",orbit_{o}").unwrap();
    }
    s.push('\n');
    let rows = par::map(graphs, |g| {
        let cc = clustering_coefficients(g);
        (orbit_counts(g), cc.iter().sum::<f64>() / cc.len() as f64)
    });
    for (i, (g, (orbits, cc))) in graphs.iter().zip(rows).enumerate() {
        let mean_degree = 2.0 * g.edge_count() as f64 / g.n() as f64;
        write!(s, "{i},{},{},{mean_degree},{cc}", g.n(), g.edge_count()).unwrap();
        for o in orbits {
            write!(s, ",{o}").unwrap();
        }
        s.push('\n');
    }
    s
}

fn run(cli: Cli) -> Result<()> {
    let inputs: Vec<&Path> = match &cli.command {
        Command::Datasets { spec } => vec![spec],
        Command::EstimateM { data, .. } | Command::Stats { data } | Command::Baseline { data, .. } => vec![data],
        Command::Train { data, config, .. } => std::iter::once(data).chain(config).collect(),
        Command::Sample { model, .. } => vec![model],
        Command::Eval { test, gen, config } => [test, gen].into_iter().chain(config).collect(),
        Command::Nll { model, data, .. } => vec![model, data],
        Command::Robustness { .. } => vec![],
        Command::Pipeline { config, .. } => vec![config],
    }
    .into_iter()
    .map(PathBuf::as_path)
    .collect();
    for path in inputs {
        need_input(path)?;
    }
    par::set_jobs(cli.jobs)?;
    let seed = cli.seed;
    match cli.command {
        Command::Datasets { spec } => {
            let out = need_out(&cli.out)?;
            let mut cfg = ExperimentConfig::load(&spec)?;
            cfg.dataset.seed = seed.unwrap_or(cfg.seed);
            let graphs = cfg.dataset.generate()?;
            write_graphs(&out.join(format!("{}.txt", cfg.dataset.kind)), &graphs)?;
            eprintln!("wrote {} {} graphs to {}", graphs.len(), cfg.dataset.kind, out.display());
        }
        Command::EstimateM { data, trials, percentile } => {
            let graphs = read_graphs(&data)?;
            let m = graphrnn::estimate_m(&graphs, trials, percentile, &mut par::rng_from_seed(seed.unwrap_or(0)))?;
            emit(&cli.out, &format!("{m}\n"))?;
        }
        Command::Train { data, config, variant, m, steps } => {
            let out = need_out(&cli.out)?;
            let mut cfg = match &config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::for_dataset(DatasetKind::Grid),
            };
            if let Some(v) = variant {
                cfg.model = ModelSettings { variant: v, ..cfg.model };
            }
            if let Some(m) = m {
                cfg.m = m;
            }
            if let Some(s) = steps {
                cfg.train.steps = s;
            }
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.validate()?;
            let graphs = read_graphs(&data)?;
            if graphs.is_empty() {
                return Err(Error::InvalidArgument(format!("{} holds no graphs", data.display())));
            }
            let seeds = par::child_seeds(&mut par::rng_from_seed(cfg.seed), 2);
            let choice = choose_m(&cfg, &graphs, seeds[0])?;
            eprintln!("m = {} ({})", choice.m, choice.source);
            let (model, log) = train_model(&cfg.model, &cfg.train, choice.m, &graphs, seeds[1], None)?;
            checkpoint::save(out, &model)?;
            eprintln!("saved {} (best step {:?}) to {}", model.num_params(), log.best_step, out.display());
        }
        Command::Sample { model, count } => {
            let out = need_out(&cli.out)?;
            let model = checkpoint::load(&model)?;
            let graphs = model.sample_graphs(count, &mut par::rng_from_seed(seed.unwrap_or(0)))?;
            write_graphs(&out.join("graphs.txt"), &graphs)?;
        }
        Command::Baseline { kind, data, count } => {
            let out = need_out(&cli.out)?;
            let graphs = read_graphs(&data)?;
            let (fit, name) = match kind {
                BaselineKind::Er => (BaselineFit::Er(fit_er(&graphs)?), "er"),
                BaselineKind::Ba => (BaselineFit::Ba(fit_ba(&graphs)?), "ba"),
            };
            let sampled = sample_baseline(&fit, count, &mut par::rng_from_seed(seed.unwrap_or(0)))?;
            write_graphs(&out.join(format!("{name}.txt")), &sampled)?;
            write_atomic(&out.join(format!("{name}_fit.json")), to_json(&fit).as_bytes())?;
        }
        Command::Eval { test, gen, config } => {
            let params = match &config {
                Some(p) => ExperimentConfig::load(p)?.eval,
                None => EvalParams::default(),
            };
            let (test, gen) = (read_graphs(&test)?, read_graphs(&gen)?);
            let report = evaluate_sets(&test, &gen, &params)?;
            emit(&cli.out, &to_json(&report))?;
        }
        Command::Nll { model, data, orderings } => {
            let model = checkpoint::load(&model)?;
            let graphs = read_graphs(&data)?;
            let nll = model.dataset_nll(&graphs, orderings, seed.unwrap_or(0))?;
            let report = serde_json::json!({ "nll": nll, "orderings": orderings, "graphs": graphs.len() });
            emit(&cli.out, &to_json(&report))?;
        }
        Command::Stats { data } => {
            let graphs = read_graphs(&data)?;
            emit(&cli.out, &stats_csv(&graphs))?;
        }
        Command::Robustness { steps, train_count, test_count } => {
            let out = need_out(&cli.out)?;
            let mut cfg = RobustnessConfig { seed: seed.unwrap_or(0), ..Default::default() };
            if let Some(s) = steps {
                cfg.train.steps = s;
            }
            cfg.train_count = train_count.unwrap_or(cfg.train_count);
            cfg.test_count = test_count.unwrap_or(cfg.test_count);
            cfg.validate()?;
            let sweep = run_robustness(&cfg, Some(out))?;
            print!("{}", sweep.to_csv());
        }
        Command::Pipeline { config, steps } => {
            let out = need_out(&cli.out)?;
            let mut cfg = ExperimentConfig::load(&config)?;
            cfg.seed = seed.unwrap_or(cfg.seed);
            if let Some(s) = steps {
                cfg.train.steps = s;
            }
            let r = run_pipeline(&cfg, out)?;
            for (name, rep) in &r.reports {
                println!("{name}: degree {:.4e} clustering {:.4e} orbit {:.4e}", rep.degree_mmd, rep.clustering_mmd, rep.orbit_mmd);
            }
            println!("nll: train {:.4} test {:.4}", r.nll.train_nll, r.nll.test_nll);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
