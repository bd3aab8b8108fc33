//! `folkrec <algorithm> <dataset_dir> <sample_name> [options]` plus the
//! `stats`, `gen`, `export` and `serve` subcommands.

use std::ffi::OsString;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};
use folkrec_core::dataset::{p_core_prune, temporal_split};
use folkrec_core::synth::generate_synthetic;
use folkrec_core::{Algorithm, AlgorithmConfig, EvalConfig, Folksonomy};

use crate::io;

pub const ALGORITHM_KEYS: [&str; 9] = ["mp", "mr", "bll", "bll_ac", "cf", "folkrank", "cf_r", "cirtt", "sustain"];

fn algorithm_parser() -> impl TypedValueParser<Value = Algorithm> {
    PossibleValuesParser::new(ALGORITHM_KEYS).map(|key: String| Algorithm::from_key(&key).expect("registered key"))
}

#[derive(Debug, Parser)]
#[command(
    name = "folkrec",
    version,
    about = "Evaluate tag and resource recommenders on folksonomy datasets",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub eval: EvalArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Algorithm to evaluate.
    #[arg(required = true, value_parser = algorithm_parser())]
    pub algorithm: Option<Algorithm>,
    /// Directory holding `<sample_name>.txt`.
    #[arg(required = true)]
    pub dataset_dir: Option<PathBuf>,
    /// Dataset file name without the `.txt` extension.
    #[arg(required = true)]
    pub sample_name: Option<String>,
    /// Apply p-core pruning before splitting.
    #[arg(long)]
    pub pcore: Option<usize>,
    /// Comma-separated metric cutoffs.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10, 20])]
    pub cutoffs: Vec<usize>,
    /// Headline cutoff; added to the cutoffs if missing.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// BLL decay exponent.
    #[arg(long, default_value_t = 0.5)]
    pub d: f64,
    /// BLL hybrid weight.
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// CF neighborhood size.
    #[arg(long, default_value_t = 20)]
    pub knn: usize,
    /// FolkRank damping.
    #[arg(long, default_value_t = 0.7)]
    pub lambda: f64,
    /// Seed for stochastic components; every registered algorithm is
    /// currently deterministic.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Metrics output path (default `<dataset_dir>/metrics/<sample>_<algorithm>.txt`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dataset statistics.
    Stats {
        path: PathBuf,
        #[arg(long)]
        pcore: Option<usize>,
    },
    /// Generate a synthetic dataset.
    Gen {
        #[arg(long, default_value_t = 200)]
        users: usize,
        #[arg(long, default_value_t = 500)]
        resources: usize,
        #[arg(long, default_value_t = 300)]
        tags: usize,
        #[arg(long, default_value_t = 5000)]
        posts: usize,
        #[arg(long, default_value_t = 0.8)]
        recency_bias: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a dataset as `user<TAB>resource<TAB>tag` triples.
    Export {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        pcore: Option<usize>,
    },
    /// Run the recommendation service.
    Serve {
        /// Dataset to seed the store with.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Default algorithm for recommendation requests.
        #[arg(long, default_value = "bll_ac", value_parser = algorithm_parser())]
        algorithm: Algorithm,
        /// Append-only online log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Directory of static UI assets served at `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

impl EvalArgs {
    pub fn algorithm_config(&self) -> AlgorithmConfig {
        let mut cfg = AlgorithmConfig::default();
        cfg.bll.d = self.d;
        cfg.bll.beta = self.beta;
        cfg.cf.k_nn = self.knn;
        cfg.folkrank.lambda = self.lambda;
        cfg
    }

    pub fn eval_config(&self) -> EvalConfig {
        let mut cutoffs = self.cutoffs.clone();
        if !cutoffs.contains(&self.k) {
            cutoffs.push(self.k);
        }
        cutoffs.sort_unstable();
        cutoffs.dedup();
        EvalConfig { cutoffs, primary_k: self.k }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.command {
        Some(cmd) => run_command(cmd),
        None => run_eval(&cli.eval),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("folkrec: {msg}");
    code
}

pub fn metrics_path(dataset_dir: &Path, sample: &str, algorithm: Algorithm) -> PathBuf {
    dataset_dir.join("metrics").join(format!("{sample}_{}.txt", algorithm.key()))
}

fn run_eval(args: &EvalArgs) -> i32 {
    let (Some(algorithm), Some(dir), Some(sample)) = (args.algorithm, &args.dataset_dir, &args.sample_name) else {
        return fail(2, "missing positional arguments");
    };
    let path = dir.join(format!("{sample}.txt"));
    if !path.is_file() {
        return fail(2, format!("dataset file {} not found", path.display()));
    }
    let mut data = match io::parse_folksonomy_file(&path) {
        Ok(d) => d,
        Err(e) => return fail(1, e),
    };
    if let Some(p) = args.pcore {
        data = p_core_prune(&data, p);
    }
    let split = temporal_split(&data);
    let report = match crate::evaluate(&split, algorithm, &args.algorithm_config(), &args.eval_config()) {
        Ok(r) => r,
        Err(e) => return fail(1, e),
    };
    let out = args.out.clone().unwrap_or_else(|| metrics_path(dir, sample, algorithm));
    let costs = io::render_costs(&report);
    if let Err(e) =
        io::write_report(&report, &out).and_then(|_| io::write_atomic(&io::cost_path(&out), costs.as_bytes()))
    {
        return fail(1, e);
    }
    print!("algorithm\t{algorithm}\n{}{costs}", io::render_report(&report));
    println!("metrics_file\t{}", out.display());
    0
}

fn run_command(cmd: Command) -> i32 {
    match cmd {
        Command::Stats { path, pcore } => {
            let mut data = match io::parse_folksonomy_file(&path) {
                Ok(d) => d,
                Err(e) => return fail(2, e),
            };
            if let Some(p) = pcore {
                data = p_core_prune(&data, p);
            }
            let s = Folksonomy::build(&data).stats();
            println!("users\t{}", s.users);
            println!("resources\t{}", s.resources);
            println!("tags\t{}", s.tags);
            println!("posts\t{}", s.posts);
            println!("assignments\t{}", s.assignments);
            println!("mean_tags_per_post\t{:.6}", s.mean_tags_per_post);
            println!("mean_posts_per_user\t{:.6}", s.mean_posts_per_user);
            0
        }
        Command::Gen { users, resources, tags, posts, recency_bias, seed, out } => {
            let sample = match generate_synthetic(users, resources, tags, posts, recency_bias, seed) {
                Ok(s) => s,
                Err(e) => return fail(2, e),
            };
            match io::write_sample(&sample, &out) {
                Ok(()) => {
                    println!("wrote {} posts to {}", sample.len(), out.display());
                    0
                }
                Err(e) => fail(1, e),
            }
        }
        Command::Export { input, output, pcore } => {
            let mut data = match io::parse_folksonomy_file(&input) {
                Ok(d) => d,
                Err(e) => return fail(2, e),
            };
            if let Some(p) = pcore {
                data = p_core_prune(&data, p);
            }
            match io::export_triples(&data, &output) {
                Ok(n) => {
                    println!("wrote {n} triples to {}", output.display());
                    0
                }
                Err(e) => fail(1, e),
            }
        }
        Command::Serve { data, addr, algorithm, log, static_dir } => {
            let seed = match data.as_deref().map(io::parse_folksonomy_file).transpose() {
                Ok(d) => d.unwrap_or_default(),
                Err(e) => return fail(2, e),
            };
            let options = crate::service::ServiceOptions {
                default_algorithm: algorithm,
                log_path: log,
                static_dir,
                ..Default::default()
            };
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => return fail(1, e),
            };
            match runtime.block_on(crate::service::serve(seed, options, addr)) {
                Ok(()) => 0,
                Err(e) => fail(1, e),
            }
        }
    }
}
