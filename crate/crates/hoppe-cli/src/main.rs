//! Command-line experiments on Hoppe trees and recursive random point sets.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hoppe::fixpoint::{self, PairPool, ScalarPool};
use hoppe::pointset::{JumpKernel, PointRealization};
use hoppe::tree::HoppeTree;
use hoppe::verify::{self, VerifyConfig};
use hoppe::{exact, rng, DEFAULT_SEED};

#[derive(Parser)]
#[command(
    name = "hoppe",
    version,
    about = "Simulate Hoppe trees and recursive point sets, evaluate their exact expectations, \
             iterate the limit fixed points, and verify everything against itself",
    after_help = "CSV columns: `realize` emits vertex,parent,depth,x (parent -1 for the root); \
                  `expectations` emits n,theta,e_t,e_u,e_w; `fixpoint --format csv` emits one \
                  sample per row (w,t for the 2-D pools). JSON output is newline-delimited. \
                  All commands are deterministic given --seed."
)]
struct Cli {
    /// Cap the worker thread count (default: all cores; results do not
    /// depend on it)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

fn parse_theta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("theta must be positive".into())
    }
}

fn parse_kernel(s: &str) -> Result<JumpKernel, String> {
    JumpKernel::parse(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct OutputArg {
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one Hoppe tree; prints the tree text plus a `#` stats line
    Tree {
        /// Number of vertices
        #[arg(long)]
        n: usize,
        /// Root weight θ
        #[arg(long, default_value_t = 1.0, value_parser = parse_theta)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Realize a point set on a fresh tree; CSV vertex,parent,depth,x
    Realize {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, value_parser = parse_theta)]
        theta: f64,
        /// Jump kernel: normal:<sigma2>, poisson:<lambda>, unit, srw
        #[arg(long, default_value = "normal:1", value_parser = parse_kernel)]
        kernel: JumpKernel,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Exact expectation table E[T], E[U], E[W] over an n-grid (CSV)
    Expectations {
        #[arg(long, default_value_t = 1.0, value_parser = parse_theta)]
        theta: f64,
        /// Comma-separated n values, e.g. 1,10,100,1000
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Iterate a fixed-point pool; JSON moments or CSV samples
    Fixpoint {
        /// Which fixed-point law to iterate
        #[arg(long, value_enum)]
        kind: PoolArg,
        #[arg(long, default_value_t = 1.0, value_parser = parse_theta)]
        theta: f64,
        #[arg(long, default_value_t = 100_000)]
        pool_size: usize,
        #[arg(long, default_value_t = 40)]
        generations: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Run the verification suite; exit 1 if any criterion fails
    Verify {
        /// Reduced replicate counts (same tolerances)
        #[arg(long)]
        quick: bool,
        /// Accepted for run-config symmetry; the criteria run their own
        /// pinned theta grids
        #[arg(long, value_parser = parse_theta)]
        theta: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// key=value overrides (keys: seed, quick), one per line
        #[arg(long)]
        config: Option<PathBuf>,
        /// csv prints human-readable lines, json one object per criterion
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo check of the subtree decomposition at vertex 1 (JSON)
    Decompose {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0, value_parser = parse_theta)]
        theta: f64,
        #[arg(long, default_value_t = 100_000)]
        replicates: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PoolArg {
    U,
    Uprime,
    Wt,
    Wtprime,
}

fn write_out(out: &OutputArg, content: &str) -> std::io::Result<()> {
    match &out.output {
        Some(path) => fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn scalar_samples_csv(pool: &ScalarPool) -> String {
    let mut t = String::from("sample\n");
    for x in &pool.samples {
        let _ = writeln!(t, "{x}");
    }
    t
}

fn pair_samples_csv(pool: &PairPool) -> String {
    let mut t = String::from("w,t\n");
    for (w, tt) in &pool.samples {
        let _ = writeln!(t, "{w},{tt}");
    }
    t
}

fn scalar_moments_json(label: &str, theta: f64, pool: &ScalarPool) -> String {
    let m = pool.moments();
    format!(
        "{{\"kind\":\"{label}\",\"theta\":{theta},\"pool_size\":{},\"generations\":{},\
         \"mean\":{},\"se_mean\":{},\"second_moment\":{},\"se_second\":{}}}\n",
        m.n, pool.generation, m.mean, m.se_mean, m.second_moment, m.se_second
    )
}

fn pair_moments_json(label: &str, theta: f64, pool: &PairPool) -> String {
    let [w, t] = pool.component_moments();
    let mut s = String::new();
    let _ = write!(
        s,
        "{{\"kind\":\"{label}\",\"theta\":{theta},\"pool_size\":{},\"generations\":{},",
        pool.samples.len(),
        pool.generation
    );
    for (name, m) in [("w", &w), ("t", &t)] {
        let _ = write!(
            s,
            "\"{name}\":{{\"mean\":{},\"se_mean\":{},\"second_moment\":{},\"se_second\":{}}},",
            m.mean, m.se_mean, m.second_moment, m.se_second
        );
    }
    // the linear functional that recovers the scalar limit: U = T̃ − W̃ + E U
    let shift = if label == "wt" { 1.0 } else { 2.0 / (1.0 + theta) };
    let q = fixpoint::scalar_moments(&pool.q_transform(shift));
    let _ = writeln!(
        s,
        "\"u_from_q\":{{\"mean\":{},\"se_mean\":{},\"second_moment\":{},\"se_second\":{}}}}}",
        q.mean, q.se_mean, q.second_moment, q.se_second
    );
    s
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    match cli.command {
        Command::Tree { n, theta, seed, out } => {
            let tree = HoppeTree::generate(n, theta, &mut rng::substream(seed, 0, 0))?;
            let stats = tree.stats()?;
            let mut text = tree.to_text();
            let _ = writeln!(
                text,
                "# T={} W={} R2={} U={} seed={seed}",
                stats.total_length, stats.wiener, stats.lca_sum, stats.u
            );
            write_out(&out, &text)?;
        }
        Command::Realize {
            n,
            theta,
            kernel,
            seed,
            out,
        } => {
            let mut stream = rng::substream(seed, 0, 0);
            let tree = HoppeTree::generate(n, theta, &mut stream)?;
            let real = PointRealization::generate(tree, kernel, &mut stream);
            let mut buf = Vec::new();
            real.write_csv(&mut buf)?;
            write_out(&out, std::str::from_utf8(&buf)?)?;
        }
        Command::Expectations { theta, n, out } => {
            let mut text = String::from("n,theta,e_t,e_u,e_w\n");
            for &n in &n {
                let _ = writeln!(
                    text,
                    "{n},{theta},{},{},{}",
                    exact::expected_t(n, theta),
                    exact::expected_u(n, theta),
                    exact::expected_w(n, theta)
                );
            }
            write_out(&out, &text)?;
        }
        Command::Fixpoint {
            kind,
            theta,
            pool_size,
            generations,
            seed,
            format,
            out,
        } => {
            // dependent pools need a converged θ=1 feeder first
            let feeder_gens = generations.max(fixpoint::MIN_CONVERGED_GENERATION);
            let text = match kind {
                PoolArg::U => {
                    let pool =
                        fixpoint::iterate_u(&ScalarPool::u_init(pool_size), generations, seed)?;
                    match format {
                        Format::Json => scalar_moments_json("u", 1.0, &pool),
                        Format::Csv => scalar_samples_csv(&pool),
                    }
                }
                PoolArg::Uprime => {
                    // oversized feeder: its realized mean error propagates
                    // into the U' pool with factor 1/(1+θ)
                    let u_pool =
                        fixpoint::iterate_u(&ScalarPool::u_init(4 * pool_size), feeder_gens, seed)?;
                    let init = ScalarPool::u_prime_init(pool_size, theta)?;
                    let pool = fixpoint::iterate_u_prime(&init, &u_pool, generations, seed ^ 1)?;
                    match format {
                        Format::Json => scalar_moments_json("uprime", theta, &pool),
                        Format::Csv => scalar_samples_csv(&pool),
                    }
                }
                PoolArg::Wt => {
                    let pool =
                        fixpoint::iterate_wt(&PairPool::wt_init(pool_size), generations, seed)?;
                    match format {
                        Format::Json => pair_moments_json("wt", 1.0, &pool),
                        Format::Csv => pair_samples_csv(&pool),
                    }
                }
                PoolArg::Wtprime => {
                    let wt_pool =
                        fixpoint::iterate_wt(&PairPool::wt_init(pool_size), feeder_gens, seed)?;
                    let init = PairPool::wt_prime_init(pool_size, theta)?;
                    let pool = fixpoint::iterate_wt_prime(&init, &wt_pool, generations, seed ^ 1)?;
                    match format {
                        Format::Json => pair_moments_json("wtprime", theta, &pool),
                        Format::Csv => pair_samples_csv(&pool),
                    }
                }
            };
            write_out(&out, &text)?;
        }
        Command::Verify {
            quick,
            theta: _,
            seed,
            config,
            format,
        } => {
            let mut cfg = VerifyConfig { seed, quick };
            if let Some(path) = config {
                apply_config_overrides(&mut cfg, &fs::read_to_string(path)?)?;
            }
            let results = verify::run_all(&cfg);
            for r in &results {
                match format {
                    Format::Csv => println!("{}", r.line()),
                    Format::Json => println!("{}", serde_json::to_string(r)?),
                }
            }
            if !verify::all_pass(&results) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Decompose {
            n,
            theta,
            replicates,
            seed,
            out,
        } => {
            let report = fixpoint::subtree_decomposition_check(n, theta, replicates, seed)?;
            write_out(&out, &format!("{}\n", serde_json::to_string(&report)?))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Apply `key=value` overrides to the verify config. Unknown keys are usage
/// errors.
fn apply_config_overrides(cfg: &mut VerifyConfig, text: &str) -> Result<(), ConfigError> {
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key=value", lineno + 1)))?;
        match key.trim() {
            "seed" => {
                cfg.seed = value
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("line {}: bad seed", lineno + 1)))?;
            }
            "quick" => {
                cfg.quick = matches!(value.trim(), "1" | "true" | "yes");
            }
            other => {
                return Err(ConfigError(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(())
}

#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is::<ConfigError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
