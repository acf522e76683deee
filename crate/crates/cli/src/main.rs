//! `inclusive-irl` command-line driver.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use inclusive_irl::experiments::{self, ExperimentRecord, SCHEMA_VERSION};
use inclusive_irl::simhuman::{prop4_bound, prop4_monte_carlo};
use inclusive_irl::Rationality;
use serde::Serialize;

use config::{CliConfig, Overrides};

#[derive(Parser)]
#[command(name = "inclusive-irl", version, about = "Reward learning from limited demonstrators")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a β sweep and write records.csv and config.json.
    Run(RunArgs),
    /// Demonstration-probability bound against Monte Carlo.
    Prop4(Prop4Args),
    /// Choice-set property suite (ordering, worst cases).
    Props {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print version and CSV schema version.
    Version,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// lavaworld or coffeeworld.
    #[arg(long)]
    env: Option<String>,
    /// Comma-separated methods (ideal, birl, noise, ours).
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated teacher rationalities.
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long)]
    n_demos: Option<usize>,
    /// `a..b` (inclusive) or a comma list.
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, env = "INCLUSIVE_IRL_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct Prop4Args {
    #[arg(long)]
    choices: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 20_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure split by exit code.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Prop4(args) => cmd_prop4(args),
        Cmd::Props { seed } => cmd_props(seed),
        Cmd::Version => {
            println!("inclusive-irl {} (csv schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    schema_version: u32,
    #[serde(flatten)]
    config: &'a CliConfig,
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(p) => CliConfig::load(p).map_err(Failure::Usage)?,
        None => CliConfig::default(),
    };
    cfg.apply(&Overrides {
        env: args.env,
        methods: args.method,
        beta_grid: args.beta_grid,
        n_demos: args.n_demos,
        seeds: args.seeds,
        out: args.out,
        jobs: args.jobs,
    })
    .map_err(Failure::Usage)?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Failure::Usage("an output directory is required (--out or `out` in the config)".into()))?;
    if cfg.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be >= 1".into()));
    }
    cfg.experiment.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    let exp = &cfg.experiment;
    let records = pool
        .install(|| experiments::run_sweep(exp, &exp.beta_grid))
        .map_err(|e| Failure::Runtime(e.to_string()))?;

    for r in &records {
        println!(
            "{} {:5} beta_h={} seed={} belief_true={:.4} risk={:+.4} regret={:.4} weight_error={:.4} |C_R|={}",
            r.env, r.method, r.beta_h, r.seed, r.belief_true, r.risk, r.regret, r.weight_error, r.choice_set_size
        );
    }
    write_outputs(&out, &cfg, &records).map_err(Failure::Runtime)?;
    println!("wrote {} records to {}", records.len(), out.join("records.csv").display());
    Ok(())
}

fn write_outputs(out: &Path, cfg: &CliConfig, records: &[ExperimentRecord]) -> Result<(), String> {
    fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_path(out.join("records.csv"))
        .map_err(|e| e.to_string())?;
    for r in records {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&ResolvedConfig {
        schema_version: SCHEMA_VERSION,
        config: cfg,
    })
    .map_err(|e| e.to_string())?;
    fs::write(out.join("config.json"), json + "\n").map_err(|e| e.to_string())
}

fn cmd_prop4(a: Prop4Args) -> Result<(), Failure> {
    if a.choices < 2 {
        return Err(Failure::Usage("--choices must be >= 2".into()));
    }
    if a.n < 1 || a.trials < 1 {
        return Err(Failure::Usage("--n and --trials must be >= 1".into()));
    }
    let beta = Rationality::new(a.beta).map_err(|e| Failure::Usage(e.to_string()))?;
    let bound = prop4_bound(a.choices, beta, a.n).map_err(|e| Failure::Usage(e.to_string()))?;
    let mc = prop4_monte_carlo(a.choices, beta, a.n, a.trials, a.seed).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("bound     {bound:.6}");
    println!(
        "estimate  {:.6}  (trials {}, 3σ interval [{:.6}, {:.6}])",
        mc.estimate,
        mc.trials,
        (bound - 3.0 * mc.sigma).max(0.0),
        (bound + 3.0 * mc.sigma).min(1.0)
    );
    println!("within 3σ: {}", if mc.within(3.0) { "yes" } else { "no" });
    Ok(())
}

fn cmd_props(seed: u64) -> Result<(), Failure> {
    let report = experiments::proposition_suite(seed);
    print!("{report}");
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Runtime("proposition suite failed".into()))
    }
}
