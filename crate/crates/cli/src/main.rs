use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pwhile_cli::{
    cmd_analyze, cmd_check, cmd_simulate, parse_binding, run_corpus, CliError, OutputFormat, RunConfig, DEFAULT_HORIZON,
    EXIT_CERTIFIED, EXIT_FAILED,
};
use pwhile_core::syntax::Store;
use pwhile_core::LoopStrategy;

#[derive(Parser)]
#[command(name = "pwhile", version, about = "Expected-cost bounds for probabilistic while programs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Decompose,
    Invariant,
    Unroll,
}

#[derive(clap::Args)]
struct AnalyzeOpts {
    /// Maximal template degree.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Restrict loop analysis to one strategy.
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    /// Iterations used by the unrolling strategy.
    #[arg(long, default_value_t = 8)]
    unroll: usize,
    /// Oracle horizon in multidistribution steps.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: usize,
    /// Grid values for every free variable, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<i64>>,
    /// Additional cross-check store, e.g. `--point x=4,y=1`.
    #[arg(long)]
    point: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Infer and cross-check an expected-cost bound.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        opts: AnalyzeOpts,
    },
    /// Monte Carlo simulation plus the exhaustive oracle.
    Simulate {
        file: PathBuf,
        /// Initial binding `var=value`; repeatable.
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        #[arg(long)]
        json: bool,
    },
    /// Check candidate upper invariants given as `label: expression` lines.
    Check {
        file: PathBuf,
        #[arg(long)]
        invariants: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Analyze every `.pw` file in a directory.
    Corpus {
        dir: PathBuf,
        #[command(flatten)]
        opts: AnalyzeOpts,
    },
}

fn format(json: bool) -> OutputFormat {
    if json {
        OutputFormat::Json
    } else {
        OutputFormat::Text
    }
}

fn config(o: &AnalyzeOpts) -> Result<RunConfig, CliError> {
    let mut c = RunConfig { max_degree: o.degree, horizon: o.horizon, seed: o.seed, format: format(o.json), ..RunConfig::default() };
    if let Some(s) = o.strategy {
        c.strategies = vec![match s {
            StrategyArg::Decompose => LoopStrategy::Decompose,
            StrategyArg::Invariant => LoopStrategy::Invariant,
            StrategyArg::Unroll => LoopStrategy::Unroll(o.unroll),
        }];
    } else {
        c.strategies = vec![LoopStrategy::Decompose, LoopStrategy::Invariant, LoopStrategy::Unroll(o.unroll)];
    }
    if let Some(g) = &o.grid {
        c.grid = g.clone();
    }
    for p in &o.point {
        let mut s = Store::new();
        for b in p.split(',') {
            let (x, v) = parse_binding(b)?;
            s.set(x, v.into());
        }
        c.extra_points.push(s);
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Cmd::Analyze { file, opts } => {
            let config = config(&opts)?;
            let (report, err) = cmd_analyze(&file, &config);
            print!("{}", report.render(config.format));
            match err {
                Some(e) => {
                    if config.format == OutputFormat::Text {
                        eprintln!("error: {e}");
                    }
                    Ok(e.exit_code())
                }
                None => Ok(report.status.exit_code()),
            }
        }
        Cmd::Simulate { file, set, samples, seed, horizon, json } => {
            let bindings = set.iter().map(|b| parse_binding(b)).collect::<Result<Vec<_>, _>>()?;
            let report = cmd_simulate(&file, &bindings, samples, seed, horizon)?;
            print!("{}", report.render(format(json)));
            Ok(EXIT_CERTIFIED)
        }
        Cmd::Check { file, invariants, json } => {
            let report = cmd_check(&file, &invariants)?;
            print!("{}", report.render(format(json)));
            Ok(if report.certified { EXIT_CERTIFIED } else { EXIT_FAILED })
        }
        Cmd::Corpus { dir, opts } => {
            let config = config(&opts)?;
            let report = run_corpus(&dir, &config)?;
            print!("{}", report.render(config.format));
            Ok(if report.all_certified() { EXIT_CERTIFIED } else { EXIT_FAILED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
