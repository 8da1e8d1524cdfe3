use std::fs;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use treediff_cli::config::{RawConfig, DEFAULT_DEPTH};
use treediff_cli::{commands, verify, CliError, Format, Report, RunConfig};

#[derive(Parser)]
#[command(name = "treediff", version, about = "Differentiation operators on rooted trees")]
struct Cli {
    /// homogeneous:q, constant:k (constant:1 is a path), or perlevel:a,b,c
    #[arg(long, global = true)]
    shape: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    depth: usize,
    /// lipschitz, weighted, weighted:<weight>, or hardy:q=Q,p=P
    #[arg(long, global = true, default_value = "lipschitz")]
    space: String,
    /// Weight for `--space weighted`: `table:1,2,...` or `expr:<dsl in n>`
    #[arg(long, global = true)]
    weight: Option<String>,
    /// Named parameter for DSL expressions, K=V (repeatable)
    #[arg(long = "param", global = true)]
    params: Vec<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout (`-` for stdout)
    #[arg(long, global = true)]
    output: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Include wall time in the report (makes output non-deterministic)
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full verification suite
    Verify,
    /// Norm of a function and of its image under an operator
    Norm {
        #[arg(long)]
        function: String,
        #[arg(long, default_value = "D")]
        op: String,
    },
    /// Hardy-space composition constants alpha_n
    Alpha {
        #[arg(long)]
        q: Option<u32>,
    },
    /// Classify a complex number as an eigenvalue of D
    Eigen {
        /// `re,im` or a real number
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Spectrum bounds for D
    Spectrum {
        #[arg(long, default_value_t = treediff::operators::DEFAULT_RATIO_CAP)]
        cap: f64,
    },
    /// Finite-section matrix of an operator
    Matrix {
        #[arg(long)]
        op: String,
        #[arg(long, default_value_t = treediff::operators::DEFAULT_MATRIX_CAP as u64)]
        cap: u64,
    },
    /// Parse and evaluate a level expression
    Parse {
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
    },
}

fn run(cli: Cli) -> Result<(Report, usize), CliError> {
    let cfg = RunConfig::from_raw(RawConfig {
        shape: cli.shape,
        depth: cli.depth,
        space: cli.space,
        weight: cli.weight,
        params: cli.params,
        output: cli.output,
        format: cli.format,
        seed: cli.seed,
        timing: cli.timing,
    })?;
    let start = Instant::now();
    let (mut report, failures) = match &cli.command {
        Command::Verify => verify::run(&cfg),
        Command::Norm { function, op } => (commands::norm(&cfg, function, op)?, 0),
        Command::Alpha { q } => (commands::alpha(&cfg, *q)?, 0),
        Command::Eigen { lambda } => (commands::eigen(&cfg, lambda)?, 0),
        Command::Spectrum { cap } => (commands::spectrum(&cfg, *cap)?, 0),
        Command::Matrix { op, cap } => (commands::matrix(&cfg, op, *cap)?, 0),
        Command::Parse { expr } => (commands::parse(&cfg, expr)?, 0),
    };
    if cfg.timing {
        report.wall_time = Some(start.elapsed());
    }
    let text = report.render(cfg.format);
    match &cfg.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))?,
    }
    Ok((report, failures))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok((_, 0)) => ExitCode::SUCCESS,
        Ok((_, failures)) => {
            eprintln!("{}", CliError::Assertion(format!("{failures} verification check(s) failed")));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
