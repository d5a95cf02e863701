use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use finsler_core::check::CheckConfig;
use finsler_core::cli::{
    cmd_check, cmd_eval, cmd_expand, cmd_report, load_metric, load_points, load_request, parse_point, parse_tags,
    render, CliError, CliResult, CommandOutput, EvalRequest, OUTPUT_NAMES,
};

#[derive(Parser)]
#[command(name = "finsler", version, about = "Vertical geometry of m-th root Finsler metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Format {
    /// Compact JSON only; suppresses the human-readable summary.
    #[arg(long, global = true, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a metric into its canonical polynomial form.
    Expand {
        /// `bg3`, `bg4`, or a metric JSON file.
        #[arg(long)]
        metric: String,
        #[command(flatten)]
        format: Format,
    },
    /// Evaluate geometry at a batch of directions.
    Eval {
        #[arg(long, required_unless_present = "request")]
        metric: Option<String>,
        /// JSON array of directions.
        #[arg(long, required_unless_present = "request")]
        points: Option<String>,
        /// Comma-separated subset of L,g,g_inv,C,C_mixed,S_mixed,S_cov,ricci,scalar,einstein.
        #[arg(long, default_value = "L,g,g_inv,C")]
        outputs: String,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        /// Complete request JSON instead of the individual flags.
        #[arg(long, conflicts_with_all = ["metric", "points"])]
        request: Option<String>,
        #[command(flatten)]
        format: Format,
    },
    /// Run the verification battery.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Comma-separated builtin tags.
        #[arg(long, default_value = "bg3,bg4")]
        metric: String,
        /// Substitute the printed bg3 torsion coefficient; the run must fail.
        #[arg(long)]
        inject_erratum: bool,
        #[command(flatten)]
        format: Format,
    },
    /// Full geometry dossier at one direction.
    Report {
        #[arg(long)]
        metric: String,
        /// Comma-separated components, e.g. `3,1,1`.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<f64>,
        #[command(flatten)]
        format: Format,
    },
}

fn run(command: Command) -> (CliResult<CommandOutput>, Format) {
    match command {
        Command::Expand { metric, format } => (load_metric(&metric).and_then(|d| cmd_expand(&d)), format),
        Command::Eval {
            metric,
            points,
            outputs,
            kappa,
            request,
            format,
        } => {
            let req = match request {
                Some(path) => load_request(&path),
                None => build_request(metric.as_deref(), points.as_deref(), &outputs, kappa),
            };
            (req.and_then(|r| cmd_eval(&r)), format)
        }
        Command::Check {
            seed,
            count,
            metric,
            inject_erratum,
            format,
        } => {
            let out = parse_tags(&metric).and_then(|metrics| {
                cmd_check(&CheckConfig {
                    seed,
                    count,
                    metrics,
                    inject_erratum,
                    ..CheckConfig::default()
                })
            });
            (out, format)
        }
        Command::Report {
            metric,
            point,
            kappa,
            format,
        } => {
            let out = load_metric(&metric).and_then(|d| cmd_report(&d, &parse_point(&point)?, kappa));
            (out, format)
        }
    }
}

fn build_request(metric: Option<&str>, points: Option<&str>, outputs: &str, kappa: Option<f64>) -> CliResult<EvalRequest> {
    let metric = load_metric(metric.ok_or_else(|| CliError::input("--metric is required"))?)?;
    let points = load_points(points.ok_or_else(|| CliError::input("--points is required"))?)?;
    let outputs: Vec<String> = outputs.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if let Some(bad) = outputs.iter().find(|o| !OUTPUT_NAMES.contains(&o.as_str())) {
        return Err(CliError::input(format!("unknown output '{bad}'")));
    }
    Ok(EvalRequest {
        metric,
        points,
        outputs,
        kappa,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let (result, format) = run(cli.command);
    match result {
        Ok(out) => {
            if let (Some(text), false) = (&out.text, format.json) {
                eprint!("{text}");
            }
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(render(&out.json, format.pretty).as_bytes());
            ExitCode::from(out.status.code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.code())
        }
    }
}
