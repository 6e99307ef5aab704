use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fano_tunnel_cli::output::Format;
use fano_tunnel_cli::scenario::{MethodName, Preset};
use fano_tunnel_cli::{configure_threads, CliError, RunOptions, Scenario};

/// Exactly soluble tunneling two-level system coupled to a continuum.
#[derive(Parser)]
#[command(name = "fano-tunnel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its output files.
    Run(Common),
    /// Write the model-versus-master comparison report.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    scenario: PathBuf,
    /// Directory for output files.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Figure preset underlying the scenario.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Run only this evolution method.
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    /// Format of trajectory, rates and sweep files.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (common, is_compare) = match cli.command {
        Command::Run(c) => (c, false),
        Command::Compare(c) => (c, true),
    };
    let text = std::fs::read_to_string(&common.scenario).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", common.scenario.display()))
    })?;
    let scenario = Scenario::parse(&text)?;
    let opts = RunOptions {
        out_dir: common.out_dir,
        preset: common.preset,
        method: common.method,
        format: common.format,
    };
    let summary = if is_compare {
        fano_tunnel_cli::compare(&scenario, &opts)
    } else {
        fano_tunnel_cli::run(&scenario, &opts)
    };
    let summary = summary.inspect_err(|e| report_failure(e, &opts))?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    if let Some(c) = &summary.comparison {
        for check in &c.checks {
            let status = if check.pass { "PASS" } else { "FAIL" };
            println!("{status} {} value={:e} tolerance={:e}", check.name, check.value, check.tolerance);
        }
    }
    Ok(())
}

/// Numerical failures leave a machine-readable report next to the outputs.
fn report_failure(err: &CliError, opts: &RunOptions) {
    if let CliError::Numerical { module, source } = err {
        let report = serde_json::json!({
            "status": "numerical_failure",
            "module": module,
            "error": source.kind(),
            "message": source.to_string(),
        });
        let path = opts.out_dir.join("failure_report.json");
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(&path, text + "\n") {
            eprintln!("cannot write {}: {e}", path.display());
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Numerical { module, source } => {
                    eprintln!("error: numerical failure in {module}: {}: {source}", source.kind())
                }
                _ => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
