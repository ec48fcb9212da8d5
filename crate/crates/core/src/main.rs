use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use miyazawa::inequality::Scope;
use miyazawa::report::{Precision, RunConfig};
use miyazawa::Error;

/// Carbon-tax incidence pipeline over an input-output table with household
/// satellite accounts.
#[derive(Parser)]
#[command(name = "miyazawa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a tax scenario and write the impact and inequality reports.
    Run {
        /// Inter-industry table CSV.
        #[arg(long)]
        sectors: PathBuf,
        /// Household income/consumption satellite CSV.
        #[arg(long)]
        households: PathBuf,
        /// Scenario JSON (rate, pass-through, emissions file).
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory; created if absent.
        #[arg(long)]
        out: PathBuf,
        /// Regional population weights, e.g. `urban=0.56,rural=0.44`.
        /// Required for the combined (all-scope) Gini.
        #[arg(long, value_parser = parse_weights)]
        population_weights: Option<(f64, f64)>,
        /// Skip the induced-consumption closure (report V*B*df only).
        #[arg(long)]
        open_model: bool,
        /// Scope of the Lorenz/Gini output file.
        #[arg(long, default_value = "all")]
        scope: ScopeArg,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ScopeArg {
    All,
    Urban,
    Rural,
}

impl From<ScopeArg> for Scope {
    fn from(s: ScopeArg) -> Scope {
        match s {
            ScopeArg::All => Scope::All,
            ScopeArg::Urban => Scope::Urban,
            ScopeArg::Rural => Scope::Rural,
        }
    }
}

fn parse_weights(raw: &str) -> Result<(f64, f64), String> {
    let (mut urban, mut rural) = (None, None);
    for part in raw.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| format!("expected region=weight, got '{part}'"))?;
        let weight: f64 = value.parse().map_err(|_| format!("bad weight '{value}'"))?;
        match key.trim() {
            "urban" => urban = Some(weight),
            "rural" => rural = Some(weight),
            other => return Err(format!("unknown region '{other}'")),
        }
    }
    match (urban, rural) {
        (Some(u), Some(r)) => Ok((u, r)),
        _ => Err("both urban and rural weights are required".into()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("MIYAZAWA_LOG", "warn"),
    )
    .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let Command::Run {
        sectors,
        households,
        scenario,
        out,
        population_weights,
        open_model,
        scope,
    } = cli.command;

    let config = RunConfig {
        sectors_file: sectors,
        households_file: households,
        scenario_file: scenario,
        output_dir: out,
        population_weights,
        open_model,
        scope: scope.into(),
        precision: Precision::default(),
    };

    match miyazawa::report::run(&config) {
        Ok(result) => {
            log::info!(
                "total income decline {:.2} million Rp, tax revenue {:.2} million Rp",
                result.total_decline(),
                result.tax_revenue
            );
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(u8::try_from(Error::exit_code(&err)).unwrap_or(1))
        }
    }
}
