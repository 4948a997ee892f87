use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gtp_cli::commands::functional::{run_functional, FunctionalArgs, Op};
use gtp_cli::commands::{adversary, rates, simulate, verify, CmdError, CmdResult, Experiment, Outcome};
use gtp_cli::config::{ConfigError, ConstantChoice, Theorem};

#[derive(Parser)]
#[command(name = "gtp", version, about = "Capital processes of betting strategies in forecasting games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment file.
    config: PathBuf,
    /// Override a config key, e.g. `--set horizon=1e5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Play the configured game and write the trace and report.
    Simulate(Common),
    /// Check the lower bounds on every round of every seed.
    VerifyBounds {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of thm41, thm43, remark41, prop31.
        #[arg(long)]
        theorems: Option<String>,
        /// Replace the 1/6 of thm41 by this constant (harness self-check).
        #[arg(long, value_name = "K")]
        mutate_constant: Option<f64>,
    },
    /// Play the complying adversary against the configured skeptic.
    Adversary(Common),
    /// Write normalized-sum curves at the checkpoints.
    Rates(Common),
    /// Evaluate the prior / upper-class function calculus.
    Functional {
        /// F, G, FG, GF, equiv or integral-test.
        #[arg(long)]
        op: String,
        #[arg(long)]
        prior: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        /// Second prior or function for `equiv`.
        #[arg(long)]
        other: Option<String>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Grid start in ln(1/eps) or ln(lambda).
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        /// Write the grid values to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CmdResult<Outcome> {
    match cli.cmd {
        Cmd::Simulate(c) => Ok(simulate::run_simulate(&Experiment::load(&c.config, &c.set)?)?.1),
        Cmd::VerifyBounds { common, theorems, mutate_constant } => {
            let mut exp = Experiment::load(&common.config, &common.set)?;
            if let Some(k) = mutate_constant {
                exp.config.bounds.constant = ConstantChoice::Override(k);
            }
            let th = theorems.map(|t| Theorem::parse_set("--theorems", &t)).transpose()?;
            Ok(verify::run_verify(&exp, th.as_deref())?.1)
        }
        Cmd::Adversary(c) => Ok(adversary::run_adversary(&Experiment::load(&c.config, &c.set)?)?.1),
        Cmd::Rates(c) => Ok(rates::run_rates(&Experiment::load(&c.config, &c.set)?)?.1),
        Cmd::Functional { op, prior, psi, other, points, from, to, csv } => {
            let op = Op::parse(&op)
                .ok_or_else(|| CmdError::Config(ConfigError::new("--op", format!("unknown operation `{op}` (F, G, FG, GF, equiv, integral-test)"))))?;
            let args = FunctionalArgs { op, prior, psi, other, points, from, to, csv };
            let (report, out) = run_functional(&args)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| CmdError::Io(e.to_string()))?);
            Ok(out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            for m in &out.messages {
                eprintln!("{m}");
            }
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
