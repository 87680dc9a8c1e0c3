use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coldloop::cli::{cmd_compare, cmd_fit, cmd_run, cmd_synth, exit_code, RunOverrides};
use coldloop::control::ControllerKind;
use coldloop::error::{Error, Result};
use coldloop::lti::Method;

/// Closed-loop simulation and synthesis toolkit for a two-input two-output
/// refrigeration benchmark surrogate.
#[derive(Parser)]
#[command(name = "coldloop", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioFlags {
    /// Config file (TOML)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset to apply (pid2018-surrogate, pid2018-default, paper-ff,
    /// synth-ff, c1-default); may be given multiple times
    #[arg(long)]
    preset: Vec<String>,
    /// Scenario file (TOML)
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Sample time override (s)
    #[arg(long)]
    ts: Option<f64>,
    /// Horizon override (s)
    #[arg(long)]
    horizon: Option<f64>,
    /// Enable the condenser-to-valve feedforward path
    #[arg(long)]
    enable_f12: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one controller on a scenario; writes trace.csv and
    /// summary.txt
    Run {
        #[command(flatten)]
        scenario: ScenarioFlags,
        /// Controller kind
        #[arg(long, default_value = "C1")]
        controller: String,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run two controllers on the same scenario and report relative indices
    Compare {
        #[command(flatten)]
        scenario: ScenarioFlags,
        /// Candidate controller
        #[arg(long)]
        candidate: String,
        /// Baseline controller
        #[arg(long, default_value = "C1")]
        baseline: String,
        /// Eight index weights, comma separated
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Synthesize a feedforward compensator from named plant models
    Synth {
        /// Disturbance path model (D11, D21, D12, D22)
        #[arg(long)]
        d: String,
        /// Channel model (G11, G22)
        #[arg(long)]
        g: String,
        /// Sample time (s)
        #[arg(long, default_value_t = 1.0)]
        ts: f64,
        /// Discretization method (zoh, tustin)
        #[arg(long, default_value = "tustin")]
        method: String,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit a low-order model to a recorded step response CSV (time, value)
    Fit {
        /// Model order (1 or 2)
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// Input CSV path
        #[arg(long)]
        input: PathBuf,
        /// Input step amplitude the record responds to
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn parse_weights(weights: Option<Vec<f64>>) -> Result<Option<[f64; 8]>> {
    match weights {
        None => Ok(None),
        Some(v) => {
            let arr: [f64; 8] = v.try_into().map_err(|v: Vec<f64>| {
                Error::Config(format!("expected 8 weights, got {}", v.len()))
            })?;
            Ok(Some(arr))
        }
    }
}

fn overrides(
    flags: &ScenarioFlags,
    controller: Option<&str>,
    weights: Option<Vec<f64>>,
) -> Result<RunOverrides> {
    Ok(RunOverrides {
        presets: flags.preset.clone(),
        controller: controller.map(str::parse).transpose()?,
        scenario_file: flags.scenario.clone(),
        ts: flags.ts,
        horizon: flags.horizon,
        enable_f12: flags.enable_f12,
        weights: parse_weights(weights)?,
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { scenario, controller, out } => {
            let ov = overrides(&scenario, Some(&controller), None)?;
            let path = cmd_run(scenario.config.as_deref(), &ov, &out)?;
            println!("wrote {}", path.display());
        }
        Command::Compare { scenario, candidate, baseline, weights, out } => {
            let ov = overrides(&scenario, None, weights)?;
            let candidate: ControllerKind = candidate.parse()?;
            let baseline: ControllerKind = baseline.parse()?;
            let report =
                cmd_compare(scenario.config.as_deref(), &ov, candidate, baseline, &out)?;
            print!("{}", report.render_table(&candidate.to_string(), &baseline.to_string()));
            println!("artifacts in {}", out.display());
        }
        Command::Synth { d, g, ts, method, out } => {
            let method: Method = method.parse()?;
            let result = cmd_synth(&d, &g, ts, method, &out)?;
            println!(
                "dc gain {:.6}, {}",
                result.continuous.dc_gain(),
                if result.stable { "stable" } else { "unstable (not discretized)" }
            );
            println!("wrote {}", out.join("compensator.toml").display());
        }
        Command::Fit { order, input, amplitude, out } => {
            let fit = cmd_fit(order, &input, amplitude, &out)?;
            println!("num {:?}", fit.model.num());
            println!("den {:?}", fit.model.den());
            println!("rms {:.3e}", fit.rms);
            for w in &fit.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", out.join("fit.toml").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
