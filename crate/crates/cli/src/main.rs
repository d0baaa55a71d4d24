use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod render;

use config::RunConfig;

/// Exact computations with spirals and `exp∘exp` of lines.
///
/// Settings come from `--config` (a `key = value` file) and `--set`
/// overrides, applied in that order. Exit status: 0 ok, 1 error, 2 a check
/// did not hold.
#[derive(Parser, Debug)]
#[command(name = "expexp", version)]
struct Cli {
    /// `key = value` settings file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Override a setting, `KEY=VALUE`; repeatable.
    #[arg(short, long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the artifact here instead of stdout.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Crossings k_min..=k_max as JSON lines.
    Crossings,
    /// Residues of the first `count` outward crossings (CSV).
    Fracs,
    /// Max gap and star discrepancy of the residues (CSV).
    Gaps,
    /// Paint the annulus grid until covered (PBM).
    Coverage,
    /// Find t with exp(exp(p + t(i + alpha))) near a target (JSON lines).
    Witness,
    /// Build or extend the nested component tree.
    Cantor,
    /// Mass distribution check on a tree or the middle-thirds fixture (CSV).
    Mdp,
    /// theta = e^{2 pi alpha}, and the power check for a tree's parameters.
    Theta,
    /// Occupation masses of exp(exp) along a line (CSV).
    Distribution,
    /// Coverage fractions over random slopes (CSV).
    #[command(name = "sample-thm1")]
    SampleThm1,
    /// SVG figure of a line, its spiral or its exp(exp) image.
    Render,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Crossings => "crossings",
            Command::Fracs => "fracs",
            Command::Gaps => "gaps",
            Command::Coverage => "coverage",
            Command::Witness => "witness",
            Command::Cantor => "cantor",
            Command::Mdp => "mdp",
            Command::Theta => "theta",
            Command::Distribution => "distribution",
            Command::SampleThm1 => "sample-thm1",
            Command::Render => "render",
        }
    }
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::for_command(cli.command.name());
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        cfg.apply_text(&path.display().to_string(), &text)?;
    }
    for s in &cli.set {
        cfg.apply_override(s)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Ok(v) = std::env::var("EXPEXP_PRECISION_CEILING") {
        match v.trim().parse::<u32>() {
            Ok(bits) if bits > 0 => expexp_core::precision::set_precision_ceiling(bits),
            _ => {
                eprintln!("error: EXPEXP_PRECISION_CEILING={v:?} is not a positive integer");
                return ExitCode::from(1);
            }
        }
    }
    let result =
        load(&cli).and_then(|cfg| commands::run(cli.command.name(), &cfg, cli.out.as_deref()));
    match result {
        Ok(commands::Outcome::Ok) => ExitCode::SUCCESS,
        Ok(commands::Outcome::CheckFailed(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
