use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "parisian",
    version,
    about = "Parisian drawdown ruin for spectrally negative Lévy models"
)]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Write results here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Print the resolved configuration and the parsed request, then stop.
    #[arg(long, global = true)]
    pub dry_run: bool,

    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Shortcuts for config keys. Each one beats the file value.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Any config key, as KEY=VALUE; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long, global = true, help = "model.kind")]
    pub model: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true, help = "model.mu")]
    pub mu: Option<String>,
    #[arg(long, global = true, help = "model.sigma")]
    pub sigma: Option<String>,
    #[arg(long, global = true, help = "model.jump_rate")]
    pub jump_rate: Option<String>,
    #[arg(long, global = true, help = "model.jump_mean")]
    pub jump_mean: Option<String>,
    #[arg(long, global = true, help = "quad.rel_tol")]
    pub rel_tol: Option<String>,
    #[arg(long, global = true, help = "quad.abs_tol")]
    pub abs_tol: Option<String>,
    #[arg(long, global = true, help = "inv.nodes")]
    pub nodes: Option<String>,
    #[arg(long, global = true, help = "mc.paths")]
    pub paths: Option<String>,
    #[arg(long, global = true, help = "mc.seed")]
    pub seed: Option<String>,
    #[arg(long, global = true, help = "mc.dt")]
    pub dt: Option<String>,
    #[arg(long, global = true, help = "mc.mode")]
    pub mode: Option<String>,
}

impl Overrides {
    /// `(key, value)` pairs in increasing priority: `--set` entries first,
    /// then the named shortcuts.
    pub fn pairs(&self) -> Result<Vec<(String, String)>, String> {
        let mut out = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let named = [
            ("model.kind", &self.model),
            ("model.mu", &self.mu),
            ("model.sigma", &self.sigma),
            ("model.jump_rate", &self.jump_rate),
            ("model.jump_mean", &self.jump_mean),
            ("quad.rel_tol", &self.rel_tol),
            ("quad.abs_tol", &self.abs_tol),
            ("inv.nodes", &self.nodes),
            ("mc.paths", &self.paths),
            ("mc.seed", &self.seed),
            ("mc.dt", &self.dt),
            ("mc.mode", &self.mode),
        ];
        for (key, value) in named {
            if let Some(v) = value {
                out.push((key.to_string(), v.clone()));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate W, W' and the integral of W on [0, xmax].
    Scale(ScaleArgs),
    /// Laplace transform of the Parisian ruin time.
    RuinLt(QueryArgs),
    /// Joint transform of the ruin time and the position at ruin.
    JointLt(TiltArgs),
    /// Monte Carlo estimate of the joint transform.
    Mc(TiltArgs),
    /// Formula against Monte Carlo, with a 3 s.e. band.
    Compare(CompareArgs),
    /// Run the identity suite.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Closed,
    Numeric,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub xmax: f64,
    /// Number of grid points, including x = 0.
    #[arg(long, default_value_t = 101)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
}

/// Every value flag takes a comma-separated list; the request is the full
/// grid over all lists.
#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub a: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub u: Vec<f64>,
    /// Initial drawdown.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub z: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct TiltArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
    pub nu: Vec<f64>,
    /// Initial position.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x0: f64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub tilt: TiltArgs,
    /// Euler bias allowance `C` in `3 s.e. + C dt`.
    #[arg(long, default_value_t = 1.0)]
    pub bias_c: f64,
}
