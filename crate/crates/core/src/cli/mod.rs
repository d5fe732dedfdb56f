//! Command-line front end.
//!
//! Every subcommand writes its results and a [`RunManifest`] into the output
//! directory (`--out`, else `$MSCLIMATE_OUT_DIR`, else `./msclimate-out`).
//! Exit codes: 0 success, 2 usage or parameter error, 3 numerical failure,
//! 4 sweep with failed cells.

mod commands;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::equilibria::{EquilibriumLabel, Variant};
use crate::error::{Error, Result};
use crate::models::{AsymParams, ModelSpec, MsParams, SymParams, UnfoldParams};
pub use output::{resolve_out_dir, write_atomic, RunManifest, DEFAULT_OUT_DIR, MANIFEST_FILE, OUT_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_) | Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Parser, Debug, Clone, Serialize)]
#[command(name = "msclimate", version, about = "Glacial-cycle model family: simulations, analyses, sweeps and curve traces")]
pub struct Cli {
    /// Output directory [default: $MSCLIMATE_OUT_DIR or ./msclimate-out]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Integrate one trajectory
    Simulate(SimulateArgs),
    /// Equilibria, stability and region of a parameter point
    Analyze(AnalyzeArgs),
    /// Melnikov analysis of the unfolded system
    Melnikov {
        #[command(subcommand)]
        task: MelnikovTask,
    },
    /// x-bar over a (p, r) grid
    Sweep(SweepArgs),
    /// Bifurcation curves in the (p, r) plane
    Trace(TraceArgs),
    /// Re-run a manifest and compare the outputs byte for byte
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Ms,
    Sym,
    Asym,
    Rotated,
    Unfolded,
    Hamiltonian,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    #[arg(long, visible_alias = "variant", value_enum)]
    pub model: ModelName,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
}

fn need(v: Option<f64>, name: &str, model: ModelName) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParams(format!("--{name} is required for model {model:?}")))
}

impl ModelArgs {
    pub fn spec(&self) -> Result<ModelSpec> {
        let m = self.model;
        Ok(match m {
            ModelName::Ms => ModelSpec::Ms(MsParams::new(
                need(self.p, "p", m)?,
                need(self.q, "q", m)?,
                need(self.r, "r", m)?,
                need(self.s, "s", m)?,
            )?),
            ModelName::Sym => ModelSpec::Sym(SymParams::new(need(self.p, "p", m)?, need(self.r, "r", m)?)?),
            ModelName::Asym | ModelName::Rotated => {
                let a = AsymParams::new(need(self.p, "p", m)?, need(self.r, "r", m)?, need(self.s, "s", m)?)?;
                if m == ModelName::Asym {
                    ModelSpec::Asym(a)
                } else {
                    ModelSpec::Rotated(a)
                }
            }
            ModelName::Unfolded => ModelSpec::Unfolded(UnfoldParams::new(
                need(self.lambda, "lambda", m)?,
                need(self.mu, "mu", m)?,
                need(self.eta, "eta", m)?,
            )?),
            ModelName::Hamiltonian => {
                let mu = need(self.mu, "mu", m)?;
                let spec = ModelSpec::Hamiltonian { mu };
                spec.validate()?;
                spec
            }
        })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Rk45,
    Rk4,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<f64>,
    /// Seed of the random initial state used when no initial state is given
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200.0)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = MethodName::Rk45)]
    pub method: MethodName,
    #[arg(long, default_value_t = 1e-9)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    /// Step of the fixed-step method
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Skip the limit-cycle estimate from the final state
    #[arg(long)]
    pub no_cycle: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Split region III of the symmetric model with the Melnikov thresholds
    #[arg(long)]
    pub subregions: bool,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MelnikovTask {
    /// Samples of R(x) = I2/I0
    Rcurve {
        #[arg(long, default_value_t = 1.01)]
        from: f64,
        #[arg(long, default_value_t = 3.0)]
        to: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        mu_sign: i32,
    },
    /// Minimum of R beyond the homoclinic loop
    Fold,
    /// Predicted cycles of the unfolded system
    Census {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        mu_sign: i32,
    },
}

/// Closed interval written `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

fn parse_span(s: &str) -> std::result::Result<Span, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s}"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad lower bound in {s}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad upper bound in {s}"))?;
    if !(hi > lo) {
        return Err(format!("empty range {s}"));
    }
    Ok(Span { lo, hi })
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepModelName {
    Ms,
    Sym,
    Asym,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub model: SweepModelName,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// p axis `lo..hi`; cells sit at lo + (i+1)(hi−lo)/n
    #[arg(long, value_parser = parse_span, default_value = "0..3")]
    pub p: Span,
    #[arg(long, value_parser = parse_span, default_value = "0..3")]
    pub r: Span,
    /// Cells per axis
    #[arg(long, default_value_t = 60)]
    pub n: usize,
    #[arg(long)]
    pub np: Option<usize>,
    #[arg(long)]
    pub nr: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.5)]
    pub transient_fraction: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Homoclinic,
    CycleFold,
    Hopf,
    Codim1,
    Region3,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FocusName {
    P1,
    P2,
}

impl From<FocusName> for EquilibriumLabel {
    fn from(f: FocusName) -> Self {
        match f {
            FocusName::P1 => EquilibriumLabel::P1,
            FocusName::P2 => EquilibriumLabel::P2,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    Sym,
    Asym,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::Sym => Variant::Sym,
            VariantName::Asym => Variant::Asym,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TraceArgs {
    #[arg(long, value_enum)]
    pub variant: VariantName,
    #[arg(long, value_enum)]
    pub kind: TraceKind,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// First p [default: 0.8 (sym), 1.4 (asym); 0 for hopf and codim1]
    #[arg(long)]
    pub p_from: Option<f64>,
    /// Last p [default: 0.995 (sym), 1.8 (asym); 3 for hopf and codim1]
    #[arg(long)]
    pub p_to: Option<f64>,
    /// Spacing of the p grid of traced curves [default: 0.005 (sym), 0.05 (asym)]
    #[arg(long)]
    pub step: Option<f64>,
    /// Focus whose small cycle the homoclinic tracer follows [default: P1 (sym), P2 (asym)]
    #[arg(long, value_enum)]
    pub focus: Option<FocusName>,
    #[arg(long, default_value_t = 1e-5)]
    pub r_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_hc: f64,
    /// Upper end of r for scans and closed-form curves
    #[arg(long, default_value_t = 4.0)]
    pub r_max: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run
    pub manifest: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Diagnostics go to standard error.
pub fn run(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match commands::dispatch(&cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_parsing() {
        assert_eq!(parse_span("0..3").unwrap(), Span { lo: 0.0, hi: 3.0 });
        assert_eq!(parse_span("-1.5..2").unwrap(), Span { lo: -1.5, hi: 2.0 });
        assert!(parse_span("3..1").is_err());
        assert!(parse_span("3").is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(run(vec!["msclimate".into(), "bogus".into()]), EXIT_USAGE);
        let args = ["msclimate", "analyze", "--model", "ms", "--p", "1", "--q", "0.5", "--r", "0.8", "--s", "0.8"];
        assert_eq!(run(args.iter().map(|s| s.to_string()).collect()), EXIT_USAGE);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
