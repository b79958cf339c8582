//! `spinclock run --config file.json`: batch configuration with the same
//! semantics as the flag-based subcommands. Unknown keys are rejected and
//! referenced files must exist before anything runs.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use spinclock_core::error::{Result, SpinError};

use crate::commands;
use crate::reproduce;

#[derive(Args, Debug)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    t_min: f64,
    t_max: f64,
    #[serde(default = "default_n")]
    n: usize,
    #[serde(default)]
    linear: bool,
}

fn default_n() -> usize {
    400
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    /// Subcommand name: levels, heatcap, magnetize, suscept, powder, mc,
    /// cluster, relax, fit, rabi or reproduce.
    command: String,
    #[serde(default)]
    preset: Option<String>,
    #[serde(default)]
    model: Option<PathBuf>,
    #[serde(default)]
    data: Option<Vec<PathBuf>>,
    #[serde(default)]
    outdir: Option<PathBuf>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    grid: Option<GridConfig>,
    /// Field magnitudes in tesla (first entry used by single-field
    /// commands).
    #[serde(default)]
    fields: Option<Vec<f64>>,
    /// Isotherm temperatures for `magnetize`.
    #[serde(default)]
    temps: Option<Vec<f64>>,
    /// Orientation scheme object, e.g. {"scheme":"cone","aperture_deg":30,"n":350}.
    #[serde(default)]
    scheme: Option<serde_json::Value>,
    /// Extra command-specific options.
    #[serde(default)]
    options: Option<serde_json::Map<String, serde_json::Value>>,
}

fn push_opt(args: &mut Vec<String>, key: &str, value: &serde_json::Value) -> Result<()> {
    let flag = format!("--{}", key.replace('_', "-"));
    match value {
        serde_json::Value::Bool(true) => args.push(flag),
        serde_json::Value::Bool(false) => {}
        serde_json::Value::Number(n) => {
            args.push(flag);
            args.push(n.to_string());
        }
        serde_json::Value::String(s) => {
            args.push(flag);
            args.push(s.clone());
        }
        other => {
            return Err(SpinError::InvalidParameter(format!(
                "unsupported option value for '{key}': {other}"
            )))
        }
    }
    Ok(())
}

pub fn run(outdir_flag: &Path, args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        SpinError::InvalidParameter(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| SpinError::ParseError(format!("{}: {e}", args.config.display())))?;

    for path in cfg.model.iter().chain(cfg.data.iter().flatten()) {
        if !path.exists() {
            return Err(SpinError::InvalidParameter(format!(
                "referenced file does not exist: {}",
                path.display()
            )));
        }
    }
    if let Some(g) = &cfg.grid {
        if !(g.t_min > 0.0 && g.t_max > g.t_min && g.n >= 2) {
            return Err(SpinError::InvalidParameter(format!(
                "invalid grid: [{}, {}] with {} points",
                g.t_min, g.t_max, g.n
            )));
        }
    }

    // Rebuild the equivalent argv of the flag-based subcommand so the two
    // entry points cannot drift apart.
    let outdir = cfg.outdir.clone().unwrap_or_else(|| outdir_flag.to_path_buf());
    let mut argv: Vec<String> =
        vec!["spinclock".into(), cfg.command.clone(), "--outdir".into(), outdir.display().to_string()];
    if let Some(p) = &cfg.preset {
        argv.push("--preset".into());
        argv.push(p.clone());
    }
    if let Some(m) = &cfg.model {
        argv.push("--model".into());
        argv.push(m.display().to_string());
    }
    if let Some(g) = &cfg.grid {
        argv.extend(["--tmin".into(), g.t_min.to_string(), "--tmax".into(), g.t_max.to_string()]);
        argv.extend(["--n".into(), g.n.to_string()]);
        if g.linear {
            argv.push("--linear".into());
        }
    }
    if let Some(fs) = &cfg.fields {
        if let Some(h) = fs.first() {
            argv.extend(["--field".into(), h.to_string()]);
        }
    }
    if let Some(ts) = &cfg.temps {
        argv.push("--temps".into());
        argv.push(ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","));
    }
    if let Some(s) = &cfg.scheme {
        argv.extend(["--scheme".into(), s.to_string()]);
    }
    if let Some(seed) = cfg.seed {
        argv.extend(["--seed".into(), seed.to_string()]);
    }
    if let Some(opts) = &cfg.options {
        for (k, v) in opts {
            push_opt(&mut argv, k, v)?;
        }
    }

    dispatch(&argv, &cfg.command, &outdir)
}

fn dispatch(argv: &[String], command: &str, outdir: &Path) -> Result<()> {
    use clap::Parser;
    // Seed/field flags that a given subcommand does not define are a
    // config error, surfaced with clap's message.
    let parse_err =
        |e: clap::Error| SpinError::InvalidParameter(format!("config maps to invalid flags: {e}"));
    macro_rules! parse {
        ($ty:ty) => {{
            #[derive(Parser)]
            struct Wrap {
                #[arg(long, default_value = ".")]
                #[allow(dead_code)]
                outdir: PathBuf,
                #[command(flatten)]
                inner: $ty,
            }
            let mut v = argv.to_vec();
            v.remove(1); // drop the command token; Wrap has no subcommand
            Wrap::try_parse_from(v).map_err(parse_err)?.inner
        }};
    }
    match command {
        "levels" => commands::levels(outdir, parse!(commands::LevelsArgs)),
        "heatcap" => commands::heatcap(outdir, parse!(commands::HeatcapArgs)),
        "magnetize" => commands::magnetize(outdir, parse!(commands::MagnetizeArgs)),
        "suscept" => commands::suscept(outdir, parse!(commands::SusceptArgs)),
        "powder" => commands::powder(outdir, parse!(commands::PowderArgs)),
        "mc" => commands::mc(outdir, parse!(commands::McArgs)),
        "cluster" => commands::cluster(outdir, parse!(commands::ClusterArgs)),
        "relax" => commands::relax(outdir, parse!(commands::RelaxArgs)),
        "fit" => commands::fit(outdir, parse!(commands::FitArgs)),
        "rabi" => commands::rabi(parse!(commands::RabiArgs)),
        "reproduce" => reproduce::run(outdir, parse!(reproduce::ReproduceArgs)),
        other => Err(SpinError::InvalidParameter(format!("unknown command '{other}'"))),
    }
}
