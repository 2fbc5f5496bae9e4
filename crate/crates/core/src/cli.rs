//! The `rffit` command-line driver.
//!
//! Exit codes: 0 on success (for `fit`, a converged run), 2 when a fit did
//! not converge (results are still written), 1 on configuration, data or
//! usage errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::io::{
    export_results, format_touchstone, read_touchstone, write_touchstone, DataFormat, FitSetup,
    ModelOverrides, Overrides, RunInfo,
};
use crate::models::{default_model, Field, Model, StaticValue};
use crate::netcore::{FreqUnit, Frequency, DEFAULT_Z0};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rffit", version, about = "Fit parametric RF network models to Touchstone data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the fit described by a TOML config and export the results.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fitter (overrides the config): nelder-mead, lbfgs, mcmc, nested.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a catalogue model over a linear grid and emit Touchstone.
    Eval {
        #[arg(long)]
        model: String,
        #[arg(long)]
        f_start: f64,
        #[arg(long)]
        f_stop: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "GHz")]
        unit: String,
        /// TOML file of `[params]` / `[static]` overrides, applied before
        /// `--set` and `--static`.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Raw parameter values, `path=v` or `path=v0,v1` (repeatable).
        #[arg(long = "set", value_name = "PATH=VALUE")]
        set: Vec<String>,
        /// Static fields, `name=value` (repeatable).
        #[arg(long = "static", value_name = "NAME=VALUE")]
        statics: Vec<String>,
        #[arg(long, default_value = "RI")]
        format: String,
        #[arg(long, default_value_t = DEFAULT_Z0)]
        z0: f64,
        /// Output `.s1p`/`.s2p` file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rewrite a Touchstone file in another number format.
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        format: String,
        /// Frequency unit of the output; defaults to the input's.
        #[arg(long)]
        unit: Option<String>,
    },
}

fn split_assignment(s: &str) -> Result<(&str, &str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Config(format!("expected NAME=VALUE, got `{s}`")))
}

/// Applies `--set` and `--static` assignments to a model.
pub fn apply_assignments(mut model: Model, set: &[String], statics: &[String]) -> Result<Model> {
    for a in set {
        let (path, v) = split_assignment(a)?;
        let values = v
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("--set {path}: invalid number `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let p = model
            .param(path)
            .ok_or_else(|| Error::UnknownPath(path.to_string()))?
            .clone();
        let p = if values.len() == 1 {
            p.value(values[0])?
        } else {
            p.values(values)?
        };
        model = model.with_field(path, Field::Param(p))?;
    }
    for a in statics {
        let (name, v) = split_assignment(a)?;
        let value = if let Ok(b) = v.parse::<bool>() {
            StaticValue::Flag(b)
        } else if let Ok(i) = v.parse::<i64>() {
            StaticValue::Int(i)
        } else {
            StaticValue::Text(v.to_string())
        };
        model = model.with_field(name, Field::Static(value))?;
    }
    Ok(model)
}

fn fit(config: PathBuf, out: Option<PathBuf>, method: Option<String>, seed: Option<u64>) -> Result<i32> {
    let setup = FitSetup::load(&config, &Overrides { method, seed, out })?;
    for w in &setup.measured.warnings {
        eprintln!("warning: {w}");
    }
    let res = setup.run()?;
    let info = RunInfo {
        seed: setup.seed,
        config_hash: setup.config_hash.clone(),
        config_path: Some(setup.config_path.clone()),
        data_path: setup.measured.source.clone(),
    };
    export_results(&res, &setup.objective, &setup.measured, &info, &setup.out)?;
    println!("method: {}", res.method);
    println!("termination: {}", res.reason);
    println!("cost: {}", res.cost);
    for (p, x) in res.paths.iter().zip(&res.x) {
        println!("  {p} = {x}");
    }
    if let Some((z, dz)) = res.posterior.as_ref().and_then(|p| p.log_evidence) {
        println!("log-evidence: {z} ± {dz}");
    }
    println!("results written to {}", setup.out.display());
    Ok(if res.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[allow(clippy::too_many_arguments)]
fn eval(
    model: String,
    f_start: f64,
    f_stop: f64,
    n: usize,
    unit: String,
    params: Option<PathBuf>,
    set: Vec<String>,
    statics: Vec<String>,
    format: String,
    z0: f64,
    out: Option<PathBuf>,
) -> Result<i32> {
    let unit: FreqUnit = unit.parse()?;
    let format: DataFormat = format.parse()?;
    let mut model = default_model(&model)?;
    if let Some(p) = params {
        model = ModelOverrides::load(p)?.apply(model)?;
    }
    let model = apply_assignments(model, &set, &statics)?;
    let freq = Frequency::with_unit(f_start, f_stop, n, unit)?;
    let s = model.eval_s_z0(&freq, z0)?;
    match out {
        Some(path) => write_touchstone(&path, &s, &freq, format, unit)?,
        None => print!("{}", format_touchstone(&s, &freq, format, unit)?),
    }
    Ok(EXIT_OK)
}

fn convert(input: PathBuf, output: PathBuf, format: String, unit: Option<String>) -> Result<i32> {
    let format: DataFormat = format.parse()?;
    let net = read_touchstone(&input)?;
    for w in &net.warnings {
        eprintln!("warning: {w}");
    }
    let unit = match unit {
        Some(u) => u.parse()?,
        None => net.unit,
    };
    write_touchstone(&output, &net.s, &net.freq, format, unit)?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Fit {
            config,
            out,
            method,
            seed,
        } => fit(config, out, method, seed),
        Command::Eval {
            model,
            f_start,
            f_stop,
            n,
            unit,
            params,
            set,
            statics,
            format,
            z0,
            out,
        } => eval(model, f_start, f_stop, n, unit, params, set, statics, format, z0, out),
        Command::Convert {
            input,
            output,
            format,
            unit,
        } => convert(input, output, format, unit),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
