//! Result files: CSV tables, a JSON summary and a run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitting::{FitResults, Objective};
use crate::io::touchstone::MeasuredNetwork;
use crate::netcore::mag_2_db;

pub const PARAMS_FILE: &str = "params.csv";
pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const MODEL_VS_MEASURED_FILE: &str = "model_vs_measured.csv";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance recorded in the manifest.
#[derive(Debug, Clone, Default)]
pub struct RunInfo {
    pub seed: u64,
    pub config_hash: String,
    pub config_path: Option<PathBuf>,
    pub data_path: Option<PathBuf>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn params_table(res: &FitResults) -> String {
    let post = res.posterior.as_ref();
    let mut out = String::from("path,free,raw,scale,physical,prior,posterior_mean,posterior_std\n");
    for (path, p) in res.model.all_params() {
        for (c, &raw) in p.raw().iter().enumerate() {
            let name = if p.len() == 1 {
                path.0.clone()
            } else {
                format!("{}[{c}]", path.0)
            };
            let idx = res.paths.iter().position(|q| *q == name).filter(|_| p.is_free());
            let (mean, std) = match (post, idx) {
                (Some(po), Some(i)) => (po.mean[i].to_string(), po.std[i].to_string()),
                _ => (String::new(), String::new()),
            };
            writeln!(
                out,
                "{},{},{raw},{},{},{},{mean},{std}",
                csv_field(&name),
                p.is_free(),
                p.scale_factor(),
                raw * p.scale_factor(),
                csv_field(&p.prior().to_string()),
            )
            .unwrap();
        }
    }
    out
}

fn residuals_table(obj: &Objective, x: &[f64]) -> Result<String> {
    let r = obj.residuals(x)?;
    let k = obj.features().len();
    let mut out = String::from("frequency_hz");
    for f in obj.features() {
        write!(out, ",{f}").unwrap();
    }
    out.push('\n');
    for (row, f) in r.chunks(k).zip(obj.freq().f()) {
        write!(out, "{f}").unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

fn model_vs_measured_table(res: &FitResults, obj: &Objective, measured: &MeasuredNetwork) -> Result<String> {
    let model_s = res.model.eval_s_z0(obj.freq(), obj.z0())?;
    let ports = model_s.ports().min(measured.ports());
    let pairs: Vec<(usize, usize)> = (0..ports).flat_map(|i| (0..ports).map(move |j| (i, j))).collect();
    let mut out = String::from("frequency_hz");
    for (i, j) in &pairs {
        let n = format!("s{}{}", i + 1, j + 1);
        write!(out, ",model_{n}_db,model_{n}_deg,measured_{n}_db,measured_{n}_deg").unwrap();
    }
    out.push('\n');
    for (k, f) in obj.freq().f().iter().enumerate() {
        write!(out, "{f}").unwrap();
        for &(i, j) in &pairs {
            for z in [model_s.get(k, i, j), measured.s.get(k, i, j)] {
                write!(out, ",{},{}", mag_2_db(z.norm()), z.arg().to_degrees()).unwrap();
            }
        }
        out.push('\n');
    }
    Ok(out)
}

fn samples_table(res: &FitResults) -> Option<String> {
    let post = res.posterior.as_ref()?;
    let mut out = String::from("weight,log_likelihood");
    for p in &res.paths {
        write!(out, ",{}", csv_field(p)).unwrap();
    }
    out.push('\n');
    for ((x, w), l) in post.samples.iter().zip(&post.weights).zip(&post.log_likelihood) {
        write!(out, "{w},{l}").unwrap();
        for v in x {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    Some(out)
}

#[derive(Serialize)]
struct Evidence {
    log_z: f64,
    log_z_err: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    method: &'a str,
    converged: bool,
    reason: &'a str,
    cost: Option<f64>,
    n_eval: usize,
    n_iter: usize,
    /// Best raw value per free component.
    raw: BTreeMap<&'a str, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_evidence: Option<Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    information: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    posterior_mean: Option<BTreeMap<&'a str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    posterior_std: Option<BTreeMap<&'a str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rhat: Option<BTreeMap<&'a str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ess: Option<BTreeMap<&'a str, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    acceptance: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    method: &'a str,
    seed: u64,
    config_sha256: &'a str,
    config: Option<String>,
    data: Option<String>,
    reason: &'a str,
    converged: bool,
    files: Vec<&'a str>,
}

fn json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("summary types serialize");
    s.push('\n');
    s
}

fn by_path<'a>(paths: &'a [String], v: &[f64]) -> BTreeMap<&'a str, f64> {
    paths.iter().map(String::as_str).zip(v.iter().copied()).collect()
}

/// Writes all result files into `dir` (created if missing) and returns
/// their paths.
pub fn export_results(
    res: &FitResults,
    obj: &Objective,
    measured: &MeasuredNetwork,
    info: &RunInfo,
    dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![
        write_file(dir, PARAMS_FILE, &params_table(res))?,
        write_file(dir, RESIDUALS_FILE, &residuals_table(obj, &res.x)?)?,
        write_file(dir, MODEL_VS_MEASURED_FILE, &model_vs_measured_table(res, obj, measured)?)?,
    ];
    if let Some(t) = samples_table(res) {
        written.push(write_file(dir, SAMPLES_FILE, &t)?);
    }

    let post = res.posterior.as_ref();
    let summary = Summary {
        method: res.method,
        converged: res.converged,
        reason: res.reason.as_str(),
        cost: res.cost.is_finite().then_some(res.cost),
        n_eval: res.n_eval,
        n_iter: res.n_iter,
        raw: by_path(&res.paths, &res.x),
        log_evidence: post
            .and_then(|p| p.log_evidence)
            .map(|(log_z, log_z_err)| Evidence { log_z, log_z_err }),
        information: post.and_then(|p| p.information),
        posterior_mean: post.map(|p| by_path(&res.paths, &p.mean)),
        posterior_std: post.map(|p| by_path(&res.paths, &p.std)),
        rhat: post.and_then(|p| p.rhat.as_deref()).map(|r| by_path(&res.paths, r)),
        ess: post.and_then(|p| p.ess.as_deref()).map(|r| by_path(&res.paths, r)),
        acceptance: post.and_then(|p| p.acceptance.clone()),
    };
    written.push(write_file(dir, SUMMARY_FILE, &json(&summary))?);

    let mut files: Vec<&str> = vec![PARAMS_FILE, RESIDUALS_FILE, MODEL_VS_MEASURED_FILE];
    if post.is_some() {
        files.push(SAMPLES_FILE);
    }
    files.extend([SUMMARY_FILE, MANIFEST_FILE]);
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        method: res.method,
        seed: info.seed,
        config_sha256: &info.config_hash,
        config: info.config_path.as_ref().map(|p| p.display().to_string()),
        data: info.data_path.as_ref().map(|p| p.display().to_string()),
        reason: res.reason.as_str(),
        converged: res.converged,
        files,
    };
    written.push(write_file(dir, MANIFEST_FILE, &json(&manifest))?);
    Ok(written)
}
