//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rffit::autodiff::{finite_diff_check, Dual, Probe, Scalar};
use rffit::fitting::{
    fit_lbfgs, fit_nelder_mead, parse_features, run_mcmc, run_nested, CostPipeline, FitResults,
    LbfgsOptions, McmcOptions, NelderMeadOptions, NestedOptions, Objective,
};
use rffit::io::{read_touchstone, write_touchstone, DataFormat};
use rffit::models::{
    series_resistor, terminated, through, Model, PhysicalCoaxial, TerminatedAmplifier,
};
use rffit::netcore::{
    abcd_to_s, cascade_abcd, s_to_abcd, ABCDMatrixArray, FreqUnit, Frequency, Load, Mat2,
    SMatrixArray,
};
use rffit::params::Parameter;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
}

fn max_err(a: &[Mat2<Complex64>], b: &[Mat2<Complex64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..2).flat_map(move |i| (0..2).map(move |j| (x[i][j] - y[i][j]).norm())))
        .fold(0.0, f64::max)
}

fn random_abcd(rng: &mut ChaCha8Rng, n: usize) -> ABCDMatrixArray {
    let data = (0..n)
        .map(|_| {
            // A, D dimensionless; B in ohms and C in siemens around z0 = 50
            [[c(rng, 1.0), c(rng, 50.0)], [c(rng, 0.02), c(rng, 1.0)]]
        })
        .collect();
    ABCDMatrixArray::new(data).unwrap()
}

fn s_mats(s: &SMatrixArray) -> Vec<Mat2<Complex64>> {
    (0..s.len()).map(|k| s.mat(k)).collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 1000;
    // ABCD -> S -> ABCD
    let a = random_abcd(&mut rng, n);
    let back = s_to_abcd(&abcd_to_s(&a, 50.0).unwrap()).unwrap();
    let e1 = max_err(a.data(), back.data());
    // S -> ABCD -> S, keeping S21 away from zero so the network is nonsingular
    let mut data = Vec::with_capacity(4 * n);
    while data.len() < 4 * n {
        let m = [c(&mut rng, 0.7), c(&mut rng, 0.7), c(&mut rng, 0.7), c(&mut rng, 0.7)];
        if m[2].norm() > 0.1 {
            data.extend(m);
        }
    }
    let s = SMatrixArray::new(2, data, 50.0).unwrap();
    let s_back = abcd_to_s(&s_to_abcd(&s).unwrap(), 50.0).unwrap();
    let e2 = max_err(&s_mats(&s), &s_mats(&s_back));
    let err = e1.max(e2);
    outcome(err < 1e-12, format!("max abs error {err:.2e} over {n}+{n} networks (tol 1e-12)"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 1000;
    let (a, b, cc) = (random_abcd(&mut rng, n), random_abcd(&mut rng, n), random_abcd(&mut rng, n));
    let left = cascade_abcd(&cascade_abcd(&a, &b).unwrap(), &cc).unwrap();
    let right = cascade_abcd(&a, &cascade_abcd(&b, &cc).unwrap()).unwrap();
    let scale = left.data().iter().flat_map(|m| m.iter().flatten().map(|z| z.norm())).fold(1.0, f64::max);
    let assoc = max_err(left.data(), right.data()) / scale;
    let id = ABCDMatrixArray::identity(n);
    let e_id = max_err(cascade_abcd(&a, &id).unwrap().data(), a.data())
        .max(max_err(cascade_abcd(&id, &a).unwrap().data(), a.data()));
    let pass = assoc < 1e-12 && e_id < 1e-12;
    outcome(
        pass,
        format!("associativity {assoc:.2e} (relative to max entry), identity {e_id:.2e} over {n} triples (tol 1e-12)"),
    )
}

fn criterion_3() -> Outcome {
    let f = Frequency::new(1.0, 10.0, 9, "GHz").unwrap();
    let s = series_resistor(Parameter::fixed(50.0)).eval_s(&f).unwrap();
    let want = [[1.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0]];
    let mut err = 0.0f64;
    for k in 0..s.len() {
        for i in 0..2 {
            for j in 0..2 {
                err = err.max((s.get(k, i, j) - want[i][j]).norm());
            }
        }
    }
    let g = terminated(&through(), Load::Short).unwrap().eval_s(&f).unwrap();
    let exact = (0..g.len()).all(|k| g.get(k, 0, 0) == Complex64::new(-1.0, 0.0));
    outcome(
        err < 1e-14 && exact,
        format!("resistor S error {err:.2e} (tol 1e-14); shorted through gives exactly -1: {exact}"),
    )
}

fn lossless_coax(length: f64) -> Model {
    PhysicalCoaxial {
        rho: Parameter::fixed(0.0),
        tand: Parameter::fixed(0.0).n(2).unwrap(),
        length: Parameter::fixed(length),
        ..Default::default()
    }
    .build()
    .unwrap()
}

fn criterion_4() -> Outcome {
    let f = Frequency::new(0.01, 3.0, 201, "GHz").unwrap();
    let s = lossless_coax(10.0).eval_s(&f).unwrap();
    let power = (0..s.len())
        .map(|k| (s.get(k, 0, 0).norm_sqr() + s.get(k, 1, 0).norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max);

    let lossy = |len: f64| {
        PhysicalCoaxial {
            tand: Parameter::uniform(0.0, 0.01).unwrap().scale(0.01).unwrap().n(2).unwrap(),
            length: Parameter::fixed(len),
            ..Default::default()
        }
        .build()
        .unwrap()
    };
    let full = lossy(10.0).eval_s(&f).unwrap();
    let half = lossy(5.0);
    let halves = half.cascade(&half).unwrap().eval_s(&f).unwrap();
    let halving = (0..full.len())
        .flat_map(|k| {
            let (a, b) = (&full, &halves);
            (0..2).flat_map(move |i| (0..2).map(move |j| (a.get(k, i, j), b.get(k, i, j))))
        })
        .map(|(a, b)| (a - b).norm() / a.norm().max(1e-300))
        .fold(0.0, f64::max);
    let recip = (0..full.len())
        .map(|k| (full.get(k, 0, 1) - full.get(k, 1, 0)).norm())
        .fold(0.0, f64::max);
    outcome(
        power < 1e-9 && halving < 1e-10 && recip < 1e-12,
        format!(
            "lossless |S11|^2+|S21|^2-1 {power:.2e} (tol 1e-9); halving {halving:.2e} rel (tol 1e-10); \
             reciprocity {recip:.2e} (tol 1e-12)"
        ),
    )
}

fn s11_loss(p: &Probe<'_>) -> rffit::Result<Dual> {
    let s = p.eval_s()?;
    let total = (0..s.len())
        .map(|k| {
            let e = s.get(k, 0, 0).norm() - 0.1;
            e * e
        })
        .fold(Dual::from(0.0), |a, b| a + b);
    Ok(total / s.len() as f64)
}

fn two_port_loss(p: &Probe<'_>) -> rffit::Result<Dual> {
    let s = p.eval_s()?;
    let total = (0..s.len())
        .map(|k| {
            let e = s.get(k, 0, 0).norm() - 0.1;
            let t = s.get(k, 1, 0).norm() - 0.9;
            e * e + t * t
        })
        .fold(Dual::from(0.0), |a, b| a + b);
    Ok(total / s.len() as f64)
}

fn criterion_5() -> Outcome {
    let f = Frequency::new(1.0, 10.0, 9, "GHz").unwrap();
    let amp = TerminatedAmplifier::default().build().unwrap();
    let n_amp = amp.n_free();
    let e_amp = finite_diff_check(&amp, &s11_loss, &f, 1e-6).unwrap();

    // The unilateral amplifier isolates its input, so the loss above has a
    // zero gradient. The same loss on its output network is non-degenerate.
    let t = TerminatedAmplifier::default();
    let out_net = terminated(&t.parasitics.cascade(&t.resistor).unwrap(), Load::Short).unwrap();
    let e_net = finite_diff_check(&out_net, &s11_loss, &f, 1e-6).unwrap();

    let coax = PhysicalCoaxial {
        mur: Parameter::percent_normal(1.0, 5.0).unwrap(),
        tand: Parameter::uniform(0.0, 0.01)
            .unwrap()
            .scale(0.01)
            .unwrap()
            .n(2)
            .unwrap()
            .value(0.005)
            .unwrap(),
        ..Default::default()
    }
    .build()
    .unwrap();
    let n_coax = coax.n_free();
    let e_coax = finite_diff_check(&coax, &two_port_loss, &f, 1e-6).unwrap();
    outcome(
        n_amp == 4 && n_coax == 9 && e_amp < 1e-6 && e_net < 1e-6 && e_coax < 1e-5,
        format!(
            "amplifier ({n_amp} free) {e_amp:.2e} (tol 1e-6); its output network {e_net:.2e} (tol 1e-6); \
             coax ({n_coax} free) {e_coax:.2e} (tol 1e-5)"
        ),
    )
}

struct CableFits {
    truth: Vec<f64>,
    paths: Vec<String>,
    nm: FitResults,
    nm_time: Duration,
    lb: FitResults,
    lb_time: Duration,
}

/// Synthetic cable written to and read back from a `.s2p`, fitted from a
/// +3% start by both optimizers.
fn cable_fits(dir: &Path) -> CableFits {
    let truth_model = PhysicalCoaxial {
        din: Parameter::fixed(1.12).scale(1e-3).unwrap(),
        dout: Parameter::fixed(3.2).scale(1e-3).unwrap(),
        tand: Parameter::uniform(0.0, 1.0)
            .unwrap()
            .scale(0.01)
            .unwrap()
            .n(2)
            .unwrap()
            .value(0.2)
            .unwrap(),
        ..Default::default()
    }
    .build()
    .unwrap();
    let f = Frequency::new(1.0, 200.0, 101, "MHz").unwrap();
    let path = dir.join("cable.s2p");
    write_touchstone(&path, &truth_model.eval_s(&f).unwrap(), &f, DataFormat::Ri, FreqUnit::MHz).unwrap();
    let measured = read_touchstone(&path).unwrap();

    let truth = truth_model.free_values();
    let start: Vec<f64> = truth.iter().map(|v| v * 1.03).collect();
    let obj = Objective::new(
        truth_model.with_params(&start).unwrap(),
        measured.freq.clone(),
        &measured.s,
        parse_features(&["s11_re", "s11_im", "s21_re", "s21_im"]).unwrap(),
        CostPipeline::parse(&["square", "mean"]).unwrap(),
    )
    .unwrap();
    let t = Instant::now();
    let nm = fit_nelder_mead(&obj, &NelderMeadOptions::default()).unwrap();
    let nm_time = t.elapsed();
    let t = Instant::now();
    let lb = fit_lbfgs(&obj, &LbfgsOptions::default()).unwrap();
    let lb_time = t.elapsed();
    CableFits {
        paths: nm.paths.clone(),
        truth,
        nm,
        nm_time,
        lb,
        lb_time,
    }
}

fn worst_rel(x: &[f64], reference: &[f64]) -> (f64, usize) {
    x.iter()
        .zip(reference)
        .map(|(a, b)| ((a - b) / b).abs())
        .enumerate()
        .fold((0.0, 0), |(m, im), (i, e)| if e > m { (e, i) } else { (m, im) })
}

fn criterion_6(fits: &CableFits) -> Outcome {
    let (e_nm, i_nm) = worst_rel(&fits.nm.x, &fits.truth);
    let (e_lb, i_lb) = worst_rel(&fits.lb.x, &fits.truth);
    let limit = Duration::from_secs(60);
    let pass = fits.nm.converged
        && fits.lb.converged
        && e_nm < 1e-3
        && e_lb < 1e-3
        && fits.nm_time < limit
        && fits.lb_time < limit;
    outcome(
        pass,
        format!(
            "{} free; nelder-mead {} worst {e_nm:.2e} at {} in {:.2?}; lbfgs {} worst {e_lb:.2e} at {} in {:.2?} (tol 1e-3, 60 s)",
            fits.truth.len(),
            fits.nm.reason,
            fits.paths[i_nm],
            fits.nm_time,
            fits.lb.reason,
            fits.paths[i_lb],
            fits.lb_time,
        ),
    )
}

fn criterion_7(fits: &CableFits) -> Outcome {
    let (e, i) = worst_rel(&fits.nm.x, &fits.lb.x);
    outcome(e < 1e-4, format!("worst disagreement {e:.2e} at {} (tol 1e-4)", fits.paths[i]))
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let mu = [1.0, -2.0];
    let sd = [0.5, 2.0];
    let rho: f64 = 0.6;
    let log_post = move |x: &[f64]| {
        let a = (x[0] - mu[0]) / sd[0];
        let b = (x[1] - mu[1]) / sd[1];
        -0.5 * (a * a - 2.0 * rho * a * b + b * b) / (1.0 - rho * rho)
    };
    let opts = McmcOptions {
        seed: 8,
        ..Default::default()
    };
    let run = run_mcmc(log_post, &[0.0, 0.0], &[1.0, 1.0], &opts).unwrap();
    let again = run_mcmc(log_post, &[0.0, 0.0], &[1.0, 1.0], &opts).unwrap();
    let identical = run
        .chains
        .iter()
        .flatten()
        .flatten()
        .zip(again.chains.iter().flatten().flatten())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    let pooled = run.pooled();
    let n = pooled.len() as f64;
    let mut z_max = 0.0f64;
    for d in 0..2 {
        let mean = pooled.iter().map(|x| x[d]).sum::<f64>() / n;
        let se = sd[d] / run.ess[d].sqrt();
        z_max = z_max.max((mean - mu[d]).abs() / se);
    }
    let rhat_max = run.rhat.iter().copied().fold(0.0, f64::max);
    let elapsed = t.elapsed();
    outcome(
        rhat_max < 1.05 && z_max < 4.0 && identical && elapsed < Duration::from_secs(30),
        format!(
            "max R-hat {rhat_max:.4} (tol 1.05); worst mean offset {z_max:.2} SE (tol 4); \
             reproducible {identical}; {elapsed:.2?} (limit 30 s)"
        ),
    )
}

fn phi(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / std::f64::consts::SQRT_2))
}

fn criterion_9() -> Outcome {
    let t = Instant::now();
    let opts = NestedOptions {
        n_live: 200,
        seed: 9,
        ..Default::default()
    };
    let identity = |u: &[f64]| Ok(u.to_vec());
    let mut lines = Vec::new();
    let mut pass = true;

    let lc = 3.0f64.ln();
    let r = run_nested(|_| lc, identity, 2, &opts).unwrap();
    let tol = 3.0 * (r.information / 200.0).sqrt();
    let e = (r.log_z - lc).abs();
    pass &= e <= tol;
    lines.push(format!("constant |dlogZ| {e:.2e} (tol {tol:.2e})"));

    let gauss = |mu: &'static [f64], sd: &'static [f64]| {
        move |x: &[f64]| -> f64 {
            x.iter()
                .zip(mu.iter().zip(sd))
                .map(|(v, (m, s))| {
                    -0.5 * ((v - m) / s).powi(2) - (s * (2.0 * std::f64::consts::PI).sqrt()).ln()
                })
                .sum()
        }
    };
    for (mu, sd) in [(&[0.4][..], &[0.3][..]), (&[0.4, 0.6][..], &[0.3, 0.2][..])] {
        let truth: f64 = mu
            .iter()
            .zip(sd)
            .map(|(m, s)| (phi((1.0 - m) / s) - phi(-m / s)).ln())
            .sum();
        let r = run_nested(gauss(mu, sd), identity, mu.len(), &opts).unwrap();
        let e = (r.log_z - truth).abs();
        let tol = 3.0 * r.log_z_err;
        pass &= e <= tol;
        lines.push(format!("{}-D gaussian |dlogZ| {e:.2e} (tol {tol:.2e})", mu.len()));
    }
    let elapsed = t.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    outcome(pass, format!("{}; {elapsed:.2?} (limit 60 s)", lines.join("; ")))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn criterion_10(dir: &Path) -> Outcome {
    let f = Frequency::new(0.5, 6.0, 23, "GHz").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for ports in [1usize, 2] {
        let data: Vec<Complex64> = (0..f.len() * ports * ports).map(|_| c(&mut rng, 0.9)).collect();
        let s = SMatrixArray::new(ports, data, 50.0).unwrap();
        for fmt in [DataFormat::Ri, DataFormat::Ma, DataFormat::Db] {
            let path = dir.join(format!("rt_{fmt}.s{ports}p"));
            write_touchstone(&path, &s, &f, fmt, FreqUnit::GHz).unwrap();
            let back = read_touchstone(&path).unwrap();
            for (a, b) in back.s.data().iter().zip(s.data()) {
                worst = worst.max((a - b).norm() / b.norm());
            }
            for (a, b) in back.freq.f().iter().zip(f.f()) {
                worst = worst.max((a - b).abs() / b);
            }
        }
    }

    let out = dir.join("bundled_fit");
    let status = Command::new(env!("CARGO_BIN_EXE_rffit"))
        .arg("fit")
        .arg("--config")
        .arg(repo_root().join("data/cable_10m_fit.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    let code = status.status.code();
    let files = ["params.csv", "residuals.csv", "model_vs_measured.csv", "summary.json", "manifest.json"];
    let missing: Vec<&str> = files.iter().copied().filter(|f| !out.join(f).exists()).collect();
    outcome(
        worst < 1e-9 && code == Some(0) && missing.is_empty(),
        format!(
            "round-trip worst {worst:.2e} rel over RI/MA/DB x 1/2 ports (tol 1e-9); \
             CLI exit {code:?}; missing files {missing:?}"
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |n: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        let o = Outcome {
            detail: format!("{} [{:.2?}]", o.detail, t.elapsed()),
            ..o
        };
        println!("criterion {n:>2} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    run(1, "conversion round-trips", &criterion_1);
    run(2, "cascade algebra", &criterion_2);
    run(3, "analytic elements", &criterion_3);
    run(4, "coax physics", &criterion_4);
    run(5, "AD vs finite differences", &criterion_5);
    let fits = cable_fits(dir.path());
    run(6, "synthetic cable recovery", &|| criterion_6(&fits));
    run(7, "cross-solver agreement", &|| criterion_7(&fits));
    run(8, "MCMC sanity", &criterion_8);
    run(9, "nested-sampling evidence", &criterion_9);
    run(10, "Touchstone and CLI", &|| criterion_10(dir.path()));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
