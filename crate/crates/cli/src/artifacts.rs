//! CSV tables and the key-value metrics report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use phasecs::experiment::{SweepRow, TrialOutcome};
use phasecs::scenario::BuiltScenario;

use crate::CliError;

fn write(path: PathBuf, text: String) -> Result<PathBuf, CliError> {
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// TOML-compatible float literal.
fn float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // Debug keeps a decimal point or exponent and round-trips exactly
        format!("{v:?}")
    }
}

fn string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn constellation_csv(outcome: &TrialOutcome, i: usize, edge: usize) -> String {
    let s = &outcome.signals[i];
    let d = &s.frame.decision;
    let m = s.indices.len();
    let mut out = String::from(
        "symbol,transmitted_re,transmitted_im,estimate_re,estimate_im,decided_re,decided_im,transmitted_index,decided_index,edge\n",
    );
    for k in 0..m {
        let t: Complex64 = s.transmitted[k];
        let b = d.symbols[k];
        let c = d.decided[k];
        let idx = d.atom_indices[k].map_or("erasure".to_string(), |a| a.to_string());
        let is_edge = k < edge || k + edge >= m;
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{},{},{idx},{}",
            t.re, t.im, b.re, b.im, c.re, c.im, s.indices[k], u8::from(is_edge)
        );
    }
    out
}

fn theta_csv(outcome: &TrialOutcome, i: usize, block_len: usize) -> String {
    let s = &outcome.signals[i];
    let half = s.theta_true.len();
    let stacked = half == 2 * block_len * s.indices.len();
    let per_part = if stacked { half / 2 } else { half };
    let mut out = String::from("index,part,block,atom,block_start,magnitude,true_magnitude\n");
    for (n, (est, truth)) in s.solution.theta_hat.iter().zip(s.theta_true.iter()).enumerate() {
        let part = if !stacked {
            "all"
        } else if n < per_part {
            "in-phase"
        } else {
            "quadrature"
        };
        let local = n % per_part;
        let _ = writeln!(
            out,
            "{n},{part},{},{},{},{},{}",
            local / block_len,
            local % block_len,
            u8::from(local % block_len == 0),
            est.norm(),
            truth.norm()
        );
    }
    out
}

fn waveform_csv(outcome: &TrialOutcome, i: usize, sample_rate_hz: f64) -> String {
    let s = &outcome.signals[i];
    let rhat = &s.frame.decision.reconstructed;
    let mut out =
        String::from("sample,time_s,original_re,original_im,reconstructed_re,reconstructed_im\n");
    for (n, (r, h)) in s.waveform.iter().zip(rhat.iter()).enumerate() {
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{}",
            n as f64 / sample_rate_hz,
            r.re,
            r.im,
            h.re,
            h.im
        );
    }
    out
}

/// Flat `key = value` report. `runtime_s` is the only field that varies
/// between identical runs.
pub fn metrics_report(built: &BuiltScenario, outcome: &TrialOutcome) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("scenario", string(&built.scenario.name));
    kv("seed", outcome.seed.to_string());
    kv("signals", outcome.signals.len().to_string());
    kv("frame_len", outcome.frame_len.to_string());
    kv("measurements", outcome.measurements.to_string());
    kv("eta", float(outcome.measurements as f64 / outcome.frame_len as f64));
    kv("epsilon", float(outcome.epsilon));
    kv("noise_variance", float(outcome.noise_variance));
    kv("residual_norm", float(outcome.residual_norm));
    kv("iterations", outcome.iterations.to_string());
    kv("converged", outcome.converged.to_string());
    kv("runtime_s", float(outcome.runtime.as_secs_f64()));
    for (i, (s, b)) in outcome.signals.iter().zip(&built.signals).enumerate() {
        let p = format!("signal_{i}");
        kv(&format!("{p}_scheme"), string(&format!("{:?}", b.config.scheme).to_lowercase()));
        kv(&format!("{p}_symbols"), s.indices.len().to_string());
        kv(&format!("{p}_block_len"), b.model.block_len().to_string());
        kv(&format!("{p}_ser"), float(s.frame.ser));
        kv(&format!("{p}_nmse"), float(s.frame.nmse));
        kv(&format!("{p}_lambda0"), float(s.frame.lambda0));
        kv(&format!("{p}_eta"), float(s.frame.eta));
        if let Some(r) = s.rotation {
            kv(&format!("{p}_rotation_rad"), float(r));
        }
        kv(&format!("{p}_l1_norm"), float(s.solution.objective));
    }
    out
}

/// Write every artifact of one run into `dir`.
pub fn write_run(dir: &Path, built: &BuiltScenario, outcome: &TrialOutcome) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (i, b) in built.signals.iter().enumerate() {
        let edge = if built.scenario.decode.include_edges {
            0
        } else {
            b.model.edge_symbols()
        };
        written.push(write(dir.join(format!("constellation_{i}.csv")), constellation_csv(outcome, i, edge))?);
        written.push(write(dir.join(format!("theta_{i}.csv")), theta_csv(outcome, i, b.model.block_len()))?);
        written.push(write(
            dir.join(format!("waveform_{i}.csv")),
            waveform_csv(outcome, i, built.scenario.sample_rate_hz),
        )?);
    }
    written.push(write(dir.join("metrics.toml"), metrics_report(built, outcome))?);
    Ok(written)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "scenario,axis,value,measurements,trials,successes,success_rate,mean_ser,converged\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scenario, r.axis, r.value, r.measurements, r.trials, r.successes, r.success_rate, r.mean_ser, r.converged
        );
    }
    out
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    write(dir.join("sweep.csv"), sweep_csv(rows))
}
