//! End-to-end trials: draw symbols, synthesize, impair, measure, solve, decode.

use std::time::{Duration, Instant};

use ndarray::Array1;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::decode::{decode_frame, estimate_rotation, DecodedFrame};
use crate::error::Result;
use crate::sampling::rng::{GaussianSource, Stream};
use crate::sampling::{apply_impairments, gaussian_matrix_with, measure};
use crate::scenario::{BuiltScenario, GridPoint};
use crate::solver::{
    bpdn_solve, multi_signal_solve, noise_epsilon, noiseless_epsilon, DenseOperator,
    SparseSolution,
};

/// Per-signal outcome of a trial.
#[derive(Debug, Clone)]
pub struct SignalOutcome {
    /// Transmitted alphabet indices.
    pub indices: Vec<usize>,
    pub transmitted: Array1<Complex64>,
    pub theta_true: Array1<Complex64>,
    /// Clean waveform of this signal alone.
    pub waveform: Array1<Complex64>,
    pub solution: SparseSolution,
    pub frame: DecodedFrame,
    /// Common rotation of the raw symbol estimates against the transmitted ones.
    pub rotation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub measurements: usize,
    pub frame_len: usize,
    pub epsilon: f64,
    pub noise_variance: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub runtime: Duration,
    pub signals: Vec<SignalOutcome>,
}

impl TrialOutcome {
    /// Every signal decoded without a scored symbol error.
    pub fn exact(&self) -> bool {
        self.signals.iter().all(|s| s.frame.ser == 0.0)
    }
}

/// Uniform alphabet indices for signal `signal` of a trial.
pub fn draw_indices(seed: u64, signal: usize, count: usize, alphabet_len: usize) -> Vec<usize> {
    let mut source = GaussianSource::new(seed, Stream::Symbols(signal as u32));
    (0..count).map(|_| source.below(alphabet_len)).collect()
}

/// Run the scenario once with `measurements` rows and `seed`.
pub fn run_trial(built: &BuiltScenario, measurements: usize, seed: u64) -> Result<TrialOutcome> {
    let start = Instant::now();
    built.check_measurements(measurements)?;
    let scenario = &built.scenario;
    let n = built.frame_len;

    let mut drawn = Vec::with_capacity(built.signals.len());
    let mut clean = Array1::<Complex64>::zeros(n);
    for (i, s) in built.signals.iter().enumerate() {
        let model = s.model.as_ref();
        let indices = draw_indices(seed, i, model.symbol_count(), model.alphabet().len());
        let transmitted: Array1<Complex64> =
            indices.iter().map(|&k| model.alphabet().atom(k)).collect();
        let theta_true = model.ideal_coefficients(&indices)?;
        let waveform = model.synthesize(theta_true.view())?;
        clean += &waveform;
        drawn.push((indices, transmitted, theta_true, waveform));
    }

    let received = apply_impairments(
        clean.view(),
        &scenario.impairments,
        scenario.sample_rate_hz,
        built.min_samples_per_symbol(),
        seed,
    )?;
    let mut phi = gaussian_matrix_with(measurements, n, seed, scenario.measurement_options())?;
    let y = measure(&phi, received.samples.view())?;
    phi.epsilon = if received.noise_variance > 0.0 {
        noise_epsilon(&phi, received.noise_variance)
    } else if let Some(rel) = scenario.relative_residual {
        rel * y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    } else {
        noiseless_epsilon(y.view())
    };
    let cfg = scenario.solver.with_epsilon(phi.epsilon);

    let solutions = if built.signals.len() == 1 {
        let op = DenseOperator::from_product(&phi, built.signals[0].model.basis())?;
        vec![bpdn_solve(&op, y.view(), &cfg)?]
    } else {
        let bases: Vec<_> = built.signals.iter().map(|s| s.model.basis()).collect();
        multi_signal_solve(&bases, &phi, y.view(), &cfg)?
    };

    let mut signals = Vec::with_capacity(drawn.len());
    for ((s, (indices, transmitted, theta_true, waveform)), solution) in
        built.signals.iter().zip(drawn).zip(solutions)
    {
        let frame = decode_frame(
            solution.theta_hat.view(),
            s.model.as_ref(),
            &indices,
            waveform.view(),
            measurements,
            &scenario.decode,
        )?;
        let rotation = estimate_rotation(frame.decision.symbols.view(), transmitted.view()).ok();
        signals.push(SignalOutcome {
            indices,
            transmitted,
            theta_true,
            waveform,
            solution,
            frame,
            rotation,
        });
    }

    let first = &signals[0].solution;
    Ok(TrialOutcome {
        seed,
        measurements,
        frame_len: n,
        epsilon: phi.epsilon,
        noise_variance: received.noise_variance,
        residual_norm: first.residual_norm,
        iterations: first.iterations,
        converged: first.converged,
        runtime: start.elapsed(),
        signals,
    })
}

/// Aggregate of one sweep grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub axis: &'static str,
    pub value: f64,
    pub measurements: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_ser: f64,
    pub converged: usize,
}

/// Success-rate table over `grid × seeds`. Trials run in parallel; each trial
/// depends only on its scenario, grid point and seed.
pub fn sweep(
    built: &BuiltScenario,
    grid: &[GridPoint],
    first_seed: u64,
    seeds: usize,
) -> Result<Vec<SweepRow>> {
    let points = grid
        .iter()
        .map(|p| p.resolve(built).map(|k| (*p, k)))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| (0..seeds as u64).map(move |s| (p, first_seed + s)))
        .collect();
    let outcomes = jobs
        .par_iter()
        .map(|&(p, seed)| run_trial(built, points[p].1, seed).map(|t| (p, t)))
        .collect::<Result<Vec<_>>>()?;

    Ok(points
        .iter()
        .enumerate()
        .map(|(p, &(point, k))| {
            let trials: Vec<&TrialOutcome> = outcomes
                .iter()
                .filter(|(q, _)| *q == p)
                .map(|(_, t)| t)
                .collect();
            let successes = trials.iter().filter(|t| t.exact()).count();
            let sers: Vec<f64> = trials
                .iter()
                .flat_map(|t| t.signals.iter().map(|s| s.frame.ser))
                .collect();
            SweepRow {
                scenario: built.scenario.name.clone(),
                axis: point.axis_name(),
                value: point.value(),
                measurements: k,
                trials: trials.len(),
                successes,
                success_rate: successes as f64 / trials.len().max(1) as f64,
                mean_ser: sers.iter().sum::<f64>() / sers.len().max(1) as f64,
                converged: trials.iter().filter(|t| t.converged).count(),
            }
        })
        .collect())
}
