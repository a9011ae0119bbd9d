//! Brute-force references for tests: a sample-domain modulator and an
//! exhaustive search over indicator-structured coefficient vectors.

use std::f64::consts::PI;

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;

use crate::constellations::{ConstellationAlphabet, Scheme};
use crate::error::{check_dim, invalid, Error, Result};
use crate::model::PulseShape;
use crate::solver::LinearOperator;

/// Largest `J^M` the exhaustive reference will enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e6;

/// Parameters of a conventional map → upsample → filter → carrier modulator.
#[derive(Debug, Clone)]
pub struct DirectPipeline {
    pub scheme: Scheme,
    pub pulse: PulseShape,
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub samples_per_symbol: usize,
    /// Output length; `symbols · samples_per_symbol` when unpadded.
    pub frame_len: usize,
}

impl DirectPipeline {
    pub fn new(
        scheme: Scheme,
        pulse: PulseShape,
        carrier_hz: f64,
        sample_rate_hz: f64,
        samples_per_symbol: usize,
        frame_len: usize,
    ) -> Self {
        Self {
            scheme,
            pulse,
            carrier_hz,
            sample_rate_hz,
            samples_per_symbol,
            frame_len,
        }
    }
}

/// Zero-stuff, convolve with the full pulse, then keep `len` samples starting
/// at the pulse center.
fn shape(symbols: &[f64], pulse: &PulseShape, n_s: usize, len: usize) -> Vec<f64> {
    let mut up = vec![0.0; symbols.len() * n_s];
    for (m, &b) in symbols.iter().enumerate() {
        up[m * n_s] = b;
    }
    let taps = pulse.taps();
    let mut full = vec![0.0; up.len() + taps.len() - 1];
    for (i, &x) in up.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (k, &c) in taps.iter().enumerate() {
            full[i + k] += x * c;
        }
    }
    (0..len)
        .map(|i| full.get(i + pulse.center()).copied().unwrap_or(0.0))
        .collect()
}

/// Conventional modulator output for one frame of complex symbols.
///
/// Offset schemes delay the shaped quadrature stream by half a symbol through
/// a zero-initialized delay line before combining.
pub fn direct_modulate(symbols: ArrayView1<Complex64>, p: &DirectPipeline) -> Result<Array1<Complex64>> {
    let n_s = p.samples_per_symbol;
    if n_s == 0 || p.frame_len < symbols.len() * n_s {
        return Err(invalid("frame_len", "frame shorter than symbols × samples per symbol"));
    }
    let re: Vec<f64> = symbols.iter().map(|z| z.re).collect();
    let im: Vec<f64> = symbols.iter().map(|z| z.im).collect();
    let i_branch = shape(&re, &p.pulse, n_s, p.frame_len);
    let q_branch = shape(&im, &p.pulse, n_s, p.frame_len);
    let delay = if p.scheme.is_offset() {
        if !n_s.is_multiple_of(2) {
            return Err(invalid("samples_per_symbol", "offset schemes need an even count"));
        }
        n_s / 2
    } else {
        0
    };
    let mut line = vec![0.0; delay];
    let mut out = Array1::zeros(p.frame_len);
    for i in 0..p.frame_len {
        let q = if delay == 0 {
            q_branch[i]
        } else {
            line.push(q_branch[i]);
            line.remove(0)
        };
        let phase = 2.0 * PI * (p.carrier_hz / p.sample_rate_hz * i as f64).rem_euclid(1.0);
        out[i] = Complex64::new(i_branch[i], q) * Complex64::from_polar(1.0, phase);
    }
    Ok(out)
}

/// Result of the exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub theta: Array1<Complex64>,
    /// Chosen atom index per symbol.
    pub indices: Vec<usize>,
    pub residual_norm: f64,
    /// `false` when no assignment met the budget and the least-residual one was kept.
    pub feasible: bool,
}

/// Minimum-l1 indicator `θ` with `‖y − Aθ‖ ≤ ε`, found by enumerating every
/// one-atom-per-block assignment in lexicographic order.
///
/// `A` has `J·M` columns (plain model) or `2·J·M` (stacked model, where the
/// indicator is duplicated into both halves). Every indicator has the same
/// l1 norm, so the first feasible tuple wins; without a feasible tuple the
/// least residual wins, ties going to the lower tuple.
pub fn exhaustive_l1_reference(
    op: &dyn LinearOperator,
    y: ArrayView1<Complex64>,
    alphabet: &ConstellationAlphabet,
    symbols: usize,
    epsilon: f64,
) -> Result<ReferenceSolution> {
    let j = alphabet.len();
    check_dim("reference measurements", op.rows(), y.len())?;
    let stacked = match op.cols() {
        c if c == j * symbols => false,
        c if c == 2 * j * symbols => true,
        c => return Err(Error::Dimension {
            context: "reference operator columns",
            expected: j * symbols,
            actual: c,
        }),
    };
    let count = (j as f64).powi(symbols as i32);
    if count > ENUMERATION_BUDGET {
        return Err(Error::CombinatorialBudget(count));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(invalid("epsilon", "must be non-negative"));
    }

    // response of each (symbol, atom) indicator
    let half = j * symbols;
    let columns: Vec<Array1<Complex64>> = (0..half)
        .map(|c| {
            let mut e = Array1::zeros(op.cols());
            e[c] = Complex64::new(1.0, 0.0);
            if stacked {
                e[half + c] = Complex64::new(1.0, 0.0);
            }
            op.apply(e.view())
        })
        .collect();

    let residual = |tuple: &[usize]| -> f64 {
        let mut r = y.to_owned();
        for (m, &k) in tuple.iter().enumerate() {
            r -= &columns[m * j + k];
        }
        r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    };

    let mut tuple = vec![0usize; symbols];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut feasible = false;
    loop {
        let res = residual(&tuple);
        if res <= epsilon {
            best = Some((res, tuple.clone()));
            feasible = true;
            break;
        }
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            best = Some((res, tuple.clone()));
        }
        // odometer, last symbol fastest
        let mut pos = symbols;
        let exhausted = loop {
            if pos == 0 {
                break true;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < j {
                break false;
            }
            tuple[pos] = 0;
        };
        if exhausted {
            break;
        }
    }

    let (residual_norm, indices) = best.expect("at least one tuple is visited");
    let mut theta = Array1::zeros(op.cols());
    for (m, &k) in indices.iter().enumerate() {
        theta[m * j + k] = Complex64::new(1.0, 0.0);
        if stacked {
            theta[half + m * j + k] = Complex64::new(1.0, 0.0);
        }
    }
    Ok(ReferenceSolution {
        theta,
        indices,
        residual_norm,
        feasible,
    })
}
