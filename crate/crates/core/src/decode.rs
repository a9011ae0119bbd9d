//! Symbol decisions and reconstruction-quality metrics.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::model::{DictionaryMode, SparseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionRule {
    /// Slice `b̂ = D·θ̂` to the closest alphabet point.
    #[default]
    NearestAtom,
    /// Take the largest-modulus coefficient of each block. Stacked models
    /// always slice.
    DominantAtom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeOptions {
    pub rule: DecisionRule,
    /// Score the filter-edge symbols too.
    pub include_edges: bool,
    /// Zero threshold relative to the largest coefficient modulus.
    pub relative_zero_tol: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            rule: DecisionRule::NearestAtom,
            include_edges: false,
            relative_zero_tol: 1e-6,
        }
    }
}

/// Hard decisions for one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    /// Raw symbol estimates `b̂ = D·θ̂`.
    pub symbols: Array1<Complex64>,
    /// Alphabet index per symbol; `None` marks an erasure (all-zero block).
    pub atom_indices: Vec<Option<usize>>,
    /// Decided alphabet points (zero for erasures).
    pub decided: Array1<Complex64>,
    /// `r̂ = Ψ·θ̂`.
    pub reconstructed: Array1<Complex64>,
}

/// A decision scored against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedFrame {
    pub decision: Decision,
    pub ser: f64,
    pub nmse: f64,
    pub lambda0: f64,
    pub eta: f64,
}

pub fn default_zero_tol(theta: ArrayView1<Complex64>, relative: f64) -> f64 {
    relative * theta.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn decide_symbols(
    theta_hat: ArrayView1<Complex64>,
    model: &dyn SparseModel,
    options: &DecodeOptions,
) -> Result<Decision> {
    check_dim("coefficients", model.coefficient_len(), theta_hat.len())?;
    let m = model.symbol_count();
    let j = model.block_len();
    let stacked = model.coefficient_len() == 2 * j * m;
    let zero_tol = default_zero_tol(theta_hat, options.relative_zero_tol);
    let symbols = model.symbols_from(theta_hat)?;
    let alphabet = model.alphabet();

    let block_is_zero = |block: usize| -> bool {
        let live = |offset: usize| {
            (0..j).any(|k| theta_hat[offset + block * j + k].norm() > zero_tol)
        };
        !(live(0) || (stacked && live(j * m)))
    };

    let atom_indices: Vec<Option<usize>> = (0..m)
        .map(|block| {
            if block_is_zero(block) {
                return None;
            }
            match (options.rule, stacked) {
                (DecisionRule::DominantAtom, false) => {
                    let (k, coeff) = (0..j)
                        .map(|k| (k, theta_hat[block * j + k]))
                        .fold((0, Complex64::new(0.0, 0.0)), |best, cur| {
                            if cur.1.norm() > best.1.norm() {
                                cur
                            } else {
                                best
                            }
                        });
                    match model.dictionary_mode() {
                        DictionaryMode::AlphabetAtom => Some(k),
                        DictionaryMode::PhaseGrid { size } => {
                            let atom = Complex64::from_polar(
                                1.0,
                                2.0 * std::f64::consts::PI * k as f64 / size as f64,
                            );
                            Some(alphabet.nearest(atom * coeff))
                        }
                    }
                }
                _ => Some(alphabet.nearest(symbols[block])),
            }
        })
        .collect();
    let decided = atom_indices
        .iter()
        .map(|i| i.map_or(Complex64::new(0.0, 0.0), |i| alphabet.atom(i)))
        .collect();
    let reconstructed = model.synthesize(theta_hat)?;
    Ok(Decision {
        symbols,
        atom_indices,
        decided,
        reconstructed,
    })
}

/// Range of symbol positions that are scored.
pub fn scored_range(symbols: usize, edge: usize, include_edges: bool) -> std::ops::Range<usize> {
    if include_edges || symbols <= 2 * edge {
        0..symbols
    } else {
        edge..symbols - edge
    }
}

/// Fraction of scored symbols whose decision differs from the truth;
/// erasures count as errors.
pub fn symbol_error_rate(
    decided: &[Option<usize>],
    truth: &[usize],
    edge: usize,
    include_edges: bool,
) -> Result<f64> {
    check_dim("symbol error rate", truth.len(), decided.len())?;
    let range = scored_range(truth.len(), edge, include_edges);
    let scored = range.len();
    if scored == 0 {
        return Ok(0.0);
    }
    let errors = range.filter(|&i| decided[i] != Some(truth[i])).count();
    Ok(errors as f64 / scored as f64)
}

/// `‖r̂ − r‖² / ‖r‖²`.
pub fn nmse(reconstructed: ArrayView1<Complex64>, reference: ArrayView1<Complex64>) -> f64 {
    let err: f64 = reconstructed
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let energy: f64 = reference.iter().map(|z| z.norm_sqr()).sum();
    if energy == 0.0 {
        if err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        err / energy
    }
}

/// Sparse ratio `λ₀`: fraction of entries with modulus above `zero_tol`.
pub fn sparse_ratio(theta: ArrayView1<Complex64>, zero_tol: f64) -> f64 {
    if theta.is_empty() {
        return 0.0;
    }
    theta.iter().filter(|z| z.norm() > zero_tol).count() as f64 / theta.len() as f64
}

/// Compression ratio `η = K/N`.
pub fn compression_ratio(measurements: usize, frame_len: usize) -> Result<f64> {
    if measurements == 0 || measurements > frame_len {
        return Err(invalid(
            "measurements",
            format!("need 1 ≤ K ≤ N, got K = {measurements}, N = {frame_len}"),
        ));
    }
    Ok(measurements as f64 / frame_len as f64)
}

/// `ceil(c·M·ln J)` measurements.
pub fn required_measurements(symbols: usize, dictionary_size: usize, constant: f64) -> Result<usize> {
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(invalid("constant", "must be positive and finite"));
    }
    if dictionary_size == 0 {
        return Err(invalid("dictionary_size", "must be at least 1"));
    }
    let k = constant * symbols as f64 * (dictionary_size as f64).ln();
    // guard against ceil() of values like 88.00000000000001
    Ok((k - 1e-9).ceil().max(0.0) as usize)
}

/// Least-squares common rotation `arg Σ decided·conj(transmitted)`.
pub fn estimate_rotation(
    decided: ArrayView1<Complex64>,
    transmitted: ArrayView1<Complex64>,
) -> Result<f64> {
    check_dim("rotation", transmitted.len(), decided.len())?;
    let corr: Complex64 = decided
        .iter()
        .zip(transmitted.iter())
        .map(|(d, t)| d * t.conj())
        .sum();
    let scale: f64 = decided
        .iter()
        .zip(transmitted.iter())
        .map(|(d, t)| d.norm() * t.norm())
        .sum();
    if scale == 0.0 || corr.norm() <= 1e-12 * scale {
        return Err(Error::UndefinedRotation);
    }
    Ok(corr.arg())
}

/// Decide and score one signal against its transmitted indices and waveform.
pub fn decode_frame(
    theta_hat: ArrayView1<Complex64>,
    model: &dyn SparseModel,
    truth: &[usize],
    reference: ArrayView1<Complex64>,
    measurements: usize,
    options: &DecodeOptions,
) -> Result<DecodedFrame> {
    let decision = decide_symbols(theta_hat, model, options)?;
    let ser = symbol_error_rate(
        &decision.atom_indices,
        truth,
        model.edge_symbols(),
        options.include_edges,
    )?;
    let nmse = nmse(decision.reconstructed.view(), reference);
    let lambda0 = sparse_ratio(theta_hat, default_zero_tol(theta_hat, options.relative_zero_tol));
    let eta = compression_ratio(measurements, model.frame_len())?;
    Ok(DecodedFrame {
        decision,
        ser,
        nmse,
        lambda0,
        eta,
    })
}
