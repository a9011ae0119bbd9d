//! Sparse phase model: `r = E·F1·U·D·θ = Ψ·θ`.
//!
//! `E` is the carrier, `F1` the pulse-shaping filter, `U` the symbol-rate
//! upsampler and `D` the block dictionary whose atoms are candidate
//! constellation points. The offset-quadrature schemes use the stacked real
//! variant in [`stacked`].

mod factors;
mod pulse;
pub mod stacked;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use factors::{
    build_carrier, build_dictionary, build_filter_matrix, build_interpolation,
    build_padded_interpolation, build_phase_grid, CarrierMatrix, Dictionary, FilterMatrix,
    InterpolationMatrix,
};
pub use pulse::{halfsine_taps, srrc_response, srrc_taps, PulseKind, PulseShape};
pub use stacked::{
    build_delay_matrix, compose_stacked_basis, DelayMatrix, StackedDictionary, StackedFilter,
    StackedInterpolation, StackedSignalModel,
};

use crate::constellations::ConstellationAlphabet;
use crate::error::{check_dim, invalid, Result};
use crate::solver::CoefficientDomain;

/// How dictionary atoms are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DictionaryMode {
    /// Atoms are the constellation points; `J` equals the alphabet size.
    AlphabetAtom,
    /// `size` unit-modulus atoms on uniform angles; amplitude rides on the coefficient.
    PhaseGrid { size: usize },
}

/// Everything needed to build a model for one signal.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub alphabet: ConstellationAlphabet,
    pub pulse: PulseShape,
    pub symbols: usize,
    pub samples_per_symbol: usize,
    /// Frame length `N`; at least `symbols · samples_per_symbol`.
    pub frame_len: usize,
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub dictionary: DictionaryMode,
}

impl ModelSpec {
    pub fn symbol_rate_hz(&self) -> f64 {
        self.sample_rate_hz / self.samples_per_symbol as f64
    }

    fn build_dictionary(&self) -> Result<Dictionary> {
        match self.dictionary {
            DictionaryMode::AlphabetAtom => build_dictionary(&self.alphabet, self.symbols),
            DictionaryMode::PhaseGrid { size } => build_phase_grid(size, self.symbols),
        }
    }
}

/// Common surface of the plain and stacked models used by the solver and decoder.
pub trait SparseModel: Send + Sync {
    /// Frame length `N`.
    fn frame_len(&self) -> usize;
    fn symbol_count(&self) -> usize;
    /// Atoms per block, `J`.
    fn block_len(&self) -> usize;
    /// Length of the coefficient vector (`J·M`, or `2·J·M` stacked).
    fn coefficient_len(&self) -> usize;
    fn alphabet(&self) -> &ConstellationAlphabet;
    fn dictionary_mode(&self) -> DictionaryMode;
    /// Materialized basis `Ψ`.
    fn basis(&self) -> &Array2<Complex64>;
    /// `Ψ·θ` through the factor chain, without touching the dense basis.
    fn synthesize(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>>;
    /// `Ψᴴ·r` through the factor chain.
    fn synthesize_adjoint(&self, r: ArrayView1<Complex64>) -> Result<Array1<Complex64>>;
    /// Symbol estimates `b̂ = D·θ`.
    fn symbols_from(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>>;
    /// Ground-truth coefficients for a frame of alphabet indices.
    fn ideal_coefficients(&self, indices: &[usize]) -> Result<Array1<Complex64>>;
    /// Domain the coefficients are recovered in.
    fn coefficient_domain(&self) -> CoefficientDomain {
        CoefficientDomain::NonNegative
    }
    /// Symbols at each frame edge whose pulses are truncated.
    fn edge_symbols(&self) -> usize;
    fn sample_rate_hz(&self) -> f64;
    fn samples_per_symbol(&self) -> usize;
}

/// Materialize `Ψ = E·F1·U·D`.
pub fn compose_basis(
    carrier: &CarrierMatrix,
    filter: &FilterMatrix,
    interp: &InterpolationMatrix,
    dictionary: &Dictionary,
) -> Result<Array2<Complex64>> {
    check_dim("E·F1", carrier.len(), filter.len())?;
    check_dim("F1·U", filter.len(), interp.rows())?;
    check_dim("U·D", interp.cols(), dictionary.blocks())?;
    let shaped = filter.to_dense().dot(&interp.to_dense());
    let basis = real_times_complex(&shaped, &dictionary.to_dense());
    Ok(scale_rows(basis, carrier.diagonal()))
}

pub(crate) fn real_times_complex(a: &Array2<f64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let re = a.dot(&b.mapv(|z| z.re));
    let im = a.dot(&b.mapv(|z| z.im));
    ndarray::Zip::from(&re)
        .and(&im)
        .map_collect(|&r, &i| Complex64::new(r, i))
}

pub(crate) fn complex_times_real(a: &Array2<Complex64>, b: &Array2<f64>) -> Array2<Complex64> {
    let re = a.mapv(|z| z.re).dot(b);
    let im = a.mapv(|z| z.im).dot(b);
    ndarray::Zip::from(&re)
        .and(&im)
        .map_collect(|&r, &i| Complex64::new(r, i))
}

pub(crate) fn scale_rows(mut m: Array2<Complex64>, diag: ArrayView1<Complex64>) -> Array2<Complex64> {
    for (mut row, &e) in m.rows_mut().into_iter().zip(diag.iter()) {
        row.mapv_inplace(|z| z * e);
    }
    m
}

/// Plain (non-offset) phase-sparse model for PSK, QAM and APSK.
#[derive(Debug, Clone)]
pub struct SignalModel {
    spec: ModelSpec,
    carrier: CarrierMatrix,
    filter: FilterMatrix,
    interp: InterpolationMatrix,
    dictionary: Dictionary,
    basis: Array2<Complex64>,
}

impl SignalModel {
    pub fn build(spec: ModelSpec) -> Result<Self> {
        validate_spec(&spec)?;
        let carrier = build_carrier(spec.carrier_hz, spec.sample_rate_hz, spec.frame_len)?;
        let filter = build_filter_matrix(&spec.pulse, spec.frame_len)?;
        let interp =
            build_padded_interpolation(spec.symbols, spec.samples_per_symbol, spec.frame_len)?;
        let dictionary = spec.build_dictionary()?;
        let basis = compose_basis(&carrier, &filter, &interp, &dictionary)?;
        Ok(Self {
            spec,
            carrier,
            filter,
            interp,
            dictionary,
            basis,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn carrier(&self) -> &CarrierMatrix {
        &self.carrier
    }

    pub fn filter(&self) -> &FilterMatrix {
        &self.filter
    }

    pub fn interpolation(&self) -> &InterpolationMatrix {
        &self.interp
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dictionary
    }
}

pub(crate) fn validate_spec(spec: &ModelSpec) -> Result<()> {
    if spec.symbols == 0 {
        return Err(invalid("symbols", "must be at least 1"));
    }
    if spec.samples_per_symbol == 0 {
        return Err(invalid("samples_per_symbol", "must be at least 1"));
    }
    if spec.frame_len < spec.symbols * spec.samples_per_symbol {
        return Err(invalid(
            "frame_len",
            format!(
                "{} is shorter than {} symbols × {} samples",
                spec.frame_len, spec.symbols, spec.samples_per_symbol
            ),
        ));
    }
    Ok(())
}

impl SparseModel for SignalModel {
    fn frame_len(&self) -> usize {
        self.spec.frame_len
    }

    fn symbol_count(&self) -> usize {
        self.spec.symbols
    }

    fn block_len(&self) -> usize {
        self.dictionary.block_len()
    }

    fn coefficient_len(&self) -> usize {
        self.dictionary.cols()
    }

    fn alphabet(&self) -> &ConstellationAlphabet {
        &self.spec.alphabet
    }

    fn dictionary_mode(&self) -> DictionaryMode {
        self.spec.dictionary
    }

    fn basis(&self) -> &Array2<Complex64> {
        &self.basis
    }

    fn synthesize(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        let b = self.dictionary.apply(theta)?;
        let up = self.interp.apply(b.view());
        let shaped = self.filter.apply(up.view());
        Ok(self.carrier.apply(shaped.view()))
    }

    fn synthesize_adjoint(&self, r: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        check_dim("basis adjoint input", self.spec.frame_len, r.len())?;
        let x = self.carrier.apply_adjoint(r);
        let x = self.filter.apply_transpose(x.view());
        let b = self.interp.apply_transpose(x.view());
        Ok(self.dictionary.apply_adjoint(b.view()))
    }

    fn symbols_from(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        self.dictionary.apply(theta)
    }

    fn ideal_coefficients(&self, indices: &[usize]) -> Result<Array1<Complex64>> {
        ideal_plain_coefficients(&self.spec, &self.dictionary, indices)
    }

    fn edge_symbols(&self) -> usize {
        self.spec.pulse.edge_symbols()
    }

    fn sample_rate_hz(&self) -> f64 {
        self.spec.sample_rate_hz
    }

    fn samples_per_symbol(&self) -> usize {
        self.spec.samples_per_symbol
    }
}

pub(crate) fn ideal_plain_coefficients(
    spec: &ModelSpec,
    dictionary: &Dictionary,
    indices: &[usize],
) -> Result<Array1<Complex64>> {
    match spec.dictionary {
        DictionaryMode::AlphabetAtom => dictionary.indicator(indices),
        DictionaryMode::PhaseGrid { .. } => {
            let symbols = indices
                .iter()
                .map(|&i| {
                    if i < spec.alphabet.len() {
                        Ok(spec.alphabet.atom(i))
                    } else {
                        Err(invalid("indices", format!("symbol index {i} out of range")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            dictionary.grid_coefficients(&symbols)
        }
    }
}
