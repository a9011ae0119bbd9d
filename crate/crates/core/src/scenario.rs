//! Experiment descriptions and their translation into models.
//!
//! A scenario is a TOML document with flat top-level keys and one
//! `[[signal]]` table per transmitted signal:
//!
//! ```toml
//! name = "qpsk"
//! seed = 7
//! sample_rate_hz = 1600.0
//! measurements = 192            # or compression_ratio / measurement_constant
//!
//! [impairments]
//! phase_offset_rad = 0.0
//!
//! [[signal]]
//! scheme = "psk"
//! order = 4
//! symbols = 64
//! symbol_rate_hz = 100.0
//! carrier_hz = 400.0
//! pulse = { kind = "srrc", rolloff = 0.35, span_symbols = 8 }
//! dictionary = { kind = "phase-grid", size = 8 }
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::constellations::{
    apsk_alphabet, offset_qpsk_alphabet, psk_alphabet, qam_alphabet, ConstellationAlphabet, Ring,
    Scheme,
};
use crate::decode::{required_measurements, DecodeOptions};
use crate::error::{Error, Result};
use crate::model::{
    halfsine_taps, srrc_taps, DictionaryMode, ModelSpec, PulseShape, SignalModel,
    SparseModel, StackedSignalModel,
};
use crate::sampling::{Impairments, MatrixKind, MeasurementOptions};
use crate::solver::SolverConfig;

fn field(name: impl Into<String>, reason: impl ToString) -> Error {
    Error::Field {
        field: name.into(),
        reason: reason.to_string(),
    }
}

/// Pulse-shaping choice for one signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PulseConfig {
    Srrc {
        rolloff: f64,
        #[serde(default = "default_span")]
        span_symbols: usize,
    },
    HalfSine,
    Delta,
}

fn default_span() -> usize {
    8
}

fn default_spacing() -> f64 {
    1.0
}

fn default_dictionary() -> DictionaryMode {
    DictionaryMode::AlphabetAtom
}

impl PulseConfig {
    /// SRRC with roll-off 0.35 over 8 symbols; half-sine for MSK.
    pub fn default_for(scheme: Scheme) -> Self {
        match scheme {
            Scheme::Msk => PulseConfig::HalfSine,
            _ => PulseConfig::Srrc {
                rolloff: 0.35,
                span_symbols: default_span(),
            },
        }
    }

    pub fn build(&self, samples_per_symbol: usize) -> Result<PulseShape> {
        match *self {
            PulseConfig::Srrc {
                rolloff,
                span_symbols,
            } => srrc_taps(rolloff, span_symbols, samples_per_symbol),
            PulseConfig::HalfSine => {
                if !samples_per_symbol.is_multiple_of(2) {
                    return Err(Error::InvalidParameter {
                        name: "samples_per_symbol",
                        reason: "half-sine shaping needs an even count".into(),
                    });
                }
                halfsine_taps(samples_per_symbol / 2)
            }
            PulseConfig::Delta => Ok(PulseShape::delta(samples_per_symbol)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub scheme: Scheme,
    /// Number of phases (PSK).
    pub order: Option<usize>,
    /// Level counts (QAM).
    pub i_levels: Option<usize>,
    pub q_levels: Option<usize>,
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Rings, innermost first (APSK).
    pub rings: Option<Vec<Ring>>,
    pub symbols: usize,
    pub symbol_rate_hz: f64,
    pub carrier_hz: f64,
    pub pulse: Option<PulseConfig>,
    #[serde(default = "default_dictionary")]
    pub dictionary: DictionaryMode,
}

impl SignalConfig {
    pub fn alphabet(&self) -> Result<ConstellationAlphabet> {
        let need = |v: Option<usize>, name: &str| {
            v.ok_or_else(|| field(name, format!("required for scheme {:?}", self.scheme)))
        };
        match self.scheme {
            Scheme::Psk => psk_alphabet(need(self.order, "order")?),
            Scheme::Rqam => qam_alphabet(
                need(self.i_levels, "i_levels")?,
                need(self.q_levels, "q_levels")?,
                self.spacing,
            ),
            Scheme::Apsk => apsk_alphabet(
                self.rings
                    .as_deref()
                    .ok_or_else(|| field("rings", "required for scheme Apsk"))?,
            ),
            Scheme::Oqpsk | Scheme::Msk => offset_qpsk_alphabet(self.scheme),
        }
    }

    pub fn pulse_config(&self) -> PulseConfig {
        self.pulse.unwrap_or_else(|| PulseConfig::default_for(self.scheme))
    }
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Common sampling rate of the frame.
    pub sample_rate_hz: f64,
    /// Frame length; defaults to the longest `symbols · f_s / symbol_rate_hz`.
    pub frame_len: Option<usize>,
    pub measurements: Option<usize>,
    pub compression_ratio: Option<f64>,
    /// `K = Σ ceil(c·M·ln J)` over the signals.
    pub measurement_constant: Option<f64>,
    #[serde(default)]
    pub measurement_matrix: MatrixKind,
    #[serde(default)]
    pub allow_oversampling: bool,
    /// Noiseless residual budget relative to `‖y‖`.
    pub relative_residual: Option<f64>,
    #[serde(default)]
    pub impairments: Impairments,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub decode: DecodeOptions,
    pub output_dir: Option<PathBuf>,
    #[serde(rename = "signal", default)]
    pub signals: Vec<SignalConfig>,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Validate and build every model.
    pub fn build(&self) -> Result<BuiltScenario> {
        BuiltScenario::new(self.clone())
    }

    pub fn measurement_options(&self) -> MeasurementOptions {
        MeasurementOptions {
            kind: self.measurement_matrix,
            allow_oversampling: self.allow_oversampling,
        }
    }
}

/// One signal with its model.
pub struct BuiltSignal {
    pub config: SignalConfig,
    pub samples_per_symbol: usize,
    pub model: Box<dyn SparseModel>,
}

impl BuiltSignal {
    pub fn alphabet(&self) -> &ConstellationAlphabet {
        self.model.alphabet()
    }
}

/// A validated scenario with its models, frame length and measurement count.
pub struct BuiltScenario {
    pub scenario: Scenario,
    pub signals: Vec<BuiltSignal>,
    pub frame_len: usize,
    pub measurements: usize,
}

fn samples_per_symbol(sample_rate_hz: f64, symbol_rate_hz: f64) -> Option<usize> {
    if !(symbol_rate_hz > 0.0 && symbol_rate_hz.is_finite()) {
        return None;
    }
    let ratio = sample_rate_hz / symbol_rate_hz;
    let n = ratio.round();
    ((ratio - n).abs() <= 1e-9 * ratio && n >= 1.0).then_some(n as usize)
}

impl BuiltScenario {
    fn new(scenario: Scenario) -> Result<Self> {
        let fs = scenario.sample_rate_hz;
        if !(fs > 0.0 && fs.is_finite()) {
            return Err(field("sample_rate_hz", "must be positive and finite"));
        }
        if scenario.signals.is_empty() {
            return Err(field("signal", "at least one [[signal]] table is required"));
        }
        let mut rates = Vec::with_capacity(scenario.signals.len());
        for (i, s) in scenario.signals.iter().enumerate() {
            let n_s = samples_per_symbol(fs, s.symbol_rate_hz).ok_or_else(|| {
                field(
                    format!("signal[{i}].symbol_rate_hz"),
                    format!("{} Hz does not divide sample_rate_hz = {fs} Hz", s.symbol_rate_hz),
                )
            })?;
            if s.symbols == 0 {
                return Err(field(format!("signal[{i}].symbols"), "must be at least 1"));
            }
            rates.push(n_s);
        }
        let natural = scenario
            .signals
            .iter()
            .zip(&rates)
            .map(|(s, &n_s)| s.symbols * n_s)
            .max()
            .unwrap_or(0);
        let frame_len = match scenario.frame_len {
            Some(n) if n < natural => {
                return Err(field(
                    "frame_len",
                    format!("{n} is shorter than the longest signal ({natural} samples)"),
                ))
            }
            Some(n) => n,
            None => natural,
        };

        let mut signals = Vec::with_capacity(scenario.signals.len());
        for (i, (s, &n_s)) in scenario.signals.iter().zip(&rates).enumerate() {
            let at = |e: Error| field(format!("signal[{i}]"), e);
            let alphabet = s.alphabet().map_err(at)?;
            if s.scheme.is_offset() && n_s % 2 != 0 {
                return Err(field(
                    format!("signal[{i}].symbol_rate_hz"),
                    format!("offset schemes need an even number of samples per symbol, got {n_s}"),
                ));
            }
            let pulse = s.pulse_config().build(n_s).map_err(at)?;
            let spec = ModelSpec {
                alphabet,
                pulse,
                symbols: s.symbols,
                samples_per_symbol: n_s,
                frame_len,
                carrier_hz: s.carrier_hz,
                sample_rate_hz: fs,
                dictionary: s.dictionary,
            };
            let model: Box<dyn SparseModel> = if s.scheme.is_offset() {
                Box::new(StackedSignalModel::build(spec).map_err(at)?)
            } else {
                Box::new(SignalModel::build(spec).map_err(at)?)
            };
            signals.push(BuiltSignal {
                config: s.clone(),
                samples_per_symbol: n_s,
                model,
            });
        }

        let min_ns = rates.iter().copied().min().unwrap_or(1);
        scenario
            .impairments
            .validate(min_ns)
            .map_err(|e| field("impairments", e))?;
        scenario.solver.validate().map_err(|e| field("solver", e))?;
        if let Some(r) = scenario.relative_residual {
            if !(r > 0.0 && r.is_finite()) {
                return Err(field("relative_residual", "must be positive and finite"));
            }
        }

        let mut built = Self {
            scenario,
            signals,
            frame_len,
            measurements: 0,
        };
        built.measurements = built.resolve_measurements()?;
        Ok(built)
    }

    fn resolve_measurements(&self) -> Result<usize> {
        let s = &self.scenario;
        let given = [
            s.measurements.is_some(),
            s.compression_ratio.is_some(),
            s.measurement_constant.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if given != 1 {
            return Err(field(
                "measurements",
                "give exactly one of measurements, compression_ratio, measurement_constant",
            ));
        }
        let k = if let Some(k) = s.measurements {
            k
        } else if let Some(eta) = s.compression_ratio {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(field("compression_ratio", "must be positive"));
            }
            (eta * self.frame_len as f64).round() as usize
        } else {
            let c = s.measurement_constant.unwrap_or_default();
            self.measurements_for_constant(c)
                .map_err(|e| field("measurement_constant", e))?
        };
        self.check_measurements(k)?;
        Ok(k)
    }

    /// `Σ ceil(c·M_i·ln J_i)`.
    pub fn measurements_for_constant(&self, constant: f64) -> Result<usize> {
        self.signals
            .iter()
            .map(|s| required_measurements(s.model.symbol_count(), s.model.block_len(), constant))
            .sum()
    }

    /// Measurement count for a multiple of the total symbol count.
    pub fn measurements_for_symbol_multiple(&self, multiple: f64) -> usize {
        let symbols: usize = self.signals.iter().map(|s| s.model.symbol_count()).sum();
        (multiple * symbols as f64 - 1e-9).ceil().max(0.0) as usize
    }

    pub fn check_measurements(&self, k: usize) -> Result<()> {
        if k == 0 {
            return Err(field("measurements", "K must be at least 1"));
        }
        if k > self.frame_len && !self.scenario.allow_oversampling {
            return Err(field(
                "measurements",
                format!("K = {k} exceeds the frame length N = {}", self.frame_len),
            ));
        }
        Ok(())
    }

    /// Smallest samples-per-symbol among the signals.
    pub fn min_samples_per_symbol(&self) -> usize {
        self.signals
            .iter()
            .map(|s| s.samples_per_symbol)
            .min()
            .unwrap_or(1)
    }
}

/// Grid of a measurement sweep. Exactly one axis is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Scenario files, relative to the sweep file.
    pub scenarios: Vec<PathBuf>,
    pub seeds: usize,
    #[serde(default)]
    pub first_seed: u64,
    pub measurements: Option<Vec<usize>>,
    /// `K = ceil(x·Σ M_i)`.
    pub symbol_multiples: Option<Vec<f64>>,
    /// `K = Σ ceil(c·M_i·ln J_i)`.
    pub measurement_constants: Option<Vec<f64>>,
}

/// One axis value of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridPoint {
    Measurements(usize),
    SymbolMultiple(f64),
    MeasurementConstant(f64),
}

impl GridPoint {
    pub fn axis_name(&self) -> &'static str {
        match self {
            GridPoint::Measurements(_) => "measurements",
            GridPoint::SymbolMultiple(_) => "symbol_multiple",
            GridPoint::MeasurementConstant(_) => "measurement_constant",
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            GridPoint::Measurements(k) => k as f64,
            GridPoint::SymbolMultiple(x) | GridPoint::MeasurementConstant(x) => x,
        }
    }

    pub fn resolve(&self, built: &BuiltScenario) -> Result<usize> {
        let k = match *self {
            GridPoint::Measurements(k) => k,
            GridPoint::SymbolMultiple(x) => built.measurements_for_symbol_multiple(x),
            GridPoint::MeasurementConstant(c) => built.measurements_for_constant(c)?,
        };
        built.check_measurements(k)?;
        Ok(k)
    }
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.grid()?;
        if cfg.seeds == 0 {
            return Err(field("seeds", "must be at least 1"));
        }
        if cfg.scenarios.is_empty() {
            return Err(field("scenarios", "at least one scenario is required"));
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let grid: Vec<GridPoint> = match (
            &self.measurements,
            &self.symbol_multiples,
            &self.measurement_constants,
        ) {
            (Some(k), None, None) => k.iter().map(|&k| GridPoint::Measurements(k)).collect(),
            (None, Some(x), None) => x.iter().map(|&x| GridPoint::SymbolMultiple(x)).collect(),
            (None, None, Some(c)) => c.iter().map(|&c| GridPoint::MeasurementConstant(c)).collect(),
            _ => {
                return Err(field(
                    "measurements",
                    "give exactly one of measurements, symbol_multiples, measurement_constants",
                ))
            }
        };
        if grid.is_empty() {
            return Err(field(grid_name(self), "grid is empty"));
        }
        Ok(grid)
    }
}

fn grid_name(cfg: &SweepConfig) -> &'static str {
    if cfg.symbol_multiples.is_some() {
        "symbol_multiples"
    } else if cfg.measurement_constants.is_some() {
        "measurement_constants"
    } else {
        "measurements"
    }
}
