//! Sparse-model synthesis against direct modulation, for every scheme.

use ndarray::Array1;
use num_complex::Complex64;
use phasecs::constellations::{
    apsk_alphabet, offset_qpsk_alphabet, psk_alphabet, qam_alphabet, ConstellationAlphabet, Ring,
    Scheme,
};
use phasecs::experiment::draw_indices;
use phasecs::model::{
    halfsine_taps, srrc_taps, DictionaryMode, ModelSpec, PulseShape, SignalModel, SparseModel,
    StackedSignalModel,
};
use phasecs::oracle::{direct_modulate, DirectPipeline};

const TOL: f64 = 1e-10;
const FS: f64 = 1600.0;
const FC: f64 = 400.0;

struct Case {
    alphabet: ConstellationAlphabet,
    pulse: PulseShape,
    dictionary: DictionaryMode,
    symbols: usize,
    samples_per_symbol: usize,
    frame_len: usize,
}

impl Case {
    fn new(alphabet: ConstellationAlphabet, dictionary: DictionaryMode) -> Self {
        Self {
            alphabet,
            pulse: srrc_taps(0.35, 8, 16).unwrap(),
            dictionary,
            symbols: 32,
            samples_per_symbol: 16,
            frame_len: 32 * 16,
        }
    }

    fn padded(mut self, extra: usize) -> Self {
        self.frame_len += extra;
        self
    }

    fn model(&self) -> Box<dyn SparseModel> {
        let spec = ModelSpec {
            alphabet: self.alphabet.clone(),
            pulse: self.pulse.clone(),
            symbols: self.symbols,
            samples_per_symbol: self.samples_per_symbol,
            frame_len: self.frame_len,
            carrier_hz: FC,
            sample_rate_hz: FS,
            dictionary: self.dictionary,
        };
        if self.alphabet.scheme().is_offset() {
            Box::new(StackedSignalModel::build(spec).unwrap())
        } else {
            Box::new(SignalModel::build(spec).unwrap())
        }
    }

    fn pipeline(&self) -> DirectPipeline {
        DirectPipeline::new(
            self.alphabet.scheme(),
            self.pulse.clone(),
            FC,
            FS,
            self.samples_per_symbol,
            self.frame_len,
        )
    }

    /// Largest deviation between the model and direct modulation over `seeds` frames.
    fn worst_gap(&self, seeds: u64) -> f64 {
        let model = self.model();
        let pipeline = self.pipeline();
        let mut worst = 0.0f64;
        for seed in 0..seeds {
            let idx = draw_indices(seed, 0, self.symbols, self.alphabet.len());
            let symbols: Array1<Complex64> = idx.iter().map(|&k| self.alphabet.atom(k)).collect();
            let theta = model.ideal_coefficients(&idx).unwrap();
            let via_model = model.synthesize(theta.view()).unwrap();
            let direct = direct_modulate(symbols.view(), &pipeline).unwrap();
            assert_eq!(via_model.len(), self.frame_len);
            let gap = via_model
                .iter()
                .zip(direct.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(gap);
        }
        worst
    }
}

fn apsk() -> ConstellationAlphabet {
    apsk_alphabet(&[
        Ring::new(4, 1.0, std::f64::consts::FRAC_PI_4),
        Ring::new(12, 2.5, 0.0),
    ])
    .unwrap()
}

fn assert_matches(case: Case, label: &str) {
    let gap = case.worst_gap(5);
    assert!(gap < TOL, "{label}: max deviation {gap:e}");
}

#[test]
fn psk_alphabet_atoms_match_direct() {
    for order in [2, 4, 8] {
        let a = psk_alphabet(order).unwrap();
        assert_matches(Case::new(a, DictionaryMode::AlphabetAtom), &format!("{order}-PSK"));
    }
}

#[test]
fn psk_phase_grid_matches_direct() {
    let a = psk_alphabet(4).unwrap();
    assert_matches(Case::new(a, DictionaryMode::PhaseGrid { size: 8 }), "QPSK grid");
}

#[test]
fn qam_matches_direct_in_both_dictionaries() {
    for dictionary in [DictionaryMode::AlphabetAtom, DictionaryMode::PhaseGrid { size: 8 }] {
        let a = qam_alphabet(4, 4, 1.0).unwrap();
        assert_matches(Case::new(a, dictionary), &format!("16QAM {dictionary:?}"));
    }
}

#[test]
fn apsk_matches_direct_in_both_dictionaries() {
    for dictionary in [DictionaryMode::AlphabetAtom, DictionaryMode::PhaseGrid { size: 24 }] {
        assert_matches(Case::new(apsk(), dictionary), &format!("APSK {dictionary:?}"));
    }
}

#[test]
fn oqpsk_matches_direct() {
    for dictionary in [DictionaryMode::AlphabetAtom, DictionaryMode::PhaseGrid { size: 8 }] {
        let a = offset_qpsk_alphabet(Scheme::Oqpsk).unwrap();
        assert_matches(Case::new(a, dictionary), &format!("OQPSK {dictionary:?}"));
    }
}

fn msk_case() -> Case {
    let mut case = Case::new(
        offset_qpsk_alphabet(Scheme::Msk).unwrap(),
        DictionaryMode::AlphabetAtom,
    );
    case.pulse = halfsine_taps(case.samples_per_symbol / 2).unwrap();
    case
}

#[test]
fn msk_matches_direct() {
    assert_matches(msk_case(), "MSK");
}

#[test]
fn msk_envelope_is_constant_away_from_the_edges() {
    let case = msk_case();
    let model = case.model();
    let n_s = case.samples_per_symbol;
    for seed in 0..5 {
        let idx = draw_indices(seed, 0, case.symbols, case.alphabet.len());
        let r = model
            .synthesize(model.ideal_coefficients(&idx).unwrap().view())
            .unwrap();
        let interior: Vec<f64> = r
            .iter()
            .skip(n_s)
            .take(case.frame_len - 2 * n_s)
            .map(|z| z.norm())
            .collect();
        let first = interior[0];
        assert!(first > 0.5);
        for m in interior {
            assert!((m - first).abs() < TOL, "envelope {m} vs {first}");
        }
    }
}

#[test]
fn padding_extends_the_frame_without_changing_it() {
    let extra = 48;
    for (alphabet, label) in [
        (psk_alphabet(4).unwrap(), "QPSK"),
        (qam_alphabet(4, 4, 1.0).unwrap(), "16QAM"),
        (offset_qpsk_alphabet(Scheme::Oqpsk).unwrap(), "OQPSK"),
    ] {
        let base = Case::new(alphabet.clone(), DictionaryMode::AlphabetAtom);
        let padded = Case::new(alphabet, DictionaryMode::AlphabetAtom).padded(extra);
        assert_matches(padded, &format!("{label} padded"));

        let base_model = base.model();
        let padded_model = Case::new(base.alphabet.clone(), DictionaryMode::AlphabetAtom)
            .padded(extra)
            .model();
        let idx = draw_indices(3, 0, base.symbols, base.alphabet.len());
        let short = base_model
            .synthesize(base_model.ideal_coefficients(&idx).unwrap().view())
            .unwrap();
        let long = padded_model
            .synthesize(padded_model.ideal_coefficients(&idx).unwrap().view())
            .unwrap();
        assert_eq!(long.len(), short.len() + extra);
        assert_eq!(padded_model.coefficient_len(), base_model.coefficient_len());
        let pulse_tail = base.pulse.len() - base.pulse.center();
        for n in 0..short.len() - pulse_tail {
            assert!((long[n] - short[n]).norm() < TOL, "{label} sample {n}");
        }
    }
}

#[test]
fn basis_columns_are_the_synthesized_unit_vectors() {
    let case = Case::new(qam_alphabet(4, 4, 1.0).unwrap(), DictionaryMode::AlphabetAtom);
    let model = case.model();
    let basis = model.basis();
    for col in [0, 5, 17, model.coefficient_len() - 1] {
        let mut e = Array1::<Complex64>::zeros(model.coefficient_len());
        e[col] = Complex64::new(1.0, 0.0);
        let r = model.synthesize(e.view()).unwrap();
        let gap = r
            .iter()
            .zip(basis.column(col).iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(gap < TOL, "column {col}: {gap:e}");
    }
}
