//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use phasecs::constellations::{psk_alphabet, Scheme};
use phasecs::decode::{decide_symbols, DecodeOptions};
use phasecs::experiment::{draw_indices, run_trial, sweep, TrialOutcome};
use phasecs::model::{
    build_carrier, build_interpolation, srrc_taps, DictionaryMode, ModelSpec, SignalModel,
    SparseModel,
};
use phasecs::oracle::{direct_modulate, exhaustive_l1_reference, DirectPipeline};
use phasecs::sampling::rng::{GaussianSource, Stream};
use phasecs::sampling::{gaussian_matrix, measure};
use phasecs::scenario::{BuiltScenario, GridPoint, Scenario};
use phasecs::solver::{
    bpdn_solve, complex_soft_threshold, inner, noiseless_epsilon, ComposedOperator,
    DenseOperator, LinearOperator, SolverConfig,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const SEEDS: u64 = 10;

fn build(text: &str) -> BuiltScenario {
    Scenario::from_toml_str(text)
        .and_then(|s| s.build())
        .unwrap_or_else(|e| panic!("scenario does not build: {e}"))
}

fn qpsk_text(extra: &str) -> String {
    format!(
        r#"
        name = "qpsk"
        sample_rate_hz = 1600.0
        measurements = 192
        {extra}
        [[signal]]
        scheme = "psk"
        order = 4
        symbols = 64
        symbol_rate_hz = 100.0
        carrier_hz = 400.0
        pulse = {{ kind = "srrc", rolloff = 0.35, span_symbols = 8 }}
        dictionary = {{ kind = "phase-grid", size = 8 }}
        "#
    )
}

fn trials(built: &BuiltScenario, seeds: u64) -> Vec<TrialOutcome> {
    (1..=seeds)
        .map(|seed| run_trial(built, built.measurements, seed).expect("trial runs"))
        .collect()
}

/// Ratio of the largest to the second-largest modulus in every `j`-block.
fn min_dominance(theta: &Array1<Complex64>, j: usize) -> f64 {
    theta
        .as_slice()
        .unwrap()
        .chunks(j)
        .map(|block| {
            let mut m: Vec<f64> = block.iter().map(|z| z.norm()).collect();
            m.sort_by(|a, b| b.total_cmp(a));
            if m[1] == 0.0 {
                f64::INFINITY
            } else {
                m[0] / m[1]
            }
        })
        .fold(f64::INFINITY, f64::min)
}

fn ac1() -> Check {
    let built = build(&qpsk_text(""));
    let mut good = 0;
    let mut worst_runtime = 0.0f64;
    let mut notes = Vec::new();
    for t in trials(&built, SEEDS) {
        let s = &t.signals[0];
        let dom = min_dominance(&s.solution.theta_hat, 8);
        worst_runtime = worst_runtime.max(t.runtime.as_secs_f64());
        let ok = s.frame.ser == 0.0 && s.frame.nmse <= 1e-3 && dom >= 10.0;
        if ok {
            good += 1;
        } else {
            notes.push(format!(
                "seed {}: ser {} nmse {:.2e} dominance {:.2}",
                t.seed, s.frame.ser, s.frame.nmse, dom
            ));
        }
    }
    let mut msg = format!(
        "{good}/{SEEDS} seeds with SER 0, NMSE ≤ 1e-3, block dominance ≥ 10; slowest seed {worst_runtime:.2} s"
    );
    if !notes.is_empty() {
        msg.push_str(&format!("; {}", notes.join("; ")));
    }
    if good >= 9 && worst_runtime <= 60.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac2() -> Check {
    let qam = r#"
        name = "qam16"
        sample_rate_hz = 1600.0
        measurements = 192
        [[signal]]
        scheme = "qam"
        i_levels = 4
        q_levels = 4
        symbols = 64
        symbol_rate_hz = 100.0
        carrier_hz = 400.0
        "#;
    let apsk = r#"
        name = "apsk"
        sample_rate_hz = 1600.0
        measurements = 192
        [[signal]]
        scheme = "apsk"
        rings = [
            { count = 4, radius = 1.0, phase_shift = 0.7853981633974483 },
            { count = 12, radius = 2.5, phase_shift = 0.0 },
        ]
        symbols = 64
        symbol_rate_hz = 100.0
        carrier_hz = 400.0
        "#;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, text) in [("16QAM", qam), ("4+12-APSK", apsk)] {
        let built = build(text);
        assert_eq!(built.signals[0].model.block_len(), 16);
        let good = trials(&built, SEEDS)
            .iter()
            .filter(|t| t.signals[0].frame.ser == 0.0)
            .count();
        pass &= good >= 9;
        parts.push(format!("{name} {good}/{SEEDS} seeds SER 0"));
    }

    let grid = build(&qam.replace(
        "carrier_hz = 400.0",
        "carrier_hz = 400.0\n        dictionary = { kind = \"phase-grid\", size = 8 }",
    ));
    let t = run_trial(&grid, grid.measurements, 1).expect("trial runs");
    let theta = &t.signals[0].solution.theta_hat;
    let max = theta.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut mags: Vec<f64> = theta
        .iter()
        .map(|z| z.norm())
        .filter(|&m| m > 1e-3 * max)
        .collect();
    mags.sort_by(f64::total_cmp);
    let distinct = 1 + mags.windows(2).filter(|w| w[1] - w[0] > 1e-2 * max).count();
    pass &= distinct > 1;
    parts.push(format!("phase-grid 16QAM has {distinct} distinct coefficient magnitudes"));
    let msg = parts.join("; ");
    if pass {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn oqpsk_text() -> String {
    r#"
    name = "oqpsk"
    sample_rate_hz = 1600.0
    measurements = 96
    [[signal]]
    scheme = "oqpsk"
    symbols = 32
    symbol_rate_hz = 100.0
    carrier_hz = 400.0
    "#
    .to_string()
}

fn ac3() -> Check {
    let built = build(&oqpsk_text());
    let s = &built.signals[0];
    let model = s.model.as_ref();
    let pipeline = DirectPipeline::new(
        Scheme::Oqpsk,
        s.config.pulse_config().build(s.samples_per_symbol).unwrap(),
        400.0,
        1600.0,
        s.samples_per_symbol,
        built.frame_len,
    );
    let mut worst: f64 = 0.0;
    for seed in 0..10 {
        let idx = draw_indices(seed, 0, 32, 4);
        let b: Array1<Complex64> = idx.iter().map(|&k| model.alphabet().atom(k)).collect();
        let via_basis = model.basis().dot(&model.ideal_coefficients(&idx).unwrap());
        let direct = direct_modulate(b.view(), &pipeline).unwrap();
        for (x, y) in via_basis.iter().zip(direct.iter()) {
            worst = worst.max((x - y).norm());
        }
    }
    let mut recovered = 0;
    let runs = trials(&built, SEEDS);
    for t in &runs {
        let d = &t.signals[0].frame.decision;
        if d.atom_indices.iter().zip(&t.signals[0].indices).all(|(a, b)| *a == Some(*b)) {
            recovered += 1;
        }
    }
    let msg = format!(
        "max |Ψ̄θ̄ − direct| = {worst:.2e} over 10 frames; all 32 symbols recovered in {recovered}/{SEEDS} noiseless runs at K = 96"
    );
    if worst <= 1e-10 && recovered == SEEDS as usize {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac4() -> Check {
    let built = build(
        r#"
        name = "mixed"
        sample_rate_hz = 3200.0
        measurement_constant = 3.0
        [[signal]]
        scheme = "psk"
        order = 4
        symbols = 16
        symbol_rate_hz = 100.0
        carrier_hz = 400.0
        [[signal]]
        scheme = "qam"
        i_levels = 4
        q_levels = 4
        symbols = 16
        symbol_rate_hz = 200.0
        carrier_hz = 500.0
        "#,
    );
    let good = trials(&built, SEEDS).iter().filter(|t| t.exact()).count();
    let msg = format!(
        "both streams SER 0 in {good}/{SEEDS} seeds (K = {}, N = {})",
        built.measurements, built.frame_len
    );
    if good >= 8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac5() -> Check {
    let mut parts = Vec::new();
    let mut pass = true;
    for order in [4usize, 8] {
        let built = build(&format!(
            r#"
            name = "psk{order}"
            sample_rate_hz = 1600.0
            measurement_constant = 1.0
            decode = {{ include_edges = true }}
            [[signal]]
            scheme = "psk"
            order = {order}
            symbols = 32
            symbol_rate_hz = 100.0
            carrier_hz = 400.0
            "#
        ));
        let grid: Vec<GridPoint> = (1..=4).map(|c| GridPoint::MeasurementConstant(c as f64)).collect();
        let rows = sweep(&built, &grid, 100, 20).expect("sweep runs");
        let rates: Vec<f64> = rows.iter().map(|r| r.success_rate).collect();
        let reached = rows.iter().any(|r| r.value <= 3.0 && r.success_rate >= 0.9);
        let drops: Vec<f64> = rates.windows(2).map(|w| w[0] - w[1]).filter(|&d| d > 0.0).collect();
        let monotone = drops.len() <= 1 && drops.iter().all(|&d| d <= 0.1);
        pass &= reached && monotone;
        let ks: Vec<usize> = rows.iter().map(|r| r.measurements).collect();
        parts.push(format!("J={order} K={ks:?} success={rates:?}"));
    }
    let msg = parts.join("; ");
    if pass {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac6() -> Check {
    let rotated = build(&qpsk_text("[impairments]\nphase_offset_rad = 0.7853981633974483"));
    let rotations: Vec<f64> = (1..=3)
        .map(|seed| {
            run_trial(&rotated, 192, seed).unwrap().signals[0]
                .rotation
                .unwrap_or(f64::NAN)
        })
        .collect();
    let rot_ok = rotations.iter().all(|r| (r - FRAC_PI_4).abs() <= 0.05);

    let noisy = build(&qpsk_text("[impairments]\nsnr_db = 20.0"));
    let sers: Vec<f64> = (1..=3)
        .map(|seed| run_trial(&noisy, 192, seed).unwrap().signals[0].frame.ser)
        .collect();
    let ser_ok = sers.iter().all(|&s| s <= 0.05);
    let msg = format!("π/4 offset → rotation estimates {rotations:.4?}; 20 dB AWGN → SER {sers:?}");
    if rot_ok && ser_ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn closed_form_threshold(z: Complex64, lambda: f64) -> Complex64 {
    let (r, phi) = z.to_polar();
    Complex64::from_polar((r - lambda).max(0.0), phi)
}

fn random_complex(g: &mut GaussianSource, n: usize) -> Array1<Complex64> {
    Array1::from_shape_simple_fn(n, || Complex64::new(g.next_normal(), g.next_normal()))
}

fn ac7() -> Check {
    let mut g = GaussianSource::new(7, Stream::Noise);
    let mut thr_err: f64 = 0.0;
    for _ in 0..1000 {
        let z = Complex64::new(3.0 * g.next_normal(), 3.0 * g.next_normal());
        let lambda = 4.0 * g.uniform();
        thr_err = thr_err.max((complex_soft_threshold(z, lambda) - closed_form_threshold(z, lambda)).norm());
    }

    let built = build(&qpsk_text(""));
    let model = built.signals[0].model.as_ref();
    let phi = gaussian_matrix(192, 1024, 3).unwrap();
    let composed = ComposedOperator::new(&phi, model).unwrap();
    let dense = DenseOperator::from_product(&phi, model.basis()).unwrap();
    let mut adj_err: f64 = 0.0;
    for _ in 0..5 {
        let u = random_complex(&mut g, model.coefficient_len());
        let v = random_complex(&mut g, 192);
        for op in [&composed as &dyn LinearOperator, &dense] {
            let lhs = inner(op.apply(u.view()).view(), v.view());
            let rhs = inner(u.view(), op.apply_adjoint(v.view()).view());
            adj_err = adj_err.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
    }

    let mut feas_worst = f64::NEG_INFINITY;
    for seed in 1..=3 {
        let t = run_trial(&built, 192, seed).unwrap();
        let s = &t.signals[0].solution;
        let idx = &t.signals[0].indices;
        let y = measure(&gaussian_matrix(192, 1024, seed).unwrap(), model.synthesize(model.ideal_coefficients(idx).unwrap().view()).unwrap().view()).unwrap();
        let y_norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if s.converged {
            feas_worst = feas_worst.max(s.residual_norm - (s.epsilon + 1e-6 * y_norm));
        } else {
            feas_worst = f64::INFINITY;
        }
    }
    let msg = format!(
        "soft-threshold max error {thr_err:.1e}; adjoint relative error {adj_err:.1e}; worst residual excess {feas_worst:.2e}"
    );
    if thr_err <= 1e-12 && adj_err <= 1e-10 && feas_worst <= 0.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac8() -> Check {
    let alphabet = psk_alphabet(4).unwrap();
    let model = SignalModel::build(ModelSpec {
        alphabet: alphabet.clone(),
        pulse: srrc_taps(0.35, 2, 8).unwrap(),
        symbols: 4,
        samples_per_symbol: 8,
        frame_len: 32,
        carrier_hz: 200.0,
        sample_rate_hz: 800.0,
        dictionary: DictionaryMode::AlphabetAtom,
    })
    .unwrap();
    let mut agree = 0;
    for seed in 0..20u64 {
        let idx = draw_indices(seed, 0, 4, 4);
        let phi = gaussian_matrix(24, 32, seed).unwrap();
        let op = DenseOperator::from_product(&phi, model.basis()).unwrap();
        let y = op.apply(model.ideal_coefficients(&idx).unwrap().view());
        let eps = noiseless_epsilon(y.view());
        let sol = bpdn_solve(&op, y.view(), &SolverConfig::default().with_epsilon(eps)).unwrap();
        let decided = decide_symbols(sol.theta_hat.view(), &model, &DecodeOptions::default()).unwrap();
        let reference = exhaustive_l1_reference(&op, y.view(), &alphabet, 4, eps).unwrap();
        let ours: Vec<Option<usize>> = decided.atom_indices;
        if ours == reference.indices.iter().map(|&k| Some(k)).collect::<Vec<_>>() {
            agree += 1;
        }
    }
    let msg = format!("{agree}/20 tiny instances agree with the exhaustive reference");
    if agree >= 19 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn ac9() -> Check {
    let u = build_interpolation(64, 16).unwrap().to_dense();
    let utu_err = (u.t().dot(&u) - Array2::<f64>::eye(64)).iter().fold(0.0f64, |a, v| a.max(v.abs()));

    let e = build_carrier(400.0, 1600.0, 1024).unwrap().to_dense();
    let eh_e = e.t().mapv(|z| z.conj()).dot(&e);
    let unitary_err = (eh_e - Array2::<Complex64>::eye(1024)).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let e_mid = build_carrier(437.0, 1600.0, 256).unwrap().to_dense();
    let unitary_err = (e_mid.t().mapv(|z| z.conj()).dot(&e_mid) - Array2::<Complex64>::eye(256))
        .iter()
        .fold(unitary_err, |a, z| a.max(z.norm()));

    let mut sym_err: f64 = 0.0;
    for alpha in [0.0, 0.22, 0.35, 0.5, 1.0] {
        let taps = srrc_taps(alpha, 8, 16).unwrap();
        let t = taps.taps();
        for k in 0..t.len() {
            sym_err = sym_err.max((t[k] - t[t.len() - 1 - k]).abs());
        }
    }

    let built = build(&qpsk_text(""));
    let model = built.signals[0].model.as_ref();
    let mut g = GaussianSource::new(11, Stream::Noise);
    let theta = random_complex(&mut g, model.coefficient_len());
    let dense = model.basis().dot(&theta);
    let free = model.synthesize(theta.view()).unwrap();
    let apply_err = dense.iter().zip(free.iter()).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));

    let pipeline = DirectPipeline::new(Scheme::Psk, srrc_taps(0.35, 8, 16).unwrap(), 400.0, 1600.0, 16, 1024);
    let idx = draw_indices(5, 0, 64, 4);
    let b: Array1<Complex64> = idx.iter().map(|&k| model.alphabet().atom(k)).collect();
    let ideal = model.basis().dot(&model.ideal_coefficients(&idx).unwrap());
    let direct = direct_modulate(b.view(), &pipeline).unwrap();
    let direct_err = ideal.iter().zip(direct.iter()).fold(0.0f64, |a, (x, y)| a.max((x - y).norm()));

    let msg = format!(
        "UᵀU−I {utu_err:.0e}; EᴴE−I {unitary_err:.1e}; SRRC asymmetry {sym_err:.0e}; Ψθ vs factor chain {apply_err:.1e}; Ψθ_ideal vs direct {direct_err:.1e}"
    );
    if utu_err == 0.0 && unitary_err <= 1e-12 && sym_err <= 1e-12 && apply_err <= 1e-12 && direct_err <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let checks: [Criterion; 9] = [
        ("AC1 QPSK phase-grid reproduction", ac1),
        ("AC2 16QAM and APSK reproduction", ac2),
        ("AC3 OQPSK model identity and recovery", ac3),
        ("AC4 mixed QPSK + 16QAM recovery", ac4),
        ("AC5 measurement scaling sweep", ac5),
        ("AC6 phase rotation and AWGN", ac6),
        ("AC7 solver unit suite", ac7),
        ("AC8 exhaustive-reference agreement", ac8),
        ("AC9 matrix builder identities", ac9),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let what = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {what}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {name} ({secs:.1} s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} ({secs:.1} s): {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
