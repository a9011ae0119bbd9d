//! Pulse-shaping taps.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Within this distance of `|4αt| = 1` the SRRC is evaluated by its limit.
const SINGULAR_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PulseKind {
    Srrc { rolloff: f64, span_symbols: usize },
    HalfSine,
    Delta,
}

/// Sampled pulse with its reference (peak) tap.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape {
    taps: Vec<f64>,
    center: usize,
    kind: PulseKind,
    samples_per_symbol: usize,
}

impl PulseShape {
    /// Single unit tap; the filter matrix built from it is the identity.
    pub fn delta(samples_per_symbol: usize) -> Self {
        Self {
            taps: vec![1.0],
            center: 0,
            kind: PulseKind::Delta,
            samples_per_symbol,
        }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Index of the tap aligned with the symbol instant.
    pub fn center(&self) -> usize {
        self.center
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Number of whole symbols at each frame edge whose pulse is truncated.
    pub fn edge_symbols(&self) -> usize {
        match self.kind {
            PulseKind::Srrc { span_symbols, .. } => span_symbols / 2,
            PulseKind::HalfSine | PulseKind::Delta => 0,
        }
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|c| c * c).sum()
    }
}

/// Unnormalized square-root raised-cosine impulse response at `t` symbol periods.
pub fn srrc_response(t: f64, rolloff: f64) -> f64 {
    let a = rolloff;
    if t == 0.0 {
        return 1.0 - a + 4.0 * a / PI;
    }
    if a == 0.0 {
        return (PI * t).sin() / (PI * t);
    }
    let x = 4.0 * a * t;
    if (x.abs() - 1.0).abs() < SINGULAR_TOL {
        let arg = PI / (4.0 * a);
        return a * FRAC_1_SQRT_2
            * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
    }
    ((PI * t * (1.0 - a)).sin() + x * (PI * t * (1.0 + a)).cos()) / (PI * t * (1.0 - x * x))
}

/// Peak-normalized SRRC taps: `span_symbols·n_s + 1` samples at `t = k/n_s`
/// symbol periods, centred on the middle tap.
pub fn srrc_taps(rolloff: f64, span_symbols: usize, samples_per_symbol: usize) -> Result<PulseShape> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(invalid("rolloff", format!("must lie in [0, 1], got {rolloff}")));
    }
    if span_symbols < 2 {
        return Err(invalid("span_symbols", "must be at least 2"));
    }
    if samples_per_symbol < 2 {
        return Err(invalid("samples_per_symbol", "must be at least 2"));
    }
    let len = span_symbols * samples_per_symbol + 1;
    let center = (len - 1) / 2;
    let peak = srrc_response(0.0, rolloff);
    let mut taps: Vec<f64> = (0..len)
        .map(|k| {
            let t = (k as f64 - center as f64) / samples_per_symbol as f64;
            srrc_response(t, rolloff) / peak
        })
        .collect();
    // exact even symmetry regardless of rounding in t
    for k in 0..center {
        let avg = 0.5 * (taps[k] + taps[len - 1 - k]);
        taps[k] = avg;
        taps[len - 1 - k] = avg;
    }
    Ok(PulseShape {
        taps,
        center,
        kind: PulseKind::Srrc {
            rolloff,
            span_symbols,
        },
        samples_per_symbol,
    })
}

/// Half-sine over two bit periods: `sin(πk/(2n))` for `k = 0..2n`, where `n`
/// is the number of samples per bit. The peak tap (index `n`) is the centre.
pub fn halfsine_taps(samples_per_bit: usize) -> Result<PulseShape> {
    if samples_per_bit == 0 || !samples_per_bit.is_multiple_of(2) {
        return Err(invalid(
            "samples_per_bit",
            format!("must be even and positive, got {samples_per_bit}"),
        ));
    }
    let len = 2 * samples_per_bit;
    let taps = (0..len)
        .map(|k| (PI * k as f64 / len as f64).sin())
        .collect();
    Ok(PulseShape {
        taps,
        center: samples_per_bit,
        kind: PulseKind::HalfSine,
        samples_per_symbol: len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// SRRC by numerical inverse transform of the root-raised-cosine spectrum
    /// (T = 1): h(t) = 2∫₀^{(1+α)/2} H(f) cos(2πft) df, integrated piecewise
    /// with composite Simpson on the flat and transition bands.
    fn srrc_by_spectrum(t: f64, a: f64) -> f64 {
        let f1 = (1.0 - a) / 2.0;
        let f2 = (1.0 + a) / 2.0;
        let h = |f: f64| -> f64 {
            if f <= f1 {
                1.0
            } else if f <= f2 {
                (PI / (2.0 * a) * (f - f1)).cos()
            } else {
                0.0
            }
        };
        let simpson = |lo: f64, hi: f64, n: usize| -> f64 {
            let step = (hi - lo) / n as f64;
            let g = |f: f64| h(f) * (2.0 * PI * f * t).cos();
            let mut acc = g(lo) + g(hi);
            for i in 1..n {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * g(lo + i as f64 * step);
            }
            acc * step / 3.0
        };
        2.0 * (simpson(0.0, f1, 4000) + simpson(f1, f2, 4000))
    }

    #[test]
    fn srrc_129_taps_match_spectrum_oracle() {
        let p = srrc_taps(0.35, 8, 16).unwrap();
        assert_eq!(p.len(), 129);
        assert_eq!(p.center(), 64);
        assert_eq!(p.taps()[64], 1.0);
        let peak = srrc_by_spectrum(0.0, 0.35);
        for (k, c) in p.taps().iter().enumerate() {
            let t = (k as f64 - 64.0) / 16.0;
            let want = srrc_by_spectrum(t, 0.35) / peak;
            assert!((c - want).abs() <= 1e-6, "tap {k}: {c} vs {want}");
        }
    }

    #[test]
    fn srrc_symmetric_for_any_rolloff() {
        for &a in &[0.0, 0.1, 0.25, 0.35, 0.5, 1.0] {
            let p = srrc_taps(a, 6, 8).unwrap();
            let c = p.taps();
            for k in 0..c.len() {
                assert!((c[k] - c[c.len() - 1 - k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn srrc_singular_point_matches_two_sided_limit() {
        let a = 0.35;
        let ts = 1.0 / (4.0 * a);
        let limit = srrc_response(ts, a);
        let left = srrc_response(ts - 1e-6, a);
        let right = srrc_response(ts + 1e-6, a);
        let mid = 0.5 * (left + right);
        assert!((limit - mid).abs() <= 1e-9, "{limit} vs {mid}");
        // a rolloff that puts the singularity on a sample
        let p = srrc_taps(0.25, 4, 16).unwrap();
        assert!(p.taps().iter().all(|c| c.is_finite()));
    }

    #[test]
    fn srrc_rejects_bad_parameters() {
        assert!(srrc_taps(-0.1, 8, 16).is_err());
        assert!(srrc_taps(1.5, 8, 16).is_err());
        assert!(srrc_taps(0.35, 1, 16).is_err());
        assert!(srrc_taps(0.35, 8, 1).is_err());
    }

    #[test]
    fn halfsine_small_case() {
        let p = halfsine_taps(2).unwrap();
        let want = [0.0, FRAC_1_SQRT_2, 1.0, FRAC_1_SQRT_2];
        for (c, w) in p.taps().iter().zip(want) {
            assert!((c - w).abs() < 1e-15);
        }
        assert_eq!(p.center(), 2);
    }

    #[test]
    fn halfsine_range_and_symmetry() {
        let p = halfsine_taps(8).unwrap();
        let c = p.taps();
        assert!(c.iter().all(|&x| (0.0..=1.0).contains(&x)));
        for k in 1..8 {
            assert!((c[8 - k] - c[8 + k]).abs() < 1e-15);
        }
        assert!(halfsine_taps(3).is_err());
    }
}
