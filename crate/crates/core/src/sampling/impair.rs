use std::f64::consts::PI;

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::rng::{GaussianSource, Stream};
use crate::error::{invalid, Error, Result};

/// Interpolator half-width in samples (8 taps in total).
const HALF_TAPS: isize = 4;
/// Kaiser window shape parameter.
const KAISER_BETA: f64 = 5.0;

/// Channel impairments, applied in the order timing → frequency → phase → noise.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Impairments {
    pub phase_offset_rad: f64,
    pub freq_offset_hz: f64,
    /// Delay in (possibly fractional) samples, in `[0, n_s)`.
    pub timing_offset: f64,
    /// Per-sample SNR; `None` means noiseless.
    pub snr_db: Option<f64>,
}

impl Impairments {
    pub fn is_none(&self) -> bool {
        *self == Self::default()
    }

    pub fn validate(&self, samples_per_symbol: usize) -> Result<()> {
        if !(self.phase_offset_rad.is_finite() && self.freq_offset_hz.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(0.0..samples_per_symbol as f64).contains(&self.timing_offset) {
            return Err(invalid(
                "timing_offset",
                format!(
                    "{} is outside [0, {samples_per_symbol})",
                    self.timing_offset
                ),
            ));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(invalid("snr_db", "must be finite"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpairedSignal {
    pub samples: Array1<Complex64>,
    /// Complex noise variance per sample (0 when noiseless).
    pub noise_variance: f64,
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64).powi(2);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser_sinc(x: f64) -> f64 {
    let edge = HALF_TAPS as f64;
    if x.abs() >= edge {
        return 0.0;
    }
    let sinc = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
    let ratio = x / edge;
    sinc * bessel_i0(KAISER_BETA * (1.0 - ratio * ratio).sqrt()) / bessel_i0(KAISER_BETA)
}

/// Delay `r` by `delay ≥ 0` samples with zero fill. Integer delays are exact
/// shifts; fractional parts use an 8-tap Kaiser-windowed sinc.
pub fn fractional_delay(r: ArrayView1<Complex64>, delay: f64) -> Array1<Complex64> {
    let n = r.len() as isize;
    let whole = delay.floor();
    let frac = delay - whole;
    let whole = whole as isize;
    let at = |i: isize| -> Complex64 {
        if i >= 0 && i < n {
            r[i as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    if frac == 0.0 {
        return Array1::from_shape_fn(r.len(), |i| at(i as isize - whole));
    }
    // r(i − whole − frac) = r(base + u) with base = i − whole − 1, u = 1 − frac
    let u = 1.0 - frac;
    let weights: Vec<(isize, f64)> = (1 - HALF_TAPS..=HALF_TAPS)
        .map(|k| (k, kaiser_sinc(u - k as f64)))
        .collect();
    Array1::from_shape_fn(r.len(), |i| {
        let base = i as isize - whole - 1;
        weights.iter().map(|&(k, w)| at(base + k) * w).sum()
    })
}

/// Apply `imp` to `r`, sampled at `sample_rate_hz` with `t_i = i/f_s`.
///
/// The noise draw uses stream [`Stream::Noise`] of `seed`. Noise power is set
/// relative to the mean power of the signal after the deterministic offsets.
pub fn apply_impairments(
    r: ArrayView1<Complex64>,
    imp: &Impairments,
    sample_rate_hz: f64,
    samples_per_symbol: usize,
    seed: u64,
) -> Result<ImpairedSignal> {
    imp.validate(samples_per_symbol)?;
    if imp.is_none() {
        return Ok(ImpairedSignal {
            samples: r.to_owned(),
            noise_variance: 0.0,
        });
    }
    let mut x = if imp.timing_offset != 0.0 {
        fractional_delay(r, imp.timing_offset)
    } else {
        r.to_owned()
    };
    if imp.freq_offset_hz != 0.0 {
        let cycles = imp.freq_offset_hz / sample_rate_hz;
        for (i, z) in x.iter_mut().enumerate() {
            let frac = (cycles * i as f64).rem_euclid(1.0);
            *z *= Complex64::from_polar(1.0, 2.0 * PI * frac);
        }
    }
    if imp.phase_offset_rad != 0.0 {
        let rot = Complex64::from_polar(1.0, imp.phase_offset_rad);
        x.mapv_inplace(|z| z * rot);
    }
    let mut noise_variance = 0.0;
    if let Some(snr_db) = imp.snr_db {
        let power = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
        noise_variance = power / 10f64.powf(snr_db / 10.0);
        let sd = (noise_variance / 2.0).sqrt();
        let mut g = GaussianSource::new(seed, Stream::Noise);
        for z in x.iter_mut() {
            let re = g.next_normal();
            let im = g.next_normal();
            *z += Complex64::new(re, im) * sd;
        }
    }
    Ok(ImpairedSignal {
        samples: x,
        noise_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn unit_power_signal(len: usize) -> Array1<Complex64> {
        Array1::from_shape_fn(len, |i| Complex64::from_polar(1.0, 0.37 * i as f64))
    }

    fn norm(v: &Array1<Complex64>) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn no_impairments_is_bit_identical() {
        let r = unit_power_signal(64);
        let out = apply_impairments(r.view(), &Impairments::default(), 1600.0, 16, 1).unwrap();
        assert_eq!(out.samples, r);
        assert_eq!(out.noise_variance, 0.0);
    }

    #[test]
    fn phase_offset_rotates_every_sample() {
        let r = unit_power_signal(64);
        let imp = Impairments {
            phase_offset_rad: FRAC_PI_4,
            ..Default::default()
        };
        let out = apply_impairments(r.view(), &imp, 1600.0, 16, 1).unwrap();
        let rot = Complex64::from_polar(1.0, FRAC_PI_4);
        for (a, b) in out.samples.iter().zip(r.iter()) {
            assert!((a - b * rot).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_modulus_offsets_preserve_norm() {
        let r = unit_power_signal(1024);
        let imp = Impairments {
            phase_offset_rad: 1.1,
            freq_offset_hz: 3.7,
            ..Default::default()
        };
        let out = apply_impairments(r.view(), &imp, 1600.0, 16, 1).unwrap();
        assert!((norm(&out.samples) - norm(&r)).abs() < 1e-12);
    }

    #[test]
    fn noise_power_matches_snr() {
        let r = unit_power_signal(1024);
        let imp = Impairments {
            snr_db: Some(20.0),
            ..Default::default()
        };
        let out = apply_impairments(r.view(), &imp, 1600.0, 16, 3).unwrap();
        let noise: f64 = out
            .samples
            .iter()
            .zip(r.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / 1024.0;
        assert!((noise - 0.01).abs() <= 0.001, "{noise}");
        assert!((out.noise_variance - 0.01).abs() < 1e-12);
    }

    #[test]
    fn integer_timing_is_an_exact_shift() {
        let r = unit_power_signal(32);
        let imp = Impairments {
            timing_offset: 3.0,
            ..Default::default()
        };
        let out = apply_impairments(r.view(), &imp, 1600.0, 16, 0).unwrap();
        for i in 0..3 {
            assert_eq!(out.samples[i], Complex64::new(0.0, 0.0));
        }
        for i in 3..32 {
            assert_eq!(out.samples[i], r[i - 3]);
        }
    }

    #[test]
    fn fractional_delay_of_slow_tone() {
        // a tone well inside the passband is delayed almost exactly
        let w = 0.2;
        let r = Array1::from_shape_fn(256, |i| Complex64::from_polar(1.0, w * i as f64));
        let out = fractional_delay(r.view(), 2.5);
        for i in 16..240 {
            let want = Complex64::from_polar(1.0, w * (i as f64 - 2.5));
            assert!((out[i] - want).norm() < 1e-2, "{i}");
        }
    }

    #[test]
    fn timing_offset_out_of_range_rejected() {
        let r = unit_power_signal(32);
        let imp = Impairments {
            timing_offset: 16.0,
            ..Default::default()
        };
        assert!(apply_impairments(r.view(), &imp, 1600.0, 16, 0).is_err());
        let imp = Impairments {
            timing_offset: -0.5,
            ..Default::default()
        };
        assert!(apply_impairments(r.view(), &imp, 1600.0, 16, 0).is_err());
    }
}
