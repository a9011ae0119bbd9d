//! Constellation alphabets for the supported phase-sparse modulations.
//!
//! Every generator is a pure function and the atom order is fixed, so the
//! coefficient index of an atom inside a dictionary block is reproducible.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Psk,
    #[serde(alias = "qam")]
    Rqam,
    Apsk,
    Oqpsk,
    Msk,
}

impl Scheme {
    /// Offset-quadrature schemes need the stacked real model.
    pub fn is_offset(self) -> bool {
        matches!(self, Scheme::Oqpsk | Scheme::Msk)
    }
}

/// One APSK ring: `count` points of modulus `radius`, rotated by `phase_shift` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub count: usize,
    pub radius: f64,
    pub phase_shift: f64,
}

impl Ring {
    pub fn new(count: usize, radius: f64, phase_shift: f64) -> Self {
        Self {
            count,
            radius,
            phase_shift,
        }
    }
}

/// Ordered set of constellation points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationAlphabet {
    atoms: Vec<Complex64>,
    scheme: Scheme,
    ring_radii: Vec<f64>,
}

impl ConstellationAlphabet {
    fn new(atoms: Vec<Complex64>, scheme: Scheme, ring_radii: Vec<f64>) -> Self {
        debug_assert!(!atoms.is_empty());
        Self {
            atoms,
            scheme,
            ring_radii,
        }
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Number of atoms, `J`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Declared ring radii (APSK only; empty otherwise).
    pub fn ring_radii(&self) -> &[f64] {
        &self.ring_radii
    }

    pub fn atom(&self, index: usize) -> Complex64 {
        self.atoms[index]
    }

    /// Index of the atom closest to `z`; ties go to the lowest index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, a) in self.atoms.iter().enumerate() {
            let d = (z - a).norm_sqr();
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }

    /// Smallest distance between two distinct atoms (infinite for a single atom).
    pub fn min_distance(&self) -> f64 {
        let mut min = f64::INFINITY;
        for (i, a) in self.atoms.iter().enumerate() {
            for b in &self.atoms[i + 1..] {
                min = min.min((a - b).norm());
            }
        }
        min
    }

    pub fn max_modulus(&self) -> f64 {
        self.atoms.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Mean of |atom|² over the alphabet.
    pub fn mean_energy(&self) -> f64 {
        self.atoms.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.atoms.len() as f64
    }
}

/// `num_phases`-ary PSK: `atoms[m] = exp(j2πm/num_phases)` for `m = 0..num_phases`.
pub fn psk_alphabet(num_phases: usize) -> Result<ConstellationAlphabet> {
    if num_phases == 0 {
        return Err(invalid("num_phases", "must be at least 1"));
    }
    let atoms = (0..num_phases)
        .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / num_phases as f64))
        .collect();
    Ok(ConstellationAlphabet::new(atoms, Scheme::Psk, Vec::new()))
}

fn amplitude_levels(levels: usize, spacing: f64) -> Vec<f64> {
    // {-(L-1)d, ..., -d, d, ..., (L-1)d}
    (0..levels)
        .map(|i| (2.0 * i as f64 - (levels as f64 - 1.0)) * spacing)
        .collect()
}

/// Rectangular `i_levels × q_levels` QAM with odd multiples of `spacing` on each axis.
///
/// Atoms are ordered in-phase ascending (outer) then quadrature ascending
/// (inner). They are not energy-normalized.
pub fn qam_alphabet(i_levels: usize, q_levels: usize, spacing: f64) -> Result<ConstellationAlphabet> {
    for levels in [i_levels, q_levels] {
        if levels < 2 || levels % 2 != 0 {
            return Err(Error::LevelCount(levels));
        }
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(invalid("spacing", format!("must be positive and finite, got {spacing}")));
    }
    let in_phase = amplitude_levels(i_levels, spacing);
    let quadrature = amplitude_levels(q_levels, spacing);
    let atoms = in_phase
        .iter()
        .flat_map(|&re| quadrature.iter().map(move |&im| Complex64::new(re, im)))
        .collect();
    Ok(ConstellationAlphabet::new(atoms, Scheme::Rqam, Vec::new()))
}

/// Multi-ring APSK; atoms are the rings concatenated in the given order.
pub fn apsk_alphabet(rings: &[Ring]) -> Result<ConstellationAlphabet> {
    if rings.is_empty() {
        return Err(invalid("rings", "at least one ring is required"));
    }
    let mut previous = 0.0;
    for (index, ring) in rings.iter().enumerate() {
        if ring.count == 0 {
            return Err(invalid("rings", format!("ring {index} has no points")));
        }
        if !(ring.radius.is_finite() && ring.phase_shift.is_finite()) {
            return Err(Error::NonFinite);
        }
        if ring.radius <= previous {
            return Err(Error::RingOrder {
                index,
                radius: ring.radius,
                previous,
            });
        }
        previous = ring.radius;
    }
    let atoms = rings
        .iter()
        .flat_map(|ring| {
            (0..ring.count).map(move |k| {
                Complex64::from_polar(
                    ring.radius,
                    2.0 * PI * k as f64 / ring.count as f64 + ring.phase_shift,
                )
            })
        })
        .collect();
    let radii = rings.iter().map(|r| r.radius).collect();
    Ok(ConstellationAlphabet::new(atoms, Scheme::Apsk, radii))
}

/// QPSK points `(±1 ± j)/√2` used by the offset-quadrature schemes, in
/// counter-clockwise order starting at `(1 + j)/√2`.
pub fn offset_qpsk_alphabet(scheme: Scheme) -> Result<ConstellationAlphabet> {
    if !scheme.is_offset() {
        return Err(invalid("scheme", "offset alphabet is only defined for OQPSK and MSK"));
    }
    let s = FRAC_1_SQRT_2;
    let atoms = vec![
        Complex64::new(s, s),
        Complex64::new(-s, s),
        Complex64::new(-s, -s),
        Complex64::new(s, -s),
    ];
    Ok(ConstellationAlphabet::new(atoms, scheme, Vec::new()))
}
