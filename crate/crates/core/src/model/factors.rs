//! The structured factors of the synthesis chain `r = E·F1·U·D·θ`.
//!
//! Each factor keeps its compact form and can be applied matrix-free or
//! materialized with `to_dense`.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;

use super::pulse::PulseShape;
use crate::constellations::ConstellationAlphabet;
use crate::error::{check_dim, invalid, Error, Result};

/// Diagonal carrier matrix, `E[i,i] = exp(j2π f_c i / f_s)` with `t_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarrierMatrix {
    diag: Array1<Complex64>,
}

pub fn build_carrier(carrier_hz: f64, sample_rate_hz: f64, len: usize) -> Result<CarrierMatrix> {
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(invalid("sample_rate_hz", "must be positive and finite"));
    }
    if carrier_hz.is_nan() || carrier_hz < 0.0 {
        return Err(invalid("carrier_hz", "must be non-negative"));
    }
    if carrier_hz >= sample_rate_hz / 2.0 {
        return Err(Error::Aliasing {
            carrier_hz,
            sample_rate_hz,
        });
    }
    if len == 0 {
        return Err(invalid("len", "must be at least 1"));
    }
    let cycles_per_sample = carrier_hz / sample_rate_hz;
    let diag = (0..len)
        .map(|i| {
            // reduce to one cycle first so long frames keep full precision
            let frac = (cycles_per_sample * i as f64).fract();
            Complex64::from_polar(1.0, 2.0 * PI * frac)
        })
        .collect();
    Ok(CarrierMatrix { diag })
}

impl CarrierMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diagonal(&self) -> ArrayView1<'_, Complex64> {
        self.diag.view()
    }

    pub fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        &self.diag * &x
    }

    pub fn apply_adjoint(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        self.diag.mapv(|e| e.conj()) * x
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        Array2::from_diag(&self.diag)
    }
}

/// Banded Toeplitz filter, `(F1·x)[i] = Σ_k c[k]·x[i − k + center]`, truncated
/// to the frame (no wrap-around).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterMatrix {
    taps: Vec<f64>,
    center: usize,
    len: usize,
}

pub fn build_filter_matrix(pulse: &PulseShape, len: usize) -> Result<FilterMatrix> {
    if pulse.len() > len {
        return Err(invalid(
            "pulse",
            format!("{} taps do not fit a frame of {len} samples", pulse.len()),
        ));
    }
    Ok(FilterMatrix {
        taps: pulse.taps().to_vec(),
        center: pulse.center(),
        len,
    })
}

impl FilterMatrix {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Entry `(row, col)`, zero outside the band.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let k = row as isize - col as isize + self.center as isize;
        if k >= 0 && (k as usize) < self.taps.len() {
            self.taps[k as usize]
        } else {
            0.0
        }
    }

    pub fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.len as isize;
        let mut out = Array1::zeros(self.len);
        for (j, &xj) in x.iter().enumerate() {
            if xj == Complex64::new(0.0, 0.0) {
                continue;
            }
            // column j contributes c[k] at row j + k - center
            for (k, &c) in self.taps.iter().enumerate() {
                let row = j as isize + k as isize - self.center as isize;
                if row >= 0 && row < n {
                    out[row as usize] += xj * c;
                }
            }
        }
        out
    }

    pub fn apply_transpose(&self, y: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.len as isize;
        let mut out = Array1::zeros(self.len);
        for j in 0..self.len {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &c) in self.taps.iter().enumerate() {
                let row = j as isize + k as isize - self.center as isize;
                if row >= 0 && row < n {
                    acc += y[row as usize] * c;
                }
            }
            out[j] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.len, self.len), |(i, j)| self.entry(i, j))
    }
}

/// Upsampler `U = I_M ⊗ [1, 0, …, 0]ᵀ`, optionally padded with zero rows up to
/// a longer frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterpolationMatrix {
    symbols: usize,
    samples_per_symbol: usize,
    frame_len: usize,
}

pub fn build_interpolation(symbols: usize, samples_per_symbol: usize) -> Result<InterpolationMatrix> {
    build_padded_interpolation(symbols, samples_per_symbol, symbols * samples_per_symbol)
}

/// As [`build_interpolation`] but with `frame_len ≥ symbols·samples_per_symbol` rows.
pub fn build_padded_interpolation(
    symbols: usize,
    samples_per_symbol: usize,
    frame_len: usize,
) -> Result<InterpolationMatrix> {
    if symbols == 0 || samples_per_symbol == 0 {
        return Err(invalid("symbols", "symbol count and samples per symbol must be positive"));
    }
    if frame_len < symbols * samples_per_symbol {
        return Err(invalid(
            "frame_len",
            format!("{frame_len} is shorter than {symbols}×{samples_per_symbol}"),
        ));
    }
    Ok(InterpolationMatrix {
        symbols,
        samples_per_symbol,
        frame_len,
    })
}

impl InterpolationMatrix {
    pub fn rows(&self) -> usize {
        self.frame_len
    }

    pub fn cols(&self) -> usize {
        self.symbols
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn apply(&self, b: ArrayView1<Complex64>) -> Array1<Complex64> {
        let mut out = Array1::zeros(self.frame_len);
        for (m, &bm) in b.iter().enumerate() {
            out[m * self.samples_per_symbol] = bm;
        }
        out
    }

    pub fn apply_transpose(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        (0..self.symbols)
            .map(|m| x[m * self.samples_per_symbol])
            .collect()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut u = Array2::zeros((self.frame_len, self.symbols));
        for m in 0..self.symbols {
            u[[m * self.samples_per_symbol, m]] = 1.0;
        }
        u
    }
}

/// Block-diagonal dictionary: `M` copies of the 1×J atom row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: Vec<Complex64>,
    blocks: usize,
}

/// Dictionary whose atoms are the alphabet itself.
pub fn build_dictionary(alphabet: &ConstellationAlphabet, symbols: usize) -> Result<Dictionary> {
    if alphabet.len() < 2 {
        return Err(invalid("alphabet", "a dictionary needs at least two atoms"));
    }
    Dictionary::from_atoms(alphabet.atoms().to_vec(), symbols)
}

/// Dictionary of `grid_size` unit-modulus atoms on uniform angles `2πk/grid_size`.
pub fn build_phase_grid(grid_size: usize, symbols: usize) -> Result<Dictionary> {
    if grid_size < 3 {
        return Err(invalid("grid_size", "a phase grid needs at least 3 angles"));
    }
    let atoms = (0..grid_size)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / grid_size as f64))
        .collect();
    Dictionary::from_atoms(atoms, symbols)
}

impl Dictionary {
    pub fn from_atoms(atoms: Vec<Complex64>, blocks: usize) -> Result<Self> {
        if atoms.is_empty() || blocks == 0 {
            return Err(invalid("atoms", "need at least one atom and one block"));
        }
        Ok(Self { atoms, blocks })
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    /// Atoms per block, `J`.
    pub fn block_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn cols(&self) -> usize {
        self.blocks * self.atoms.len()
    }

    pub fn apply(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        check_dim("dictionary input", self.cols(), theta.len())?;
        let j = self.atoms.len();
        Ok((0..self.blocks)
            .map(|m| {
                (0..j)
                    .map(|k| self.atoms[k] * theta[m * j + k])
                    .sum::<Complex64>()
            })
            .collect())
    }

    pub fn apply_adjoint(&self, b: ArrayView1<Complex64>) -> Array1<Complex64> {
        let j = self.atoms.len();
        Array1::from_shape_fn(self.cols(), |i| self.atoms[i % j].conj() * b[i / j])
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let j = self.atoms.len();
        let mut d = Array2::zeros((self.blocks, self.cols()));
        for m in 0..self.blocks {
            for k in 0..j {
                d[[m, m * j + k]] = self.atoms[k];
            }
        }
        d
    }

    /// Indicator coefficients: one unit entry per block at `indices[m]`.
    pub fn indicator(&self, indices: &[usize]) -> Result<Array1<Complex64>> {
        check_dim("indicator indices", self.blocks, indices.len())?;
        let j = self.atoms.len();
        let mut theta = Array1::zeros(self.cols());
        for (m, &k) in indices.iter().enumerate() {
            if k >= j {
                return Err(invalid("indices", format!("atom {k} out of range for J = {j}")));
            }
            theta[m * j + k] = Complex64::new(1.0, 0.0);
        }
        Ok(theta)
    }

    /// Minimum-l1 non-negative representation of each symbol on a unit-modulus
    /// grid: the atom itself when the phase falls on the grid, otherwise the
    /// two bracketing atoms.
    pub fn grid_coefficients(&self, symbols: &[Complex64]) -> Result<Array1<Complex64>> {
        check_dim("grid symbols", self.blocks, symbols.len())?;
        let j = self.atoms.len();
        let step = 2.0 * PI / j as f64;
        let mut theta = Array1::zeros(self.cols());
        for (m, &b) in symbols.iter().enumerate() {
            let modulus = b.norm();
            if modulus == 0.0 {
                continue;
            }
            let phase = b.arg().rem_euclid(2.0 * PI) / step;
            let nearest = phase.round();
            if (phase - nearest).abs() < 1e-9 {
                theta[m * j + (nearest as usize) % j] = Complex64::new(modulus, 0.0);
                continue;
            }
            let lo = (phase.floor() as usize) % j;
            let hi = (lo + 1) % j;
            let (a, c) = (self.atoms[lo], self.atoms[hi]);
            let det = a.re * c.im - a.im * c.re;
            let alpha = (b.re * c.im - b.im * c.re) / det;
            let beta = (a.re * b.im - a.im * b.re) / det;
            theta[m * j + lo] = Complex64::new(alpha, 0.0);
            theta[m * j + hi] = Complex64::new(beta, 0.0);
        }
        Ok(theta)
    }
}
