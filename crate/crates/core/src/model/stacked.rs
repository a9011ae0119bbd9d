//! Stacked real model for offset-quadrature schemes (OQPSK, MSK).
//!
//! The coefficient vector is `θ̄ = [θ_R; θ_I]`. The in-phase half drives the
//! real parts of the atoms, the quadrature half their imaginary parts, and the
//! delay matrix `P` recombines the two streams with the quadrature stream
//! lagging by half a symbol: `r = E·P·F̄1·Ū·D̄·θ̄`.

use ndarray::{concatenate, s, Array1, Array2, ArrayView1, Axis};
use num_complex::Complex64;

use super::{
    build_carrier, build_filter_matrix, build_padded_interpolation, complex_times_real,
    ideal_plain_coefficients, scale_rows, validate_spec, CarrierMatrix, Dictionary,
    DictionaryMode, FilterMatrix, InterpolationMatrix, ModelSpec, SparseModel,
};
use crate::constellations::ConstellationAlphabet;
use crate::error::{check_dim, invalid, Result};

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `P ∈ C^{N×2N}`: `r[i] = I[i] + j·Q[i − shift]`, with `Q[<0] = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayMatrix {
    len: usize,
    shift: usize,
}

/// Half-symbol delay matrix for `samples_per_symbol` samples per symbol.
pub fn build_delay_matrix(len: usize, samples_per_symbol: usize) -> Result<DelayMatrix> {
    if samples_per_symbol == 0 || !samples_per_symbol.is_multiple_of(2) {
        return Err(invalid(
            "samples_per_symbol",
            format!("half-symbol delay needs an even count, got {samples_per_symbol}"),
        ));
    }
    DelayMatrix::with_shift(len, samples_per_symbol / 2)
}

impl DelayMatrix {
    pub fn with_shift(len: usize, shift: usize) -> Result<Self> {
        if shift >= len.max(1) {
            return Err(invalid("shift", format!("{shift} does not fit a frame of {len}")));
        }
        Ok(Self { len, shift })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn apply(&self, stacked: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        check_dim("delay input", 2 * self.len, stacked.len())?;
        let n = self.len;
        Ok(Array1::from_shape_fn(n, |i| {
            let q = if i >= self.shift {
                stacked[n + i - self.shift]
            } else {
                Complex64::new(0.0, 0.0)
            };
            stacked[i] + J * q
        }))
    }

    pub fn apply_adjoint(&self, r: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.len;
        let mut out = Array1::zeros(2 * n);
        out.slice_mut(s![..n]).assign(&r);
        for l in 0..n - self.shift {
            out[n + l] = -J * r[l + self.shift];
        }
        out
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let n = self.len;
        let mut p = Array2::zeros((n, 2 * n));
        for i in 0..n {
            p[[i, i]] = Complex64::new(1.0, 0.0);
            if i >= self.shift {
                p[[i, n + i - self.shift]] = J;
            }
        }
        p
    }
}

fn block_diag(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra + rb, ca + cb));
    out.slice_mut(s![..ra, ..ca]).assign(a);
    out.slice_mut(s![ra.., ca..]).assign(b);
    out
}

/// `F̄1 = diag(F1, F1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedFilter(pub FilterMatrix);

impl StackedFilter {
    pub fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.0.len();
        let top = self.0.apply(x.slice(s![..n]));
        let bottom = self.0.apply(x.slice(s![n..]));
        concatenate![Axis(0), top, bottom]
    }

    pub fn apply_transpose(&self, y: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.0.len();
        let top = self.0.apply_transpose(y.slice(s![..n]));
        let bottom = self.0.apply_transpose(y.slice(s![n..]));
        concatenate![Axis(0), top, bottom]
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let f = self.0.to_dense();
        block_diag(&f, &f)
    }
}

/// `Ū = diag(U, U)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackedInterpolation(pub InterpolationMatrix);

impl StackedInterpolation {
    pub fn apply(&self, b: ArrayView1<Complex64>) -> Array1<Complex64> {
        let m = self.0.cols();
        let top = self.0.apply(b.slice(s![..m]));
        let bottom = self.0.apply(b.slice(s![m..]));
        concatenate![Axis(0), top, bottom]
    }

    pub fn apply_transpose(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        let n = self.0.rows();
        let top = self.0.apply_transpose(x.slice(s![..n]));
        let bottom = self.0.apply_transpose(x.slice(s![n..]));
        concatenate![Axis(0), top, bottom]
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let u = self.0.to_dense();
        block_diag(&u, &u)
    }
}

/// `D̄ = [[real(D), 0], [0, imag(D)]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedDictionary(pub Dictionary);

impl StackedDictionary {
    pub fn cols(&self) -> usize {
        2 * self.0.cols()
    }

    pub fn apply(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        check_dim("stacked dictionary input", self.cols(), theta.len())?;
        let d = &self.0;
        let j = d.block_len();
        let half = d.cols();
        let atoms = d.atoms();
        let part = |offset: usize, pick: fn(Complex64) -> f64| -> Array1<Complex64> {
            (0..d.blocks())
                .map(|m| {
                    (0..j)
                        .map(|k| theta[offset + m * j + k] * pick(atoms[k]))
                        .sum::<Complex64>()
                })
                .collect()
        };
        let top = part(0, |a| a.re);
        let bottom = part(half, |a| a.im);
        Ok(concatenate![Axis(0), top, bottom])
    }

    pub fn apply_transpose(&self, b: ArrayView1<Complex64>) -> Array1<Complex64> {
        let d = &self.0;
        let j = d.block_len();
        let m = d.blocks();
        let atoms = d.atoms();
        Array1::from_shape_fn(self.cols(), |i| {
            if i < d.cols() {
                b[i / j] * atoms[i % j].re
            } else {
                let i = i - d.cols();
                b[m + i / j] * atoms[i % j].im
            }
        })
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let d = self.0.to_dense();
        block_diag(&d.mapv(|z| z.re), &d.mapv(|z| z.im))
    }
}

/// Materialize `Ψ̄ = E·P·F̄1·Ū·D̄` (carrier included).
pub fn compose_stacked_basis(
    carrier: &CarrierMatrix,
    delay: &DelayMatrix,
    filter: &StackedFilter,
    interp: &StackedInterpolation,
    dictionary: &StackedDictionary,
) -> Result<Array2<Complex64>> {
    check_dim("E·P", carrier.len(), delay.len())?;
    check_dim("P·F̄1", 2 * delay.len(), 2 * filter.0.len())?;
    check_dim("F̄1·Ū", 2 * filter.0.len(), 2 * interp.0.rows())?;
    check_dim("Ū·D̄", 2 * interp.0.cols(), 2 * dictionary.0.blocks())?;
    let shaped = filter
        .to_dense()
        .dot(&interp.to_dense())
        .dot(&dictionary.to_dense());
    let combined = complex_times_real(&delay.to_dense(), &shaped);
    Ok(scale_rows(combined, carrier.diagonal()))
}

/// Stacked model with a half-symbol quadrature delay.
#[derive(Debug, Clone)]
pub struct StackedSignalModel {
    spec: ModelSpec,
    carrier: CarrierMatrix,
    delay: DelayMatrix,
    filter: StackedFilter,
    interp: StackedInterpolation,
    dictionary: StackedDictionary,
    basis: Array2<Complex64>,
}

impl StackedSignalModel {
    pub fn build(spec: ModelSpec) -> Result<Self> {
        validate_spec(&spec)?;
        let delay = build_delay_matrix(spec.frame_len, spec.samples_per_symbol)?;
        Self::with_delay(spec, delay)
    }

    /// Build with an explicit delay matrix (shift 0 reduces to the plain model).
    pub fn with_delay(spec: ModelSpec, delay: DelayMatrix) -> Result<Self> {
        validate_spec(&spec)?;
        check_dim("delay frame", spec.frame_len, delay.len())?;
        let carrier = build_carrier(spec.carrier_hz, spec.sample_rate_hz, spec.frame_len)?;
        let filter = StackedFilter(build_filter_matrix(&spec.pulse, spec.frame_len)?);
        let interp = StackedInterpolation(build_padded_interpolation(
            spec.symbols,
            spec.samples_per_symbol,
            spec.frame_len,
        )?);
        let dictionary = StackedDictionary(spec.build_dictionary()?);
        let basis = compose_stacked_basis(&carrier, &delay, &filter, &interp, &dictionary)?;
        Ok(Self {
            spec,
            carrier,
            delay,
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

    pub fn delay(&self) -> &DelayMatrix {
        &self.delay
    }

    pub fn filter(&self) -> &StackedFilter {
        &self.filter
    }

    pub fn interpolation(&self) -> &StackedInterpolation {
        &self.interp
    }

    pub fn dictionary(&self) -> &StackedDictionary {
        &self.dictionary
    }
}

impl SparseModel for StackedSignalModel {
    fn frame_len(&self) -> usize {
        self.spec.frame_len
    }

    fn symbol_count(&self) -> usize {
        self.spec.symbols
    }

    fn block_len(&self) -> usize {
        self.dictionary.0.block_len()
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
        let r = self.delay.apply(shaped.view())?;
        Ok(self.carrier.apply(r.view()))
    }

    fn synthesize_adjoint(&self, r: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        check_dim("stacked adjoint input", self.spec.frame_len, r.len())?;
        let x = self.carrier.apply_adjoint(r);
        let x = self.delay.apply_adjoint(x.view());
        let x = self.filter.apply_transpose(x.view());
        let b = self.interp.apply_transpose(x.view());
        Ok(self.dictionary.apply_transpose(b.view()))
    }

    fn symbols_from(&self, theta: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
        let stacked = self.dictionary.apply(theta)?;
        let m = self.spec.symbols;
        Ok(Array1::from_shape_fn(m, |i| stacked[i] + J * stacked[m + i]))
    }

    /// `θ̄ = [θ; θ]` where `θ` is the plain model's ideal coefficient vector.
    fn ideal_coefficients(&self, indices: &[usize]) -> Result<Array1<Complex64>> {
        let theta = ideal_plain_coefficients(&self.spec, &self.dictionary.0, indices)?;
        Ok(concatenate![Axis(0), theta, theta])
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
