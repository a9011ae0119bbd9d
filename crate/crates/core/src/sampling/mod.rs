//! Gaussian compressive measurements and channel impairments.

mod impair;
pub mod rng;

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use impair::{apply_impairments, fractional_delay, ImpairedSignal, Impairments};
use rng::{GaussianSource, Stream};

use crate::error::{check_dim, invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    /// Real Φ applied to the real and imaginary parts independently.
    #[default]
    Real,
    /// Circular complex Gaussian entries, same total variance.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MeasurementOptions {
    pub kind: MatrixKind,
    /// Permit `K > N`.
    pub allow_oversampling: bool,
}

/// Measurement operator `Φ ∈ R^{K×N}` (or `C^{K×N}`) with its residual budget.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSystem {
    phi_re: Array2<f64>,
    phi_im: Option<Array2<f64>>,
    seed: u64,
    pub epsilon: f64,
}

/// `K×N` real matrix of iid `N(0, 1/K)` entries from the documented generator.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> Result<MeasurementSystem> {
    gaussian_matrix_with(rows, cols, seed, MeasurementOptions::default())
}

pub fn gaussian_matrix_with(
    rows: usize,
    cols: usize,
    seed: u64,
    options: MeasurementOptions,
) -> Result<MeasurementSystem> {
    if rows == 0 || cols == 0 {
        return Err(invalid("measurements", "K and N must be at least 1"));
    }
    if rows > cols && !options.allow_oversampling {
        return Err(invalid(
            "measurements",
            format!("K = {rows} exceeds N = {cols}; oversampling is disabled"),
        ));
    }
    let mut source = GaussianSource::new(seed, Stream::Measurement);
    let (phi_re, phi_im) = match options.kind {
        MatrixKind::Real => {
            let sd = (1.0 / rows as f64).sqrt();
            let re = Array2::from_shape_simple_fn((rows, cols), || sd * source.next_normal());
            (re, None)
        }
        MatrixKind::Complex => {
            let sd = (0.5 / rows as f64).sqrt();
            let mut re = Array2::zeros((rows, cols));
            let mut im = Array2::zeros((rows, cols));
            for (r, i) in re.iter_mut().zip(im.iter_mut()) {
                *r = sd * source.next_normal();
                *i = sd * source.next_normal();
            }
            (re, Some(im))
        }
    };
    Ok(MeasurementSystem {
        phi_re,
        phi_im,
        seed,
        epsilon: 0.0,
    })
}

impl MeasurementSystem {
    /// `Φ = I_N`; every sample is observed.
    pub fn identity(len: usize) -> Self {
        Self {
            phi_re: Array2::eye(len),
            phi_im: None,
            seed: 0,
            epsilon: 0.0,
        }
    }

    /// Wrap an explicit real matrix.
    pub fn from_real(phi: Array2<f64>) -> Self {
        Self {
            phi_re: phi,
            phi_im: None,
            seed: 0,
            epsilon: 0.0,
        }
    }

    pub fn rows(&self) -> usize {
        self.phi_re.nrows()
    }

    pub fn cols(&self) -> usize {
        self.phi_re.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_complex(&self) -> bool {
        self.phi_im.is_some()
    }

    pub fn real_part(&self) -> &Array2<f64> {
        &self.phi_re
    }

    pub fn imag_part(&self) -> Option<&Array2<f64>> {
        self.phi_im.as_ref()
    }

    /// Compression ratio `K/N`.
    pub fn compression_ratio(&self) -> f64 {
        self.rows() as f64 / self.cols() as f64
    }

    /// Mean squared row norm, i.e. the gain of `Φ` on white noise per measurement.
    pub fn mean_row_energy(&self) -> f64 {
        let mut total = self.phi_re.iter().map(|v| v * v).sum::<f64>();
        if let Some(im) = &self.phi_im {
            total += im.iter().map(|v| v * v).sum::<f64>();
        }
        total / self.rows() as f64
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        match &self.phi_im {
            None => self.phi_re.mapv(|v| Complex64::new(v, 0.0)),
            Some(im) => ndarray::Zip::from(&self.phi_re)
                .and(im)
                .map_collect(|&r, &i| Complex64::new(r, i)),
        }
    }

    /// `Φ·M` for a complex matrix `M` with `N` rows.
    pub fn times(&self, m: &Array2<Complex64>) -> Result<Array2<Complex64>> {
        check_dim("Φ·M", self.cols(), m.nrows())?;
        let mr = m.mapv(|z| z.re);
        let mi = m.mapv(|z| z.im);
        let mut re = self.phi_re.dot(&mr);
        let mut im = self.phi_re.dot(&mi);
        if let Some(pi) = &self.phi_im {
            re -= &pi.dot(&mi);
            im += &pi.dot(&mr);
        }
        Ok(ndarray::Zip::from(&re)
            .and(&im)
            .map_collect(|&r, &i| Complex64::new(r, i)))
    }
}

/// `y = Φ·r`.
pub fn measure(sys: &MeasurementSystem, r: ArrayView1<Complex64>) -> Result<Array1<Complex64>> {
    check_dim("measure", sys.cols(), r.len())?;
    let rr = r.mapv(|z| z.re);
    let ri = r.mapv(|z| z.im);
    let mut re = sys.phi_re.dot(&rr);
    let mut im = sys.phi_re.dot(&ri);
    if let Some(pi) = &sys.phi_im {
        re -= &pi.dot(&ri);
        im += &pi.dot(&rr);
    }
    Ok(ndarray::Zip::from(&re)
        .and(&im)
        .map_collect(|&a, &b| Complex64::new(a, b)))
}
