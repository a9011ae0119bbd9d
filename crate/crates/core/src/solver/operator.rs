//! Linear operators with adjoints, for the solver.

use ndarray::{s, Array1, Array2, ArrayView1, Axis, Zip};
use num_complex::Complex64;

use crate::error::{check_dim, Result};
use crate::model::SparseModel;
use crate::sampling::{measure, MeasurementSystem};

/// A complex-linear map `C^cols → C^rows` with its adjoint.
///
/// The `_real` variants restrict the domain to real coefficient vectors; the
/// real adjoint is `Re(Aᴴ y)`, the gradient direction for real unknowns.
pub trait LinearOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64>;
    fn apply_adjoint(&self, y: ArrayView1<Complex64>) -> Array1<Complex64>;

    fn apply_real(&self, x: ArrayView1<f64>) -> Array1<Complex64> {
        self.apply(x.mapv(|v| Complex64::new(v, 0.0)).view())
    }

    fn apply_adjoint_real(&self, y: ArrayView1<Complex64>) -> Array1<f64> {
        self.apply_adjoint(y).mapv(|z| z.re)
    }
}

/// Dense complex matrix `A`, stored as the real block `[Re A; Im A]` and its
/// transpose, both contiguous, so each product is one streaming pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    rows: usize,
    stacked: Array2<f64>,
    stacked_t: Array2<f64>,
}

impl DenseOperator {
    pub fn new(matrix: &Array2<Complex64>) -> Self {
        let stacked = ndarray::concatenate![
            Axis(0),
            matrix.mapv(|z| z.re),
            matrix.mapv(|z| z.im)
        ];
        let stacked_t = stacked.t().as_standard_layout().into_owned();
        Self {
            rows: matrix.nrows(),
            stacked,
            stacked_t,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(&Array2::eye(n))
    }

    /// `Φ·Ψ` materialized.
    pub fn from_product(phi: &MeasurementSystem, basis: &Array2<Complex64>) -> Result<Self> {
        Ok(Self::new(&phi.times(basis)?))
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let k = self.rows;
        Zip::from(self.stacked.slice(s![..k, ..]))
            .and(self.stacked.slice(s![k.., ..]))
            .map_collect(|&r, &i| Complex64::new(r, i))
    }
}

fn join(re: ArrayView1<f64>, im: ArrayView1<f64>) -> Array1<Complex64> {
    Zip::from(re)
        .and(im)
        .map_collect(|&r, &i| Complex64::new(r, i))
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.stacked.ncols()
    }

    fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        let k = self.rows;
        let a = self.stacked.dot(&x.mapv(|z| z.re));
        let b = self.stacked.dot(&x.mapv(|z| z.im));
        // [Re A·xr; Im A·xr] and [Re A·xi; Im A·xi]
        Array1::from_shape_fn(k, |i| Complex64::new(a[i] - b[k + i], b[i] + a[k + i]))
    }

    fn apply_adjoint(&self, y: ArrayView1<Complex64>) -> Array1<Complex64> {
        let re_part = ndarray::concatenate![Axis(0), y.mapv(|z| z.re), y.mapv(|z| z.im)];
        let im_part = ndarray::concatenate![Axis(0), y.mapv(|z| z.im), y.mapv(|z| -z.re)];
        join(
            self.stacked_t.dot(&re_part).view(),
            self.stacked_t.dot(&im_part).view(),
        )
    }

    fn apply_real(&self, x: ArrayView1<f64>) -> Array1<Complex64> {
        let k = self.rows;
        let v = self.stacked.dot(&x);
        join(v.slice(s![..k]), v.slice(s![k..]))
    }

    fn apply_adjoint_real(&self, y: ArrayView1<Complex64>) -> Array1<f64> {
        let v = ndarray::concatenate![Axis(0), y.mapv(|z| z.re), y.mapv(|z| z.im)];
        self.stacked_t.dot(&v)
    }
}

/// `Φ·Ψ` applied factor by factor, without materializing either product.
pub struct ComposedOperator<'a> {
    phi: &'a MeasurementSystem,
    model: &'a dyn SparseModel,
}

impl<'a> ComposedOperator<'a> {
    pub fn new(phi: &'a MeasurementSystem, model: &'a dyn SparseModel) -> Result<Self> {
        check_dim("Φ·Ψ", phi.cols(), model.frame_len())?;
        Ok(Self { phi, model })
    }
}

impl LinearOperator for ComposedOperator<'_> {
    fn rows(&self) -> usize {
        self.phi.rows()
    }

    fn cols(&self) -> usize {
        self.model.coefficient_len()
    }

    fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        let r = self
            .model
            .synthesize(x)
            .expect("coefficient length checked by caller");
        measure(self.phi, r.view()).expect("frame length checked at construction")
    }

    fn apply_adjoint(&self, y: ArrayView1<Complex64>) -> Array1<Complex64> {
        let phi_h = self.phi.to_dense().t().mapv(|z| z.conj());
        let r = phi_h.dot(&y);
        self.model
            .synthesize_adjoint(r.view())
            .expect("frame length checked at construction")
    }
}

/// Horizontal concatenation `[A_1 … A_K]`.
pub struct ConcatOperator<'a> {
    parts: Vec<&'a dyn LinearOperator>,
    offsets: Vec<usize>,
}

impl<'a> ConcatOperator<'a> {
    pub fn new(parts: Vec<&'a dyn LinearOperator>) -> Result<Self> {
        let rows = parts.first().map(|p| p.rows()).unwrap_or(0);
        let mut offsets = vec![0];
        for p in &parts {
            check_dim("concatenated operator rows", rows, p.rows())?;
            offsets.push(offsets.last().unwrap() + p.cols());
        }
        Ok(Self { parts, offsets })
    }

    /// Column range of part `i`.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }
}

impl LinearOperator for ConcatOperator<'_> {
    fn rows(&self) -> usize {
        self.parts.first().map(|p| p.rows()).unwrap_or(0)
    }

    fn cols(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    fn apply(&self, x: ArrayView1<Complex64>) -> Array1<Complex64> {
        let mut out = Array1::zeros(self.rows());
        for (i, p) in self.parts.iter().enumerate() {
            let r = self.range(i);
            out += &p.apply(x.slice(s![r]));
        }
        out
    }

    fn apply_adjoint(&self, y: ArrayView1<Complex64>) -> Array1<Complex64> {
        let mut out = Array1::zeros(self.cols());
        for (i, p) in self.parts.iter().enumerate() {
            let r = self.range(i);
            out.slice_mut(s![r]).assign(&p.apply_adjoint(y));
        }
        out
    }

    fn apply_real(&self, x: ArrayView1<f64>) -> Array1<Complex64> {
        let mut out = Array1::zeros(self.rows());
        for (i, p) in self.parts.iter().enumerate() {
            let r = self.range(i);
            out += &p.apply_real(x.slice(s![r]));
        }
        out
    }

    fn apply_adjoint_real(&self, y: ArrayView1<Complex64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.cols());
        for (i, p) in self.parts.iter().enumerate() {
            let r = self.range(i);
            out.slice_mut(s![r])
                .assign(&p.apply_adjoint_real(y));
        }
        out
    }
}

/// `⟨u, v⟩ = Σ conj(u_i)·v_i`.
pub fn inner(u: ArrayView1<Complex64>, v: ArrayView1<Complex64>) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum()
}
