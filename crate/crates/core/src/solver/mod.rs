//! Residual-constrained l1 recovery,
//!
//! ```text
//! min ‖θ‖₁  s.t.  ‖y − A·θ‖₂ ≤ ε,
//! ```
//!
//! solved by accelerated proximal gradient (FISTA) on the penalized form
//! `λ‖θ‖₁ + ½‖y − Aθ‖²` with continuation in `λ`. The first stage starts at
//! `λ = 0.9·‖Aᴴy‖∞`; each following stage shrinks `λ` by `lambda_decay` and
//! warm-starts from the previous stage. The first stage whose solution meets
//! the residual budget is returned.
//!
//! Within a stage the penalized objective never increases: when the
//! accelerated step would raise it, momentum is reset and a plain proximal
//! step is taken instead.
//!
//! All operations are sequential, so a solve is bit-reproducible.

mod operator;
mod prox;

use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2, ArrayView1, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use operator::{inner, ComposedOperator, ConcatOperator, DenseOperator, LinearOperator};
pub use prox::{complex_soft_threshold, nonnegative_threshold, soft_threshold};

use crate::error::{check_dim, invalid, Error, Result};
use crate::sampling::rng::{GaussianSource, Stream};
use crate::sampling::MeasurementSystem;

/// Which set the coefficients live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientDomain {
    Complex,
    Real,
    #[default]
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Iteration budget across all stages.
    pub max_iterations: usize,
    /// Iteration cap for a single continuation stage.
    pub stage_iterations: usize,
    /// Stage stops when `‖θ_k+1 − θ_k‖ ≤ tolerance·‖θ_k+1‖`.
    pub tolerance: f64,
    /// Stages over which `λ` decays; later stages reuse the final `λ`.
    pub continuation_steps: usize,
    /// Factor applied to `λ` between stages, in (0, 1).
    pub lambda_decay: f64,
    /// Residual budget `ε`.
    pub epsilon: f64,
    pub domain: CoefficientDomain,
    pub power_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 60_000,
            stage_iterations: 4_000,
            tolerance: 1e-9,
            continuation_steps: 60,
            lambda_decay: 0.5,
            epsilon: 0.0,
            domain: CoefficientDomain::NonNegative,
            power_iterations: 100,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_domain(mut self, domain: CoefficientDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.stage_iterations == 0 {
            return Err(invalid("max_iterations", "iteration budgets must be positive"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(invalid("tolerance", "must be positive"));
        }
        if self.continuation_steps == 0 {
            return Err(invalid("continuation_steps", "must be positive"));
        }
        if !(self.lambda_decay > 0.0 && self.lambda_decay < 1.0) {
            return Err(invalid("lambda_decay", "must lie in (0, 1)"));
        }
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(invalid("epsilon", "must be finite and non-negative"));
        }
        if self.power_iterations == 0 {
            return Err(invalid("power_iterations", "must be positive"));
        }
        Ok(())
    }
}

/// Noiseless residual budget: `1e-6·‖y‖`.
pub fn noiseless_epsilon(y: ArrayView1<Complex64>) -> f64 {
    1e-6 * l2(y)
}

/// Discrepancy-principle budget `σ√K(1 + 2/√K)` for white noise of complex
/// variance `noise_variance` per sample, passed through `Φ`.
pub fn noise_epsilon(phi: &MeasurementSystem, noise_variance: f64) -> f64 {
    let k = phi.rows() as f64;
    let sigma = (noise_variance * phi.mean_row_energy()).sqrt();
    sigma * k.sqrt() * (1.0 + 2.0 / k.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSolution {
    pub theta_hat: Array1<Complex64>,
    pub residual_norm: f64,
    /// `‖θ̂‖₁`.
    pub objective: f64,
    pub iterations: usize,
    pub stages: usize,
    pub converged: bool,
    /// Penalty of the returned stage.
    pub lambda: f64,
    /// Step size used, `0.99/‖A‖²`.
    pub step: f64,
    pub epsilon: f64,
}

impl SparseSolution {
    /// Entries with modulus above `zero_tol`, as `(block, atom, coefficient)`.
    pub fn block_support(&self, block_len: usize, zero_tol: f64) -> Vec<(usize, usize, Complex64)> {
        self.theta_hat
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > zero_tol)
            .map(|(i, &z)| (i / block_len, i % block_len, z))
            .collect()
    }
}

trait Coefficient:
    Copy + Default + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn modulus(self) -> f64;
    fn modulus_sqr(self) -> f64;
    fn to_complex(self) -> Complex64;
    fn forward(op: &dyn LinearOperator, x: ArrayView1<Self>) -> Array1<Complex64>;
    fn backward(op: &dyn LinearOperator, r: ArrayView1<Complex64>) -> Array1<Self>;
    fn seeded(source: &mut GaussianSource) -> Self;
}

impl Coefficient for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn modulus_sqr(self) -> f64 {
        self * self
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn forward(op: &dyn LinearOperator, x: ArrayView1<Self>) -> Array1<Complex64> {
        op.apply_real(x)
    }
    fn backward(op: &dyn LinearOperator, r: ArrayView1<Complex64>) -> Array1<Self> {
        op.apply_adjoint_real(r)
    }
    fn seeded(source: &mut GaussianSource) -> Self {
        source.next_normal()
    }
}

impl Coefficient for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn forward(op: &dyn LinearOperator, x: ArrayView1<Self>) -> Array1<Complex64> {
        op.apply(x)
    }
    fn backward(op: &dyn LinearOperator, r: ArrayView1<Complex64>) -> Array1<Self> {
        op.apply_adjoint(r)
    }
    fn seeded(source: &mut GaussianSource) -> Self {
        Complex64::new(source.next_normal(), source.next_normal())
    }
}

fn l2<T: Coefficient>(v: ArrayView1<T>) -> f64 {
    v.iter().map(|z| z.modulus_sqr()).sum::<f64>().sqrt()
}

fn l1<T: Coefficient>(v: ArrayView1<T>) -> f64 {
    v.iter().map(|z| z.modulus()).sum()
}

fn residual(ax: &Array1<Complex64>, y: ArrayView1<Complex64>) -> Array1<Complex64> {
    ax - &y
}

/// `‖A‖²` over the coefficient domain by power iteration on `AᴴA`.
fn operator_norm_sqr<T: Coefficient>(op: &dyn LinearOperator, iterations: usize) -> f64 {
    let mut source = GaussianSource::new(0, Stream::PowerIteration);
    let mut v: Array1<T> = Array1::from_shape_simple_fn(op.cols(), || T::seeded(&mut source));
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let n = l2(v.view());
        if n == 0.0 {
            return 0.0;
        }
        v.mapv_inplace(|z| z * (1.0 / n));
        let av = T::forward(op, v.view());
        estimate = av.iter().map(|z| z.norm_sqr()).sum::<f64>();
        v = T::backward(op, av.view());
    }
    estimate
}

struct Problem<'a, T> {
    op: &'a dyn LinearOperator,
    y: ArrayView1<'a, Complex64>,
    step: f64,
    prox: fn(T, f64) -> T,
}

impl<T: Coefficient> Problem<'_, T> {
    fn objective(&self, lambda: f64, x: &Array1<T>, ax: &Array1<Complex64>) -> f64 {
        let r = residual(ax, self.y);
        lambda * l1(x.view()) + 0.5 * r.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `prox_{step·λ}(point − step·Aᴴ(A·point − y))`, given `A·point`.
    fn prox_step(&self, lambda: f64, point: &Array1<T>, a_point: &Array1<Complex64>, step: f64) -> Array1<T> {
        let grad = T::backward(self.op, residual(a_point, self.y).view());
        let threshold = step * lambda;
        Zip::from(point)
            .and(&grad)
            .map_collect(|&p, &g| (self.prox)(p - g * step, threshold))
    }

    /// One continuation stage from `(x, ax)`; returns iterations used.
    fn stage(
        &self,
        lambda: f64,
        x: &mut Array1<T>,
        ax: &mut Array1<Complex64>,
        budget: usize,
        tolerance: f64,
    ) -> usize {
        let mut step = self.step;
        let mut z = x.clone();
        let mut az = ax.clone();
        let mut t = 1.0f64;
        let mut f_prev = self.objective(lambda, x, ax);
        let mut used = 0;
        while used < budget {
            used += 1;
            let mut x_new = self.prox_step(lambda, &z, &az, step);
            let mut ax_new = T::forward(self.op, x_new.view());
            let mut f_new = self.objective(lambda, &x_new, &ax_new);
            if f_new > f_prev {
                // restart from x with a plain proximal step, shrinking the
                // step if the norm estimate was optimistic
                t = 1.0;
                // slack keeps rounding noise from shrinking the step
                let slack = 1e-12 * f_prev.abs();
                loop {
                    x_new = self.prox_step(lambda, x, ax, step);
                    ax_new = T::forward(self.op, x_new.view());
                    f_new = self.objective(lambda, &x_new, &ax_new);
                    if f_new <= f_prev + slack || step < self.step * 1e-6 {
                        break;
                    }
                    step *= 0.5;
                }
            }
            let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_new;
            let change = l2((&x_new - &*x).view());
            let scale = l2(x_new.view());
            z = Zip::from(&x_new)
                .and(&*x)
                .map_collect(|&a, &b| a + (a - b) * beta);
            az = Zip::from(&ax_new)
                .and(&*ax)
                .map_collect(|&a, &b| a + (a - b) * beta);
            *x = x_new;
            *ax = ax_new;
            f_prev = f_new;
            t = t_new;
            if change <= tolerance * scale.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        used
    }
}

/// Solve `min ‖θ‖₁ s.t. ‖y − Aθ‖ ≤ ε` over `cfg.domain`.
pub fn bpdn_solve(
    op: &dyn LinearOperator,
    y: ArrayView1<Complex64>,
    cfg: &SolverConfig,
) -> Result<SparseSolution> {
    cfg.validate()?;
    check_dim("measurements", op.rows(), y.len())?;
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    match cfg.domain {
        CoefficientDomain::Complex => solve_in::<Complex64>(op, y, cfg, complex_soft_threshold),
        CoefficientDomain::Real => solve_in::<f64>(op, y, cfg, soft_threshold),
        CoefficientDomain::NonNegative => solve_in::<f64>(op, y, cfg, nonnegative_threshold),
    }
}

fn solve_in<T: Coefficient>(
    op: &dyn LinearOperator,
    y: ArrayView1<Complex64>,
    cfg: &SolverConfig,
    prox: fn(T, f64) -> T,
) -> Result<SparseSolution> {
    let feasible = |res: f64| res <= cfg.epsilon * (1.0 + 1e-6) + 1e-9;
    let zeros = Array1::<Complex64>::zeros(op.cols());
    let y_norm = l2(y);

    let norm_sqr = operator_norm_sqr::<T>(op, cfg.power_iterations);
    if norm_sqr == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let step = 0.99 / norm_sqr;
    if !step.is_finite() {
        return Err(Error::NonFinite);
    }

    let correlation = T::backward(op, y);
    let lambda_max = correlation.iter().map(|z| z.modulus()).fold(0.0, f64::max);
    if y_norm == 0.0 || lambda_max == 0.0 || feasible(y_norm) {
        return Ok(SparseSolution {
            theta_hat: zeros,
            residual_norm: y_norm,
            objective: 0.0,
            iterations: 0,
            stages: 0,
            converged: feasible(y_norm),
            lambda: lambda_max,
            step,
            epsilon: cfg.epsilon,
        });
    }

    let problem = Problem { op, y, step, prox };
    let mut x: Array1<T> = Array1::default(op.cols());
    let mut ax: Array1<Complex64> = Array1::zeros(op.rows());
    let mut lambda = 0.9 * lambda_max;
    let mut iterations = 0;
    let mut stages = 0;
    let mut converged = false;
    let mut res_norm = y_norm;
    // decay λ over the continuation stages, then keep refining at the final
    // penalty until the budget is met or the iteration budget runs out
    let mut stage_lambda = lambda;
    while iterations < cfg.max_iterations {
        let budget = cfg.stage_iterations.min(cfg.max_iterations - iterations);
        iterations += problem.stage(lambda, &mut x, &mut ax, budget, cfg.tolerance);
        stage_lambda = lambda;
        stages += 1;
        res_norm = l2(residual(&ax, y).view());
        if feasible(res_norm) {
            converged = true;
            break;
        }
        if stages < cfg.continuation_steps {
            lambda *= cfg.lambda_decay;
        }
    }
    let lambda = stage_lambda;
    Ok(SparseSolution {
        objective: l1(x.view()),
        theta_hat: x.mapv(|v| v.to_complex()),
        residual_norm: res_norm,
        iterations,
        stages,
        converged,
        lambda,
        step,
        epsilon: cfg.epsilon,
    })
}

/// One proximal-gradient step at penalty `lambda` with the solution's step
/// size; a converged stage is (nearly) a fixed point of this map.
pub fn proximal_step(
    op: &dyn LinearOperator,
    y: ArrayView1<Complex64>,
    theta: ArrayView1<Complex64>,
    lambda: f64,
    step: f64,
    domain: CoefficientDomain,
) -> Array1<Complex64> {
    let grad = op.apply_adjoint((op.apply(theta) - y).view());
    Zip::from(&theta)
        .and(&grad)
        .map_collect(|&t, &g| {
            let p = t - g * step;
            match domain {
                CoefficientDomain::Complex => complex_soft_threshold(p, step * lambda),
                CoefficientDomain::Real => Complex64::new(soft_threshold(p.re, step * lambda), 0.0),
                CoefficientDomain::NonNegative => {
                    Complex64::new(nonnegative_threshold(p.re, step * lambda), 0.0)
                }
            }
        })
}

/// Joint recovery of several signals sharing one measurement vector:
/// `min Σ‖θ_i‖₁ s.t. ‖y − Φ·Σ Ψ_i θ_i‖ ≤ ε`, solved as one problem over the
/// concatenated operator `Φ·[Ψ_1 … Ψ_K]` and split back per signal.
pub fn multi_signal_solve(
    bases: &[&Array2<Complex64>],
    phi: &MeasurementSystem,
    y: ArrayView1<Complex64>,
    cfg: &SolverConfig,
) -> Result<Vec<SparseSolution>> {
    if bases.is_empty() {
        return Err(invalid("bases", "at least one signal is required"));
    }
    let operators = bases
        .iter()
        .map(|basis| {
            check_dim("signal frame length", phi.cols(), basis.nrows())?;
            DenseOperator::from_product(phi, basis)
        })
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<&dyn LinearOperator> = operators.iter().map(|o| o as &dyn LinearOperator).collect();
    let joint = ConcatOperator::new(parts)?;
    let solution = bpdn_solve(&joint, y, cfg)?;
    Ok((0..bases.len())
        .map(|i| {
            let theta = solution.theta_hat.slice(ndarray::s![joint.range(i)]).to_owned();
            SparseSolution {
                objective: theta.iter().map(|z| z.norm()).sum(),
                theta_hat: theta,
                ..solution.clone()
            }
        })
        .collect())
}
