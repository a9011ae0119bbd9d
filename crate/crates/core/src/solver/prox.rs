use num_complex::Complex64;

/// Proximal operator of `λ|·|` on complex numbers: `z·max(1 − λ/|z|, 0)`.
pub fn complex_soft_threshold(z: Complex64, lambda: f64) -> Complex64 {
    let modulus = z.norm();
    if modulus <= lambda {
        Complex64::new(0.0, 0.0)
    } else {
        z * (1.0 - lambda / modulus)
    }
}

/// Real soft threshold, `sign(x)·max(|x| − λ, 0)`.
pub fn soft_threshold(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Soft threshold followed by projection onto `x ≥ 0`.
pub fn nonnegative_threshold(x: f64, lambda: f64) -> f64 {
    (x - lambda).max(0.0)
}
