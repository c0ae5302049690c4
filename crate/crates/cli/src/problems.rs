//! Analytic test fields with known irrotational and solenoidal parts.

use std::f64::consts::PI;

/// `u = grad phi + rot v` on `[-1, 1]^2` with `phi = sin(pi (x1 + x2))` and
/// `v = -sin(pi x1) sin(pi x2) / pi`.
pub mod planar {
    use super::PI;

    pub fn phi(x: &[f64]) -> f64 {
        (PI * (x[0] + x[1])).sin()
    }

    pub fn v(x: &[f64]) -> f64 {
        -(PI * x[0]).sin() * (PI * x[1]).sin() / PI
    }

    pub fn u_irr(x: &[f64]) -> Vec<f64> {
        let c = PI * (PI * (x[0] + x[1])).cos();
        vec![c, c]
    }

    pub fn u_sol(x: &[f64]) -> Vec<f64> {
        let (s1, c1) = (PI * x[0]).sin_cos();
        let (s2, c2) = (PI * x[1]).sin_cos();
        vec![-s1 * c2, c1 * s2]
    }

    pub fn u(x: &[f64]) -> Vec<f64> {
        let a = u_irr(x);
        let b = u_sol(x);
        vec![a[0] + b[0], a[1] + b[1]]
    }
}

/// `u = grad phi + curl v` on `[-1, 1]^3` with
/// `phi = sin(pi x1) sin(pi x2) sin(pi x3) / pi` and
/// `v = (s1 c2 c3, c1 s2 c3, -2 c1 c2 s3) / pi`.
pub mod spatial {
    use super::PI;

    fn sc(x: &[f64]) -> [(f64, f64); 3] {
        [
            (PI * x[0]).sin_cos(),
            (PI * x[1]).sin_cos(),
            (PI * x[2]).sin_cos(),
        ]
    }

    pub fn phi(x: &[f64]) -> f64 {
        let [(s1, _), (s2, _), (s3, _)] = sc(x);
        s1 * s2 * s3 / PI
    }

    pub fn v(x: &[f64]) -> Vec<f64> {
        let [(s1, c1), (s2, c2), (s3, c3)] = sc(x);
        vec![
            s1 * c2 * c3 / PI,
            c1 * s2 * c3 / PI,
            -2.0 * c1 * c2 * s3 / PI,
        ]
    }

    pub fn u_irr(x: &[f64]) -> Vec<f64> {
        let [(s1, c1), (s2, c2), (s3, c3)] = sc(x);
        vec![c1 * s2 * s3, s1 * c2 * s3, s1 * s2 * c3]
    }

    pub fn u_sol(x: &[f64]) -> Vec<f64> {
        let [(s1, c1), (s2, c2), (s3, _)] = sc(x);
        vec![3.0 * c1 * s2 * s3, -3.0 * s1 * c2 * s3, 0.0]
    }

    pub fn u(x: &[f64]) -> Vec<f64> {
        let a = u_irr(x);
        let b = u_sol(x);
        (0..3).map(|i| a[i] + b[i]).collect()
    }
}

/// Background field plus an Alfvén and a fast magnetosonic mode with wave
/// vector `(k1, 0, k3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveField {
    pub k1: f64,
    pub k3: f64,
    pub eps_a: f64,
    pub eps_m: f64,
}

impl WaveField {
    fn theta(&self, x: &[f64]) -> f64 {
        self.k1 * x[0] + self.k3 * x[2]
    }

    pub fn b(&self, x: &[f64]) -> Vec<f64> {
        let s = self.theta(x).sin();
        vec![0.0, self.eps_a * s, 1.0 - self.eps_m * s]
    }

    /// In-plane current of the Alfvén mode at `x3 = 0`.
    pub fn alfven_current(&self, x: &[f64]) -> Vec<f64> {
        vec![-self.eps_a * self.k3 * (self.k1 * x[0]).cos(), 0.0]
    }

    /// In-plane current of the magnetosonic mode at `x3 = 0`.
    pub fn magnetosonic_current(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0, self.eps_m * self.k1 * (self.k1 * x[0]).cos()]
    }
}
