//! Gauss–Legendre rules used to discretize continuous channel outputs.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    GaussLegendre,
}

/// How a continuous output density is turned into a weighted point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rule: QuadratureRule,
    /// Total node count, split evenly between the two half-lines.
    pub nodes: usize,
    /// Truncation beyond the farthest mean, in noise standard deviations.
    pub half_width_sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rule: QuadratureRule::GaussLegendre, nodes: 64, half_width_sigmas: 10.0 }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize, half_width_sigmas: f64) -> Result<Self> {
        let spec = QuadratureSpec { rule: QuadratureRule::GaussLegendre, nodes, half_width_sigmas };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(invalid!("quadrature needs at least 8 nodes, got {}", self.nodes));
        }
        if !(self.half_width_sigmas >= 8.0) {
            return Err(invalid!(
                "truncation must be at least 8 standard deviations, got {}",
                self.half_width_sigmas
            ));
        }
        if !self.nodes.is_multiple_of(2) {
            return Err(invalid!("quadrature node count must be even, got {}", self.nodes));
        }
        Ok(())
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending. The rule is exactly antisymmetric: `x[i] == -x[n-1-i]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}
