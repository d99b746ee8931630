//! Uniform 1D grid plus the finite-difference and quadrature primitives
//! every other module is built on.
//!
//! All derivative stencils are second order: central differences on the
//! interior, one-sided three/four-point stencils at the two boundary nodes.
//! All integrals are trapezoidal, so functionals and stencils carry a
//! consistent O(dx²) truncation error.

use crate::error::{Error, Result};

/// Uniform spatial grid on `[x_min, x_max]` with `n` nodes.
///
/// Node `i` sits at exactly `x_min + i * dx` with `dx = (x_max - x_min) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    /// Minimum node count so that every stencil in the crate is applicable.
    pub const MIN_NODES: usize = 8;

    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::Contract("grid bounds must be finite".into()));
        }
        if x_min >= x_max {
            return Err(Error::Contract(format!(
                "grid requires x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < Self::MIN_NODES {
            return Err(Error::Contract(format!(
                "grid requires at least {} nodes, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n as f64 - 1.0)
    }

    /// Coordinate of node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    /// All node coordinates.
    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Evaluate a function on every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Contract(format!(
                "field has {len} samples but the grid has {} nodes",
                self.n
            )));
        }
        Ok(())
    }
}

/// First derivative, second order everywhere.
pub fn derivative(field: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len(field.len())?;
    let mut out = vec![0.0; field.len()];
    derivative_into(field, grid, &mut out);
    Ok(out)
}

pub(crate) fn derivative_into(field: &[f64], grid: &Grid1D, out: &mut [f64]) {
    let n = grid.n();
    let h = 0.5 / grid.dx();
    out[0] = (-3.0 * field[0] + 4.0 * field[1] - field[2]) * h;
    for i in 1..n - 1 {
        out[i] = (field[i + 1] - field[i - 1]) * h;
    }
    out[n - 1] = (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) * h;
}

/// Second derivative, second order everywhere.
pub fn second_derivative(field: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len(field.len())?;
    let mut out = vec![0.0; field.len()];
    second_derivative_into(field, grid, &mut out);
    Ok(out)
}

pub(crate) fn second_derivative_into(field: &[f64], grid: &Grid1D, out: &mut [f64]) {
    let n = grid.n();
    let h2 = 1.0 / (grid.dx() * grid.dx());
    out[0] = (2.0 * field[0] - 5.0 * field[1] + 4.0 * field[2] - field[3]) * h2;
    for i in 1..n - 1 {
        out[i] = (field[i + 1] - 2.0 * field[i] + field[i - 1]) * h2;
    }
    out[n - 1] = (2.0 * field[n - 1] - 5.0 * field[n - 2] + 4.0 * field[n - 3] - field[n - 4]) * h2;
}

/// Trapezoidal quadrature over the whole grid.
pub fn integrate(field: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check_len(field.len())?;
    Ok(integrate_unchecked(field, grid))
}

pub(crate) fn integrate_unchecked(field: &[f64], grid: &Grid1D) -> f64 {
    let n = grid.n();
    let mut sum = 0.5 * (field[0] + field[n - 1]);
    for v in &field[1..n - 1] {
        sum += v;
    }
    sum * grid.dx()
}

/// Running trapezoidal integral from `x_min`; element `i` approximates
/// the integral of `field` over `[x_min, x_i]`, with value 0 at `x_min`.
pub fn cumulative_integral(field: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len(field.len())?;
    let half_dx = 0.5 * grid.dx();
    let mut out = vec![0.0; field.len()];
    for i in 1..field.len() {
        out[i] = out[i - 1] + half_dx * (field[i] + field[i - 1]);
    }
    Ok(out)
}
