use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::exponent::Exponent;
use super::function::DiscFunction;
use crate::error::{invalid, Error, Result};

/// Default aliasing tolerance for Taylor coefficient extraction, relative to
/// the largest extracted coefficient.
pub const ALIASING_TOL: f64 = 1e-10;

/// Grid sizes and stopping rule for adaptive circle quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub base_grid: usize,
    pub max_grid: usize,
    pub rel_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            base_grid: 1 << 14,
            max_grid: 1 << 22,
            rel_tol: 1e-9,
        }
    }
}

impl QuadratureConfig {
    pub fn with_base(mut self, base_grid: usize) -> Self {
        self.base_grid = base_grid;
        self.max_grid = self.max_grid.max(base_grid);
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_grid_size(self.base_grid)?;
        check_grid_size(self.max_grid)?;
        if self.max_grid < self.base_grid {
            return Err(invalid("max_grid is smaller than base_grid"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn check_grid_size(m: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(invalid(format!("grid size {m} is not a power of two >= 2")));
    }
    Ok(())
}

/// `j`-th point of the `m`-point grid on the circle of radius `rho`.
pub fn grid_point(j: usize, m: usize, rho: f64) -> Complex64 {
    Complex64::from_polar(rho, TAU * j as f64 / m as f64)
}

/// Samples `f(ρ e^{2πij/M})`, `j = 0..M`.
///
/// Samples at listed singular points are stored as `NaN` and their indices
/// recorded in `singular`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryGrid {
    pub radius: f64,
    pub values: Vec<Complex64>,
    pub singular: Vec<usize>,
}

impl BoundaryGrid {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    /// Moduli of the non-singular samples.
    pub fn moduli(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|v| v.norm()).filter(|x| !x.is_nan())
    }

    pub fn max_modulus(&self) -> f64 {
        self.moduli().fold(0.0, f64::max)
    }

    /// Trapezoid rule for `∫|f|^p dm`; singular samples contribute zero.
    pub fn mean_power(&self, p: f64) -> f64 {
        let s: f64 = self.moduli().map(|x| x.powf(p)).sum();
        s / self.size() as f64
    }

    /// Measure of the arcs omitted because of singular samples.
    pub fn omitted_measure(&self) -> f64 {
        self.singular.len() as f64 / self.size() as f64
    }
}

pub fn boundary_trace(f: &DiscFunction, m: usize, rho: f64) -> Result<BoundaryGrid> {
    check_grid_size(m)?;
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(invalid(format!("radius {rho} is not in (0, 1]")));
    }
    let samples: Vec<Option<Complex64>> = (0..m)
        .into_par_iter()
        .map(|j| match f.evaluate(grid_point(j, m, rho)) {
            Ok(v) => Ok(Some(v)),
            Err(Error::SingularPoint(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let singular = samples
        .iter()
        .enumerate()
        .filter_map(|(j, s)| s.is_none().then_some(j))
        .collect();
    let values = samples
        .into_iter()
        .map(|s| s.unwrap_or(Complex64::new(f64::NAN, f64::NAN)))
        .collect();
    Ok(BoundaryGrid {
        radius: rho,
        values,
        singular,
    })
}

/// Result of an adaptive Hardy norm computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyNorm {
    pub value: f64,
    pub grid_size: usize,
    pub radius: f64,
    /// Measure of the omitted singular arcs at the final grid.
    pub omitted_measure: f64,
}

/// `‖f‖_p` by trapezoid quadrature at the function's boundary radius,
/// doubling the grid until two successive levels agree to `rel_tol`.
pub fn hardy_norm(f: &DiscFunction, p: Exponent, cfg: &QuadratureConfig) -> Result<f64> {
    hardy_norm_detailed(f, p, cfg).map(|h| h.value)
}

pub fn hardy_norm_detailed(f: &DiscFunction, p: Exponent, cfg: &QuadratureConfig) -> Result<HardyNorm> {
    cfg.validate()?;
    let rho = f.boundary_radius();
    match p {
        Exponent::Infinity => {
            // Maximum principle: the sup over the disk is the sup on the circle.
            let grid = boundary_trace(f, cfg.base_grid, rho)?;
            Ok(HardyNorm {
                value: grid.max_modulus(),
                grid_size: cfg.base_grid,
                radius: rho,
                omitted_measure: grid.omitted_measure(),
            })
        }
        Exponent::Finite(p) => {
            let (mean, m, omitted) = adaptive_mean(cfg, |z| f.evaluate(z), rho, |v| v.norm().powf(p))?;
            Ok(HardyNorm {
                value: mean.powf(1.0 / p),
                grid_size: m,
                radius: rho,
                omitted_measure: omitted,
            })
        }
    }
}

/// Nested trapezoid rule: level `2M` reuses the `M` samples and adds the
/// odd-indexed ones, so the total cost is that of the final level.
///
/// Returns the mean, the final grid size and the omitted singular measure.
pub(crate) fn adaptive_mean<F, G>(cfg: &QuadratureConfig, eval: F, rho: f64, integrand: G) -> Result<(f64, usize, f64)>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
    G: Fn(Complex64) -> f64 + Sync,
{
    let level_sum = |m: usize, stride: usize, offset: usize| -> Result<(f64, usize)> {
        (0..m / stride)
            .into_par_iter()
            .map(|k| {
                let j = k * stride + offset;
                match eval(grid_point(j, m, rho)) {
                    Ok(v) => Ok((integrand(v), 0)),
                    Err(Error::SingularPoint(_)) => Ok((0.0, 1)),
                    Err(e) => Err(e),
                }
            })
            .try_reduce(|| (0.0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))
    };

    let mut m = cfg.base_grid;
    let (mut sum, mut singular) = level_sum(m, 1, 0)?;
    let mut mean = sum / m as f64;
    while m < cfg.max_grid {
        let (odd, odd_singular) = level_sum(2 * m, 2, 1)?;
        m *= 2;
        sum += odd;
        singular += odd_singular;
        let next = sum / m as f64;
        let change = (next - mean).abs();
        mean = next;
        if change <= cfg.rel_tol * next.abs() || (next == 0.0 && change == 0.0) {
            return Ok((mean, m, singular as f64 / m as f64));
        }
    }
    Err(Error::NonConvergent(format!(
        "circle quadrature still changing at M = {m} (mean {mean:e})"
    )))
}

/// Single-level trapezoid value of `(∫|f(ρζ)|^p dm)^{1/p}` on an `m`-point
/// grid; `p = ∞` takes the grid maximum.
pub fn hardy_norm_on_grid(f: &DiscFunction, p: Exponent, m: usize, rho: f64) -> Result<f64> {
    let grid = boundary_trace(f, m, rho)?;
    Ok(match p {
        Exponent::Infinity => grid.max_modulus(),
        Exponent::Finite(p) => grid.mean_power(p).powf(1.0 / p),
    })
}

/// Taylor coefficients `0..=K` together with the estimated aliasing tail.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoefficients {
    pub coefficients: Vec<Complex64>,
    pub tail: f64,
    pub grid_size: usize,
    pub radius: f64,
}

/// Taylor coefficients of `f` from the DFT of its samples on the circle of
/// radius `rho`, on a grid chosen large enough for `K`.
pub fn taylor_coefficients(f: &DiscFunction, k: usize, rho: f64) -> Result<TaylorCoefficients> {
    let m = (4 * (k + 1)).next_power_of_two().max(1 << 12);
    taylor_coefficients_on(f, k, rho, m, ALIASING_TOL)
}

pub fn taylor_coefficients_on(
    f: &DiscFunction,
    k: usize,
    rho: f64,
    m: usize,
    tolerance: f64,
) -> Result<TaylorCoefficients> {
    let grid = boundary_trace(f, m, rho)?;
    coefficients_from_grid(&grid, k, tolerance)
}

/// Coefficient extraction from an existing boundary grid.
pub fn coefficients_from_grid(grid: &BoundaryGrid, k: usize, tolerance: f64) -> Result<TaylorCoefficients> {
    let m = grid.size();
    if k >= m / 2 {
        return Err(invalid(format!("degree {k} needs a grid larger than {m}")));
    }
    if !grid.singular.is_empty() {
        return Err(invalid("boundary grid has singular samples"));
    }
    let spectrum = dft(&grid.values);
    let rho = grid.radius;
    let scale = 1.0 / m as f64;
    let coefficients: Vec<Complex64> = (0..=k)
        .map(|n| spectrum[n] * scale * rho.powi(-(n as i32)))
        .collect();
    let upper = spectrum[m / 2..]
        .iter()
        .map(|x| x.norm() * scale)
        .fold(0.0, f64::max);
    let tail = upper * rho.powi(-(k as i32));
    let size = coefficients.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if tail > tolerance * size {
        return Err(Error::AliasingTooLarge {
            tail,
            tolerance: tolerance * size,
        });
    }
    Ok(TaylorCoefficients {
        coefficients,
        tail,
        grid_size: m,
        radius: rho,
    })
}

/// Forward DFT `F_n = Σ_j x_j e^{-2πijn/M}`.
pub(crate) fn dft(values: &[Complex64]) -> Vec<Complex64> {
    let mut buffer = values.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(buffer.len()).process(&mut buffer);
    buffer
}
