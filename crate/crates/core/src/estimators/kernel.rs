//! Kernel-integral route for `1 ≤ p ≤ q < ∞`: boundedness through
//! `sup_a ∫|u|^q P_a(φ)^{q/p} dm` and the limsup over `|a| → 1` for the
//! essential norm.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::funcspace::{grid_point, hardy_norm_detailed, DiscFunction, Exponent, QuadratureConfig, SelfMap};
use crate::verdict::{bounded_trend, Verdict};

/// Relative growth per ring that counts as divergence; growth below it on
/// the last ring counts as bounded.
pub const RING_GROWTH_TOL: f64 = 0.10;
const RING_GROWTH_STEPS: usize = 3;

/// Radii `r_k → 1` and the number of angles swept on each ring.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingSchedule {
    pub radii: Vec<f64>,
    pub angles: usize,
}

impl Default for RingSchedule {
    fn default() -> Self {
        RingSchedule::geometric(3, 14, 256).expect("default schedule is valid")
    }
}

impl RingSchedule {
    /// Radii `1 - 2^{-k}` for `k = k_min..=k_max`.
    pub fn geometric(k_min: u32, k_max: u32, angles: usize) -> Result<Self> {
        let s = RingSchedule {
            radii: (k_min..=k_max).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect(),
            angles,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii.is_empty() || self.angles == 0 {
            return Err(invalid("ring schedule needs at least one radius and one angle"));
        }
        if self.radii.iter().any(|r| !(0.0..1.0).contains(r)) {
            return Err(invalid("ring radii must lie in [0, 1)"));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("ring radii must increase strictly"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub grid_size: usize,
}

/// Level 0 holds every sample of the base grid; level `i > 0` holds only the
/// odd-indexed samples of the grid of size `base·2^i`.
struct Level {
    weight: Vec<f64>,
    image: Vec<Complex64>,
}

/// Caches `|u|^q` and `φ` on nested circle grids so that many kernel
/// integrals for the same `(u, φ, q)` cost one pass over the samples each.
pub struct KernelSampler<'a> {
    u: &'a DiscFunction,
    phi: &'a SelfMap,
    q: f64,
    cfg: QuadratureConfig,
    levels: Vec<Level>,
}

impl<'a> KernelSampler<'a> {
    pub fn new(u: &'a DiscFunction, phi: &'a SelfMap, q: f64, cfg: &QuadratureConfig) -> Result<Self> {
        cfg.validate()?;
        if !(q >= 1.0) || !q.is_finite() {
            return Err(invalid(format!("q = {q} must be a finite exponent >= 1")));
        }
        let mut s = KernelSampler {
            u,
            phi,
            q,
            cfg: *cfg,
            levels: Vec::new(),
        };
        s.push_level()?;
        Ok(s)
    }

    fn max_level(&self) -> usize {
        (self.cfg.max_grid / self.cfg.base_grid).trailing_zeros() as usize
    }

    fn push_level(&mut self) -> Result<()> {
        let i = self.levels.len();
        if i > self.max_level() {
            return Err(Error::NonConvergent(format!(
                "kernel integral still changing at M = {}",
                self.cfg.max_grid
            )));
        }
        let m = self.cfg.base_grid << i;
        let (stride, offset) = if i == 0 { (1, 0) } else { (2, 1) };
        let (u, phi, q) = (self.u, self.phi, self.q);
        let samples: Vec<(f64, Complex64)> = (0..m / stride)
            .into_par_iter()
            .map(|k| {
                let z = grid_point(k * stride + offset, m, 1.0);
                let uz = match u.evaluate(z) {
                    Ok(v) => v,
                    Err(Error::SingularPoint(_)) => return Ok((0.0, Complex64::new(0.0, 0.0))),
                    Err(e) => return Err(e),
                };
                match phi.evaluate(z) {
                    Ok(w) => Ok((uz.norm().powf(q), w)),
                    Err(Error::SingularPoint(_)) => Ok((0.0, Complex64::new(0.0, 0.0))),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let (weight, image) = samples.into_iter().unzip();
        self.levels.push(Level { weight, image });
        Ok(())
    }

    /// Level at which the integral for `a` starts: the kernel peak has
    /// width about `1 - |a|`, so the grid needs at least `8/(1-|a|)` points.
    fn start_level(&self, a: Complex64) -> usize {
        let need = (8.0 / (1.0 - a.norm())).ceil() as usize;
        let m0 = need.next_power_of_two().max(self.cfg.base_grid);
        let level = (m0 / self.cfg.base_grid).trailing_zeros() as usize;
        level.min(self.max_level().saturating_sub(1))
    }

    /// `None` when the cached levels run out before two levels agree.
    fn try_integral(&self, a: Complex64, exponent: f64) -> Option<KernelValue> {
        let ab = a.conj();
        let scale = 1.0 - a.norm_sqr();
        let level_sum = |level: &Level| -> f64 {
            level
                .weight
                .iter()
                .zip(&level.image)
                .map(|(&w, &img)| {
                    if w == 0.0 {
                        return 0.0;
                    }
                    let k = scale / (1.0 - ab * img).norm_sqr();
                    let kp = if exponent == 1.0 {
                        k
                    } else if exponent == 2.0 {
                        k * k
                    } else {
                        k.powf(exponent)
                    };
                    w * kp
                })
                .sum()
        };
        let start = self.start_level(a);
        if start >= self.levels.len() {
            return None;
        }
        let mut sum: f64 = self.levels[..=start].iter().map(level_sum).sum();
        let mut m = self.cfg.base_grid << start;
        let mut mean = sum / m as f64;
        for level in &self.levels[start + 1..] {
            sum += level_sum(level);
            m *= 2;
            let next = sum / m as f64;
            let change = (next - mean).abs();
            mean = next;
            if change <= self.cfg.rel_tol * next.abs() {
                return Some(KernelValue { value: mean, grid_size: m });
            }
        }
        None
    }

    /// `∫ |u|^q ((1-|a|²)/|1-āφ|²)^{q/p} dm`.
    pub fn integral(&mut self, a: Complex64, p: f64) -> Result<KernelValue> {
        check_point(a, p)?;
        loop {
            if let Some(v) = self.try_integral(a, self.q / p) {
                return Ok(v);
            }
            self.push_level()?;
        }
    }

    /// Kernel integrals at `r·e^{2πij/angles}`, `j = 0..angles`.
    pub fn ring(&mut self, r: f64, angles: usize, p: f64) -> Result<RingValue> {
        let points: Vec<Complex64> = (0..angles)
            .map(|j| Complex64::from_polar(r, TAU * j as f64 / angles as f64))
            .collect();
        check_point(points[0], p)?;
        // Poisson-type integrands usually settle three doublings after the start.
        let want = (self.start_level(points[0]) + 3).min(self.max_level());
        while self.levels.len() <= want {
            self.push_level()?;
        }
        let mut values: Vec<Option<KernelValue>> = vec![None; angles];
        loop {
            let this = &*self;
            values
                .par_iter_mut()
                .zip(points.par_iter())
                .filter(|(v, _)| v.is_none())
                .for_each(|(v, a)| *v = this.try_integral(*a, this.q / p));
            if values.iter().all(Option::is_some) {
                break;
            }
            self.push_level()?;
        }
        let values: Vec<KernelValue> = values.into_iter().map(Option::unwrap).collect();
        let (j, best) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if v.value > acc.1 { (j, v.value) } else { acc });
        Ok(RingValue {
            radius: r,
            max: best,
            argmax_angle: TAU * j as f64 / angles as f64,
            min: values.iter().map(|v| v.value).fold(f64::INFINITY, f64::min),
            grid_size: values.iter().map(|v| v.grid_size).max().unwrap_or(0),
        })
    }
}

fn check_point(a: Complex64, p: f64) -> Result<()> {
    if a.norm() >= 1.0 {
        return Err(Error::OutsideDomain(a));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p = {p} must be a finite exponent >= 1")));
    }
    Ok(())
}

/// One-off kernel integral; sweeps should reuse a `KernelSampler`.
pub fn kernel_integral(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    a: Complex64,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    let p = p.require_finite("p")?;
    let q = q.require_finite("q")?;
    KernelSampler::new(u, phi, q, cfg)?.integral(a, p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RingValue {
    pub radius: f64,
    pub max: f64,
    pub argmax_angle: f64,
    pub min: f64,
    /// Largest converged grid size over the ring.
    pub grid_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSweep {
    pub p: f64,
    pub q: f64,
    pub origin: KernelValue,
    pub rings: Vec<RingValue>,
}

pub fn kernel_sweep(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    schedule: &RingSchedule,
    cfg: &QuadratureConfig,
) -> Result<KernelSweep> {
    schedule.validate()?;
    let p = p.require_finite("p")?;
    let q = q.require_finite("q")?;
    if p > q {
        return Err(invalid("the kernel test needs p <= q"));
    }
    let mut sampler = KernelSampler::new(u, phi, q, cfg)?;
    let origin = sampler.integral(Complex64::new(0.0, 0.0), p)?;
    let rings = schedule
        .radii
        .iter()
        .map(|&r| sampler.ring(r, schedule.angles, p))
        .collect::<Result<_>>()?;
    Ok(KernelSweep { p, q, origin, rings })
}

impl KernelSweep {
    pub fn ring_maxima(&self) -> Vec<f64> {
        self.rings.iter().map(|r| r.max).collect()
    }

    /// Largest integral seen, `a = 0` included.
    pub fn sup(&self) -> f64 {
        self.rings.iter().map(|r| r.max).fold(self.origin.value, f64::max)
    }

    /// Divergent when each of the last three ring maxima grows by more than
    /// 10%, bounded when the last one exceeds its predecessor by at most 10%.
    pub fn boundedness(&self) -> KernelBoundedness {
        let maxima = self.ring_maxima();
        let sup = self.sup();
        KernelBoundedness {
            verdict: bounded_trend(&maxima, RING_GROWTH_TOL, RING_GROWTH_STEPS),
            sup_estimate: sup,
            norm_estimate: sup.powf(1.0 / self.q),
            ring_maxima: maxima,
        }
    }

    /// Limsup estimate: the larger of the outermost two ring maxima, to the
    /// power `1/q`.
    pub fn upper(&self) -> f64 {
        self.outer_rings()
            .iter()
            .map(|r| r.max)
            .fold(0.0, f64::max)
            .powf(1.0 / self.q)
    }

    fn outer_rings(&self) -> &[RingValue] {
        &self.rings[self.rings.len().saturating_sub(2)..]
    }

    /// `‖u·(k_a^{1/p} ∘ φ)‖_q` by adaptive quadrature of the composed test
    /// function, at the maximizing point of each of the outermost two rings.
    pub fn lower(&self, u: &DiscFunction, phi: &SelfMap, cfg: &QuadratureConfig) -> Result<(f64, Vec<LowerPoint>)> {
        let points = self
            .outer_rings()
            .iter()
            .map(|ring| {
                let a = Complex64::from_polar(ring.radius, ring.argmax_angle);
                let f = u.clone().mul(DiscFunction::Kernel { a, p: self.p }.compose(phi.map().clone()));
                let base = ((8.0 / (1.0 - ring.radius)).ceil() as usize)
                    .next_power_of_two()
                    .max(cfg.base_grid);
                let local = cfg.with_base(base.min(cfg.max_grid));
                let h = hardy_norm_detailed(&f, Exponent::Finite(self.q), &local)?;
                Ok(LowerPoint {
                    a,
                    value: h.value,
                    grid_size: h.grid_size,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let value = points.iter().map(|p| p.value).fold(0.0, f64::max);
        Ok((value, points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelBoundedness {
    pub verdict: Verdict,
    /// `sup_a` of the kernel integral over the schedule and `a = 0`.
    pub sup_estimate: f64,
    /// `sup_estimate^{1/q}`, comparable to `‖uC_φ‖`.
    pub norm_estimate: f64,
    pub ring_maxima: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerPoint {
    pub a: Complex64,
    pub value: f64,
    pub grid_size: usize,
}

pub fn boundedness_pq(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    schedule: &RingSchedule,
    cfg: &QuadratureConfig,
) -> Result<KernelBoundedness> {
    Ok(kernel_sweep(u, phi, p, q, schedule, cfg)?.boundedness())
}

pub fn essnorm_pq_upper(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    schedule: &RingSchedule,
    cfg: &QuadratureConfig,
) -> Result<(f64, KernelSweep)> {
    let sweep = kernel_sweep(u, phi, p, q, schedule, cfg)?;
    Ok((sweep.upper(), sweep))
}

pub fn essnorm_pq_lower(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    schedule: &RingSchedule,
    cfg: &QuadratureConfig,
) -> Result<(f64, Vec<LowerPoint>)> {
    kernel_sweep(u, phi, p, q, schedule, cfg)?.lower(u, phi, cfg)
}
