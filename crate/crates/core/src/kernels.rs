//! Reproducing kernels, point-evaluation norms, pseudohyperbolic distance and
//! Stolz angles.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::funcspace::{grid_point, DiscFunction, Exponent};

/// Aperture used when a scenario does not set one.
pub const DEFAULT_APERTURE: f64 = 0.5;

fn require_open_disk(a: Complex64) -> Result<()> {
    if a.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDomain(a))
    }
}

/// `k_a(z) = (1-|a|²)/(1-āz)²`.
pub fn reproducing_kernel(a: Complex64) -> Result<DiscFunction> {
    require_open_disk(a)?;
    Ok(DiscFunction::Kernel { a, p: 1.0 })
}

/// `k_a^{1/p}`, a unit vector of `H^p`.
pub fn kernel_power(a: Complex64, p: Exponent) -> Result<DiscFunction> {
    require_open_disk(a)?;
    let p = p.require_finite("kernel power exponent")?;
    Ok(DiscFunction::Kernel { a, p })
}

/// `K_w(z) = 1/(1-w̄z)`.
pub fn cauchy_kernel(w: Complex64) -> Result<DiscFunction> {
    require_open_disk(w)?;
    Ok(DiscFunction::Cauchy(w))
}

/// Norm of point evaluation at `w` on `H^p`, `(1-|w|²)^{-1/p}`.
pub fn delta_norm(w: Complex64, p: Exponent) -> Result<f64> {
    require_open_disk(w)?;
    let p = p.require_finite("point evaluation exponent")?;
    Ok((1.0 - w.norm_sqr()).powf(-1.0 / p))
}

/// `ρ(z, w) = |z - w| / |1 - w̄z|`.
pub fn pseudohyperbolic(z: Complex64, w: Complex64) -> Result<f64> {
    require_open_disk(z)?;
    require_open_disk(w)?;
    Ok(pseudohyperbolic_unchecked(z, w))
}

pub(crate) fn pseudohyperbolic_unchecked(z: Complex64, w: Complex64) -> f64 {
    let den = (1.0 - w.conj() * z).norm();
    if den == 0.0 {
        return 1.0;
    }
    ((z - w).norm() / den).min(1.0)
}

/// Interior of the convex hull of `{ζ} ∪ αD`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StolzDomain {
    vertex: Complex64,
    aperture: f64,
}

impl StolzDomain {
    pub fn new(vertex: Complex64, aperture: f64) -> Result<Self> {
        if (vertex.norm() - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("Stolz vertex {vertex} is not unimodular")));
        }
        check_aperture(aperture)?;
        Ok(StolzDomain { vertex, aperture })
    }

    pub fn at_angle(theta: f64, aperture: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(1.0, theta), aperture)
    }

    pub fn vertex(&self) -> Complex64 {
        self.vertex
    }

    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Membership in the open hull.
    ///
    /// The hull is `{(1-t)ζ + tw : t ∈ [0,1], |w| ≤ α}`, so `z` is inside iff
    /// `g(t) = |z - (1-t)ζ| - tα` is negative for some `t`. `g` is convex and
    /// its minimiser has a closed form.
    pub fn contains(&self, z: Complex64) -> bool {
        let w = z * self.vertex.conj();
        self.contains_rotated(w)
    }

    fn contains_rotated(&self, w: Complex64) -> bool {
        let alpha = self.aperture;
        let t = (1.0 - w.re + alpha * w.im.abs() / (1.0 - alpha * alpha).sqrt()).clamp(0.0, 1.0);
        (w - (1.0 - t)).norm() - t * alpha < 0.0
    }
}

pub(crate) fn check_aperture(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("aperture {alpha} is not in (0, 1)")))
    }
}

/// Fraction of the `m` grid vertices `ζ` with `z ∈ Γ(ζ)`.
pub fn shadow_measure(z: Complex64, alpha: f64, m: usize) -> Result<f64> {
    check_aperture(alpha)?;
    crate::funcspace::check_grid_size(m)?;
    let hits = (0..m)
        .filter(|&j| {
            let zeta = grid_point(j, m, 1.0);
            StolzDomain { vertex: zeta, aperture: alpha }.contains(z)
        })
        .count();
    Ok(hits as f64 / m as f64)
}

/// Half-width `θ` of the shadow arc of `z`: `z ∈ Γ(ζ)` iff the angular
/// distance from `ζ` to `z/|z|` is below `θ`. Returns `π` when `|z| < α`
/// and 0 for points outside the open disk.
pub fn shadow_half_width(z: Complex64, alpha: f64) -> f64 {
    let r = z.norm();
    if r < alpha {
        return std::f64::consts::PI;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let gamma = StolzDomain {
        vertex: Complex64::new(1.0, 0.0),
        aperture: alpha,
    };
    // Membership shrinks monotonically as the vertex rotates away from z.
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    if !gamma.contains_rotated(Complex64::new(r, 0.0)) {
        return 0.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if gamma.contains_rotated(Complex64::from_polar(r, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
