//! `H^p → H^∞`: the supremum test and the bracket by `M_φ(u)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{extended, EpsValue, EssNormBracket, Regime};
use crate::error::{invalid, Error, Result};
use crate::funcspace::{DiscFunction, Exponent, SelfMap};
use crate::verdict::{trend, Verdict};

/// Relative change across the last refinement pass below which a
/// supremum counts as settled.
pub const SUP_STABLE_TOL: f64 = 1e-3;
const SUP_GROWTH_TOL: f64 = 0.10;
/// `‖φ‖_∞` below `1 - COMPACT_GAP` puts the operator in the compact branch.
const COMPACT_GAP: f64 = 1e-9;

/// Polar grid `(1 - 2^{-t}) e^{iθ}` with `t` in steps of `radial_step` up to
/// `max_depth`, refined in three passes that add depth and angles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGrid {
    pub max_depth: f64,
    pub radial_step: f64,
    pub angles: usize,
    /// `ε = 2^{-k}` for `k` in this range, for `M_φ(u)`.
    pub eps_exponents: (u32, u32),
}

impl Default for DiskGrid {
    fn default() -> Self {
        DiskGrid {
            max_depth: 24.0,
            radial_step: 0.25,
            angles: 512,
            eps_exponents: (3, 12),
        }
    }
}

impl DiskGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.radial_step > 0.0) || !(self.max_depth > 8.0) || self.max_depth > 48.0 {
            return Err(invalid("disk grid needs radial_step > 0 and max_depth in (8, 48]"));
        }
        if self.angles < 4 {
            return Err(invalid("disk grid needs at least 4 angles"));
        }
        if self.eps_exponents.0 > self.eps_exponents.1 || self.eps_exponents.1 > 40 {
            return Err(invalid("eps exponents must satisfy k_min <= k_max <= 40"));
        }
        Ok(())
    }

    /// `(depth, angles)` of the three passes: each adds depth 4 and doubles
    /// the angles, the last one being `(max_depth, 4·angles)`.
    fn passes(&self) -> [(f64, usize); 3] {
        [
            (self.max_depth - 8.0, self.angles),
            (self.max_depth - 4.0, 2 * self.angles),
            (self.max_depth, 4 * self.angles),
        ]
    }

    fn points(&self, depth: f64, angles: usize) -> Vec<Complex64> {
        let steps = (depth / self.radial_step).round() as usize;
        let mut pts = vec![Complex64::new(0.0, 0.0)];
        for i in 1..=steps {
            let r = 1.0 - (-(i as f64) * self.radial_step).exp2();
            // Half-step angular offset on odd rings staggers the grid.
            let shift = if i % 2 == 1 { 0.5 } else { 0.0 };
            pts.extend((0..angles).map(|j| Complex64::from_polar(r, TAU * (j as f64 + shift) / angles as f64)));
        }
        pts
    }
}

/// `(|u(z)|, |φ(z)|)` at the grid points, singular points skipped.
fn samples(u: &DiscFunction, phi: &SelfMap, points: &[Complex64]) -> Result<Vec<(f64, f64)>> {
    let v: Vec<Option<(f64, f64)>> = points
        .par_iter()
        .map(|&z| match (u.evaluate(z), phi.evaluate(z)) {
            (Ok(a), Ok(b)) => Ok(Some((a.norm(), b.norm()))),
            (Err(Error::SingularPoint(_)), _) | (_, Err(Error::SingularPoint(_))) => Ok(None),
            (Err(e), _) | (_, Err(e)) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(v.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthValue {
    pub depth: f64,
    pub angles: usize,
    #[serde(serialize_with = "extended")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupBoundedness {
    pub verdict: Verdict,
    /// `sup |u|^p / (1 - |φ|²)` on the finest pass.
    #[serde(serialize_with = "extended")]
    pub sup_estimate: f64,
    pub passes: Vec<DepthValue>,
}

/// Grid supremum of `|u(z)|^p / (1 - |φ(z)|²)`, refined toward the circle.
/// Bounded when the last pass changes it by at most `SUP_STABLE_TOL`,
/// unbounded when both refinements grow it by more than 10%.
pub fn boundedness_p_inf(u: &DiscFunction, phi: &SelfMap, p: Exponent, grid: &DiskGrid) -> Result<SupBoundedness> {
    let p = p.require_finite("p")?;
    grid.validate()?;
    let passes = grid
        .passes()
        .iter()
        .map(|&(depth, angles)| {
            let value = samples(u, phi, &grid.points(depth, angles))?
                .into_iter()
                .map(|(a, b)| {
                    let gap = 1.0 - b * b;
                    if gap <= 0.0 {
                        f64::INFINITY
                    } else {
                        a.powf(p) / gap
                    }
                })
                .fold(0.0, f64::max);
            Ok(DepthValue { depth, angles, value })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = passes.iter().map(|d| d.value).collect();
    Ok(SupBoundedness {
        verdict: trend(&values, SUP_STABLE_TOL, SUP_GROWTH_TOL, 2),
        sup_estimate: *values.last().unwrap(),
        passes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MPhi {
    /// Value at the smallest `ε`, or infinity when the refinement passes diverge.
    #[serde(serialize_with = "extended")]
    pub value: f64,
    /// Level-set suprema on the finest pass, one per `ε`.
    pub eps_trace: Vec<EpsValue>,
    /// Value at the smallest `ε` on each refinement pass.
    pub passes: Vec<DepthValue>,
    pub verdict: Verdict,
}

fn level_sup(samples: &[(f64, f64)], eps: f64, p: f64) -> Option<f64> {
    samples
        .iter()
        .filter(|(_, b)| *b > 1.0 - eps)
        .map(|&(a, b)| {
            let gap = 1.0 - b * b;
            if gap <= 0.0 {
                f64::INFINITY
            } else {
                a / gap.powf(1.0 / p)
            }
        })
        .reduce(f64::max)
}

/// `M_φ(u) = limsup_{|φ(z)|→1} |u(z)| / (1-|φ(z)|²)^{1/p}`.
///
/// The limsup is the value on the level set `|φ| > 1 - ε` at the smallest
/// `ε`. Because the grid stops at a finite depth, divergence shows up across
/// the refinement passes rather than across `ε`.
pub fn m_phi(u: &DiscFunction, phi: &SelfMap, p: Exponent, grid: &DiskGrid) -> Result<MPhi> {
    let pf = p.require_finite("p")?;
    grid.validate()?;
    if phi.sup_modulus_estimate() < 1.0 - COMPACT_GAP {
        return Err(invalid("M_phi needs ||phi||_inf = 1; the map stays inside a smaller disk"));
    }
    let (k_min, k_max) = grid.eps_exponents;
    let eps_list: Vec<f64> = (k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect();
    let smallest = *eps_list.last().unwrap();

    let mut passes = Vec::new();
    let mut finest = Vec::new();
    for &(depth, angles) in &grid.passes() {
        let s = samples(u, phi, &grid.points(depth, angles))?;
        if let Some(v) = level_sup(&s, smallest, pf) {
            passes.push(DepthValue { depth, angles, value: v });
        }
        finest = s;
    }
    let mut eps_trace = eps_list
        .iter()
        .map(|&eps| level_sup(&finest, eps, pf).map(|value| EpsValue { eps, value }))
        .collect::<Option<Vec<_>>>();
    if eps_trace.is_none() {
        // One refinement beyond the finest pass, then give up.
        let (depth, angles) = (grid.max_depth + 4.0, 8 * grid.angles);
        let s = samples(u, phi, &grid.points(depth, angles))?;
        eps_trace = eps_list
            .iter()
            .map(|&eps| level_sup(&s, eps, pf).map(|value| EpsValue { eps, value }))
            .collect::<Option<Vec<_>>>();
        if let Some(v) = level_sup(&s, smallest, pf) {
            passes.push(DepthValue { depth, angles, value: v });
        }
    }
    let eps_trace = eps_trace.ok_or(Error::EmptyLevel { level: 1.0 - smallest })?;
    let values: Vec<f64> = passes.iter().map(|d| d.value).collect();
    let verdict = trend(&values, SUP_STABLE_TOL, SUP_GROWTH_TOL, 2);
    let value = if verdict == Verdict::Fails {
        f64::INFINITY
    } else {
        eps_trace.last().unwrap().value
    };
    Ok(MPhi {
        value,
        eps_trace,
        passes,
        verdict,
    })
}

/// `[M_φ(u)/2, 2 M_φ(u)]`, with lower constant 1 when `p > 1`, or `[0, 0]`
/// when `‖φ‖_∞ < 1`.
pub fn essnorm_p_inf(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    grid: &DiskGrid,
) -> Result<(EssNormBracket, SupBoundedness, Option<MPhi>)> {
    let b = boundedness_p_inf(u, phi, p, grid)?;
    match b.verdict {
        Verdict::Fails => {
            return Err(Error::NotBounded(format!(
                "sup |u|^p/(1-|phi|^2) grows under refinement ({:e})",
                b.sup_estimate
            )))
        }
        Verdict::Undecided => {
            return Err(Error::Undecided(format!(
                "sup |u|^p/(1-|phi|^2) not settled ({:e})",
                b.sup_estimate
            )))
        }
        Verdict::Holds => {}
    }
    let (bracket, m) = bracket_p_inf(u, phi, p, grid)?;
    Ok((bracket, b, m))
}

/// Bracket once the operator is known to be bounded.
pub(crate) fn bracket_p_inf(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    grid: &DiskGrid,
) -> Result<(EssNormBracket, Option<MPhi>)> {
    let pf = p.require_finite("p")?;
    let lower_const = if pf > 1.0 { 1.0 } else { 0.5 };
    if phi.sup_modulus_estimate() < 1.0 - COMPACT_GAP {
        let bracket = EssNormBracket::compact(Regime::PToInf, lower_const, 2.0, "||phi||_inf < 1");
        return Ok((bracket, None));
    }
    let m = m_phi(u, phi, p, grid)?;
    if !m.value.is_finite() {
        return Err(Error::NotBounded("M_phi(u) diverges".into()));
    }
    let mut bracket = EssNormBracket::new(Regime::PToInf, m.value, m.value, lower_const, 2.0);
    if m.value == 0.0 {
        bracket.compact_reason = Some("M_phi(u) = 0".into());
    }
    Ok((bracket, Some(m)))
}
