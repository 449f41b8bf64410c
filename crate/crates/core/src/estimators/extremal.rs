//! The extremal set `E_φ = {ζ : |φ*(ζ)| = 1}`: integrals over it, the
//! `H^∞ → H^q` bracket, and the `p > q` bracket.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{EssNormBracket, Regime};
use crate::error::{invalid, Error, Result};
use crate::funcspace::{check_grid_size, hardy_norm, DiscFunction, Exponent, QuadratureConfig, SelfMap};
use crate::measures::{classify_carleson, CarlesonCertificate, CarlesonConfig};
use crate::verdict::{relative_change, Verdict};

/// `ε = 2^{-k}` for `k = k_min..=k_max`; the estimate is accepted when the
/// values at the final two `ε` agree to `rel_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsSchedule {
    pub k_min: u32,
    pub k_max: u32,
    pub rel_tol: f64,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule {
            k_min: 3,
            k_max: 40,
            rel_tol: 1e-4,
        }
    }
}

impl EpsSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.k_min >= self.k_max || self.k_max > 52 {
            return Err(invalid("eps schedule needs k_min < k_max <= 52"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(invalid("eps tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsValue {
    pub eps: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalIntegral {
    pub exponent: f64,
    pub value: f64,
    pub eps_trace: Vec<EpsValue>,
    pub grid_size: usize,
}

impl ExtremalIntegral {
    pub fn value_at(&self, eps: f64) -> Option<f64> {
        self.eps_trace.iter().find(|e| e.eps == eps).map(|e| e.value)
    }
}

/// `∫_{E_φ} |u|^t dm` through the superlevel sets `{|φ*| > 1 - ε}`.
///
/// Samples sit at cell midpoints `2π(j + 1/2)/M`, so an isolated contact
/// point at a rational angle is not counted as a whole grid cell.
pub fn extremal_integral(
    u: &DiscFunction,
    phi: &SelfMap,
    t: f64,
    eps: &EpsSchedule,
    m: usize,
) -> Result<ExtremalIntegral> {
    eps.validate()?;
    check_grid_size(m)?;
    if !(t >= 1.0) || !t.is_finite() {
        return Err(invalid(format!("exponent {t} must be finite and >= 1")));
    }
    let samples: Vec<Option<(f64, f64)>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let z = Complex64::from_polar(1.0, TAU * (j as f64 + 0.5) / m as f64);
            match (phi.evaluate(z), u.evaluate(z)) {
                (Ok(w), Ok(v)) => Ok(Some((w.norm(), v.norm().powf(t)))),
                (Err(Error::SingularPoint(_)), _) | (_, Err(Error::SingularPoint(_))) => Ok(None),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut samples: Vec<(f64, f64)> = samples.into_iter().flatten().collect();
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));

    let levels: Vec<f64> = (eps.k_min..=eps.k_max).map(|k| 0.5f64.powi(k as i32)).collect();
    // Superlevel sets grow with ε: walk the sorted samples once, smallest ε first.
    let mut values = vec![0.0; levels.len()];
    let (mut taken, mut sum) = (0, 0.0);
    for (i, e) in levels.iter().enumerate().rev() {
        while taken < samples.len() && samples[taken].0 > 1.0 - e {
            sum += samples[taken].1;
            taken += 1;
        }
        values[i] = sum / m as f64;
    }
    let eps_trace: Vec<EpsValue> = levels
        .iter()
        .zip(&values)
        .map(|(&eps, &value)| EpsValue { eps, value })
        .collect();
    let n = values.len();
    if relative_change(values[n - 2], values[n - 1]) > eps.rel_tol {
        return Err(Error::NonConvergent(format!(
            "extremal integral still changing at eps = {:e}: {:e} -> {:e}",
            eps_trace[n - 1].eps,
            values[n - 2],
            values[n - 1]
        )));
    }
    Ok(ExtremalIntegral {
        exponent: t,
        value: values[n - 1],
        eps_trace,
        grid_size: m,
    })
}

/// `‖u φⁿ‖_q` for each `n`; its limit is `(∫_{E_φ}|u|^q dm)^{1/q}`.
pub fn power_norm_sequence(
    u: &DiscFunction,
    phi: &SelfMap,
    q: Exponent,
    n_list: &[u32],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    q.require_finite("q")?;
    n_list
        .iter()
        .map(|&n| hardy_norm(&u.clone().mul(phi.map().clone().pow(n)), q, cfg))
        .collect()
}

/// Standard bound `((1+|φ(0)|)/(1-|φ(0)|))^{q/p}` for `‖C_φ‖_{H^{p/q}}`,
/// used in place of the exact composition norm.
pub fn composition_norm_surrogate(phi: &SelfMap, p: f64, q: f64) -> f64 {
    let a0 = phi.at_origin().norm();
    ((1.0 + a0) / (1.0 - a0)).powf(q / p)
}

/// `[J^{1/q}/2, 2 J^{1/q}]` with `J = ∫_{E_φ} |u|^q dm`. Also returns `‖u‖_q`,
/// finite exactly when the operator is bounded.
pub fn essnorm_inf_q(
    u: &DiscFunction,
    phi: &SelfMap,
    q: Exponent,
    eps: &EpsSchedule,
    cfg: &QuadratureConfig,
) -> Result<(EssNormBracket, ExtremalIntegral, f64)> {
    let qf = q.require_finite("q")?;
    let norm = hardy_norm(u, q, cfg)?;
    let j = extremal_integral(u, phi, qf, eps, cfg.base_grid)?;
    let root = j.value.powf(1.0 / qf);
    let mut bracket = EssNormBracket::new(Regime::InfToQ, root, root, 0.5, 2.0);
    if j.value == 0.0 {
        bracket.compact_reason = Some("|E_phi| = 0".into());
    }
    Ok((bracket, j, norm))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PGtQEstimate {
    pub bracket: EssNormBracket,
    /// `∫_{E_φ} |u|^q dm`.
    pub lower_integral: ExtremalIntegral,
    /// `∫_{E_φ} |u|^{pq/(p-q)} dm`.
    pub upper_integral: ExtremalIntegral,
    /// Stand-in for `‖C_φ‖_{p/q}`, labeled as the standard bound.
    pub composition_norm_surrogate: f64,
}

/// Bracket for `p > q` once the operator is known to be bounded.
pub(crate) fn bracket_p_gt_q(
    u: &DiscFunction,
    phi: &SelfMap,
    p: f64,
    q: f64,
    eps: &EpsSchedule,
    m: usize,
) -> Result<PGtQEstimate> {
    let lower_integral = extremal_integral(u, phi, q, eps, m)?;
    let upper_integral = extremal_integral(u, phi, p * q / (p - q), eps, m)?;
    let b = composition_norm_surrogate(phi, p, q);
    let raw_lower = lower_integral.value.powf(1.0 / q);
    let raw_upper = b.powf(1.0 / q) * upper_integral.value.powf((p - q) / (p * q));
    let mut bracket = EssNormBracket::new(Regime::PGtQ, raw_lower, raw_upper, 1.0, 2.0);
    if upper_integral.value == 0.0 {
        bracket.compact_reason = Some("|E_phi| = 0".into());
    }
    Ok(PGtQEstimate {
        bracket,
        lower_integral,
        upper_integral,
        composition_norm_surrogate: b,
    })
}

/// `p > q`: requires `μ_φ` to be `(p, q)`-Carleson, then
/// `(∫_E |u|^q)^{1/q} ≤ ‖uC_φ‖_e ≤ 2 B^{1/q} (∫_E |u|^{pq/(p-q)})^{(p-q)/(pq)}`.
pub fn essnorm_p_gt_q(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    eps: &EpsSchedule,
    cfg: &QuadratureConfig,
    carleson: &CarlesonConfig,
) -> Result<(PGtQEstimate, CarlesonCertificate)> {
    let pf = p.require_finite("p")?;
    let qf = q.require_finite("q")?;
    if pf <= qf {
        return Err(invalid("this bracket needs p > q"));
    }
    let cert = classify_carleson(u, phi, p, q, carleson)?;
    match cert.verdict {
        Verdict::Fails => return Err(Error::NotBounded(cert.reason.clone())),
        Verdict::Undecided => return Err(Error::Undecided(cert.reason.clone())),
        Verdict::Holds => {}
    }
    Ok((bracket_p_gt_q(u, phi, pf, qf, eps, cfg.base_grid)?, cert))
}
