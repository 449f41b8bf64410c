//! Regime dispatch: one call runs the boundedness test and, when bounded,
//! the essential-norm bracket, plus the truncation cross-check for `p = q = 2`.

use serde::Serialize;

use super::extremal::bracket_p_gt_q;
use super::infinity::bracket_p_inf;
use super::{
    boundedness_p_inf, essnorm_inf_q, kernel_sweep, power_norm_sequence, DiskGrid, EpsSchedule, EssNormBracket,
    ExtremalIntegral, KernelBoundedness, KernelSweep, LowerPoint, MPhi, Regime, RingSchedule, SupBoundedness,
};
use crate::error::{invalid, Error, Result};
use crate::funcspace::{DiscFunction, Exponent, QuadratureConfig, SelfMap};
use crate::measures::{classify_carleson, CarlesonCertificate, CarlesonConfig};
use crate::truncation::{build_matrix, default_grid, truncation_bracket, TruncationBracket, DEFAULT_DEGREE, DEFAULT_N_SCHEDULE};
use crate::verdict::Verdict;

/// Slack allowed when intersecting the kernel and truncation brackets: both
/// approximate limits from finite rings and finite matrices.
pub const INTERSECT_TOL: f64 = 1e-3;
pub const DEFAULT_COMPACT_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub quadrature: QuadratureConfig,
    pub rings: RingSchedule,
    pub disk: DiskGrid,
    pub eps: EpsSchedule,
    pub carleson: CarlesonConfig,
    pub truncation_degree: usize,
    pub n_schedule: Vec<usize>,
    /// Brackets with upper end below this count as compact.
    pub compact_threshold: f64,
    /// Powers `n` for the `‖uφⁿ‖_q` cross-check in the extremal regimes.
    pub power_list: Vec<u32>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            quadrature: QuadratureConfig::default(),
            rings: RingSchedule::default(),
            disk: DiskGrid::default(),
            eps: EpsSchedule::default(),
            carleson: CarlesonConfig::default(),
            truncation_degree: DEFAULT_DEGREE,
            n_schedule: DEFAULT_N_SCHEDULE.to_vec(),
            compact_threshold: DEFAULT_COMPACT_THRESHOLD,
            power_list: vec![1, 2, 4, 8, 16, 32, 64],
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.quadrature.validate()?;
        self.rings.validate()?;
        self.disk.validate()?;
        self.eps.validate()?;
        if self.n_schedule.is_empty() || self.n_schedule.iter().any(|&n| n == 0 || n > self.truncation_degree) {
            return Err(invalid("N schedule entries must lie in 1..=truncation degree"));
        }
        if !(self.compact_threshold > 0.0) {
            return Err(invalid("compact threshold must be positive"));
        }
        Ok(())
    }
}

/// Truncation bracket for `p = q = 2`, labeled as numerical evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub truncation: TruncationBracket,
    pub intersects: bool,
    pub tolerance: f64,
    pub label: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub regime: Regime,
    pub p: Exponent,
    pub q: Exponent,
    pub bounded: Verdict,
    /// Quantity comparable to `‖uC_φ‖` when bounded.
    pub norm_estimate: Option<f64>,
    pub bracket: Option<EssNormBracket>,
    pub compact: Option<bool>,
    pub kernel: Option<KernelDiagnostics>,
    pub supremum: Option<SupBoundedness>,
    pub m_phi: Option<MPhi>,
    pub extremal: Vec<ExtremalIntegral>,
    pub power_norms: Vec<(u32, f64)>,
    pub carleson: Option<CarlesonCertificate>,
    pub composition_norm_surrogate: Option<f64>,
    pub cross_check: Option<CrossCheck>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelDiagnostics {
    pub boundedness: KernelBoundedness,
    pub sweep: KernelSweep,
    pub lower_points: Vec<LowerPoint>,
}

impl AnalysisReport {
    fn new(regime: Regime, p: Exponent, q: Exponent) -> Self {
        AnalysisReport {
            regime,
            p,
            q,
            bounded: Verdict::Undecided,
            norm_estimate: None,
            bracket: None,
            compact: None,
            kernel: None,
            supremum: None,
            m_phi: None,
            extremal: Vec::new(),
            power_norms: Vec::new(),
            carleson: None,
            composition_norm_surrogate: None,
            cross_check: None,
            notes: Vec::new(),
        }
    }

    fn set_bracket(&mut self, bracket: EssNormBracket, threshold: f64) {
        self.compact = Some(bracket.compact_reason.is_some() || bracket.upper < threshold);
        self.bracket = Some(bracket);
    }
}

/// Runs the boundedness test for the regime of `(p, q)` and, if bounded,
/// the essential-norm bracket.
///
/// An unbounded or undecided operator is not an error: the report carries
/// the verdict and no bracket.
pub fn analyze(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    cfg: &AnalysisConfig,
) -> Result<AnalysisReport> {
    cfg.validate()?;
    if u.is_identically_zero() {
        return Err(Error::Validation("the weight u must not vanish identically".into()));
    }
    let regime = Regime::classify(p, q)?;
    let mut report = AnalysisReport::new(regime, p, q);
    match regime {
        Regime::PLeQ | Regime::POneLeQ => analyze_kernel(u, phi, p, q, cfg, &mut report)?,
        Regime::PToInf => {
            let b = boundedness_p_inf(u, phi, p, &cfg.disk)?;
            report.bounded = b.verdict;
            let pf = p.require_finite("p")?;
            report.norm_estimate = Some(b.sup_estimate.powf(1.0 / pf));
            report.supremum = Some(b);
            if report.bounded == Verdict::Holds {
                let (bracket, m) = bracket_p_inf(u, phi, p, &cfg.disk)?;
                report.m_phi = m;
                report.set_bracket(bracket, cfg.compact_threshold);
            }
        }
        Regime::InfToQ => {
            let (bracket, j, norm) = essnorm_inf_q(u, phi, q, &cfg.eps, &cfg.quadrature)?;
            report.bounded = Verdict::Holds;
            report.norm_estimate = Some(norm);
            report.extremal.push(j);
            report.power_norms = powers(u, phi, q, cfg)?;
            report.set_bracket(bracket, cfg.compact_threshold);
        }
        Regime::PGtQ => {
            let cert = classify_carleson(u, phi, p, q, &cfg.carleson)?;
            report.bounded = cert.verdict;
            report.carleson = Some(cert);
            if report.bounded == Verdict::Holds {
                let (pf, qf) = (p.require_finite("p")?, q.require_finite("q")?);
                let est = bracket_p_gt_q(u, phi, pf, qf, &cfg.eps, cfg.quadrature.base_grid)?;
                report.composition_norm_surrogate = Some(est.composition_norm_surrogate);
                report.notes.push(
                    "composition norm ||C_phi||_{p/q} replaced by the standard bound ((1+|phi(0)|)/(1-|phi(0)|))^{q/p}"
                        .into(),
                );
                report.extremal.push(est.lower_integral);
                report.extremal.push(est.upper_integral);
                report.power_norms = powers(u, phi, q, cfg)?;
                report.set_bracket(est.bracket, cfg.compact_threshold);
            }
        }
    }
    Ok(report)
}

fn powers(u: &DiscFunction, phi: &SelfMap, q: Exponent, cfg: &AnalysisConfig) -> Result<Vec<(u32, f64)>> {
    let values = power_norm_sequence(u, phi, q, &cfg.power_list, &cfg.quadrature)?;
    Ok(cfg.power_list.iter().copied().zip(values).collect())
}

fn analyze_kernel(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    cfg: &AnalysisConfig,
    report: &mut AnalysisReport,
) -> Result<()> {
    let sweep = kernel_sweep(u, phi, p, q, &cfg.rings, &cfg.quadrature)?;
    let boundedness = sweep.boundedness();
    report.bounded = boundedness.verdict;
    report.norm_estimate = Some(boundedness.norm_estimate);
    if report.bounded != Verdict::Holds {
        report.kernel = Some(KernelDiagnostics {
            boundedness,
            sweep,
            lower_points: Vec::new(),
        });
        return Ok(());
    }
    let (raw_lower, lower_points) = sweep.lower(u, phi, &cfg.quadrature)?;
    let lower_const = if report.regime == Regime::POneLeQ { 0.5 } else { 1.0 };
    let bracket = EssNormBracket::new(report.regime, raw_lower, sweep.upper(), lower_const, 2.0);
    if p == Exponent::Finite(2.0) && q == Exponent::Finite(2.0) {
        let k = cfg.truncation_degree;
        match build_matrix(u, phi, k, default_grid(k), 1.0) {
            Ok(t) => {
                let tb = truncation_bracket(&t, &cfg.n_schedule)?;
                if !tb.skipped_orders.is_empty() {
                    report.notes.push(format!(
                        "truncation orders {:?} skipped: only {} leading columns resolved at degree {k}",
                        tb.skipped_orders, tb.resolved_columns
                    ));
                }
                let lo = bracket.lower.max(tb.lower);
                let hi = bracket.upper.min(tb.upper);
                report.cross_check = Some(CrossCheck {
                    intersects: lo <= hi + INTERSECT_TOL,
                    truncation: tb,
                    tolerance: INTERSECT_TOL,
                    label: "numerical evidence",
                });
            }
            Err(Error::AliasingTooLarge { tail, tolerance }) => report
                .notes
                .push(format!("truncation skipped: aliasing tail {tail:e} above {tolerance:e}")),
            Err(e) => return Err(e),
        }
    }
    report.kernel = Some(KernelDiagnostics {
        boundedness,
        sweep,
        lower_points,
    });
    report.set_bracket(bracket, cfg.compact_threshold);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn e(v: f64) -> Exponent {
        Exponent::finite(v).unwrap()
    }

    fn map(f: DiscFunction) -> SelfMap {
        SelfMap::new(f).unwrap()
    }

    fn one() -> DiscFunction {
        DiscFunction::constant(1.0)
    }

    fn quick() -> AnalysisConfig {
        AnalysisConfig {
            quadrature: QuadratureConfig::default().with_base(1 << 12),
            rings: RingSchedule::geometric(3, 11, 32).unwrap(),
            carleson: CarlesonConfig {
                grid: 1 << 12,
                ..CarlesonConfig::default()
            },
            truncation_degree: 64,
            n_schedule: vec![8, 16, 32],
            ..AnalysisConfig::default()
        }
    }

    #[test]
    fn identity_bracket() {
        let r = analyze(&one(), &map(DiscFunction::identity()), e(2.0), e(2.0), &quick()).unwrap();
        assert_eq!(r.regime, Regime::PLeQ);
        assert_eq!(r.bounded, Verdict::Holds);
        let b = r.bracket.unwrap();
        assert_abs_diff_eq!(b.raw_lower, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(b.raw_upper, 1.0, epsilon = 1e-8);
        assert_eq!(r.compact, Some(false));
        let x = r.cross_check.unwrap();
        assert!(x.intersects);
        assert_abs_diff_eq!(x.truncation.upper, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(x.truncation.lower, 0.5, epsilon = 1e-10);
    }

    #[test]
    fn unbounded_has_no_bracket() {
        let r = analyze(&one(), &map(DiscFunction::identity()), e(2.0), e(4.0), &quick()).unwrap();
        assert_eq!(r.bounded, Verdict::Fails);
        assert!(r.bracket.is_none());
    }

    #[test]
    fn compact_to_infinity() {
        let half = map(DiscFunction::identity().scale(0.5));
        let r = analyze(&one(), &half, e(2.0), Exponent::Infinity, &quick()).unwrap();
        assert_eq!(r.regime, Regime::PToInf);
        assert_eq!(r.bounded, Verdict::Holds);
        let b = r.bracket.unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        assert_eq!(r.compact, Some(true));
        assert_abs_diff_eq!(r.norm_estimate.unwrap(), (4.0f64 / 3.0).sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn rejects_zero_weight_and_double_infinity() {
        let id = map(DiscFunction::identity());
        assert!(matches!(
            analyze(&DiscFunction::constant(0.0), &id, e(2.0), e(2.0), &quick()),
            Err(Error::Validation(_))
        ));
        assert!(analyze(&one(), &id, Exponent::Infinity, Exponent::Infinity, &quick()).is_err());
    }

    #[test]
    fn brackets_are_ordered_across_regimes() {
        let blaschke = map(DiscFunction::blaschke(vec![Complex64::new(0.0, 0.0), Complex64::new(0.4, 0.3)]).unwrap());
        let lens = map(DiscFunction::real_polynomial(&[0.5, 0.5]));
        let cases = [
            (one(), blaschke.clone(), e(2.0), e(2.0)),
            (one(), lens.clone(), e(1.0), e(1.0)),
            (DiscFunction::real_polynomial(&[1.0, -1.0]), lens.clone(), e(2.0), Exponent::Infinity),
            (one(), blaschke.clone(), Exponent::Infinity, e(2.0)),
            (one(), blaschke, e(4.0), e(2.0)),
        ];
        for (u, phi, p, q) in &cases {
            let r = analyze(u, phi, *p, *q, &quick()).unwrap();
            let b = r.bracket.unwrap_or_else(|| panic!("no bracket for {p}, {q}"));
            assert!(b.is_ordered(1e-9), "{b:?}");
        }
    }

    #[test]
    fn refinement_invariance() {
        let lens = map(DiscFunction::real_polynomial(&[0.5, 0.5]));
        let u = DiscFunction::real_polynomial(&[1.0, 0.5]);
        let coarse = analyze(&u, &lens, e(2.0), e(2.0), &quick()).unwrap().bracket.unwrap();
        let mut cfg = quick();
        cfg.quadrature = cfg.quadrature.with_base(1 << 13);
        let fine = analyze(&u, &lens, e(2.0), e(2.0), &cfg).unwrap().bracket.unwrap();
        // Both grids converge to the quadrature tolerance before stopping.
        assert!((coarse.raw_upper - fine.raw_upper).abs() <= 1e-8);
        assert!((coarse.raw_lower - fine.raw_lower).abs() <= 1e-8);
    }
}
