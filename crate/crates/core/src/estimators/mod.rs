//! Boundedness tests and two-sided essential-norm brackets for `uC_φ`
//! between Hardy spaces, one routine per `(p, q)` regime.

mod analyze;
mod extremal;
mod infinity;
mod kernel;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::funcspace::Exponent;

pub use analyze::{analyze, AnalysisConfig, AnalysisReport, CrossCheck, KernelDiagnostics, DEFAULT_COMPACT_THRESHOLD, INTERSECT_TOL};
pub use extremal::{
    composition_norm_surrogate, essnorm_inf_q, essnorm_p_gt_q, extremal_integral, power_norm_sequence,
    EpsSchedule, EpsValue, ExtremalIntegral, PGtQEstimate,
};
pub use infinity::{
    boundedness_p_inf, essnorm_p_inf, m_phi, DepthValue, DiskGrid, MPhi, SupBoundedness, SUP_STABLE_TOL,
};
pub use kernel::{
    boundedness_pq, essnorm_pq_lower, essnorm_pq_upper, kernel_integral, kernel_sweep, KernelBoundedness,
    KernelSampler, KernelSweep, KernelValue, LowerPoint, RingSchedule, RingValue, RING_GROWTH_TOL,
};

/// Estimation route for the pair `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Regime {
    /// `1 < p ≤ q < ∞`.
    #[serde(rename = "p<=q")]
    PLeQ,
    /// `p = 1 ≤ q < ∞`.
    #[serde(rename = "p=1<=q")]
    POneLeQ,
    /// `H^p → H^∞`, `p` finite.
    #[serde(rename = "p->inf")]
    PToInf,
    /// `H^∞ → H^q`, `q` finite.
    #[serde(rename = "inf->q")]
    InfToQ,
    /// `∞ > p > q ≥ 1`.
    #[serde(rename = "p>q")]
    PGtQ,
}

impl Regime {
    /// Same text as the serialized form.
    pub fn label(self) -> &'static str {
        match self {
            Regime::PLeQ => "p<=q",
            Regime::POneLeQ => "p=1<=q",
            Regime::PToInf => "p->inf",
            Regime::InfToQ => "inf->q",
            Regime::PGtQ => "p>q",
        }
    }

    pub fn classify(p: Exponent, q: Exponent) -> Result<Regime> {
        match (p, q) {
            (Exponent::Infinity, Exponent::Infinity) => Err(invalid("p = q = inf is not covered")),
            (Exponent::Infinity, Exponent::Finite(_)) => Ok(Regime::InfToQ),
            (Exponent::Finite(_), Exponent::Infinity) => Ok(Regime::PToInf),
            (Exponent::Finite(p), Exponent::Finite(q)) if p > q => Ok(Regime::PGtQ),
            (Exponent::Finite(p), Exponent::Finite(_)) if p == 1.0 => Ok(Regime::POneLeQ),
            (Exponent::Finite(_), Exponent::Finite(_)) => Ok(Regime::PLeQ),
        }
    }
}

/// `lower_const · raw_lower ≤ ‖uC_φ‖_e ≤ upper_const · raw_upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EssNormBracket {
    pub regime: Regime,
    pub lower: f64,
    #[serde(serialize_with = "extended")]
    pub upper: f64,
    pub lower_const: f64,
    pub upper_const: f64,
    pub raw_lower: f64,
    #[serde(serialize_with = "extended")]
    pub raw_upper: f64,
    /// Set when a compactness criterion short-circuits the estimate.
    pub compact_reason: Option<String>,
}

impl EssNormBracket {
    pub fn new(regime: Regime, raw_lower: f64, raw_upper: f64, lower_const: f64, upper_const: f64) -> Self {
        EssNormBracket {
            regime,
            lower: lower_const * raw_lower,
            upper: upper_const * raw_upper,
            lower_const,
            upper_const,
            raw_lower,
            raw_upper,
            compact_reason: None,
        }
    }

    pub fn compact(regime: Regime, lower_const: f64, upper_const: f64, reason: impl Into<String>) -> Self {
        EssNormBracket {
            compact_reason: Some(reason.into()),
            ..EssNormBracket::new(regime, 0.0, 0.0, lower_const, upper_const)
        }
    }

    pub fn is_ordered(&self, tol: f64) -> bool {
        self.lower <= self.upper + tol
    }
}

/// JSON has no infinity; non-finite values are written as the string "inf".
pub(crate) fn extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}
