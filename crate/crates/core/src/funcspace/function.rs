use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Points with `|z| <= 1 + DOMAIN_TOL` count as lying in the closed disk.
pub const DOMAIN_TOL: f64 = 1e-12;
/// Distance below which a point is identified with a listed singular point.
pub const SINGULAR_TOL: f64 = 1e-12;

/// An analytic function on the unit disk, stored as an expression tree over
/// a closed set of primitives.
///
/// Every primitive extends continuously to the closed disk except at the
/// explicitly listed singular points of rational leaves, so estimators can
/// re-evaluate the same symbol at any radius without resampling.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscFunction {
    /// `Σ c_n z^n`, coefficients in increasing degree.
    Polynomial(Vec<Complex64>),
    /// `P(z) / Q(z)`; `singular` lists the zeros of `Q` on the unit circle.
    Rational {
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
        singular: Vec<Complex64>,
    },
    /// Finite Blaschke product with the given zeros, normalised so that the
    /// unimodular constant is 1.
    Blaschke(Vec<Complex64>),
    /// `k_a^{1/p}(z) = (1-|a|²)^{1/p} (1-āz)^{-2/p}`; `p = 1` is the
    /// normalised reproducing kernel `k_a`.
    Kernel { a: Complex64, p: f64 },
    /// Szegő kernel `K_w(z) = 1/(1-w̄z)`.
    Cauchy(Complex64),
    /// `z^n`.
    Monomial(u32),
    Scaled(Complex64, Box<DiscFunction>),
    Sum(Box<DiscFunction>, Box<DiscFunction>),
    Product(Box<DiscFunction>, Box<DiscFunction>),
    /// `outer ∘ inner`.
    Compose(Box<DiscFunction>, Box<DiscFunction>),
}

impl DiscFunction {
    pub fn constant(c: impl Into<Complex64>) -> Self {
        DiscFunction::Polynomial(vec![c.into()])
    }

    pub fn identity() -> Self {
        DiscFunction::Monomial(1)
    }

    pub fn polynomial(coefficients: impl IntoIterator<Item = Complex64>) -> Self {
        let mut c: Vec<Complex64> = coefficients.into_iter().collect();
        if c.is_empty() {
            c.push(Complex64::new(0.0, 0.0));
        }
        DiscFunction::Polynomial(c)
    }

    pub fn real_polynomial(coefficients: &[f64]) -> Self {
        Self::polynomial(coefficients.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    pub fn monomial(n: u32) -> Self {
        DiscFunction::Monomial(n)
    }

    /// Rational function whose denominator must not vanish on the closed disk.
    pub fn rational(numerator: Vec<Complex64>, denominator: Vec<Complex64>) -> Result<Self> {
        Self::rational_with_singular(numerator, denominator, Vec::new())
    }

    /// Rational function whose denominator may vanish on the unit circle, but
    /// only at the listed points.
    pub fn rational_with_singular(
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
        singular: Vec<Complex64>,
    ) -> Result<Self> {
        if numerator.is_empty() {
            return Err(invalid("rational numerator is empty"));
        }
        for s in &singular {
            if (s.norm() - 1.0).abs() > 1e-9 {
                return Err(invalid(format!("singular point {s} is not on the unit circle")));
            }
        }
        for root in polynomial_roots(&denominator)? {
            if root.norm() > 1.0 + 1e-9 {
                continue;
            }
            let listed = singular.iter().any(|s| (s - root).norm() < 1e-7);
            if !listed {
                return Err(invalid(format!(
                    "denominator vanishes at {root}, inside the closed disk"
                )));
            }
        }
        Ok(DiscFunction::Rational {
            numerator,
            denominator,
            singular,
        })
    }

    pub fn blaschke(zeros: Vec<Complex64>) -> Result<Self> {
        if let Some(z) = zeros.iter().find(|z| z.norm() >= 1.0) {
            return Err(Error::OutsideDomain(*z));
        }
        Ok(DiscFunction::Blaschke(zeros))
    }

    pub fn scale(self, c: impl Into<Complex64>) -> Self {
        DiscFunction::Scaled(c.into(), Box::new(self))
    }

    pub fn add(self, other: DiscFunction) -> Self {
        DiscFunction::Sum(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: DiscFunction) -> Self {
        DiscFunction::Product(Box::new(self), Box::new(other))
    }

    /// `self ∘ inner`.
    pub fn compose(self, inner: DiscFunction) -> Self {
        DiscFunction::Compose(Box::new(self), Box::new(inner))
    }

    /// `self^n`, represented as `z^n ∘ self`.
    pub fn pow(self, n: u32) -> Self {
        DiscFunction::Monomial(n).compose(self)
    }

    /// Evaluates the function at `z` in the closed disk.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        if z.norm() > 1.0 + DOMAIN_TOL {
            return Err(Error::OutsideDomain(z));
        }
        self.eval_unchecked(z)
    }

    fn eval_unchecked(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            DiscFunction::Polynomial(c) => horner(c, z),
            DiscFunction::Rational {
                numerator,
                denominator,
                singular,
            } => {
                if singular.iter().any(|s| (s - z).norm() < SINGULAR_TOL) {
                    return Err(Error::SingularPoint(z));
                }
                horner(numerator, z) / horner(denominator, z)
            }
            DiscFunction::Blaschke(zeros) => zeros
                .iter()
                .map(|a| (z - a) / (1.0 - a.conj() * z))
                .product(),
            DiscFunction::Kernel { a, p } => kernel_power_at(*a, *p, z),
            DiscFunction::Cauchy(w) => 1.0 / (1.0 - w.conj() * z),
            DiscFunction::Monomial(n) => z.powu(*n),
            DiscFunction::Scaled(c, f) => c * f.eval_unchecked(z)?,
            DiscFunction::Sum(f, g) => f.eval_unchecked(z)? + g.eval_unchecked(z)?,
            DiscFunction::Product(f, g) => f.eval_unchecked(z)? * g.eval_unchecked(z)?,
            DiscFunction::Compose(outer, inner) => {
                let w = inner.eval_unchecked(z)?;
                if w.norm() > 1.0 + DOMAIN_TOL {
                    return Err(Error::OutsideDomain(w));
                }
                outer.eval_unchecked(w)?
            }
        })
    }

    /// Evaluates on many points; singular samples come back as `NaN`.
    pub fn evaluate_many(&self, points: &[Complex64]) -> Result<Vec<Complex64>> {
        points
            .iter()
            .map(|&z| match self.evaluate(z) {
                Err(Error::SingularPoint(_)) => Ok(Complex64::new(f64::NAN, f64::NAN)),
                other => other,
            })
            .collect()
    }

    /// Unit-circle points where the boundary trace is undefined.
    ///
    /// Singular points of rational leaves nested under a composition are only
    /// detected at evaluation time, so they are not listed here.
    pub fn singular_boundary_points(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        self.collect_singular(&mut out);
        out
    }

    fn collect_singular(&self, out: &mut Vec<Complex64>) {
        match self {
            DiscFunction::Rational { singular, .. } => out.extend_from_slice(singular),
            DiscFunction::Scaled(_, f) => f.collect_singular(out),
            DiscFunction::Sum(f, g) | DiscFunction::Product(f, g) => {
                f.collect_singular(out);
                g.collect_singular(out);
            }
            DiscFunction::Compose(_, inner) => inner.collect_singular(out),
            _ => {}
        }
    }

    /// Radius at which boundary traces are sampled.
    ///
    /// Every primitive, fractional kernel powers included, extends
    /// continuously to the closed disk away from listed singular points, so
    /// traces are always taken on the unit circle itself.
    pub fn boundary_radius(&self) -> f64 {
        1.0
    }

    /// Degree if the function is a polynomial in `z`.
    pub fn polynomial_degree(&self) -> Option<usize> {
        match self {
            DiscFunction::Polynomial(c) => Some(c.len().saturating_sub(1)),
            DiscFunction::Monomial(n) => Some(*n as usize),
            DiscFunction::Scaled(_, f) => f.polynomial_degree(),
            DiscFunction::Sum(f, g) => Some(f.polynomial_degree()?.max(g.polynomial_degree()?)),
            DiscFunction::Product(f, g) => Some(f.polynomial_degree()? + g.polynomial_degree()?),
            DiscFunction::Compose(f, g) => Some(f.polynomial_degree()? * g.polynomial_degree()?),
            _ => None,
        }
    }

    /// True for the zero polynomial and scalings of it.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            DiscFunction::Polynomial(c) => c.iter().all(|x| x.norm() == 0.0),
            DiscFunction::Rational { numerator, .. } => numerator.iter().all(|x| x.norm() == 0.0),
            DiscFunction::Scaled(c, f) => c.norm() == 0.0 || f.is_identically_zero(),
            DiscFunction::Product(f, g) => f.is_identically_zero() || g.is_identically_zero(),
            _ => false,
        }
    }
}

fn horner(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

pub(crate) fn kernel_power_at(a: Complex64, p: f64, z: Complex64) -> Complex64 {
    let scale = (1.0 - a.norm_sqr()).powf(1.0 / p);
    let base = 1.0 - a.conj() * z;
    let m = 2.0 / p;
    if (m - m.round()).abs() < 1e-12 {
        scale * base.powi(-(m.round() as i32))
    } else {
        // Re(1 - āz) > 0 on the closed disk, so the principal branch is smooth.
        scale * base.powf(-m)
    }
}

/// Roots of `Σ c_k z^k` via the eigenvalues of the companion matrix.
pub(crate) fn polynomial_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut c = c.to_vec();
    while c.last().is_some_and(|x| x.norm() == 0.0) {
        c.pop();
    }
    if c.is_empty() {
        return Err(invalid("zero polynomial has no well-defined roots"));
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let schur = nalgebra::linalg::Schur::new(m);
    schur
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or_else(|| invalid("companion matrix eigenvalues did not converge"))
}

fn fmt_complex(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else {
        write!(f, "c({}, {})", c.re, c.im)
    }
}

fn fmt_list(f: &mut fmt::Formatter<'_>, items: &[Complex64]) -> fmt::Result {
    for (i, c) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        fmt_complex(f, *c)?;
    }
    Ok(())
}

/// Renders the function in the scenario expression grammar; parsing the
/// output yields an equal tree.
impl fmt::Display for DiscFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiscFunction::Polynomial(c) if c.len() == 1 => fmt_complex(f, c[0]),
            DiscFunction::Polynomial(c) => {
                f.write_str("poly(")?;
                fmt_list(f, c)?;
                f.write_str(")")
            }
            DiscFunction::Rational {
                numerator,
                denominator,
                singular,
            } => {
                f.write_str("rat(poly(")?;
                fmt_list(f, numerator)?;
                f.write_str("), poly(")?;
                fmt_list(f, denominator)?;
                f.write_str(")")?;
                if !singular.is_empty() {
                    f.write_str(", singular(")?;
                    fmt_list(f, singular)?;
                    f.write_str(")")?;
                }
                f.write_str(")")
            }
            DiscFunction::Blaschke(zeros) => {
                f.write_str("blaschke(")?;
                fmt_list(f, zeros)?;
                f.write_str(")")
            }
            DiscFunction::Kernel { a, p } if *p == 1.0 => {
                f.write_str("kernel(")?;
                fmt_complex(f, *a)?;
                f.write_str(")")
            }
            DiscFunction::Kernel { a, p } => {
                f.write_str("kernel_power(")?;
                fmt_complex(f, *a)?;
                write!(f, ", {p})")
            }
            DiscFunction::Cauchy(w) => {
                f.write_str("cauchy(")?;
                fmt_complex(f, *w)?;
                f.write_str(")")
            }
            DiscFunction::Monomial(1) => f.write_str("z"),
            DiscFunction::Monomial(n) => write!(f, "pow(z, {n})"),
            DiscFunction::Scaled(c, g) => {
                f.write_str("mul(")?;
                fmt_complex(f, *c)?;
                write!(f, ", {g})")
            }
            DiscFunction::Sum(a, b) => write!(f, "add({a}, {b})"),
            DiscFunction::Product(a, b) => write!(f, "prod({a}, {b})"),
            DiscFunction::Compose(a, b) => write!(f, "compose({a}, {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn polynomial_constant_term_at_origin() {
        let f = DiscFunction::real_polynomial(&[1.0, 2.0, 3.0]);
        assert_eq!(f.evaluate(c(0.0)).unwrap(), c(1.0));
    }

    #[test]
    fn kernel_values() {
        let k0 = DiscFunction::Kernel { a: c(0.0), p: 1.0 };
        assert_abs_diff_eq!(k0.evaluate(c(0.7)).unwrap().re, 1.0, epsilon = 1e-15);
        let k = DiscFunction::Kernel { a: c(0.5), p: 1.0 };
        assert_abs_diff_eq!(k.evaluate(c(0.5)).unwrap().re, 4.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn fractional_kernel_uses_principal_branch() {
        let a = Complex64::new(0.3, 0.4);
        let z = Complex64::new(-0.2, 0.9);
        let half = DiscFunction::Kernel { a, p: 3.0 }.evaluate(z).unwrap();
        let full = DiscFunction::Kernel { a, p: 1.0 }.evaluate(z).unwrap();
        assert_abs_diff_eq!((half.powu(3) - full).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn outside_domain_is_rejected() {
        let f = DiscFunction::identity();
        assert!(matches!(f.evaluate(c(1.5)), Err(Error::OutsideDomain(_))));
        assert!(f.evaluate(c(1.0)).is_ok());
    }

    #[test]
    fn singular_point_is_reported() {
        let f = DiscFunction::rational_with_singular(
            vec![c(1.0)],
            vec![c(1.0), c(-1.0)],
            vec![c(1.0)],
        )
        .unwrap();
        assert!(matches!(f.evaluate(c(1.0)), Err(Error::SingularPoint(_))));
        assert_abs_diff_eq!(f.evaluate(c(0.5)).unwrap().re, 2.0, epsilon = 1e-14);
        assert_eq!(f.singular_boundary_points(), vec![c(1.0)]);
    }

    #[test]
    fn rational_rejects_poles_in_disk() {
        let bad = DiscFunction::rational(vec![c(1.0)], vec![c(-0.5), c(1.0)]);
        assert!(bad.is_err());
        let unlisted = DiscFunction::rational(vec![c(1.0)], vec![c(1.0), c(-1.0)]);
        assert!(unlisted.is_err());
        let good = DiscFunction::rational(vec![c(1.0)], vec![c(1.0), c(-0.5)]);
        assert!(good.is_ok());
    }

    #[test]
    fn blaschke_is_unimodular_on_circle() {
        let b = DiscFunction::blaschke(vec![c(0.5), Complex64::new(0.1, -0.3), c(0.0)]).unwrap();
        for k in 0..17 {
            let z = Complex64::from_polar(1.0, k as f64 * 0.37);
            assert_abs_diff_eq!(b.evaluate(z).unwrap().norm(), 1.0, epsilon = 1e-13);
        }
        assert_eq!(b.evaluate(c(0.5)).unwrap(), c(0.0));
    }

    #[test]
    fn composition_and_powers() {
        let phi = DiscFunction::identity().scale(0.5);
        let f = DiscFunction::real_polynomial(&[1.0, 1.0]).compose(phi.clone());
        assert_abs_diff_eq!(f.evaluate(c(1.0)).unwrap().re, 1.5, epsilon = 1e-15);
        let sq = phi.pow(2);
        assert_abs_diff_eq!(sq.evaluate(c(1.0)).unwrap().re, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn roots_of_quadratic() {
        let mut r = polynomial_roots(&[c(2.0), c(-3.0), c(1.0)]).unwrap();
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_abs_diff_eq!(r[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[1].re, 2.0, epsilon = 1e-12);
    }
}
