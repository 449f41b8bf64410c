//! Fejér and Dirichlet operators on Taylor coefficients and the pointwise
//! remainder bound.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::funcspace::{taylor_coefficients, DiscFunction, Exponent};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector(pub Vec<Complex64>);

impl CoefficientVector {
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        CoefficientVector(coefficients)
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        CoefficientVector(coefficients.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Taylor coefficients `0..=k` of `f`, read at radius `rho`.
    pub fn of_function(f: &DiscFunction, k: usize, rho: f64) -> Result<Self> {
        Ok(CoefficientVector(taylor_coefficients(f, k, rho)?.coefficients))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn to_function(&self) -> DiscFunction {
        DiscFunction::polynomial(self.0.iter().copied())
    }

    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    fn map_indexed(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        CoefficientVector(self.0.iter().enumerate().map(|(n, &c)| f(n, c)).collect())
    }
}

fn require_order(n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid("Fejér order N must be at least 1"))
    } else {
        Ok(())
    }
}

/// `K_N`: multiplies coefficient `n` by `1 - n/N` for `n < N` and zeroes the rest.
pub fn fejer_apply(c: &CoefficientVector, n_order: usize) -> Result<CoefficientVector> {
    require_order(n_order)?;
    let big_n = n_order as f64;
    Ok(c.map_indexed(|n, x| {
        if n < n_order {
            x * (1.0 - n as f64 / big_n)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// `R_N = I - K_N`.
pub fn fejer_remainder(c: &CoefficientVector, n_order: usize) -> Result<CoefficientVector> {
    require_order(n_order)?;
    let big_n = n_order as f64;
    Ok(c.map_indexed(|n, x| if n < n_order { x * (n as f64 / big_n) } else { x }))
}

/// Partial sum of degree `n_order`.
///
/// Unlike `K_N`, these are not uniformly bounded on `H^1`; they only serve
/// comparisons for `1 < p < ∞`.
pub fn dirichlet_apply(c: &CoefficientVector, n_order: usize) -> CoefficientVector {
    CoefficientVector(c.0.iter().take(n_order + 1).copied().collect())
}

/// `Σ_{n=1}^{N-1} n r^n` in closed form.
fn weighted_geometric(r: f64, n_order: usize) -> f64 {
    if n_order <= 1 {
        return 0.0;
    }
    let big_n = n_order as f64;
    let rn1 = r.powi(n_order as i32 - 1);
    r * (1.0 - big_n * rn1 + (big_n - 1.0) * rn1 * r) / ((1.0 - r) * (1.0 - r))
}

/// `sup_{|w| ≤ r} |R_N K_w|_∞` bound: `(1/N) Σ_{n<N} n rⁿ + r^N/(1-r)`.
pub fn remainder_sup_bound(r: f64, n_order: usize) -> Result<f64> {
    check_radius(r)?;
    require_order(n_order)?;
    Ok(weighted_geometric(r, n_order) / n_order as f64 + r.powi(n_order as i32) / (1.0 - r))
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("radius {r} is not in (0, 1)")))
    }
}

/// Smallest `N` with `r^N ≤ ε^{1/q}(1-r)/2` and `(1/N) Σ_{n<N} n rⁿ ≤ ε^{1/q}/2`.
pub fn choose_n(r: f64, eps: f64, q: Exponent) -> Result<usize> {
    check_radius(r)?;
    if !(eps > 0.0) {
        return Err(invalid("epsilon must be positive"));
    }
    let target = eps.powf(1.0 / q.require_finite("q")?);
    let first = |n: usize| r.powi(n as i32) <= target * (1.0 - r) / 2.0;
    let second = |n: usize| weighted_geometric(r, n) / n as f64 <= target / 2.0;

    let mut n1 = ((target * (1.0 - r) / 2.0).ln() / r.ln()).floor().max(1.0) as usize;
    while n1 > 1 && first(n1 - 1) {
        n1 -= 1;
    }
    while !first(n1) {
        n1 += 1;
    }
    if second(n1) {
        return Ok(n1);
    }
    // `S(N)/N` rises then falls, so past a failing `N` the second condition
    // is monotone. `S(N) < r/(1-r)²` gives an upper end for the search.
    let mut lo = n1;
    let mut hi = ((2.0 * r / ((1.0 - r) * (1.0 - r)) / target).ceil() as usize).max(n1 + 1);
    while !second(hi) {
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if second(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{grid_point, hardy_norm_on_grid};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cv(x: &[f64]) -> CoefficientVector {
        CoefficientVector::from_real(x)
    }

    #[test]
    fn fejer_examples() {
        assert_eq!(fejer_apply(&cv(&[1.0, 1.0, 1.0]), 2).unwrap(), cv(&[1.0, 0.5, 0.0]));
        assert_eq!(fejer_remainder(&cv(&[1.0, 1.0, 1.0]), 2).unwrap(), cv(&[0.0, 0.5, 1.0]));
        assert_eq!(fejer_apply(&cv(&[1.0, 1.0]), 4).unwrap(), cv(&[1.0, 0.75]));
        assert_eq!(fejer_apply(&cv(&[0.0; 5]), 3).unwrap(), cv(&[0.0; 5]));
        let mut mono = vec![0.0; 9];
        mono[8] = 1.0;
        assert_eq!(fejer_remainder(&cv(&mono), 4).unwrap(), cv(&mono));
        assert!(fejer_apply(&cv(&[1.0]), 0).is_err());
    }

    #[test]
    fn dirichlet_examples() {
        assert_eq!(dirichlet_apply(&cv(&[1.0, 2.0, 3.0]), 1), cv(&[1.0, 2.0]));
        assert_eq!(dirichlet_apply(&cv(&[1.0, 2.0, 3.0]), 0), cv(&[1.0]));
        assert_eq!(dirichlet_apply(&cv(&[1.0, 2.0, 3.0]), 7), cv(&[1.0, 2.0, 3.0]));
    }

    #[test]
    fn remainder_bound_examples() {
        assert_abs_diff_eq!(remainder_sup_bound(0.5, 1).unwrap(), 1.0, epsilon = 1e-15);
        for (r, n) in [(0.3f64, 5usize), (0.8, 17), (0.95, 100)] {
            let direct: f64 = (1..n).map(|k| k as f64 * r.powi(k as i32)).sum::<f64>() / n as f64
                + r.powi(n as i32) / (1.0 - r);
            assert_abs_diff_eq!(remainder_sup_bound(r, n).unwrap(), direct, epsilon = 1e-12);
        }
        assert!(remainder_sup_bound(0.9, 10_000_000).unwrap() < 1e-4);
    }

    #[test]
    fn remainder_bound_dominates_kernel_remainder() {
        // R_N K_w has coefficients (n/N) w̄ⁿ below N and w̄ⁿ above.
        for (r, n_order) in [(0.3, 4), (0.7, 16), (0.9, 64)] {
            let w = Complex64::from_polar(r, 0.3);
            let coeffs: Vec<Complex64> = (0..4000).map(|n| w.conj().powu(n)).collect();
            let rem = fejer_remainder(&CoefficientVector(coeffs), n_order).unwrap();
            let sup = (0..512).map(|j| rem.evaluate(grid_point(j, 512, 1.0)).norm()).fold(0.0, f64::max);
            assert!(sup <= remainder_sup_bound(r, n_order).unwrap() + 1e-10);
        }
    }

    #[test]
    fn choose_n_examples() {
        assert_eq!(choose_n(0.5, 0.1, Exponent::Finite(1.0)).unwrap(), 40);
        assert_eq!(choose_n(0.5, 16.0, Exponent::Finite(1.0)).unwrap(), 1);
    }

    fn brute_choose(r: f64, eps: f64, q: f64) -> usize {
        let t = eps.powf(1.0 / q);
        (1..).find(|&n| {
            let s: f64 = (1..n).map(|k| k as f64 * r.powi(k as i32)).sum();
            r.powi(n as i32) <= t * (1.0 - r) / 2.0 && s / n as f64 <= t / 2.0
        })
        .unwrap()
    }

    #[test]
    fn choose_n_matches_scan() {
        for r in [0.1, 0.3, 0.5, 0.8] {
            for eps in [0.5, 0.13, 0.011] {
                for q in [1.0, 2.0] {
                    assert_eq!(choose_n(r, eps, Exponent::Finite(q)).unwrap(), brute_choose(r, eps, q), "{r} {eps} {q}");
                }
            }
        }
    }

    fn poly() -> impl Strategy<Value = CoefficientVector> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=65)
            .prop_map(|v| CoefficientVector(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn fejer_parts_sum_to_identity(c in poly(), n in 1usize..100) {
            let a = fejer_apply(&c, n).unwrap();
            let b = fejer_remainder(&c, n).unwrap();
            for k in 0..c.len() {
                prop_assert!((a.0[k] + b.0[k] - c.0[k]).norm() <= 1e-15 * c.0[k].norm());
            }
        }

        #[test]
        fn fejer_remainder_vanishes(c in poly(), n in 65usize..4000) {
            let d = (c.len() - 1) as f64;
            let max = c.0.iter().map(|x| x.norm()).fold(0.0, f64::max);
            let rem = fejer_remainder(&c, n).unwrap().to_function();
            let norm = hardy_norm_on_grid(&rem, Exponent::Finite(1.0), 1024, 1.0).unwrap();
            prop_assert!(norm <= d * max * d / n as f64 + 1e-12);
        }

        #[test]
        fn choose_n_monotone_in_r(r in 0.05f64..0.95, dr in 0.0f64..0.5, eps in 0.001f64..1.0, q in 1.0f64..3.0) {
            let r2 = (r - dr).max(0.01);
            let q = Exponent::Finite(q);
            prop_assert!(choose_n(r2, eps, q).unwrap() <= choose_n(r, eps, q).unwrap());
        }
    }
}
