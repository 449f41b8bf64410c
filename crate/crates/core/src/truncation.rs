//! Matrix of `uC_φ` on the monomials `z⁰ … z^K`, its `H²` norm, the
//! Fejér-remainder sandwich for the essential norm, and the closed form of
//! the Taylor coefficients of `k_a ∘ φ`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::funcspace::{boundary_trace, coefficients_from_grid, BoundaryGrid, DiscFunction, SelfMap, ALIASING_TOL};

pub const DEFAULT_DEGREE: usize = 256;
pub const DEFAULT_N_SCHEDULE: [usize; 5] = [8, 16, 32, 64, 128];
/// Fixed bound for `sup_N ‖R_N‖` on `H²`.
pub const GAMMA: f64 = 2.0;
pub const POWER_TOL: f64 = 1e-10;
/// Gram-matrix squarings before giving up.
pub const POWER_MAX_STAGES: usize = 40;
const STEPS_PER_STAGE: usize = 4;
/// A column counts as resolved when the coefficient mass it loses beyond
/// row `K` is at most this fraction of its `H²` norm.
pub const RESOLVED_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationMatrix {
    pub degree: usize,
    /// Column `n` holds the Taylor coefficients `0..=K` of `u·φⁿ`.
    pub entries: DMatrix<Complex64>,
    /// `‖u·φⁿ‖₂` minus what the column captures, in the ℓ² sense:
    /// `(‖u·φⁿ‖₂² - Σ_{i≤K} |T_{in}|²)^{1/2}`.
    pub column_tail: Vec<f64>,
    /// Largest entry of `column_tail`.
    pub tail_bound: f64,
    /// Number of leading columns that lose at most `RESOLVED_TOL` of their norm.
    pub resolved_columns: usize,
    pub grid_size: usize,
}

/// Grid size used by `build_matrix` when none is given: room for `u·φⁿ` of
/// degree up to `4K` without aliasing.
pub fn default_grid(k: usize) -> usize {
    (8 * (k + 1)).next_power_of_two().max(1 << 12)
}

pub fn build_matrix(u: &DiscFunction, phi: &SelfMap, k: usize, m: usize, rho: f64) -> Result<TruncationMatrix> {
    if k == 0 || k >= m / 2 {
        return Err(invalid(format!("degree {k} needs 0 < K < M/2 = {}", m / 2)));
    }
    let ut = boundary_trace(u, m, rho)?;
    let pt = boundary_trace(phi.map(), m, rho)?;
    if !ut.singular.is_empty() || !pt.singular.is_empty() {
        return Err(invalid("truncation grid meets a singular boundary point"));
    }
    // samples[n][j] = u(ζ_j) φ(ζ_j)ⁿ
    let mut samples = vec![vec![Complex64::new(0.0, 0.0); m]; k + 1];
    for j in 0..m {
        let mut v = ut.values[j];
        for column in samples.iter_mut() {
            column[j] = v;
            v *= pt.values[j];
        }
    }
    let columns: Vec<(Vec<Complex64>, f64)> = samples
        .into_par_iter()
        .map(|values| {
            let full = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64;
            let grid = BoundaryGrid {
                radius: rho,
                values,
                singular: Vec::new(),
            };
            coefficients_from_grid(&grid, k, ALIASING_TOL).map(|t| (t.coefficients, full))
        })
        .collect::<Result<_>>()?;
    let entries = DMatrix::from_fn(k + 1, k + 1, |i, n| columns[n].0[i]);
    let column_tail: Vec<f64> = columns
        .iter()
        .map(|(c, full)| (full - c.iter().map(|x| x.norm_sqr()).sum::<f64>()).max(0.0).sqrt())
        .collect();
    let resolved_columns = columns
        .iter()
        .zip(&column_tail)
        .take_while(|((_, full), tail)| **tail <= RESOLVED_TOL * full.sqrt())
        .count();
    Ok(TruncationMatrix {
        degree: k,
        entries,
        tail_bound: column_tail.iter().copied().fold(0.0, f64::max),
        column_tail,
        resolved_columns,
        grid_size: m,
    })
}

impl TruncationMatrix {
    /// Applies the matrix to the coefficient vector of a polynomial of degree ≤ K.
    pub fn apply(&self, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
        if coefficients.len() > self.degree + 1 {
            return Err(invalid("polynomial degree exceeds the truncation degree"));
        }
        let mut x = DVector::zeros(self.degree + 1);
        for (i, c) in coefficients.iter().enumerate() {
            x[i] = *c;
        }
        Ok((&self.entries * x).iter().copied().collect())
    }

    /// Long-format CSV rows `row,column,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "column", "re", "im"])?;
        for n in 0..self.entries.ncols() {
            for i in 0..self.entries.nrows() {
                let v = self.entries[(i, n)];
                w.write_record(&[i.to_string(), n.to_string(), v.re.to_string(), v.im.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest singular value by power iteration on `AᴴA`.
///
/// Clustered top singular values (bidiagonal multipliers, `T·D_N`) make the
/// plain iteration crawl, so stage `s` iterates with `(AᴴA)^(2^s)`. Low
/// powers go through matrix-vector products; once `2^s` passes `n/64` the
/// power is formed explicitly and squared from then on. The
/// estimate is accepted once three consecutive stages agree to `POWER_TOL`.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> Result<f64> {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok(0.0);
    }
    // Deterministic start with weight on every coordinate.
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 / (i as f64 + 1.0).sqrt(), 0.0));
    v /= Complex64::new(v.norm(), 0.0);
    let mut gram: Option<DMatrix<Complex64>> = None;
    let mut reps = 1usize;
    let mut history: Vec<f64> = Vec::new();
    for _ in 0..POWER_MAX_STAGES {
        if gram.is_none() && 64 * reps > n {
            let mut g = complex_mul(&a.adjoint(), a);
            if !rescale(&mut g) {
                return Ok(0.0);
            }
            for _ in 0..reps.trailing_zeros() {
                g = complex_mul(&g, &g);
                if !rescale(&mut g) {
                    return Ok(0.0);
                }
            }
            gram = Some(g);
        }
        for _ in 0..STEPS_PER_STAGE {
            let mut w = v.clone();
            match &gram {
                Some(g) => w = g * &w,
                None => {
                    for _ in 0..reps {
                        w = a.ad_mul(&(a * &w));
                        let wn = w.norm();
                        if wn == 0.0 {
                            return Ok(0.0);
                        }
                        w /= Complex64::new(wn, 0.0);
                    }
                }
            }
            let wn = w.norm();
            if wn == 0.0 {
                break;
            }
            v = w / Complex64::new(wn, 0.0);
        }
        let sigma = (a * &v).norm();
        history.push(sigma);
        if let [.., x, y, z] = history[..] {
            if (z - y).abs() <= POWER_TOL * z && (y - x).abs() <= POWER_TOL * z {
                return Ok(z);
            }
        }
        if let Some(g) = &mut gram {
            *g = complex_mul(g, g);
            if !rescale(g) {
                return Ok(sigma);
            }
        }
        reps *= 2;
    }
    Err(Error::NoConvergence(POWER_MAX_STAGES))
}

/// `AB` through four real products, which take the fast real kernel.
fn complex_mul(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ai) = (a.map(|x| x.re), a.map(|x| x.im));
    let (br, bi) = (b.map(|x| x.re), b.map(|x| x.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Divides by the largest entry modulus; false for the zero matrix.
fn rescale(g: &mut DMatrix<Complex64>) -> bool {
    let scale = g.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return false;
    }
    *g /= Complex64::new(scale, 0.0);
    true
}

/// `‖T‖` on the truncated space; a lower bound for `‖uC_φ‖_{H²→H²}`.
pub fn operator_norm_h2(t: &TruncationMatrix) -> Result<f64> {
    spectral_norm(&t.entries)
}

/// Diagonal of the matrix of `R_N`: `n/N` below `N`, 1 from `N` on.
fn remainder_diagonal(k: usize, n_order: usize) -> Vec<f64> {
    (0..=k)
        .map(|n| if n < n_order { n as f64 / n_order as f64 } else { 1.0 })
        .collect()
}

fn check_order(t: &TruncationMatrix, n_order: usize) -> Result<()> {
    if n_order == 0 || n_order > t.degree {
        return Err(invalid(format!("order N = {n_order} must be in 1..={}", t.degree)));
    }
    Ok(())
}

/// `‖T·D_N‖`, the truncation of `‖uC_φ R_N‖`.
pub fn essnorm_h2_upper(t: &TruncationMatrix, n_order: usize) -> Result<f64> {
    check_order(t, n_order)?;
    let d = remainder_diagonal(t.degree, n_order);
    let mut a = t.entries.clone();
    for (n, mut col) in a.column_iter_mut().enumerate() {
        col *= Complex64::new(d[n], 0.0);
    }
    spectral_norm(&a)
}

/// `‖D_N·T‖ / γ`, the truncation of `‖R_N uC_φ‖ / γ`.
pub fn essnorm_h2_lower(t: &TruncationMatrix, n_order: usize) -> Result<f64> {
    check_order(t, n_order)?;
    let d = remainder_diagonal(t.degree, n_order);
    let mut a = t.entries.clone();
    for (i, mut row) in a.row_iter_mut().enumerate() {
        row *= Complex64::new(d[i], 0.0);
    }
    Ok(spectral_norm(&a)? / GAMMA)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationBracket {
    pub degree: usize,
    pub schedule: Vec<usize>,
    pub upper_by_n: Vec<f64>,
    pub lower_by_n: Vec<f64>,
    /// Running minimum of the upper values at resolved orders: every
    /// `‖uC_φ R_N‖` bounds the essential norm from above.
    #[serde(serialize_with = "crate::estimators::extended")]
    pub upper: f64,
    /// Orders `N` left out of the minimum because every column from `N` on
    /// is unresolved, so `‖T·D_N‖` misses most of `uC_φ R_N`.
    pub skipped_orders: Vec<usize>,
    pub resolved_columns: usize,
    /// Largest lower value over the last two orders of the schedule.
    pub lower: f64,
    pub operator_norm: f64,
    pub tail_bound: f64,
    pub gamma: f64,
}

/// Upper and lower sandwich values along an `N` schedule.
pub fn truncation_bracket(t: &TruncationMatrix, schedule: &[usize]) -> Result<TruncationBracket> {
    if schedule.is_empty() {
        return Err(invalid("empty N schedule"));
    }
    let upper_by_n = schedule
        .iter()
        .map(|&n| essnorm_h2_upper(t, n))
        .collect::<Result<Vec<_>>>()?;
    let lower_by_n = schedule
        .iter()
        .map(|&n| essnorm_h2_lower(t, n))
        .collect::<Result<Vec<_>>>()?;
    let resolved = |n: usize| n < t.resolved_columns;
    let upper = schedule
        .iter()
        .zip(&upper_by_n)
        .filter(|(n, _)| resolved(**n))
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let skipped_orders = schedule.iter().copied().filter(|&n| !resolved(n)).collect();
    let tail = &lower_by_n[lower_by_n.len().saturating_sub(2)..];
    let lower = tail.iter().copied().fold(0.0, f64::max);
    Ok(TruncationBracket {
        degree: t.degree,
        schedule: schedule.to_vec(),
        upper_by_n,
        lower_by_n,
        upper,
        skipped_orders,
        resolved_columns: t.resolved_columns,
        lower,
        operator_norm: operator_norm_h2(t)?,
        tail_bound: t.tail_bound,
        gamma: GAMMA,
    })
}

/// `α_p(a) = Σ_{j=0}^p ⟨ψ^j, z^p⟩ (j+1) ā^j / (1 - ā a₀)^{j+2}` with
/// `a₀ = φ(0)` and `ψ = φ - a₀`: the `p`-th Taylor coefficient of
/// `k_a ∘ φ / (1 - |a|²)`.
pub fn kernel_coefficient_alpha(phi: &SelfMap, a: Complex64, p_index: usize) -> Result<Complex64> {
    if a.norm() >= 1.0 {
        return Err(Error::OutsideDomain(a));
    }
    let m = (8 * (p_index + 1)).next_power_of_two().max(1 << 12);
    let a0 = phi.at_origin();
    let trace = boundary_trace(phi.map(), m, 1.0)?;
    let psi: Vec<Complex64> = trace.values.iter().map(|v| v - a0).collect();
    let ab = a.conj();
    let base = 1.0 - ab * a0;
    let mut power = vec![Complex64::new(1.0, 0.0); m];
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..=p_index {
        let grid = BoundaryGrid {
            radius: 1.0,
            values: power.clone(),
            singular: Vec::new(),
        };
        let c = coefficients_from_grid(&grid, p_index, ALIASING_TOL)?.coefficients[p_index];
        total += c * (j as f64 + 1.0) * ab.powu(j as u32) / base.powu(j as u32 + 2);
        for (x, s) in power.iter_mut().zip(&psi) {
            *x *= s;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::{hardy_norm_on_grid, taylor_coefficients, Exponent};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one() -> DiscFunction {
        DiscFunction::constant(1.0)
    }

    fn map(f: DiscFunction) -> SelfMap {
        SelfMap::new(f).unwrap()
    }

    fn build(u: &DiscFunction, phi: &SelfMap, k: usize) -> TruncationMatrix {
        build_matrix(u, phi, k, default_grid(k), 1.0).unwrap()
    }

    fn svd_norm(a: &DMatrix<Complex64>) -> f64 {
        a.clone().svd(false, false).singular_values.max()
    }

    #[test]
    fn split_product_matches_complex_product() {
        let a = DMatrix::from_fn(7, 5, |i, j| Complex64::new(i as f64 - 2.5 * j as f64, (i * j) as f64 * 0.3 - 1.0));
        let b = DMatrix::from_fn(5, 6, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, 1.0 - j as f64));
        assert!((complex_mul(&a, &b) - &a * &b).norm() < 1e-12);
    }

    #[test]
    fn matrix_examples() {
        let t = build(&one(), &map(DiscFunction::identity()), 32);
        assert!((t.entries.clone() - DMatrix::identity(33, 33)).norm() < 1e-13);

        let t = build(&one(), &map(DiscFunction::monomial(2)), 32);
        for i in 0..=32 {
            for n in 0..=32 {
                let e = if i == 2 * n { 1.0 } else { 0.0 };
                assert_abs_diff_eq!((t.entries[(i, n)] - c(e)).norm(), 0.0, epsilon = 1e-13);
            }
        }

        let t = build(&DiscFunction::real_polynomial(&[1.0, 1.0]), &map(DiscFunction::identity()), 32);
        for i in 0..=32 {
            for n in 0..=32 {
                let e = if i == n || i == n + 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!((t.entries[(i, n)] - c(e)).norm(), 0.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn columns_match_taylor_coefficients() {
        let u = DiscFunction::Kernel { a: c(0.3), p: 2.0 };
        let phi = map(DiscFunction::blaschke(vec![c(0.2), Complex64::new(-0.1, 0.4)]).unwrap().scale(0.9));
        let t = build(&u, &phi, 24);
        for n in [0u32, 1, 5, 24] {
            let col = u.clone().mul(phi.map().clone().pow(n));
            let direct = taylor_coefficients(&col, 24, 1.0).unwrap().coefficients;
            for i in 0..=24 {
                assert!((t.entries[(i, n as usize)] - direct[i]).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn norm_examples() {
        assert_abs_diff_eq!(spectral_norm(&DMatrix::identity(10, 10)).unwrap(), 1.0, epsilon = 1e-12);
        let t = build(&one(), &map(DiscFunction::monomial(2)), 64);
        assert_abs_diff_eq!(operator_norm_h2(&t).unwrap(), 1.0, epsilon = 1e-10);
        let mut d = DMatrix::identity(6, 6);
        d[(0, 0)] = c(2.0);
        assert_abs_diff_eq!(spectral_norm(&d).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn power_iteration_agrees_with_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.random_range(2..40);
            let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            assert_abs_diff_eq!(spectral_norm(&a).unwrap(), svd_norm(&a), epsilon = 1e-8);
        }
        let lens = map(DiscFunction::real_polynomial(&[0.5, 0.5]));
        let t = build(&DiscFunction::real_polynomial(&[1.0, 0.5]), &lens, 64);
        assert_abs_diff_eq!(operator_norm_h2(&t).unwrap(), svd_norm(&t.entries), epsilon = 1e-8);
    }

    #[test]
    fn sandwich_examples() {
        let t = build(&one(), &map(DiscFunction::identity()), 256);
        for n in DEFAULT_N_SCHEDULE {
            assert_abs_diff_eq!(essnorm_h2_upper(&t, n).unwrap(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(essnorm_h2_lower(&t, n).unwrap(), 0.5, epsilon = 1e-12);
        }
        let t = build(&one(), &map(DiscFunction::monomial(2)), 256);
        for n in DEFAULT_N_SCHEDULE {
            assert_abs_diff_eq!(essnorm_h2_upper(&t, n).unwrap(), 1.0, epsilon = 1e-9);
        }
        let t = build(&one(), &map(DiscFunction::identity().scale(0.5)), 256);
        let b = truncation_bracket(&t, &DEFAULT_N_SCHEDULE).unwrap();
        // T D_N is diagonal with entries (n/N) 2^{-n} below N: the max is 1/(2N).
        for (n, v) in DEFAULT_N_SCHEDULE.iter().zip(&b.upper_by_n) {
            assert_abs_diff_eq!(*v, 0.5 / *n as f64, epsilon = 1e-12);
        }
        assert!(b.upper_by_n.windows(2).all(|w| w[1] < w[0]));
        assert!(b.lower <= b.upper + 1e-9);
    }

    #[test]
    fn sandwich_on_non_compact_family() {
        let family = [
            (one(), map(DiscFunction::identity())),
            (one(), map(DiscFunction::monomial(2))),
            (DiscFunction::real_polynomial(&[1.0, 1.0]), map(DiscFunction::identity())),
            (one(), map(DiscFunction::blaschke(vec![c(0.0), c(0.5)]).unwrap())),
        ];
        for (u, phi) in family {
            let t = build(&u, &phi, 128);
            let b = truncation_bracket(&t, &[8, 16, 32, 64]).unwrap();
            let lo = b.lower_by_n.iter().copied().fold(0.0, f64::max);
            let hi = b.upper_by_n.iter().copied().fold(f64::INFINITY, f64::min);
            assert!(lo <= hi + 1e-6, "{b:?}");
        }
    }

    #[test]
    fn unresolved_orders_are_skipped() {
        let t = build(&one(), &map(DiscFunction::identity()), 256);
        assert_eq!(t.resolved_columns, 257);
        assert!(t.tail_bound < 1e-7);

        // Columns z^{2n}(1+z) leave the matrix from n = 128 on.
        let u = DiscFunction::real_polynomial(&[1.0, 1.0]);
        let t = build(&u, &map(DiscFunction::monomial(2)), 256);
        assert_eq!(t.resolved_columns, 128);
        assert_abs_diff_eq!(t.column_tail[128], 1.0, epsilon = 1e-9);
        assert!(t.column_tail[127] < 1e-7);
        let b = truncation_bracket(&t, &DEFAULT_N_SCHEDULE).unwrap();
        assert_eq!(b.skipped_orders, vec![128]);
        assert_abs_diff_eq!(b.upper, 2f64.sqrt(), epsilon = 1e-9);

        // Powers of a Blaschke product spread over frequencies up to 3n.
        let phi = map(DiscFunction::blaschke(vec![c(0.0), c(0.5)]).unwrap());
        let t = build(&one(), &phi, 256);
        assert!(t.resolved_columns > 32 && t.resolved_columns < 64, "{}", t.resolved_columns);
        let b = truncation_bracket(&t, &DEFAULT_N_SCHEDULE).unwrap();
        assert_eq!(b.skipped_orders, vec![64, 128]);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn norm_is_monotone_in_degree() {
        let lens = map(DiscFunction::real_polynomial(&[0.5, 0.5]));
        let u = DiscFunction::real_polynomial(&[1.0, -0.3, 0.2]);
        let t = build(&u, &lens, 128);
        let mut last = 0.0;
        for k in [8, 16, 32, 64, 128] {
            let sub = t.entries.view((0, 0), (k + 1, k + 1)).into_owned();
            let v = spectral_norm(&sub).unwrap();
            assert!(v >= last - 1e-10);
            last = v;
        }
    }

    #[test]
    fn matrix_application_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi = map(DiscFunction::blaschke(vec![c(0.0), c(0.3)]).unwrap());
        let u = DiscFunction::real_polynomial(&[1.0, 0.5]);
        let t = build(&u, &phi, 256);
        let norm = operator_norm_h2(&t).unwrap();
        for _ in 0..5 {
            let deg = rng.random_range(1..=64);
            let f: Vec<Complex64> = (0..=deg)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let image = t.apply(&f).unwrap();
            let matrix_value = image.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            let g = u.clone().mul(DiscFunction::polynomial(f.clone()).compose(phi.map().clone()));
            let direct = hardy_norm_on_grid(&g, Exponent::Finite(2.0), 1 << 14, 1.0).unwrap();
            assert!((matrix_value - direct).abs() <= 1e-6 * direct.max(1.0), "{matrix_value} {direct}");
            let fnorm = f.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            assert!(matrix_value <= norm * fnorm * (1.0 + 1e-9));
        }
    }

    #[test]
    fn alpha_examples() {
        let sq = map(DiscFunction::monomial(2));
        let a = Complex64::new(0.3, -0.4);
        for p in 0..12 {
            let v = kernel_coefficient_alpha(&sq, a, p).unwrap();
            let e = if p % 2 == 0 {
                (p / 2 + 1) as f64 * a.conj().powu(p as u32 / 2)
            } else {
                c(0.0)
            };
            assert!((v - e).norm() < 1e-12, "{p}: {v} vs {e}");
        }
        let lens = map(DiscFunction::real_polynomial(&[0.5, 0.5]));
        let v = kernel_coefficient_alpha(&lens, a, 0).unwrap();
        let e = 1.0 / (1.0 - a.conj() * 0.5).powu(2);
        assert!((v - e).norm() < 1e-13);
    }

    #[test]
    fn matrix_csv_is_long_format() {
        let t = build(&one(), &map(DiscFunction::identity()), 2);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("row,column,re,im\n"));
        assert_eq!(text.lines().count(), 10);
    }
}
