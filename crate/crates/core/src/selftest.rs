//! The acceptance suite, shared by the `selftest` subcommand and the
//! `acceptance` test target.
//!
//! Every check compares the library against a closed form or an
//! independently computed value. Tolerances and runtime limits are fixed
//! here, next to the checks that use them.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::estimators::{
    analyze, boundedness_pq, extremal_integral, kernel_integral, kernel_sweep, power_norm_sequence, AnalysisConfig,
    EpsSchedule, RingSchedule,
};
use crate::funcspace::{
    hardy_norm_on_grid, taylor_coefficients, DiscFunction, Exponent, QuadratureConfig, SelfMap,
};
use crate::measures::{balayage_g, classify_carleson, ls_norm_g, pullback, restrict_annulus, CarlesonConfig};
use crate::scenario::{parse_scenarios, Scenario};
use crate::smoothing::{fejer_apply, fejer_remainder, remainder_sup_bound, CoefficientVector};
use crate::truncation::{build_matrix, default_grid, essnorm_h2_upper, kernel_coefficient_alpha};
use crate::verdict::Verdict;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    /// One line per sub-check.
    pub details: Vec<String>,
    pub seconds: f64,
}

/// Accumulates sub-checks of one criterion.
struct Checks {
    passed: bool,
    details: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        self.passed &= ok;
        self.details.push(format!("{} {detail}", if ok { "ok:" } else { "FAILED:" }));
    }

    /// `|value - expected| <= tol`.
    fn close(&mut self, what: &str, value: f64, expected: f64, tol: f64) {
        let err = (value - expected).abs();
        self.check(err <= tol, format!("{what} = {value:.12} vs {expected:.12} (err {err:.2e}, tol {tol:.0e})"));
    }

    fn runtime(&mut self, seconds: f64, limit: f64) {
        self.check(seconds < limit, format!("runtime {seconds:.2} s (limit {limit} s)"));
    }
}

type Criterion = (usize, &'static str, fn(&mut Checks, &Instant) -> Result<()>);

const CRITERIA: [Criterion; 11] = [
    (1, "identity bracket", identity_bracket),
    (2, "Poisson normalization", poisson_normalization),
    (3, "closed-form kernel integral", closed_form_integral),
    (4, "compact decay", compact_decay),
    (5, "inner-map isometry", inner_map_isometry),
    (6, "Fejér remainder bound", fejer_bound),
    (7, "contraction suite", contraction_suite),
    (8, "extremal-set regime", extremal_regime),
    (9, "Carleson classifier", carleson_classifier),
    (10, "alpha cross-check", alpha_cross_check),
    (11, "bracket sanity across regimes", bracket_sanity),
];

pub fn criterion_ids() -> Vec<usize> {
    CRITERIA.iter().map(|c| c.0).collect()
}

/// Runs the selected criteria (all when `only` is `None`) one after another,
/// so that runtimes are not distorted by each other.
pub fn run_criteria(only: Option<&[usize]>) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|c| only.is_none_or(|ids| ids.contains(&c.0)))
        .map(|&(id, name, f)| {
            let start = Instant::now();
            let mut checks = Checks::new();
            if let Err(e) = f(&mut checks, &start) {
                checks.check(false, format!("error: {e}"));
            }
            CriterionResult {
                id,
                name,
                passed: checks.passed,
                details: checks.details,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn e(v: f64) -> Exponent {
    Exponent::Finite(v)
}

fn one() -> DiscFunction {
    DiscFunction::constant(1.0)
}

fn map(f: DiscFunction) -> Result<SelfMap> {
    SelfMap::new(f)
}

fn half() -> Result<SelfMap> {
    map(DiscFunction::identity().scale(0.5))
}

fn identity_bracket(c: &mut Checks, start: &Instant) -> Result<()> {
    let cfg = AnalysisConfig::default();
    c.check(
        cfg.quadrature.base_grid == 1 << 14 && cfg.truncation_degree == 256,
        "default configuration M = 2^14, K = 256",
    );
    let r = analyze(&one(), &map(DiscFunction::identity())?, e(2.0), e(2.0), &cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let Some(b) = &r.bracket else {
        c.check(false, "no bracket");
        return Ok(());
    };
    c.close("kernel upper", b.raw_upper, 1.0, 1e-6);
    c.close("kernel lower", b.raw_lower, 1.0, 1e-6);
    match &r.cross_check {
        Some(x) => {
            c.close("truncation upper", x.truncation.upper, 1.0, 1e-8);
            c.close("truncation lower", x.truncation.lower, 0.5, 1e-8);
        }
        None => c.check(false, "no truncation cross-check"),
    }
    c.runtime(seconds, 5.0);
    Ok(())
}

fn poisson_normalization(c: &mut Checks, start: &Instant) -> Result<()> {
    let cfg = QuadratureConfig::default().with_base(1 << 16);
    let id = map(DiscFunction::identity())?;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut worst: f64 = 0.0;
    for j in 0..50 {
        let a = Complex64::from_polar(0.99 * j as f64 / 49.0, golden * j as f64);
        let p = [1.0, 2.0, 3.0][j % 3];
        let v = kernel_integral(&one(), &id, e(p), e(p), a, &cfg)?.value;
        worst = worst.max((v - 1.0).abs());
    }
    c.check(worst <= 1e-8, format!("max |I(a) - 1| over 50 points = {worst:.2e} (tol 1e-8)"));
    c.runtime(start.elapsed().as_secs_f64(), 10.0);
    Ok(())
}

/// `∫ P_a² dm` summed as a Fourier series: `Σ_{n∈ℤ} |a|^{2|n|}`.
fn poisson_square_series(a: Complex64) -> f64 {
    let r2 = a.norm_sqr();
    let mut total = 1.0;
    let mut term = r2;
    while term > 1e-18 {
        total += 2.0 * term;
        term *= r2;
    }
    total
}

fn closed_form_integral(c: &mut Checks, _: &Instant) -> Result<()> {
    let cfg = QuadratureConfig::default();
    let id = map(DiscFunction::identity())?;
    for (k, r) in [0.0, 0.3, 0.6, 0.75, 0.9].into_iter().enumerate() {
        let a = Complex64::from_polar(r, 0.7 * k as f64);
        let v = kernel_integral(&one(), &id, e(2.0), e(4.0), a, &cfg)?.value;
        let closed = (1.0 + r * r) / (1.0 - r * r);
        c.close(&format!("series oracle at |a| = {r}"), poisson_square_series(a), closed, 1e-12);
        c.close(&format!("I(a) at |a| = {r}"), v, closed, 1e-7);
    }
    let b = boundedness_pq(&one(), &id, e(2.0), e(4.0), &RingSchedule::default(), &cfg)?;
    c.check(b.verdict == Verdict::Fails, format!("boundedness verdict {:?}", b.verdict));
    Ok(())
}

fn compact_decay(c: &mut Checks, _: &Instant) -> Result<()> {
    let cfg = QuadratureConfig::default();
    let phi = half()?;
    let sweep = kernel_sweep(&one(), &phi, e(2.0), e(2.0), &RingSchedule::default(), &cfg)?;
    let worst = sweep
        .rings
        .iter()
        .map(|ring| {
            let r2 = ring.radius * ring.radius;
            (ring.max - (1.0 - r2) / (1.0 - r2 / 4.0)).abs()
        })
        .fold(0.0, f64::max);
    c.check(
        worst <= 1e-8,
        format!("ring maxima vs (1-r²)/(1-r²/4): max err {worst:.2e} over {} rings (tol 1e-8)", sweep.rings.len()),
    );
    let k = 256;
    let t = build_matrix(&one(), &phi, k, default_grid(k), 1.0)?;
    let upper = essnorm_h2_upper(&t, 64)?;
    c.check(upper < 1e-3, format!("essnorm_h2_upper at N = 64 is {upper:.3e} (required < 1e-3)"));
    Ok(())
}

fn inner_map_isometry(c: &mut Checks, _: &Instant) -> Result<()> {
    let r = analyze(&one(), &map(DiscFunction::monomial(2))?, e(2.0), e(2.0), &AnalysisConfig::default())?;
    let Some(b) = &r.bracket else {
        c.check(false, "no bracket");
        return Ok(());
    };
    c.close("kernel upper", b.raw_upper, 1.0, 1e-6);
    c.close("kernel lower", b.raw_lower, 1.0, 1e-6);
    match &r.cross_check {
        Some(x) => c.close("truncation upper", x.truncation.upper, 1.0, 1e-8),
        None => c.check(false, "no truncation cross-check"),
    }
    Ok(())
}

/// Fixed grid for the random polynomial family: exact for trigonometric
/// polynomials of degree below half its size.
const FAMILY_GRID: usize = 1 << 12;
const FAMILY_SIZE: usize = 200;
const FAMILY_SEED: u64 = 0x5eed_f00d;

/// Random polynomials of degree at most 64 with `‖f‖₁ = 1` on the family grid.
fn random_family() -> Result<Vec<CoefficientVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(FAMILY_SEED);
    (0..FAMILY_SIZE)
        .map(|_| {
            let degree = rng.random_range(0..=64usize);
            let coefficients: Vec<Complex64> = (0..=degree)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let f = CoefficientVector::new(coefficients);
            let norm = hardy_norm_on_grid(&f.to_function(), e(1.0), FAMILY_GRID, 1.0)?;
            Ok(CoefficientVector::new(f.0.iter().map(|x| x / norm).collect()))
        })
        .collect()
}

fn fejer_bound(c: &mut Checks, start: &Instant) -> Result<()> {
    let family = random_family()?;
    const CIRCLE: usize = 1024;
    for r in [0.3, 0.5, 0.8] {
        for n in [8, 32, 128] {
            let bound = remainder_sup_bound(r, n)?;
            let mut worst: f64 = 0.0;
            for f in &family {
                let rem = fejer_remainder(f, n)?;
                // Maximum principle: the sup over |w| <= r is attained on |w| = r.
                for j in 0..CIRCLE {
                    let w = Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / CIRCLE as f64);
                    worst = worst.max(rem.evaluate(w).norm());
                }
            }
            c.check(
                worst <= bound + 1e-10,
                format!("r = {r}, N = {n}: max |R_N f| = {worst:.6e} <= bound {bound:.6e}"),
            );
        }
    }
    c.runtime(start.elapsed().as_secs_f64(), 30.0);
    Ok(())
}

fn contraction_suite(c: &mut Checks, _: &Instant) -> Result<()> {
    let family = random_family()?;
    let norm = |v: &CoefficientVector, p: f64| hardy_norm_on_grid(&v.to_function(), e(p), FAMILY_GRID, 1.0);
    for n in [8, 32, 128] {
        let mut fejer_margin = f64::INFINITY;
        let mut rem_margin = [f64::INFINITY; 2];
        for f in &family {
            let f1 = norm(f, 1.0)?;
            fejer_margin = fejer_margin.min(f1 + 1e-10 - norm(&fejer_apply(f, n)?, 1.0)?);
            let rem = fejer_remainder(f, n)?;
            for (i, p) in [1.0, 2.0].into_iter().enumerate() {
                rem_margin[i] = rem_margin[i].min(2.0 * norm(f, p)? + 1e-10 - norm(&rem, p)?);
            }
        }
        c.check(fejer_margin >= 0.0, format!("N = {n}: ‖K_N f‖₁ <= ‖f‖₁ (min slack {fejer_margin:.3e})"));
        for (i, p) in [1, 2].into_iter().enumerate() {
            c.check(
                rem_margin[i] >= 0.0,
                format!("N = {n}: ‖R_N f‖_{p} <= 2‖f‖_{p} (min slack {:.3e})", rem_margin[i]),
            );
        }
    }
    Ok(())
}

fn extremal_regime(c: &mut Checks, _: &Instant) -> Result<()> {
    let cfg = QuadratureConfig::default();
    let eps = EpsSchedule::default();
    let lens = map(DiscFunction::real_polynomial(&[0.5, 0.5]))?;
    let j = extremal_integral(&one(), &lens, 2.0, &eps, cfg.base_grid)?;
    let at_12 = j.value_at(0.5f64.powi(12)).unwrap_or(f64::NAN);
    c.check(j.value < 1e-3, format!("lens map: limit estimate {:.3e}", j.value));
    c.check(at_12 < 1e-3, format!("lens map: value at eps = 2^-12 is {at_12:.4e} (required < 1e-3)"));

    let zeros = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, -0.3),
    ];
    let b = map(DiscFunction::blaschke(zeros)?)?;
    let jb = extremal_integral(&one(), &b, 2.0, &eps, cfg.base_grid)?;
    c.close("Blaschke extremal integral", jb.value, 1.0, 1e-6);
    let powers = [1, 4, 16, 64, 256];
    let seq = power_norm_sequence(&one(), &b, e(2.0), &powers, &cfg)?;
    c.close("Blaschke ‖φ^256‖₂", *seq.last().unwrap_or(&f64::NAN), 1.0, 1e-3);
    Ok(())
}

fn carleson_classifier(c: &mut Checks, _: &Instant) -> Result<()> {
    let cfg = CarlesonConfig::default();
    let id = map(DiscFunction::identity())?;
    for (p, q) in [(1.0, 2.0), (1.0, 1.5), (2.0, 3.0), (2.0, 4.0), (3.0, 8.0)] {
        let cert = classify_carleson(&one(), &id, e(p), e(q), &cfg)?;
        let mass = cert.boundary_mass.last().copied().unwrap_or(f64::NAN);
        c.check(
            cert.verdict == Verdict::Fails && (mass - 1.0).abs() < 1e-9,
            format!("z, p = {p} < q = {q}: {:?}, boundary mass {mass}", cert.verdict),
        );
    }
    let phi = half()?;
    for (p, q) in [(2.0, 1.0), (4.0, 2.0), (3.0, 1.5)] {
        let cert = classify_carleson(&one(), &phi, e(p), e(q), &cfg)?;
        c.check(
            cert.verdict == Verdict::Holds,
            format!("z/2, p = {p} > q = {q}: {:?}", cert.verdict),
        );
    }
    let mu = pullback(&one(), &phi, e(2.0), cfg.grid)?;
    let mut worst: f64 = 0.0;
    for k in 0..64 {
        let zeta = Complex64::from_polar(1.0, 0.1 * k as f64);
        worst = worst.max((balayage_g(&mu, zeta, 0.6)? - 4.0 / 3.0).abs());
    }
    c.check(worst <= 1e-9, format!("balayage G = 4/3 at alpha 0.6: max err {worst:.2e} (tol 1e-9)"));
    for r in [0.51, 0.6, 0.75, 0.9] {
        let v = ls_norm_g(&restrict_annulus(&mu, r)?, 2.0, 0.6, 1 << 10)?;
        c.check(v == 0.0, format!("‖G‖_s of the measure restricted to |z| > {r} is {v}"));
    }
    Ok(())
}

fn alpha_cross_check(c: &mut Checks, _: &Instant) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(FAMILY_SEED + 1);
    let disk = |rng: &mut ChaCha8Rng, r: f64| {
        Complex64::from_polar(rng.random_range(0.0..r), rng.random_range(0.0..std::f64::consts::TAU))
    };
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let phi = match i % 5 {
            0 => DiscFunction::identity().scale(disk(&mut rng, 0.95)),
            1 => DiscFunction::blaschke(vec![disk(&mut rng, 0.8), disk(&mut rng, 0.8)])?,
            2 => DiscFunction::monomial(rng.random_range(1..4)),
            3 => DiscFunction::polynomial([disk(&mut rng, 0.45), disk(&mut rng, 0.45)]),
            _ => DiscFunction::Kernel {
                a: disk(&mut rng, 0.5),
                p: 1.0,
            }
            .scale(0.1),
        };
        let phi = map(phi)?;
        let a = disk(&mut rng, 0.9);
        let index = rng.random_range(0..16usize);
        let alpha = kernel_coefficient_alpha(&phi, a, index)?;
        let composed = DiscFunction::Kernel { a, p: 1.0 }.compose(phi.map().clone());
        let direct = taylor_coefficients(&composed, index, 1.0)?.coefficients[index] / (1.0 - a.norm_sqr());
        worst = worst.max((alpha - direct).norm());
    }
    c.check(worst <= 1e-8, format!("max |alpha_p - direct coefficient| over 20 pairs = {worst:.2e} (tol 1e-8)"));
    Ok(())
}

/// The twelve scenarios of the bracket sanity check. Names ending in
/// `compact` must come out compact.
pub const SANITY_SUITE: &str = "\
name = identity
phi = z
p = 2
q = 2
---
name = square
phi = pow(z, 2)
p = 2
q = 2
---
name = shifted-weight
u = poly(1, 1)
phi = z
p = 2
q = 2
---
name = blaschke
phi = blaschke(0, 0.5)
p = 2
q = 2
---
name = half-2-4-compact
phi = mul(0.5, z)
p = 2
q = 4
---
name = lens-1-1
phi = poly(0.5, 0.5)
p = 1
q = 1
---
name = half-2-inf-compact
phi = mul(0.5, z)
p = 2
q = inf
---
name = lens-weighted-2-inf
u = poly(1, -1)
phi = poly(0.5, 0.5)
p = 2
q = inf
---
name = blaschke3-inf-2
phi = blaschke(0, 0.5, c(0, -0.3))
p = inf
q = 2
---
name = lens-inf-2-compact
u = poly(1, 1)
phi = poly(0.5, 0.5)
p = inf
q = 2
---
name = half-4-2-compact
phi = mul(0.5, z)
p = 4
q = 2
---
name = blaschke-4-2
phi = blaschke(0)
p = 4
q = 2
";

pub fn sanity_suite() -> Result<Vec<Scenario>> {
    parse_scenarios(SANITY_SUITE)
}

fn bracket_sanity(c: &mut Checks, _: &Instant) -> Result<()> {
    let suite = sanity_suite()?;
    c.check(suite.len() == 12, format!("{} scenarios", suite.len()));
    let reports = crate::report::sweep(&suite);
    let mut regimes = std::collections::BTreeSet::new();
    for (s, r) in suite.iter().zip(&reports.reports) {
        let crate::report::Outcome::Analysis(a) = &r.result else {
            c.check(false, format!("{}: {:?}", s.name, r.result));
            continue;
        };
        regimes.insert(a.regime);
        let Some(b) = &a.bracket else {
            c.check(false, format!("{}: no bracket (bounded: {:?})", s.name, a.bounded));
            continue;
        };
        c.check(
            b.lower <= b.upper + 1e-9,
            format!("{} [{}]: lower {:.6} <= upper {:.6}", s.name, a.regime.label(), b.lower, b.upper),
        );
        if s.name.ends_with("compact") {
            let threshold = r.config.compact_threshold;
            c.check(
                b.upper < threshold,
                format!("{}: upper {:.3e} below threshold {threshold}", s.name, b.upper),
            );
        }
        if s.p == e(2.0) && s.q == e(2.0) {
            match &a.cross_check {
                Some(x) => c.check(
                    x.intersects,
                    format!(
                        "{}: kernel [{:.6}, {:.6}] meets truncation [{:.6}, {:.6}] (tol {:.0e})",
                        s.name, b.lower, b.upper, x.truncation.lower, x.truncation.upper, x.tolerance
                    ),
                ),
                None => c.check(false, format!("{}: no truncation cross-check", s.name)),
            }
        }
    }
    c.check(regimes.len() == 5, format!("{} regimes covered", regimes.len()));
    Ok(())
}
