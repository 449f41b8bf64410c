//! Pullback measures on the closed disk, Carleson windows, the balayage
//! function `G` and `(p, q)`-Carleson classification.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::funcspace::{boundary_trace, check_grid_size, grid_point, DiscFunction, Exponent, SelfMap};
use crate::kernels::{check_aperture, shadow_half_width, StolzDomain};
use crate::verdict::{relative_change, trend, Verdict};

/// Atoms with `|location|` above this are boundary atoms.
pub const DEFAULT_BOUNDARY_THRESHOLD: f64 = 1.0 - 1e-6;
/// Relative change allowed across one grid doubling or depth increment.
pub const STABILITY_TOL: f64 = 0.05;
/// Boundary mass below which `μ_T = 0` is accepted for `p < q`.
pub const BOUNDARY_MASS_TOL: f64 = 1e-3;
/// Atoms this close to the circle are on it up to rounding; used for the
/// `μ_T = 0` test, where the partition threshold would count the thin band
/// `1 - 10⁻⁶ < |z| < 1` as boundary mass.
pub const ON_CIRCLE_GAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: Complex64,
    pub weight: f64,
}

/// Atomic approximation of `(|u|^q dm) ∘ (φ*)^{-1}`: one atom per boundary
/// grid sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackMeasure {
    pub atoms: Vec<Atom>,
    pub boundary_threshold: f64,
    pub total_mass: f64,
    /// Size of the circle grid the atoms came from.
    pub grid_size: usize,
    /// Grid samples dropped because `u` or `φ` is singular there.
    pub excluded: usize,
}

fn angle(z: Complex64) -> f64 {
    z.im.atan2(z.re).rem_euclid(TAU)
}

impl PullbackMeasure {
    pub fn from_atoms(atoms: Vec<Atom>, grid_size: usize) -> Result<Self> {
        for a in &atoms {
            if !(a.weight >= 0.0) || a.location.norm() > 1.0 + 1e-12 {
                return Err(invalid(format!("invalid atom {a:?}")));
            }
        }
        let total_mass = atoms.iter().map(|a| a.weight).sum();
        Ok(PullbackMeasure {
            atoms,
            boundary_threshold: DEFAULT_BOUNDARY_THRESHOLD,
            total_mass,
            grid_size,
            excluded: 0,
        })
    }

    pub fn empty(grid_size: usize) -> Self {
        PullbackMeasure {
            atoms: Vec::new(),
            boundary_threshold: DEFAULT_BOUNDARY_THRESHOLD,
            total_mass: 0.0,
            grid_size,
            excluded: 0,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid(format!("boundary threshold {threshold} is not in (0, 1)")));
        }
        self.boundary_threshold = threshold;
        Ok(self)
    }

    pub fn is_boundary(&self, a: &Atom) -> bool {
        a.location.norm() > self.boundary_threshold
    }

    pub fn interior(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.atoms.iter().filter(|a| !self.is_boundary(a))
    }

    pub fn boundary(&self) -> impl Iterator<Item = &Atom> + '_ {
        self.atoms.iter().filter(|a| self.is_boundary(a))
    }

    pub fn boundary_mass(&self) -> f64 {
        self.boundary().map(|a| a.weight).sum()
    }

    /// Mass of the atoms with `|location| > 1 - gap`.
    pub fn mass_beyond(&self, gap: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location.norm() > 1.0 - gap)
            .map(|a| a.weight)
            .sum()
    }

    pub fn interior_mass(&self) -> f64 {
        self.interior().map(|a| a.weight).sum()
    }

    /// Measure of the arcs whose samples were dropped.
    pub fn omitted_measure(&self) -> f64 {
        self.excluded as f64 / self.grid_size as f64
    }

    /// `∫ g dμ` for a function of the atom location.
    pub fn integrate(&self, g: impl Fn(Complex64) -> f64 + Sync) -> f64 {
        self.atoms.par_iter().map(|a| a.weight * g(a.location)).sum()
    }

    /// CSV rows `location_re,location_im,weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["location_re", "location_im", "weight"])?;
        for a in &self.atoms {
            w.write_record(&[a.location.re.to_string(), a.location.im.to_string(), a.weight.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Pulls `|u|^q dm` back through the boundary trace of `φ` on an `m`-point grid.
pub fn pullback(u: &DiscFunction, phi: &SelfMap, q: Exponent, m: usize) -> Result<PullbackMeasure> {
    let q = q.require_finite("pullback exponent")?;
    check_grid_size(m)?;
    let ut = boundary_trace(u, m, u.boundary_radius())?;
    let pt = boundary_trace(phi.map(), m, phi.map().boundary_radius())?;
    let scale = 1.0 / m as f64;
    let mut atoms = Vec::with_capacity(m);
    let mut excluded = 0;
    for (uv, pv) in ut.values.iter().zip(&pt.values) {
        if uv.re.is_nan() || pv.re.is_nan() {
            excluded += 1;
            continue;
        }
        atoms.push(Atom {
            location: *pv,
            weight: uv.norm().powf(q) * scale,
        });
    }
    let mut mu = PullbackMeasure::from_atoms(atoms, m)?;
    mu.excluded = excluded;
    Ok(mu)
}

/// Interior atoms in the top band `1 - ℓ ≤ |z|`, sorted by angle, with
/// prefix sums for arc queries.
struct WindowIndex {
    angles: Vec<f64>,
    prefix: Vec<f64>,
}

impl WindowIndex {
    fn new(mu: &PullbackMeasure, length: f64) -> Self {
        let mut items: Vec<(f64, f64)> = mu
            .interior()
            .filter(|a| a.location.norm() >= 1.0 - length)
            .map(|a| (angle(a.location), a.weight))
            .collect();
        items.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(items.len() + 1);
        prefix.push(0.0);
        let mut s = 0.0;
        for (_, w) in &items {
            s += w;
            prefix.push(s);
        }
        WindowIndex {
            angles: items.into_iter().map(|x| x.0).collect(),
            prefix,
        }
    }

    /// Mass with angle in `[lo, hi)`, `0 ≤ lo ≤ hi ≤ 2π`.
    fn range(&self, lo: f64, hi: f64) -> f64 {
        let a = self.angles.partition_point(|&x| x < lo);
        let b = self.angles.partition_point(|&x| x < hi);
        self.prefix[b] - self.prefix[a]
    }

    /// Mass over the half-open arc `[θ - πℓ, θ + πℓ)`.
    fn arc(&self, center: f64, length: f64) -> f64 {
        if length >= 1.0 {
            return *self.prefix.last().unwrap();
        }
        let lo = (center - PI * length).rem_euclid(TAU);
        let hi = lo + TAU * length;
        if hi <= TAU {
            self.range(lo, hi)
        } else {
            self.range(lo, TAU) + self.range(0.0, hi - TAU)
        }
    }
}

/// `μ(S(I))` for the arc of normalised length `ℓ` centred at `center`;
/// boundary atoms are outside every window.
pub fn window_mass(mu: &PullbackMeasure, center: f64, length: f64) -> Result<f64> {
    if !(length > 0.0 && length <= 1.0) {
        return Err(invalid(format!("arc length {length} is not in (0, 1]")));
    }
    Ok(WindowIndex::new(mu, length).arc(center.rem_euclid(TAU), length))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub ratio_sup: f64,
    /// Grid index of the witness arc centre.
    pub witness_center: usize,
    /// Dyadic level `k` of the witness arc (length `2^{-k}`; 0 is the full circle).
    pub witness_level: u32,
    pub exponent_ratio: f64,
    pub arc_family_depth: u32,
}

impl CarlesonReport {
    pub fn witness_length(&self) -> f64 {
        (-(self.witness_level as f64)).exp2()
    }
}

/// Sup of `μ(S(I)) / |I|^{q/p}` over arcs centred at the grid angles with
/// lengths `2^{-1} … 2^{-depth}`, plus the full circle.
///
/// Centred dyadic arcs 2-approximate all arcs, so this is an estimate of the
/// supremum rather than its exact value.
pub fn ratio_sup(mu: &PullbackMeasure, p: Exponent, q: Exponent, depth: u32) -> Result<CarlesonReport> {
    let p = p.require_finite("p")?;
    let q = q.require_finite("q")?;
    if p > q {
        return Err(invalid("window ratios apply to p <= q"));
    }
    let gamma = q / p;
    let m = mu.grid_size;
    let mut best = CarlesonReport {
        ratio_sup: mu.interior_mass(),
        witness_center: 0,
        witness_level: 0,
        exponent_ratio: gamma,
        arc_family_depth: depth,
    };
    for level in 1..=depth {
        let length = (-(level as f64)).exp2();
        let index = WindowIndex::new(mu, length);
        let denom = length.powf(gamma);
        let (center, value) = (0..m)
            .into_par_iter()
            .map(|j| (j, index.arc(TAU * j as f64 / m as f64, length) / denom))
            .reduce(|| (0, 0.0), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
        if value > best.ratio_sup {
            best.ratio_sup = value;
            best.witness_center = center;
            best.witness_level = level;
        }
    }
    Ok(best)
}

/// Keeps the atoms with `|location| ≥ r`.
pub fn restrict_annulus(mu: &PullbackMeasure, r: f64) -> Result<PullbackMeasure> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid(format!("annulus radius {r} is not in (0, 1)")));
    }
    let atoms: Vec<Atom> = mu.atoms.iter().filter(|a| a.location.norm() >= r).copied().collect();
    let total_mass = atoms.iter().map(|a| a.weight).sum();
    Ok(PullbackMeasure {
        atoms,
        total_mass,
        ..mu.clone()
    })
}

/// Ring of `angles` points at radius `r`.
pub fn ring(r: f64, angles: usize) -> Vec<Complex64> {
    (0..angles).map(|j| grid_point(j, angles, r)).collect()
}

/// `max_a ∫ |k_a|^{q/p} dμ` over the given points, all with `|a| ≥ r`.
pub fn n_star(mu: &PullbackMeasure, r: f64, p: Exponent, q: Exponent, points: &[Complex64]) -> Result<f64> {
    let gamma = q.require_finite("q")? / p.require_finite("p")?;
    if let Some(a) = points.iter().find(|a| a.norm() < r - 1e-12 || a.norm() >= 1.0) {
        return Err(invalid(format!("ring point {a} is not in r <= |a| < 1")));
    }
    Ok(points
        .par_iter()
        .map(|&a| {
            let s = 1.0 - a.norm_sqr();
            mu.atoms
                .iter()
                .map(|at| at.weight * (s / (1.0 - a.conj() * at.location).norm_sqr()).powf(gamma))
                .sum::<f64>()
        })
        .reduce(|| 0.0, f64::max))
}

/// `G(ζ) = ∫_{Γ(ζ)} dμ(z) / (1 - |z|²)` over interior atoms.
pub fn balayage_g(mu: &PullbackMeasure, zeta: Complex64, alpha: f64) -> Result<f64> {
    let gamma = StolzDomain::new(zeta, alpha)?;
    Ok(mu
        .interior()
        .filter(|a| gamma.contains(a.location))
        .map(|a| a.weight / (1.0 - a.location.norm_sqr()))
        .sum())
}

/// `G` at the `m` grid vertices.
///
/// Each atom's shadow is an arc around its argument; the bulk of the arc is
/// added through a difference array and the few vertices near its ends are
/// decided by the exact Stolz test, so the result equals `balayage_g` at
/// every vertex.
pub fn balayage_on_grid(mu: &PullbackMeasure, alpha: f64, m: usize) -> Result<Vec<f64>> {
    check_aperture(alpha)?;
    check_grid_size(m)?;
    let step = TAU / m as f64;
    let contribution = |a: &Atom, j: usize| -> bool {
        StolzDomain::new(grid_point(j, m, 1.0), alpha)
            .map(|g| g.contains(a.location))
            .unwrap_or(false)
    };
    let mut diff = vec![0.0; m + 1];
    let mut direct = vec![0.0; m];
    let mut everywhere = 0.0;
    for a in mu.interior() {
        let value = a.weight / (1.0 - a.location.norm_sqr());
        if value == 0.0 {
            continue;
        }
        let width = shadow_half_width(a.location, alpha);
        if width >= PI {
            everywhere += value;
            continue;
        }
        if width == 0.0 {
            // Only vertices extremely close to the argument can qualify.
            let j0 = (angle(a.location) / step).round() as i64;
            for j in j0 - 1..=j0 + 1 {
                let j = j.rem_euclid(m as i64) as usize;
                if contribution(a, j) {
                    direct[j] += value;
                }
            }
            continue;
        }
        let theta = angle(a.location);
        let lo = ((theta - width) / step).floor() as i64 - 1;
        let hi = ((theta + width) / step).ceil() as i64 + 1;
        if hi - lo + 1 >= m as i64 - 4 {
            for (j, d) in direct.iter_mut().enumerate() {
                if contribution(a, j) {
                    *d += value;
                }
            }
            continue;
        }
        for j in (lo..=lo + 2).chain((hi - 2).max(lo + 3)..=hi) {
            let jj = j.rem_euclid(m as i64) as usize;
            if contribution(a, jj) {
                direct[jj] += value;
            }
        }
        // Vertices lo+3 ..= hi-3 lie strictly inside the shadow.
        let (start, end) = (lo + 3, hi - 3);
        if start <= end {
            let s = start.rem_euclid(m as i64) as usize;
            let len = (end - start + 1) as usize;
            if s + len <= m {
                diff[s] += value;
                diff[s + len] -= value;
            } else {
                diff[s] += value;
                diff[m] -= value;
                diff[0] += value;
                diff[s + len - m] -= value;
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    let mut running = 0.0;
    for j in 0..m {
        running += diff[j];
        out.push(running + direct[j] + everywhere);
    }
    Ok(out)
}

/// `(mean over the m grid vertices of G^s)^{1/s}`.
pub fn ls_norm_g(mu: &PullbackMeasure, s: f64, alpha: f64, m: usize) -> Result<f64> {
    if !(s >= 1.0) || s.is_infinite() {
        return Err(invalid(format!("exponent s = {s} is not in [1, ∞)")));
    }
    let g = balayage_on_grid(mu, alpha, m)?;
    Ok(discrete_ls(&g, s))
}

fn discrete_ls(values: &[f64], s: f64) -> f64 {
    let mean = values.iter().map(|v| v.powf(s)).sum::<f64>() / values.len() as f64;
    mean.powf(1.0 / s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryDensity {
    /// `F` at the grid cells: cell mass times the number of cells.
    pub density: Vec<f64>,
    pub ls_norm: f64,
    pub sup: f64,
}

/// Bins boundary atoms into the `grid_size` angular cells of `μ`.
pub fn boundary_density(mu: &PullbackMeasure, s: f64) -> Result<BoundaryDensity> {
    if !(s >= 1.0) {
        return Err(invalid(format!("exponent s = {s} is below 1")));
    }
    let m = mu.grid_size;
    let mut cells = vec![0.0; m];
    for a in mu.boundary() {
        let j = (angle(a.location) * m as f64 / TAU).round() as usize % m;
        cells[j] += a.weight;
    }
    let density: Vec<f64> = cells.into_iter().map(|c| c * m as f64).collect();
    let ls_norm = if s.is_infinite() {
        density.iter().copied().fold(0.0, f64::max)
    } else {
        discrete_ls(&density, s)
    };
    let sup = density.iter().copied().fold(0.0, f64::max);
    Ok(BoundaryDensity { density, ls_norm, sup })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CarlesonConfig {
    pub grid: usize,
    pub depth: u32,
    pub aperture: f64,
}

impl Default for CarlesonConfig {
    fn default() -> Self {
        CarlesonConfig {
            grid: 1 << 14,
            depth: 10,
            aperture: crate::kernels::DEFAULT_APERTURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CarlesonRegime {
    #[serde(rename = "p<=q")]
    PLeQ,
    #[serde(rename = "p>q")]
    PGtQ,
}

/// Witness numbers behind a Carleson classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonCertificate {
    pub regime: CarlesonRegime,
    pub verdict: Verdict,
    pub reason: String,
    pub grids: Vec<usize>,
    pub boundary_mass: Vec<f64>,
    /// Mass within rounding of the circle, per grid.
    pub on_circle_mass: Vec<f64>,
    /// `ratio_sup` at each grid with the base depth, then at the finest grid
    /// with one more level.
    pub ratio_sups: Vec<f64>,
    pub witness: Option<CarlesonReport>,
    /// `sup F` (p = q) or `‖F‖_s` (p > q) at each grid.
    pub density_norms: Vec<f64>,
    /// `‖G‖_s` at each grid (p > q only).
    pub g_norms: Vec<f64>,
    pub aperture: f64,
    /// `s = p/(p-q)` for `p > q`.
    pub s: Option<f64>,
}

impl CarlesonCertificate {
    pub fn is_carleson(&self) -> Option<bool> {
        self.verdict.as_bool()
    }
}

/// Pulls `|u|^q dm` back at `M`, `2M` and `4M` and classifies the result.
pub fn classify_carleson(
    u: &DiscFunction,
    phi: &SelfMap,
    p: Exponent,
    q: Exponent,
    cfg: &CarlesonConfig,
) -> Result<CarlesonCertificate> {
    let levels = [cfg.grid, 2 * cfg.grid, 4 * cfg.grid]
        .iter()
        .map(|&m| pullback(u, phi, q, m))
        .collect::<Result<Vec<_>>>()?;
    classify_measure(&levels, p, q, cfg)
}

/// Classifies a sequence of pullback measures at increasing resolution.
pub fn classify_measure(
    levels: &[PullbackMeasure],
    p: Exponent,
    q: Exponent,
    cfg: &CarlesonConfig,
) -> Result<CarlesonCertificate> {
    let pf = p.require_finite("p")?;
    let qf = q.require_finite("q")?;
    check_aperture(cfg.aperture)?;
    let finest = levels.last().ok_or_else(|| invalid("no measures to classify"))?;
    let regime = if pf <= qf { CarlesonRegime::PLeQ } else { CarlesonRegime::PGtQ };
    let mut cert = CarlesonCertificate {
        regime,
        verdict: Verdict::Undecided,
        reason: String::new(),
        grids: levels.iter().map(|m| m.grid_size).collect(),
        boundary_mass: levels.iter().map(|m| m.boundary_mass()).collect(),
        on_circle_mass: levels.iter().map(|m| m.mass_beyond(ON_CIRCLE_GAP)).collect(),
        ratio_sups: Vec::new(),
        witness: None,
        density_norms: Vec::new(),
        g_norms: Vec::new(),
        aperture: cfg.aperture,
        s: None,
    };

    if finest.total_mass == 0.0 {
        cert.verdict = Verdict::Holds;
        cert.reason = "zero measure".into();
        return Ok(cert);
    }

    match regime {
        CarlesonRegime::PLeQ => {
            let on_circle = finest.mass_beyond(ON_CIRCLE_GAP);
            if pf < qf && on_circle > BOUNDARY_MASS_TOL {
                cert.verdict = Verdict::Fails;
                cert.reason = format!("boundary mass {on_circle:.6} is not zero, which p < q forbids");
                return Ok(cert);
            }
            for mu in levels {
                cert.ratio_sups.push(ratio_sup(mu, p, q, cfg.depth)?.ratio_sup);
            }
            let deeper = ratio_sup(finest, p, q, cfg.depth + 1)?;
            cert.ratio_sups.push(deeper.ratio_sup);
            cert.witness = Some(deeper);
            let windows = window_trend(&cert.ratio_sups);
            let density = if pf == qf {
                for mu in levels {
                    cert.density_norms.push(boundary_density(mu, f64::INFINITY)?.sup);
                }
                trend(&cert.density_norms, STABILITY_TOL, STABILITY_TOL, 2)
            } else {
                Verdict::Holds
            };
            (cert.verdict, cert.reason) = combine(windows, "window ratios", density, "boundary density sup");
        }
        CarlesonRegime::PGtQ => {
            let s = pf / (pf - qf);
            cert.s = Some(s);
            for mu in levels {
                cert.g_norms.push(ls_norm_g(mu, s, cfg.aperture, mu.grid_size)?);
                cert.density_norms.push(boundary_density(mu, s)?.ls_norm);
            }
            let g = trend(&cert.g_norms, STABILITY_TOL, STABILITY_TOL, 2);
            let f = trend(&cert.density_norms, STABILITY_TOL, STABILITY_TOL, 2);
            (cert.verdict, cert.reason) = combine(g, "balayage L^s norm", f, "boundary density L^s norm");
        }
    }
    Ok(cert)
}

/// Ratio sups at increasing grids followed by one deeper value at the finest
/// grid. Stable across the grids and the extra level means finite; stable
/// across grids but growing with depth means the sup is infinite.
fn window_trend(values: &[f64]) -> Verdict {
    let (grids, deeper) = values.split_at(values.len() - 1);
    let resolved = grids
        .windows(2)
        .all(|w| relative_change(w[0], w[1]) <= STABILITY_TOL);
    let last = *grids.last().unwrap();
    match (resolved, deeper[0] > last * (1.0 + STABILITY_TOL)) {
        (true, false) => Verdict::Holds,
        (true, true) => Verdict::Fails,
        (false, _) => Verdict::Undecided,
    }
}

fn combine(a: Verdict, a_name: &str, b: Verdict, b_name: &str) -> (Verdict, String) {
    match (a, b) {
        (Verdict::Holds, Verdict::Holds) => (Verdict::Holds, format!("{a_name} and {b_name} are stable")),
        (Verdict::Fails, _) => (Verdict::Fails, format!("{a_name} grows under refinement")),
        (_, Verdict::Fails) => (Verdict::Fails, format!("{b_name} grows under refinement")),
        (Verdict::Undecided, _) => (Verdict::Undecided, format!("{a_name} neither settles nor diverges")),
        (_, Verdict::Undecided) => (Verdict::Undecided, format!("{b_name} neither settles nor diverges")),
    }
}

/// Relative change of a quantity between the two finest levels.
pub fn last_change(values: &[f64]) -> f64 {
    match values {
        [.., a, b] => relative_change(*a, *b),
        _ => 0.0,
    }
}
