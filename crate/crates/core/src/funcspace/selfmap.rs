use num_complex::Complex64;
use rayon::prelude::*;

use super::function::{DiscFunction, DOMAIN_TOL};
use crate::error::{invalid, Error, Result};

/// Two grid values must differ by more than this for the map to count as
/// non-constant.
pub const NONCONSTANT_TOL: f64 = 1e-9;

const CHECK_ANGLES: usize = 512;
const CHECK_BOUNDARY: usize = 4096;

/// An analytic self-map φ of the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfMap {
    map: DiscFunction,
    sup_modulus_estimate: f64,
}

/// Radii of the interior validation grid: uniform out to 0.95, then
/// geometric towards the circle.
fn check_radii() -> Vec<f64> {
    let mut radii: Vec<f64> = (0..20).map(|k| k as f64 * 0.05).collect();
    radii.extend((5..=40).map(|k| 1.0 - (-(k as f64) * 0.5).exp2()));
    radii
}

impl SelfMap {
    pub fn new(map: DiscFunction) -> Result<Self> {
        let radii = check_radii();
        let points: Vec<Complex64> = radii
            .iter()
            .flat_map(|&r| {
                (0..CHECK_ANGLES).map(move |j| {
                    Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / CHECK_ANGLES as f64)
                })
            })
            .collect();
        let values: Vec<Complex64> = points
            .par_iter()
            .map(|&z| map.evaluate(z))
            .collect::<Result<_>>()
            .map_err(|e| Error::Validation(format!("self-map is not evaluable on the disk: {e}")))?;

        let interior_max = values.iter().map(|w| w.norm()).fold(0.0, f64::max);
        if !(interior_max < 1.0) {
            return Err(Error::Validation(format!(
                "{map} is not a self-map of the disk: max |phi| = {interior_max} on the disk grid"
            )));
        }

        let spread = values
            .iter()
            .map(|w| (w - values[0]).norm())
            .fold(0.0, f64::max);
        if spread <= NONCONSTANT_TOL {
            return Err(Error::Validation(format!("{map} is constant on the disk grid")));
        }

        let rho = map.boundary_radius();
        let boundary_max = (0..CHECK_BOUNDARY)
            .into_par_iter()
            .filter_map(|j| {
                let z = Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / CHECK_BOUNDARY as f64);
                map.evaluate(z).ok().map(|w| w.norm())
            })
            .reduce(|| 0.0, f64::max);
        if boundary_max > 1.0 + DOMAIN_TOL {
            return Err(Error::Validation(format!(
                "{map} is not a self-map of the disk: boundary trace reaches {boundary_max}"
            )));
        }

        Ok(SelfMap {
            map,
            sup_modulus_estimate: interior_max.max(boundary_max).min(1.0),
        })
    }

    pub fn map(&self) -> &DiscFunction {
        &self.map
    }

    pub fn into_map(self) -> DiscFunction {
        self.map
    }

    pub fn sup_modulus_estimate(&self) -> f64 {
        self.sup_modulus_estimate
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        self.map.evaluate(z)
    }

    pub fn at_origin(&self) -> Complex64 {
        self.map
            .evaluate(Complex64::new(0.0, 0.0))
            .expect("a validated self-map is finite at the origin")
    }

    /// The self-map `z ↦ φ(rz)`.
    pub fn dilate(&self, r: f64) -> Result<SelfMap> {
        SelfMap::new(radial_dilation(&self.map, r)?)
    }
}

/// `z ↦ f(rz)` for `0 < r < 1`.
pub fn radial_dilation(f: &DiscFunction, r: f64) -> Result<DiscFunction> {
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid(format!("dilation radius {r} is not in (0, 1)")));
    }
    Ok(f.clone().compose(DiscFunction::identity().scale(r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn accepts_standard_maps() {
        let half = SelfMap::new(DiscFunction::identity().scale(0.5)).unwrap();
        assert!((half.sup_modulus_estimate() - 0.5).abs() < 1e-12);
        let lens = SelfMap::new(DiscFunction::real_polynomial(&[0.5, 0.5])).unwrap();
        assert!((lens.sup_modulus_estimate() - 1.0).abs() < 1e-12);
        SelfMap::new(DiscFunction::blaschke(vec![c(0.3), c(-0.5)]).unwrap()).unwrap();
    }

    #[test]
    fn rejects_non_self_maps_and_constants() {
        let shifted = DiscFunction::real_polynomial(&[1.0, 1.0]);
        assert!(matches!(SelfMap::new(shifted), Err(Error::Validation(_))));
        let constant = DiscFunction::constant(0.3);
        assert!(matches!(SelfMap::new(constant), Err(Error::Validation(_))));
    }

    #[test]
    fn dilation_evaluates_inside() {
        let f = radial_dilation(&DiscFunction::identity(), 0.5).unwrap();
        assert_eq!(f.evaluate(c(1.0)).unwrap(), c(0.5));
        assert!(radial_dilation(&DiscFunction::identity(), 1.0).is_err());
        let lens = SelfMap::new(DiscFunction::real_polynomial(&[0.5, 0.5])).unwrap();
        let d = lens.dilate(0.8).unwrap();
        assert!((d.sup_modulus_estimate() - 0.9).abs() < 1e-12);
    }
}
