use crate::error::{invalid, Result};
use crate::torus::{Field, Window};
use crate::variational::{SolitonDistance, SolitonManifold, SolitonProfile};

use super::params::GibbsParams;

/// `\int_{-M}^{M} |u|`.
pub fn observable_local_mass(field: &Field, half_width: f64) -> Result<f64> {
    let l = field.grid().length();
    if !(half_width > 0.0 && half_width <= 0.5 * l) {
        return Err(invalid("half_width", format!("need 0 < M <= L/2 = {}, got {half_width}", 0.5 * l)));
    }
    field.lp_integral(1.0, Window::centered(half_width))
}

/// Soliton manifold at the regime's concentration scale for `params`.
pub fn concentration_manifold(params: &GibbsParams, profile: &SolitonProfile, q: f64) -> Result<SolitonManifold> {
    SolitonManifold::new(profile, params.grid(), params.concentration_scale(), q)
}

/// Distance of `field` from the rescaled soliton orbit of `profile`.
pub fn observable_concentration(
    field: &Field,
    params: &GibbsParams,
    profile: &SolitonProfile,
    q: f64,
) -> Result<SolitonDistance> {
    concentration_manifold(params, profile, q)?.distance(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusGrid;
    use crate::variational::{soliton_closed_form, LineGrid};
    use num_complex::Complex64;

    #[test]
    fn local_mass_basics() {
        let g = TorusGrid::new(16.0, 128).unwrap();
        assert_eq!(observable_local_mass(&Field::zeros(g), 2.0).unwrap(), 0.0);
        let ones = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
        assert!((observable_local_mass(&ones, 2.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(observable_local_mass(&ones, 9.0).is_err());
    }

    #[test]
    fn embedded_soliton_local_mass_matches_quadrature() {
        let params = GibbsParams {
            p: 4.0,
            beta: 1.0,
            alpha: 1.0,
            mass_density: Some(1.0),
            gamma: 0.0,
            length: 16.0,
            points: 2048,
        };
        let q = soliton_closed_form(4.0, 1.0, 1.0 / 16.0, LineGrid::new(40.0, 1024).unwrap()).unwrap();
        let m = concentration_manifold(&params, &q, 4.0).unwrap();
        let field = m.embedded(0.0);
        let cf = q.closed_form.unwrap();
        // \int |Q_L| = L^{1/2} lambda^{1/2} \int Q and \int sech = pi
        let lam = params.concentration_scale();
        let want = (16.0 * lam).sqrt() * cf.amplitude * std::f64::consts::PI / cf.rate;
        let got = observable_local_mass(&field, 8.0).unwrap();
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        let d = observable_concentration(&field, &params, &q, 4.0).unwrap();
        assert!(d.distance < 1e-6);
        let rotated = field.scaled(Complex64::from_polar(1.0, 0.7));
        let e = observable_concentration(&rotated, &params, &q, 4.0).unwrap();
        assert!((e.distance - d.distance).abs() < 1e-8);
    }
}
