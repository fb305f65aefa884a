//! Three operations for the static page in `www/`: the cost curve, the
//! interaction coercivity curve, and heat maps of a mollified jump.
//!
//! Each export returns a flat `Float64Array`; the plain Rust functions
//! beside them do the work and are tested natively.

use eikonal_lab::circlegeom::TrigPolynomial;
use eikonal_lab::cost::cost_curve;
use eikonal_lab::entropy::{build_entropy, JumpConfig};
use eikonal_lab::fields::{make_jump_field, mollify, Mollifier};
use eikonal_lab::interaction::xi_closed_form;
use eikonal_lab::production::{production_from_projected, ProjectedField};
use eikonal_lab::Result;
use std::f64::consts::FRAC_PI_2;
use wasm_bindgen::prelude::*;

/// Largest grid the page may request.
pub const MAX_N: usize = 512;

/// `[s, c(s), s^3/6]` per sample.
pub fn cost_rows(samples: usize) -> Result<Vec<f64>> {
    Ok(cost_curve(samples)?
        .iter()
        .flat_map(|p| [p.s, p.c_value, p.s.powi(3) / 6.0])
        .collect())
}

/// `[beta, Xi(beta), Xi / (2 sin beta)^3]` on `beta_k = k (pi/2) / K`.
pub fn xi_rows(samples: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(3 * samples);
    for k in 1..=samples {
        let beta = FRAC_PI_2 * k as f64 / samples as f64;
        let xi = xi_closed_form(beta)?;
        out.extend([beta, xi, xi / (2.0 * beta.sin()).powi(3)]);
    }
    Ok(out)
}

/// Row-major `n x n` map for the symmetric jump of half-angle `beta` across
/// `x = 1/2`, mollified at `eps_cells` cells: the defect `1 - |m_eps|^2`, or,
/// with `production`, the density of `div Phi_{cos 2t}` of the projection.
pub fn heatmap(n: usize, beta: f64, eps_cells: f64, production: bool) -> Result<Vec<f64>> {
    if !(8..=MAX_N).contains(&n) {
        return Err(eikonal_lab::LabError::OutOfRange(format!("n = {n} outside [8, {MAX_N}]")));
    }
    let field = make_jump_field(&JumpConfig::symmetric(beta), [0.5, 0.5], n, 1.0);
    let moll = Mollifier::new(eps_cells / n as f64, n, 1.0)?;
    let m = mollify(&field, &moll)?;
    if production {
        let proj = ProjectedField::from_mollified(&m);
        let phi = build_entropy(&TrigPolynomial::cos_mode(2));
        Ok(production_from_projected(&proj, &phi, 0.0).density)
    } else {
        Ok((0..n * n).map(|i| 1.0 - m.norm(i).powi(2)).collect())
    }
}

fn js(r: Result<Vec<f64>>) -> std::result::Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = costCurve)]
pub fn cost_curve_js(samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(cost_rows(samples))
}

#[wasm_bindgen(js_name = xiCurve)]
pub fn xi_curve_js(samples: usize) -> std::result::Result<Vec<f64>, JsError> {
    js(xi_rows(samples))
}

#[wasm_bindgen(js_name = jumpHeatmap)]
pub fn jump_heatmap_js(n: usize, beta: f64, eps_cells: f64, production: bool) -> std::result::Result<Vec<f64>, JsError> {
    js(heatmap(n, beta, eps_cells, production))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_three_columns() {
        let c = cost_rows(20).unwrap();
        assert_eq!(c.len(), 60);
        assert!(c.chunks(3).all(|r| r[1] > r[2]));
        let x = xi_rows(50).unwrap();
        assert!((x[3 * 49 + 2] - (std::f64::consts::PI - 2.0)).abs() < 1e-12);
        assert!(x.chunks(3).all(|r| r[2] >= 1.0));
    }

    #[test]
    fn heatmaps_concentrate_on_the_line() {
        let n = 64;
        let d = heatmap(n, 0.7, 4.0, false).unwrap();
        let row = &d[32 * n..33 * n];
        assert!(row[0].abs() < 1e-12 && row[31] > 0.1 && row[32] > 0.1);
        let p = heatmap(n, 0.7, 4.0, true).unwrap();
        let h = 1.0 / n as f64;
        let total: f64 = p.iter().sum::<f64>() * h * h;
        // one unit of jump length carrying (2 sin b)^3 / 6
        assert!((total.abs() / ((2.0 * 0.7f64.sin()).powi(3) / 6.0) - 1.0).abs() < 0.05, "{total}");
        assert!(heatmap(4, 0.7, 4.0, false).is_err());
        assert!(heatmap(64, 0.7, 1.0, false).is_err());
    }
}
