//! The Maxwellian, the kinetic measure of a single jump, and weak checks of
//! the kinetic transport identity on grid fields.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::circlegeom::{simpson, TrigPolynomial, UnitVec};
use crate::entropy::{build_entropy, psi_of, JumpConfig};
use crate::error::{LabError, Result};
use crate::fields::AngleField;
use crate::production::{production_from_projected, ProjectedField};

/// `1` iff `e^{is} . m > 0`; the null set `e^{is} . m = 0` maps to `0`.
pub fn maxwellian(m: UnitVec, s: f64) -> u8 {
    let (sn, cs) = s.sin_cos();
    u8::from(cs * m.x + sn * m.y > 0.0)
}

/// Kinetic density per unit jump length, sampled at `s_k = 2 pi k / M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticDensity {
    values: Vec<f64>,
}

impl KineticDensity {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 16 {
            return Err(LabError::InsufficientSampling(format!(
                "kinetic density needs at least 16 angles, got {}",
                values.len()
            )));
        }
        Ok(KineticDensity { values })
    }

    pub fn zero(m: usize) -> Self {
        KineticDensity {
            values: vec![0.0; m],
        }
    }

    pub fn samples(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.values.len() as f64
    }

    pub fn step(&self) -> f64 {
        TAU / self.values.len() as f64
    }

    /// `int_0^{2 pi} S ds` by the periodic trapezoid rule.
    pub fn mean_integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.step()
    }

    /// `int_0^{2 pi} psi(s) S(s) ds`.
    pub fn pair(&self, psi: &TrigPolynomial) -> f64 {
        (0..self.values.len())
            .map(|k| psi.eval(self.angle(k)) * self.values[k])
            .sum::<f64>()
            * self.step()
    }

    /// `min over signs of int |S - sign g|` together with the minimizing sign.
    pub fn l1_distance_up_to_sign<F: Fn(f64) -> f64>(&self, g: F) -> (f64, f64) {
        let (mut plus, mut minus) = (0.0, 0.0);
        for (k, v) in self.values.iter().enumerate() {
            let gv = g(self.angle(k));
            plus += (v - gv).abs();
            minus += (v + gv).abs();
        }
        let (plus, minus) = (plus * self.step(), minus * self.step());
        if plus <= minus {
            (plus, 1.0)
        } else {
            (minus, -1.0)
        }
    }
}

/// `int_0^s (e^{iu} . nu) 1_{e^{iu} . m > 0} du` from the primitive
/// `nu_1 sin u - nu_2 cos u` over the arcs `(theta - pi/2, theta + pi/2)`.
fn arc_flux(theta: f64, nu: UnitVec, s: f64) -> f64 {
    let prim = |u: f64| nu.x * u.sin() - nu.y * u.cos();
    let mut acc = 0.0;
    for k in -1..=1 {
        let c = theta + TAU * k as f64;
        let a = (c - FRAC_PI_2).max(0.0);
        let b = (c + FRAC_PI_2).min(s);
        if b > a {
            acc += prim(b) - prim(a);
        }
    }
    acc
}

/// `S` with `S' = (e^{is} . nu)(chi(m+, s) - chi(m-, s))`, normalized to zero
/// discrete mean; `sigma = S(s) ds H^1` on the jump line.
pub fn sigma_jump(jump: &JumpConfig, m: usize) -> Result<KineticDensity> {
    if m < 256 {
        return Err(LabError::InsufficientSampling(format!(
            "sigma_jump needs M >= 256, got {m}"
        )));
    }
    let nu = jump.normal();
    let (tp, tm) = (jump.theta_plus().value(), jump.theta_minus().value());
    let mut values: Vec<f64> = (0..m)
        .map(|k| {
            let s = TAU * k as f64 / m as f64;
            arc_flux(tp, nu, s) - arc_flux(tm, nu, s)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / m as f64;
    values.iter_mut().for_each(|v| *v -= mean);
    Ok(KineticDensity { values })
}

/// Smooth bump `exp(1 - 1/(1 - |x - c|^2 / R^2))`, equal to 1 at the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Bump {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Bump { center, radius }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        let u = self.u(x, y);
        if u >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u)).exp()
        }
    }

    pub fn grad(&self, x: f64, y: f64) -> [f64; 2] {
        let u = self.u(x, y);
        if u >= 1.0 {
            return [0.0, 0.0];
        }
        let z = (1.0 - 1.0 / (1.0 - u)).exp();
        let k = -z / (1.0 - u).powi(2) * 2.0 / (self.radius * self.radius);
        [k * (x - self.center[0]), k * (y - self.center[1])]
    }

    fn u(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        (dx * dx + dy * dy) / (self.radius * self.radius)
    }

    /// Checks that the support lies in `[margin, L - margin]^2`.
    pub fn check_inside(&self, l: f64, margin: f64) -> Result<()> {
        let ok = self.center.iter().all(|&c| c - self.radius >= margin && c + self.radius <= l - margin);
        if ok {
            Ok(())
        } else {
            Err(LabError::OutOfRange(format!(
                "test function at {:?} with radius {} leaves the interior window",
                self.center, self.radius
            )))
        }
    }

    /// `int zeta dH^1` over the line `{x : (x - p) . nu = 0}`.
    pub fn line_integral(&self, point: [f64; 2], normal: UnitVec) -> f64 {
        let t = normal.perp();
        // foot of the perpendicular from the center
        let off = normal.dot_xy([self.center[0] - point[0], self.center[1] - point[1]]);
        if off.abs() >= self.radius {
            return 0.0;
        }
        let half = (self.radius * self.radius - off * off).sqrt();
        let foot = [self.center[0] - off * normal.x, self.center[1] - off * normal.y];
        simpson(
            |tau| self.value(foot[0] + tau * t.x, foot[1] + tau * t.y),
            -half,
            half,
            4096,
        )
    }
}

/// `G_psi(m) = int psi(s) e^{is} chi(m, s) ds`, integrated exactly over the
/// half circle centered at `m`.
pub fn maxwellian_moment(psi: &TrigPolynomial, m: UnitVec) -> [f64; 2] {
    let alpha = m.angle().value();
    let (a, b) = (alpha - FRAC_PI_2, alpha + FRAC_PI_2);
    [psi.mul_cos().integrate(a, b), psi.mul_sin().integrate(a, b)]
}

/// Moment of the isotropic state `chi = 1/2`, used on masked cells: the
/// average of the Maxwellian over any disc centered at a vortex.
pub fn isotropic_moment(psi: &TrigPolynomial) -> [f64; 2] {
    [0.5 * psi.mul_cos().integrate(0.0, TAU), 0.5 * psi.mul_sin().integrate(0.0, TAU)]
}

/// The same moment from `M` equispaced samples of the Maxwellian.
pub fn maxwellian_moment_sampled(psi: &TrigPolynomial, m: UnitVec, samples: usize) -> [f64; 2] {
    let w = TAU / samples as f64;
    let mut acc = [0.0, 0.0];
    for k in 0..samples {
        let s = w * k as f64;
        if maxwellian(m, s) == 1 {
            let v = psi.eval(s);
            acc[0] += v * s.cos();
            acc[1] += v * s.sin();
        }
    }
    [acc[0] * w, acc[1] * w]
}

/// `<nu, zeta psi> = -iint (e^{is} . grad zeta) psi chi dx ds` over the
/// cells, with the discrete gradient of `zeta`.
pub fn transport_pairing(field: &AngleField, psi: &TrigPolynomial, zeta: &Bump) -> f64 {
    pairing_with(field, zeta, isotropic_moment(psi), |m| maxwellian_moment(psi, m))
}

fn pairing_with<G: Fn(UnitVec) -> [f64; 2]>(
    field: &AngleField,
    zeta: &Bump,
    masked: [f64; 2],
    moment: G,
) -> f64 {
    let n = field.n();
    let h = field.h();
    let mut acc = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let c = field.center(ix, iy);
            // centered differences, so that sums against constants telescope
            let g = [
                (zeta.value(c[0] + h, c[1]) - zeta.value(c[0] - h, c[1])) / (2.0 * h),
                (zeta.value(c[0], c[1] + h) - zeta.value(c[0], c[1] - h)) / (2.0 * h),
            ];
            if g == [0.0, 0.0] {
                continue;
            }
            let mo = match field.unit(ix, iy) {
                Some(m) => moment(m),
                None => masked,
            };
            acc -= g[0] * mo[0] + g[1] * mo[1];
        }
    }
    acc * h * h
}

/// A candidate kinetic measure for [`kinetic_residual`].
#[derive(Clone, Copy, Debug)]
pub enum KineticMeasure<'a> {
    Zero,
    /// `S(s) ds` times length measure on the line through `point` with
    /// normal `normal`.
    Line {
        density: &'a KineticDensity,
        point: [f64; 2],
        normal: UnitVec,
    },
}

impl KineticMeasure<'_> {
    /// `iint zeta(x) g(s) d sigma`.
    pub fn pair(&self, zeta: &Bump, g: &TrigPolynomial) -> f64 {
        match self {
            KineticMeasure::Zero => 0.0,
            KineticMeasure::Line {
                density,
                point,
                normal,
            } => zeta.line_integral(*point, *normal) * density.pair(g),
        }
    }
}

/// `|<nu, zeta psi> + iint zeta psi' d sigma|`, which vanishes when
/// `e^{is} . grad chi = d sigma / ds` holds weakly.
pub fn kinetic_residual(
    field: &AngleField,
    sigma: &KineticMeasure,
    zeta: &Bump,
    psi: &TrigPolynomial,
) -> f64 {
    let left = transport_pairing(field, psi, zeta);
    let right = sigma.pair(zeta, &psi.derivative());
    (left + right).abs()
}

/// Both sides of `<nu, zeta psi_f> = -<div Phi_f(m), zeta>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Transport pairing from `M` Maxwellian samples.
    pub transport: f64,
    /// `<div Phi_f(m_eps / |m_eps|), zeta>` from the production measure.
    pub production: f64,
    pub discrepancy: f64,
}

/// Compares the transport pairing against the mollified entropy production
/// at radius `eps`.
pub fn duality_check(
    field: &AngleField,
    f: &TrigPolynomial,
    zeta: &Bump,
    eps: f64,
    samples: usize,
) -> Result<DualityReport> {
    zeta.check_inside(field.l(), 0.0)?;
    let psi = psi_of(f);
    let transport = pairing_with(field, zeta, isotropic_moment(&psi), |m| {
        maxwellian_moment_sampled(&psi, m, samples)
    });
    let proj = ProjectedField::new(field, eps)?;
    let mu = production_from_projected(&proj, &build_entropy(f), 0.0);
    let n = field.n();
    let mut production = 0.0;
    for iy in 0..n {
        for ix in 0..n {
            let c = field.center(ix, iy);
            production += mu.density[iy * n + ix] * zeta.value(c[0], c[1]);
        }
    }
    production *= mu.cell_area();
    Ok(DualityReport {
        transport,
        production,
        discrepancy: (transport + production).abs(),
    })
}

/// `<nu, zeta psi>` for `psi in {1, cos s, sin s}`.
pub fn low_mode_pairings(field: &AngleField, zeta: &Bump) -> [f64; 3] {
    [
        transport_pairing(field, &TrigPolynomial::constant(1.0), zeta),
        transport_pairing(field, &TrigPolynomial::cos_mode(1), zeta),
        transport_pairing(field, &TrigPolynomial::sin_mode(1), zeta),
    ]
}

/// `(1/2) int e^{is} chi(m, s) ds` by `M`-point quadrature; recovers `m`.
pub fn maxwellian_average(m: UnitVec, samples: usize) -> [f64; 2] {
    let v = maxwellian_moment_sampled(&TrigPolynomial::constant(1.0), m, samples);
    [0.5 * v[0], 0.5 * v[1]]
}

/// Default test function for the unit square: off-center with respect to
/// both the vortex center and the jump line used by the generators.
pub fn default_bump() -> Bump {
    Bump::new([0.47, 0.53], 0.3)
}

/// Angles of the jump states relative to `nu`, for reporting.
pub fn relative_states(jump: &JumpConfig) -> (f64, f64) {
    let a = jump.normal().angle().value();
    let wrap = |t: f64| (t - a + PI).rem_euclid(TAU) - PI;
    (wrap(jump.theta_plus().value()), wrap(jump.theta_minus().value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::jump_pairing;
    use crate::fields::{make_jump_field, make_vortex_field};
    use proptest::prelude::*;

    fn g_beta(beta: f64, t: f64) -> f64 {
        // written out independently of the cost module
        let t = t.rem_euclid(PI);
        let bump = if (FRAC_PI_2 - beta..=FRAC_PI_2 + beta).contains(&t) {
            t.sin() - beta.cos()
        } else {
            0.0
        };
        bump - 2.0 / PI * (beta.sin() - beta * beta.cos())
    }

    #[test]
    fn maxwellian_examples() {
        assert_eq!(maxwellian(UnitVec::E1, 0.0), 1);
        assert_eq!(maxwellian(UnitVec::E1, PI), 0);
        for t in [0.0, 0.4, 2.0, -2.9] {
            let m = UnitVec::from_angle(t);
            let avg = maxwellian_average(m, 1 << 14);
            assert!((avg[0] - m.x).abs() < 1e-3 && (avg[1] - m.y).abs() < 1e-3);
        }
    }

    #[test]
    fn sigma_of_trivial_jump_is_zero() {
        let j = JumpConfig::new(0.8, 0.8, UnitVec::E1).unwrap();
        let s = sigma_jump(&j, 512).unwrap();
        assert!(s.values().iter().all(|v| v.abs() < 1e-15));
        assert!(sigma_jump(&j, 128).is_err());
    }

    #[test]
    fn sigma_matches_cost_profile() {
        for beta in [0.3, 0.8, 1.3, FRAC_PI_2] {
            let s = sigma_jump(&JumpConfig::symmetric(beta), 4096).unwrap();
            assert!(s.mean_integral().abs() <= 1e-10);
            let (err, sign) = s.l1_distance_up_to_sign(|t| g_beta(beta, t));
            assert!(err < 1e-3, "beta {beta}: {err}");
            assert_eq!(sign, 1.0);
            // the swapped orientation flips the sign
            let (err, sign) = sigma_jump(&JumpConfig::symmetric(beta).swapped(), 4096)
                .unwrap()
                .l1_distance_up_to_sign(|t| g_beta(beta, t));
            assert!(err < 1e-3 && sign == -1.0);
        }
    }

    #[test]
    fn sigma_reproduces_entropy_production() {
        // int f S ds = (Phi_f(m+) - Phi_f(m-)) . nu
        let j = JumpConfig::new(1.1, 1.1 - 2.0 * 0.7, UnitVec::from_angle(1.1 - 0.7)).unwrap();
        let s = sigma_jump(&j, 1 << 14).unwrap();
        for f in [
            TrigPolynomial::cos_mode(2),
            TrigPolynomial::sin_mode(4),
            TrigPolynomial::new(0.3, vec![0.1, -0.4, 0.2], vec![0.5, 0.3, -0.6]),
        ] {
            let want = jump_pairing(&build_entropy(&f), &j);
            assert!((s.pair(&f) - want).abs() < 1e-6, "{} vs {want}", s.pair(&f));
        }
    }

    #[test]
    fn moment_is_minus_entropy() {
        let f = TrigPolynomial::new(0.2, vec![0.3, -0.5, 0.25, 0.1], vec![0.0, 0.7, -0.2, 0.4]);
        let phi = build_entropy(&f);
        let psi = psi_of(&f);
        for t in [0.0, 0.9, 2.5, -1.7] {
            let m = UnitVec::from_angle(t);
            let g = maxwellian_moment(&psi, m);
            let p = phi.eval_unit(m);
            assert!((g[0] + p[0]).abs() < 1e-12 && (g[1] + p[1]).abs() < 1e-12);
            let gs = maxwellian_moment_sampled(&psi, m, 1 << 16);
            assert!((gs[0] - g[0]).abs() < 1e-3 && (gs[1] - g[1]).abs() < 1e-3);
        }
    }

    #[test]
    fn constant_field_residuals() {
        let f = AngleField::constant(64, 1.0, 0.9);
        let zeta = default_bump();
        for psi in [TrigPolynomial::cos_mode(2), TrigPolynomial::sin_mode(3)] {
            assert!(kinetic_residual(&f, &KineticMeasure::Zero, &zeta, &psi) <= 1e-10);
        }
        let r = duality_check(&f, &TrigPolynomial::cos_mode(2), &zeta, 4.0 / 64.0, 1024).unwrap();
        assert!(r.production.abs() < 1e-12 && r.transport.abs() < 1e-10);
    }

    #[test]
    fn jump_residual_decreases() {
        let j = JumpConfig::symmetric(0.9);
        let s = sigma_jump(&j, 1 << 14).unwrap();
        let sigma = KineticMeasure::Line {
            density: &s,
            point: [0.5, 0.5],
            normal: UnitVec::E1,
        };
        let psi = TrigPolynomial::new(0.0, vec![0.0, 1.0, 0.3], vec![0.0, -0.5, 0.8]);
        let zeta = default_bump();
        let r: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| kinetic_residual(&make_jump_field(&j, [0.5, 0.5], n, 1.0), &sigma, &zeta, &psi))
            .collect();
        assert!(r[0] / r[1] > 1.7 && r[1] / r[2] > 1.7, "{r:?}");
        let wrong = kinetic_residual(&make_jump_field(&j, [0.5, 0.5], 128, 1.0), &KineticMeasure::Zero, &zeta, &psi);
        assert!(wrong > 100.0 * r[2]);
    }

    #[test]
    fn low_modes_vanish() {
        let zeta = default_bump();
        let jump = make_jump_field(&JumpConfig::symmetric(0.6), [0.5, 0.5], 128, 1.0);
        let vortex = make_vortex_field([0.5, 0.5], true, 128, 1.0).unwrap();
        for f in [jump, vortex] {
            let p = low_mode_pairings(&f, &zeta);
            assert!(p[0].abs() < 1e-3 && p[1].abs() < 1e-10 && p[2].abs() < 1e-10, "{p:?}");
        }
    }

    #[test]
    fn duality_on_jump() {
        let n = 128;
        let beta = 0.7;
        let f = make_jump_field(&JumpConfig::symmetric(beta), [0.5, 0.5], n, 1.0);
        let zeta = default_bump();
        let r = duality_check(&f, &TrigPolynomial::cos_mode(2), &zeta, 4.0 / n as f64, 1024).unwrap();
        let oracle = jump_pairing(&build_entropy(&TrigPolynomial::cos_mode(2)), &JumpConfig::symmetric(beta))
            * zeta.line_integral([0.5, 0.5], UnitVec::E1);
        assert!((r.production / oracle - 1.0).abs() < 0.02, "{r:?} vs {oracle}");
        assert!((-r.transport / oracle - 1.0).abs() < 0.02);
        let r = duality_check(&f, &TrigPolynomial::cos_mode(1), &zeta, 4.0 / n as f64, 1024).unwrap();
        assert!(r.production == 0.0 && r.transport.abs() < 1e-10);
    }

    #[test]
    fn bump_support_is_checked() {
        assert!(default_bump().check_inside(1.0, 0.15).is_ok());
        assert!(Bump::new([0.2, 0.5], 0.3).check_inside(1.0, 0.15).is_err());
    }

    proptest! {
        #[test]
        fn sigma_l1_is_rotation_invariant(beta in 0.05..1.5f64, rot in -3.0..3.0f64) {
            let j = JumpConfig::symmetric(beta);
            let a = sigma_jump(&j, 2048).unwrap();
            let b = sigma_jump(&j.rotated(rot), 2048).unwrap();
            prop_assert!(b.mean_integral().abs() <= 1e-10);
            prop_assert!((a.l1_norm() - b.l1_norm()).abs() < 2e-3);
            let (p, m) = relative_states(&j.rotated(rot));
            prop_assert!((p - beta).abs() < 1e-9 && (m + beta).abs() < 1e-9);
        }
    }
}
