//! Entropies for the eikonal equation.
//!
//! An entropy is a map `Phi: S^1 -> R^2` with `e^{it} . d/dt Phi(e^{it}) = 0`.
//! Here every entropy is stored as a pair of trigonometric polynomials
//! `(P, Q)` with `Phi(e^{it}) = (P(t), Q(t))`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circlegeom::{interpolate, Angle, TrigPolynomial, UnitVec};
use crate::error::{LabError, Result};

/// Admissibility tolerance for `(m+ - m-) . nu`.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropySource {
    /// `Phi_f` built from the circle function `f`.
    Pipeline { f: TrigPolynomial },
    /// `Sigma` for the orthonormal frame rotated by `frame_angle`.
    JinKohn { frame_angle: f64 },
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entropy {
    pub p: TrigPolynomial,
    pub q: TrigPolynomial,
    pub source: EntropySource,
    /// Upper estimate of the second derivative of the components.
    pub c2_norm: f64,
}

impl Entropy {
    pub fn custom(p: TrigPolynomial, q: TrigPolynomial) -> Self {
        Self::with_source(p, q, EntropySource::Custom)
    }

    /// Interpolates sampled components; the result still has to pass
    /// [`entropy_defect`] to be an entropy.
    pub fn from_samples(px: &[f64], py: &[f64]) -> Result<Self> {
        let p = crate::circlegeom::fourier_analyze(px)?;
        let q = crate::circlegeom::fourier_analyze(py)?;
        Ok(Self::custom(p, q))
    }

    fn with_source(p: TrigPolynomial, q: TrigPolynomial, source: EntropySource) -> Self {
        let c2_norm = p.second_derivative_bound() + q.second_derivative_bound();
        Entropy {
            p,
            q,
            source,
            c2_norm,
        }
    }

    pub fn eval(&self, t: f64) -> [f64; 2] {
        let (s, c) = t.sin_cos();
        self.eval_unit(UnitVec { x: c, y: s })
    }

    pub fn eval_unit(&self, m: UnitVec) -> [f64; 2] {
        [self.p.eval_unit(m.x, m.y), self.q.eval_unit(m.x, m.y)]
    }

    pub fn max_coeff_diff(&self, other: &Entropy) -> f64 {
        self.p
            .max_coeff_diff(&other.p)
            .max(self.q.max_coeff_diff(&other.q))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.p.max_abs_coeff() <= tol && self.q.max_abs_coeff() <= tol
    }

    pub fn scaled(&self, c: f64) -> Entropy {
        let source = match &self.source {
            EntropySource::Pipeline { f } => EntropySource::Pipeline { f: f * c },
            _ => EntropySource::Custom,
        };
        Self::with_source(&self.p * c, &self.q * c, source)
    }

    /// `sum_i w_i Phi_i`.
    pub fn linear_combination(terms: &[(f64, &Entropy)]) -> Entropy {
        let mut p = TrigPolynomial::zero();
        let mut q = TrigPolynomial::zero();
        for (w, e) in terms {
            p = &p + &(&e.p * *w);
            q = &q + &(&e.q * *w);
        }
        Self::custom(p, q)
    }
}

/// Zero-mean antiderivative of `f` with modes 0 and 1 removed.
///
/// Anchoring at `psi(0) = 0` instead would add `-2 mean(psi) z` to `Phi_f`,
/// a multiple of the identity entropy whose divergence vanishes on every
/// solution; the zero-mean choice makes odd modes map to exactly zero.
pub fn psi_of(f: &TrigPolynomial) -> TrigPolynomial {
    let mut psi = f
        .project_out_low_modes()
        .antiderivative_zero_at_origin()
        .expect("projected polynomial has zero mean");
    psi.a0 = 0.0;
    psi
}

/// The linear construction `f -> Phi_f`.
///
/// Remove modes 0 and 1 of `f`, integrate once to `psi` (see [`psi_of`]),
/// integrate `psi(s) i e^{is}` to `phi`, and set
/// `Phi(e^{it}) = -i phi(t - pi/2) + i phi(t + pi/2)`.
pub fn build_entropy(f: &TrigPolynomial) -> Entropy {
    let psi = psi_of(f);
    // i e^{is} = (-sin s, cos s)
    let mut integrand_x = -&psi.mul_sin();
    let mut integrand_y = psi.mul_cos();
    // the mean of psi e^{is} vanishes because psi has no first modes
    integrand_x.a0 = 0.0;
    integrand_y.a0 = 0.0;
    let phi_x = integrand_x
        .antiderivative_zero_at_origin()
        .expect("mean removed above");
    let phi_y = integrand_y
        .antiderivative_zero_at_origin()
        .expect("mean removed above");

    // -i (x, y) = (y, -x) ; i (x, y) = (-y, x)
    let p = &phi_y.shift(-FRAC_PI_2) - &phi_y.shift(FRAC_PI_2);
    let q = &phi_x.shift(FRAC_PI_2) - &phi_x.shift(-FRAC_PI_2);
    Entropy::with_source(p, q, EntropySource::Pipeline { f: f.clone() })
}

/// Jin-Kohn entropy `Sigma(z) = 4/3 ((z.a2)^3 a1 + (z.a1)^3 a2)` for the frame
/// `a1 = (cos alpha, sin alpha)`, `a2 = a1^perp`.
pub fn jin_kohn(frame_angle: Angle) -> Entropy {
    let alpha = frame_angle.value();
    // u = t - alpha ; sin^3 u = (3 sin u - sin 3u)/4, cos^3 u = (3 cos u + cos 3u)/4
    let sin3 = &(&(&TrigPolynomial::sin_mode(1) * 0.75) - &(&TrigPolynomial::sin_mode(3) * 0.25))
        .shift(-alpha)
        * (4.0 / 3.0);
    let cos3 = &(&(&TrigPolynomial::cos_mode(1) * 0.75) + &(&TrigPolynomial::cos_mode(3) * 0.25))
        .shift(-alpha)
        * (4.0 / 3.0);
    let (sa, ca) = alpha.sin_cos();
    let p = &(&sin3 * ca) - &(&cos3 * sa);
    let q = &(&sin3 * sa) + &(&cos3 * ca);
    Entropy::with_source(
        p,
        q,
        EntropySource::JinKohn {
            frame_angle: frame_angle.value(),
        },
    )
}

/// Direct evaluation of the Jin-Kohn formula; used as an oracle.
pub fn jin_kohn_direct(frame_angle: f64, z: [f64; 2]) -> [f64; 2] {
    let a1 = UnitVec::from_angle(frame_angle);
    let a2 = a1.perp();
    let z1 = a1.dot_xy(z);
    let z2 = a2.dot_xy(z);
    let c = 4.0 / 3.0;
    [
        c * (z2.powi(3) * a1.x + z1.powi(3) * a2.x),
        c * (z2.powi(3) * a1.y + z1.powi(3) * a2.y),
    ]
}

/// `max_j |e^{it_j} . d/dt Phi(e^{it_j})|` over `M >= 64` equispaced samples.
pub fn entropy_defect(phi: &Entropy, m: usize) -> Result<f64> {
    if m < 64 {
        return Err(LabError::InsufficientSampling(format!(
            "entropy_defect needs M >= 64, got {m}"
        )));
    }
    let dp = phi.p.derivative();
    let dq = phi.q.derivative();
    Ok((0..m)
        .map(|j| {
            let (s, c) = (TAU * j as f64 / m as f64).sin_cos();
            (c * dp.eval_unit(c, s) + s * dq.eval_unit(c, s)).abs()
        })
        .fold(0.0, f64::max))
}

/// Empirical ratio `|Phi_f|_{C^2} / |f|_{C^0}` (the unknown constant of the
/// linear bound), with the sup norm taken on `m` samples.
pub fn c2_constant_estimate(f: &TrigPolynomial, m: usize) -> f64 {
    let phi = build_entropy(f);
    let sup = f.sup_norm_sampled(m);
    if sup == 0.0 {
        0.0
    } else {
        phi.c2_norm / sup
    }
}

/// A single straight jump `m+ | m-` across a line with unit normal `nu`
/// (pointing towards the `m+` side).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpConfig {
    theta_plus: Angle,
    theta_minus: Angle,
    normal: UnitVec,
}

impl JumpConfig {
    pub fn new(theta_plus: f64, theta_minus: f64, normal: UnitVec) -> Result<Self> {
        let j = JumpConfig {
            theta_plus: Angle::new(theta_plus),
            theta_minus: Angle::new(theta_minus),
            normal,
        };
        let defect = normal.dot_xy(j.m_plus().minus(j.m_minus())).abs();
        if defect > ADMISSIBILITY_TOL {
            return Err(LabError::InadmissibleJump(defect));
        }
        Ok(j)
    }

    /// `m+- = e^{+-i beta}` across a vertical line with normal `e1`.
    pub fn symmetric(beta: f64) -> Self {
        Self::new(beta, -beta, UnitVec::E1).expect("symmetric jumps are admissible")
    }

    pub fn theta_plus(&self) -> Angle {
        self.theta_plus
    }

    pub fn theta_minus(&self) -> Angle {
        self.theta_minus
    }

    pub fn normal(&self) -> UnitVec {
        self.normal
    }

    pub fn m_plus(&self) -> UnitVec {
        self.theta_plus.unit()
    }

    pub fn m_minus(&self) -> UnitVec {
        self.theta_minus.unit()
    }

    /// `s = |m+ - m-|`.
    pub fn jump_size(&self) -> f64 {
        let d = self.m_plus().minus(self.m_minus());
        d[0].hypot(d[1])
    }

    /// Half of the angle between `m+` and `m-`, in `[0, pi/2]`.
    pub fn half_angle(&self) -> f64 {
        (self.jump_size() / 2.0).clamp(0.0, 1.0).asin()
    }

    pub fn swapped(&self) -> Self {
        JumpConfig {
            theta_plus: self.theta_minus,
            theta_minus: self.theta_plus,
            normal: self.normal,
        }
    }

    /// Rotates both states and the normal by `t`.
    pub fn rotated(&self, t: f64) -> Self {
        JumpConfig {
            theta_plus: Angle::new(self.theta_plus.value() + t),
            theta_minus: Angle::new(self.theta_minus.value() + t),
            normal: self.normal.rotate(t),
        }
    }
}

/// `(Phi(m+) - Phi(m-)) . nu`, the entropy production per unit jump length.
pub fn jump_pairing(phi: &Entropy, jump: &JumpConfig) -> f64 {
    let a = phi.eval_unit(jump.m_plus());
    let b = phi.eval_unit(jump.m_minus());
    jump.normal().dot_xy([a[0] - b[0], a[1] - b[1]])
}

/// Finite dictionary approximating `{Phi : |D^2 Phi| <= 1}`: the modes
/// `cos kt`, `sin kt` for `k = 2..=2K` and `n_random` random polynomials of
/// degree `<= 2K`, each rescaled to unit `c2_norm`. Entries that build to the
/// zero entropy (odd modes) are dropped.
pub fn entropy_dictionary(k_max: usize, n_random: usize, seed: u64) -> Vec<Entropy> {
    let d = 2 * k_max.max(1);
    let mut fs: Vec<TrigPolynomial> = Vec::new();
    for k in 2..=d {
        fs.push(TrigPolynomial::cos_mode(k));
        fs.push(TrigPolynomial::sin_mode(k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        let cos = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sin = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        fs.push(TrigPolynomial::new(rng.gen_range(-1.0..1.0), cos, sin));
    }
    fs.iter()
        .map(build_entropy)
        .filter(|e| e.c2_norm > 1e-9)
        .map(|e| {
            let c = 1.0 / e.c2_norm;
            e.scaled(c)
        })
        .collect()
}

/// The two distinguished Jin-Kohn frames `(e1, e2)` and its rotation by `pi/4`.
pub fn jin_kohn_pair() -> (Entropy, Entropy) {
    (jin_kohn(Angle::new(0.0)), jin_kohn(Angle::new(FRAC_PI_4)))
}

/// Samples circle functions into a custom entropy; exposed for callers that
/// only have pointwise formulas.
pub fn custom_from_fn<F: Fn(f64) -> [f64; 2]>(phi: F, m: usize) -> Result<Entropy> {
    let p = interpolate(|t| phi(t)[0], m)?;
    let q = interpolate(|t| phi(t)[1], m)?;
    Ok(Entropy::custom(p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn cos2_is_minus_half_jin_kohn() {
        let phi = build_entropy(&TrigPolynomial::cos_mode(2));
        let sigma = jin_kohn(Angle::new(0.0)).scaled(-0.5);
        assert!(phi.max_coeff_diff(&sigma) <= 1e-10);
        let phi = build_entropy(&TrigPolynomial::sin_mode(2));
        let sigma = jin_kohn(Angle::new(FRAC_PI_4)).scaled(-0.5);
        assert!(phi.max_coeff_diff(&sigma) <= 1e-10);
    }

    #[test]
    fn low_and_odd_modes_vanish() {
        assert!(build_entropy(&TrigPolynomial::cos_mode(1)).is_zero(1e-14));
        assert!(build_entropy(&TrigPolynomial::constant(3.0)).is_zero(1e-14));
        for k in 0..4 {
            let n = 2 * k + 1;
            assert!(build_entropy(&TrigPolynomial::cos_mode(n)).is_zero(1e-12));
            assert!(build_entropy(&TrigPolynomial::sin_mode(n)).is_zero(1e-12));
        }
        assert!(!build_entropy(&TrigPolynomial::cos_mode(4)).is_zero(1e-6));
    }

    #[test]
    fn jin_kohn_point_values() {
        let jk = jin_kohn(Angle::new(0.0));
        let v = jk.eval(0.0);
        assert!(v[0].abs() < 1e-15 && (v[1] - 4.0 / 3.0).abs() < 1e-15);
        let v = jk.eval(PI / 4.0);
        let want = 4.0 / 3.0 * (0.5f64.sqrt()).powi(3);
        assert!((v[0] - want).abs() < 1e-14 && (v[1] - want).abs() < 1e-14);
        assert!((want - 0.4714).abs() < 1e-4);
        for j in 0..50 {
            let t = j as f64 * 0.13;
            for alpha in [0.0, 0.3, 2.0] {
                let a = jin_kohn(Angle::new(alpha)).eval(t);
                let b = jin_kohn_direct(alpha, [t.cos(), t.sin()]);
                assert!((a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14);
            }
        }
        assert!(entropy_defect(&jk, 256).unwrap() <= 1e-10);
    }

    #[test]
    fn frame_decomposition() {
        let (s0, s1) = jin_kohn_pair();
        for alpha in [0.1, 0.7, FRAC_PI_4, 2.5, 5.0] {
            let lhs = jin_kohn(Angle::new(alpha));
            let rhs = Entropy::linear_combination(&[
                ((2.0 * alpha).cos(), &s0),
                ((2.0 * alpha).sin(), &s1),
            ]);
            assert!(lhs.max_coeff_diff(&rhs) < 1e-14);
        }
        let at_quarter = Entropy::linear_combination(&[
            ((PI / 2.0).cos(), &s0),
            ((PI / 2.0).sin(), &s1),
        ]);
        assert!(at_quarter.max_coeff_diff(&s1) < 1e-15);
    }

    #[test]
    fn defect_examples() {
        let identity = Entropy::custom(TrigPolynomial::cos_mode(1), TrigPolynomial::sin_mode(1));
        assert!(entropy_defect(&identity, 64).unwrap() < 1e-15);

        // oracle: dense sampling of 2 |sin 2t cos t|
        let oracle = (0..1_000_000)
            .map(|j| {
                let t = TAU * j as f64 / 1e6;
                2.0 * ((2.0 * t).sin() * t.cos()).abs()
            })
            .fold(0.0, f64::max);
        let bad = Entropy::custom(TrigPolynomial::cos_mode(2), TrigPolynomial::zero());
        let d = entropy_defect(&bad, 1 << 16).unwrap();
        assert!((d - oracle).abs() < 1e-6);
        assert!((d - 1.5396).abs() < 1e-4);
        assert!(entropy_defect(&bad, 10).is_err());
    }

    #[test]
    fn jump_admissibility() {
        assert!(JumpConfig::new(PI / 4.0, -PI / 4.0, UnitVec::E1).is_ok());
        assert!(matches!(
            JumpConfig::new(0.0, PI / 2.0, UnitVec::E1),
            Err(LabError::InadmissibleJump(_))
        ));
        let j = JumpConfig::symmetric(PI / 2.0);
        assert!((j.jump_size() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pairing_examples() {
        let phi = build_entropy(&TrigPolynomial::cos_mode(2));
        let same = JumpConfig::new(0.4, 0.4, UnitVec::E1).unwrap();
        assert_eq!(jump_pairing(&phi, &same), 0.0);
        for beta in [0.2, 0.7, 1.1, PI / 2.0] {
            let j = JumpConfig::symmetric(beta);
            let p = jump_pairing(&phi, &j);
            assert!((p.abs() - (2.0 * beta.sin()).powi(3) / 6.0).abs() < 1e-13);
        }
        let p = jump_pairing(&phi, &JumpConfig::symmetric(PI / 2.0));
        assert!((p.abs() - 4.0 / 3.0).abs() < 1e-13);
        let jk = jin_kohn(Angle::new(0.0));
        let p = jump_pairing(&jk, &JumpConfig::symmetric(PI / 2.0));
        assert!((p.abs() - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn dictionary_is_normalized() {
        let dict = entropy_dictionary(3, 5, 7);
        // cos/sin of k = 2, 4, 6 survive; k = 3, 5 build to zero
        assert_eq!(dict.len(), 6 + 5);
        for e in &dict {
            assert!((e.c2_norm - 1.0).abs() < 1e-12);
            assert!(entropy_defect(e, 256).unwrap() < 1e-8);
        }
    }

    #[test]
    fn c2_constant_is_finite() {
        for k in 2..8 {
            let c = c2_constant_estimate(&TrigPolynomial::cos_mode(k), 512);
            assert!(c.is_finite());
        }
    }

    fn arb_poly(d: usize) -> impl Strategy<Value = TrigPolynomial> {
        (
            -1.0..1.0f64,
            proptest::collection::vec(-1.0..1.0f64, d),
            proptest::collection::vec(-1.0..1.0f64, d),
        )
            .prop_map(|(a0, c, s)| TrigPolynomial::new(a0, c, s))
    }

    proptest! {
        #[test]
        fn pipeline_defect_small(f in arb_poly(8)) {
            let phi = build_entropy(&f);
            prop_assert!(entropy_defect(&phi, 512).unwrap() <= 1e-8);
        }

        #[test]
        fn pipeline_linear(f in arb_poly(8), g in arb_poly(5)) {
            let lhs = build_entropy(&(&f + &g));
            let rhs = Entropy::linear_combination(&[(1.0, &build_entropy(&f)), (1.0, &build_entropy(&g))]);
            prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12);
        }

        #[test]
        fn pairing_antisymmetric(f in arb_poly(6), beta in 0.0..1.5f64, rot in 0.0..6.3f64) {
            let phi = build_entropy(&f);
            let j = JumpConfig::symmetric(beta).rotated(rot);
            let a = jump_pairing(&phi, &j);
            let b = jump_pairing(&phi, &j.swapped());
            prop_assert!((a + b).abs() < 1e-12);
        }
    }
}
