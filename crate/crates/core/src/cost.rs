//! The jump cost `c(s)`: the profile `g_beta`, its sign change `t_beta`, the
//! closed form, and the duality with the entropy family `Phi_f`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circlegeom::{simpson_piecewise, TrigPolynomial, UnitVec};
use crate::entropy::build_entropy;
use crate::error::{LabError, Result};

fn offset(beta: f64) -> f64 {
    2.0 / PI * (beta.sin() - beta * beta.cos())
}

/// `(sin t - cos b) 1[pi/2 - b <= t <= pi/2 + b] - (2/pi)(sin b - b cos b)`
/// on `[0, pi]`, extended `pi`-periodically.
pub fn g_beta(beta: f64, t: f64) -> f64 {
    let t = t.rem_euclid(PI);
    let cap = if (t - FRAC_PI_2).abs() <= beta {
        t.sin() - beta.cos()
    } else {
        0.0
    };
    cap - offset(beta)
}

/// Root of `sin t - cos b = (2/pi)(sin b - b cos b)` in `[pi/2 - b, pi/2]`,
/// by bisection to `1e-12`.
pub fn t_beta(beta: f64) -> f64 {
    let target = beta.cos() + offset(beta);
    let (mut lo, mut hi) = (FRAC_PI_2 - beta, FRAC_PI_2);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if mid.sin() < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostPoint {
    pub beta: f64,
    pub s: f64,
    pub t_beta: f64,
    pub c_value: f64,
}

impl CostPoint {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2 * (1.0 + 1e-14)).contains(&beta) {
            return Err(LabError::OutOfRange(format!(
                "half-angle {beta} outside [0, pi/2]"
            )));
        }
        let beta = beta.min(FRAC_PI_2);
        let t = t_beta(beta);
        // cos t as sin(pi/2 - t) keeps the rounding of pi/2 out of small jumps.
        let u = FRAC_PI_2 - t;
        let c = 8.0 * (u.sin() - u * (beta.cos() + offset(beta)));
        Ok(CostPoint {
            beta,
            s: 2.0 * beta.sin(),
            t_beta: t,
            c_value: c.max(0.0),
        })
    }
}

fn beta_of(s: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&s) {
        return Err(LabError::OutOfRange(format!("jump size {s} outside [0, 2]")));
    }
    Ok((s / 2.0).asin())
}

/// `c(s) = ||g_beta||_{L^1(0, 2 pi)}` with `s = 2 sin beta`, from the closed
/// form.
pub fn cost(s: f64) -> Result<f64> {
    Ok(CostPoint::from_beta(beta_of(s)?)?.c_value)
}

/// `4 int_0^{pi/2} |g_beta|` by dense Simpson quadrature, split only where
/// the cap starts.
pub fn cost_by_quadrature(s: f64) -> Result<f64> {
    let beta = beta_of(s)?;
    Ok(4.0 * simpson_piecewise(|t| g_beta(beta, t).abs(), 0.0, FRAC_PI_2, &[FRAC_PI_2 - beta], 1 << 17))
}

/// `int_0^{2 pi} g_beta f` by Simpson split at the kinks of `g_beta`, with
/// about `samples` nodes in total.
pub fn g_pairing(beta: f64, f: &TrigPolynomial, samples: usize) -> f64 {
    let kinks = [
        FRAC_PI_2 - beta,
        FRAC_PI_2 + beta,
        3.0 * FRAC_PI_2 - beta,
        3.0 * FRAC_PI_2 + beta,
    ];
    simpson_piecewise(|t| g_beta(beta, t) * f.eval(t), 0.0, 2.0 * PI, &kinks, samples / 5)
}

/// `|e1 . (Phi_f(e^{i b}) - Phi_f(e^{-i b})) - int g_beta f|`.
pub fn pairing_identity_check(beta: f64, f: &TrigPolynomial, samples: usize) -> f64 {
    let phi = build_entropy(f);
    let left = phi.eval_unit(UnitVec::from_angle(beta))[0] - phi.eval_unit(UnitVec::from_angle(-beta))[0];
    (left - g_pairing(beta, f, samples)).abs()
}

/// Both sides of `2 c(s) >= s^3 / 3` per unit jump length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassStrictness {
    pub twice_cost: f64,
    pub cubic: f64,
    pub margin: f64,
}

pub fn mass_strictness_check(beta: f64) -> Result<MassStrictness> {
    if !(beta > 0.0) {
        return Err(LabError::OutOfRange(format!("half-angle {beta} must be positive")));
    }
    let p = CostPoint::from_beta(beta)?;
    let twice_cost = 2.0 * p.c_value;
    let cubic = p.s.powi(3) / 3.0;
    Ok(MassStrictness {
        twice_cost,
        cubic,
        margin: twice_cost - cubic,
    })
}

/// `samples` points `beta_k = k (pi/2) / samples`, `k = 1..=samples`.
pub fn cost_curve(samples: usize) -> Result<Vec<CostPoint>> {
    (1..=samples)
        .into_par_iter()
        .map(|k| CostPoint::from_beta(FRAC_PI_2 * k as f64 / samples as f64))
        .collect()
}

/// Fejer mean of degree `degree` of `sign(g_beta)`; bounded by 1 and
/// converging to the sign in `L^1`.
pub fn smoothed_sign(beta: f64, degree: usize) -> TrigPolynomial {
    let t = t_beta(beta);
    // sign(g) = -1 + 2 * 1[(t mod pi) in (t_b, pi - t_b)], pi-periodic, so
    // only even modes appear
    let (a, b) = (t, PI - t);
    let width = b - a;
    let a0 = -1.0 + 2.0 * 2.0 * width / (2.0 * PI);
    let mut cos = vec![0.0; degree];
    let sin = vec![0.0; degree];
    for k in (2..=degree).step_by(2) {
        let kf = k as f64;
        // (1/pi) int_0^{2pi} 2 1[..] cos kt = (2/pi) * 2 * int_a^b cos kt
        let ck = 4.0 / PI * ((kf * b).sin() - (kf * a).sin()) / kf;
        cos[k - 1] = ck * (1.0 - kf / (degree as f64 + 1.0));
    }
    TrigPolynomial::new(a0, cos, sin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::entropy_dictionary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g_examples() {
        for t in [0.0, 0.4, 1.5, 3.0] {
            assert_eq!(g_beta(0.0, t), 0.0);
        }
        assert!((g_beta(FRAC_PI_2, FRAC_PI_2) - (1.0 - 2.0 / PI)).abs() < 1e-15);
        for beta in [0.3, 0.8, 1.2] {
            let i = simpson_piecewise(|t| g_beta(beta, t), 0.0, FRAC_PI_2, &[FRAC_PI_2 - beta], 20_000);
            assert!(i.abs() < 1e-12, "{beta}: {i}");
        }
    }

    #[test]
    fn g_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let beta = rng.gen_range(0.0..FRAC_PI_2);
            let t = rng.gen_range(-10.0..10.0);
            let g = g_beta(beta, t);
            assert!((g - g_beta(beta, -t)).abs() < 1e-12);
            assert!((g - g_beta(beta, t + PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn t_beta_examples() {
        assert_eq!(t_beta(0.0), FRAC_PI_2);
        assert!((t_beta(FRAC_PI_2) - (2.0 / PI).asin()).abs() < 1e-11);
        let beta = 0.7;
        let t = t_beta(beta);
        assert!(t >= FRAC_PI_2 - beta && t <= FRAC_PI_2);
        for k in 1..100 {
            let u = t * k as f64 / 100.0;
            assert!(g_beta(beta, u) < 0.0);
            let v = t + (FRAC_PI_2 - t) * k as f64 / 100.0;
            assert!(g_beta(beta, v) > 0.0);
        }
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost(0.0).unwrap(), 0.0);
        let c2 = cost(2.0).unwrap();
        assert!((c2 - 1.6843).abs() < 1e-3);
        assert!((c2 - cost_by_quadrature(2.0).unwrap()).abs() < 1e-8);
        for s in [0.1, 0.5, 1.0, 1.5, 2.0] {
            let c = cost(s).unwrap();
            assert!(c > s.powi(3) / 6.0);
            assert!((c - cost_by_quadrature(s).unwrap()).abs() < 1e-8 * (1.0 + c));
        }
        assert!(cost(2.5).is_err() && cost(-0.1).is_err());
    }

    #[test]
    fn small_jump_asymptotics() {
        // ||g_b||_1 = (8/3) b^3 + O(b^5), so c(s) / s^3 -> 1/3
        for s in [1e-3f64, 1e-2, 0.05, 0.1] {
            let beta = (s / 2.0).asin();
            let c = cost(s).unwrap();
            assert!((c / (8.0 / 3.0 * beta.powi(3)) - 1.0).abs() < 0.05, "{s}: {c}");
            let q = cost_by_quadrature(s).unwrap();
            assert!((c / q - 1.0).abs() < 1e-6, "{s}: {c} vs {q}");
        }
    }

    #[test]
    fn cost_is_increasing() {
        let mut prev = -1.0;
        for k in 0..=1000 {
            let c = cost(2.0 * k as f64 / 1000.0).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn pairing_identity_examples() {
        let f = TrigPolynomial::cos_mode(2);
        let beta: f64 = 0.6;
        assert!(pairing_identity_check(beta, &f, 8192) < 1e-6);
        assert!((g_pairing(beta, &f, 8192).abs() - (2.0 * beta.sin()).powi(3) / 6.0).abs() < 1e-6);
        let f = TrigPolynomial::cos_mode(1);
        assert!(g_pairing(0.9, &f, 8192).abs() < 1e-9);
        assert!(pairing_identity_check(0.9, &f, 8192) < 1e-9);
        assert!(pairing_identity_check(1.0, &TrigPolynomial::sin_mode(4), 8192) < 1e-6);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let beta = rng.gen_range(0.0..FRAC_PI_2);
            let cos = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sin = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = TrigPolynomial::new(rng.gen_range(-1.0..1.0), cos, sin);
            assert!(pairing_identity_check(beta, &f, 8192) < 1e-6);
        }
    }

    #[test]
    fn mass_strictness_examples() {
        let m = mass_strictness_check(FRAC_PI_2).unwrap();
        assert!((m.twice_cost - 3.3686).abs() < 1e-3);
        assert!((m.cubic - 8.0 / 3.0).abs() < 1e-12);
        assert!((m.margin - 0.7020).abs() < 1e-3);
        assert!(mass_strictness_check(std::f64::consts::FRAC_PI_4).unwrap().margin > 0.0);
        let tiny = mass_strictness_check(1e-3).unwrap();
        assert!(tiny.margin > 0.0 && tiny.margin < 1e-8);
        assert!(mass_strictness_check(0.0).is_err());
    }

    #[test]
    fn duality_with_bounded_functions() {
        let beta = 0.9;
        let c = CostPoint::from_beta(beta).unwrap().c_value;
        for e in entropy_dictionary(3, 4, 9) {
            if let crate::entropy::EntropySource::Pipeline { f } = &e.source {
                let sup = f.sup_norm_sampled(4096);
                assert!(g_pairing(beta, f, 8192) / sup <= c * (1.0 + 1e-9));
            }
        }
        let mut last = 0.0;
        for degree in [16, 64, 256, 1024] {
            let f = smoothed_sign(beta, degree);
            assert!(f.sup_norm_sampled(8192) <= 1.0 + 1e-9);
            let v = pairing_identity_check(beta, &f, 1 << 16);
            assert!(v < 1e-6, "degree {degree}: {v}");
            last = g_pairing(beta, &f, 1 << 16);
        }
        assert!(last / c > 0.99 && last / c <= 1.0 + 1e-9, "{last} vs {c}");
    }

    #[test]
    fn curve_shape() {
        let curve = cost_curve(100).unwrap();
        assert_eq!(curve.len(), 100);
        assert!(curve.iter().all(|p| p.c_value > p.s.powi(3) / 6.0));
        assert!((curve[99].c_value - cost(2.0).unwrap()).abs() < 1e-12);
    }
}
