//! The acceptance suite: eleven criteria, each a list of numeric checks with
//! explicit pass bands, evaluated at the resolutions of an
//! [`ExperimentConfig`].

use crate::circlegeom::{Angle, TrigPolynomial, UnitVec};
use crate::config::ExperimentConfig;
use crate::cost::{cost, cost_by_quadrature, cost_curve, g_beta, pairing_identity_check};
use crate::entropy::{build_entropy, entropy_defect, jin_kohn, JumpConfig};
use crate::error::Result;
use crate::fields::{make_jump_field, make_smooth_field, make_vortex_field, AngleField};
use crate::interaction::{
    coercivity_scan, delta_field_integral, delta_quadrature, jk_quartic_scan, quartic_increment_integral,
    xi_closed_form, xi_general, xi_large_branch, xi_small_branch,
};
use crate::kinetic::{default_bump, kinetic_residual, low_mode_pairings, sigma_jump, KineticMeasure};
use crate::production::{
    besov_profile, coarse_block_cells, defect_probe, entropy_production_in, fit_exponent, grad_cubed_probe,
    production_from_projected, GridMeasure, LubAccumulator, ProjectedField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI, TAU};
use std::time::Instant;

/// `(id, name, runtime budget in seconds)`.
pub const CRITERIA: [(u8, &str, f64); 11] = [
    (1, "closed-form interaction", 10.0),
    (2, "cubic coercivity", 5.0),
    (3, "interaction decay in h", 60.0),
    (4, "mollification scalings", 120.0),
    (5, "entropy pipeline", 5.0),
    (6, "jump production", 120.0),
    (7, "cost function", 10.0),
    (8, "kinetic formulation on jumps", 60.0),
    (9, "vortex has no production", 60.0),
    (10, "quartic determinant bound", 120.0),
    (11, "Besov consistency", 120.0),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable pass band.
    pub target: String,
    pub passed: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, target: String, passed: bool) -> Self {
        Check {
            name: name.into(),
            value,
            target,
            passed: passed && !value.is_nan(),
        }
    }

    fn abs(name: impl Into<String>, value: f64, want: f64, tol: f64) -> Self {
        Check::new(name, value, format!("{want} +- {tol:e}"), (value - want).abs() <= tol)
    }

    fn rel(name: impl Into<String>, value: f64, want: f64, tol: f64) -> Self {
        Check::new(
            name,
            value,
            format!("{want} within {:.3}%", 100.0 * tol),
            (value / want - 1.0).abs() <= tol,
        )
    }

    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(name, value, format!("<= {bound:e}"), value <= bound)
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check::new(name, value, format!(">= {bound}"), value >= bound)
    }

    fn band(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check::new(name, value, format!("in [{lo:.6}, {hi:.6}]"), (lo..=hi).contains(&value))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
    pub budget_s: f64,
    /// Set when the criterion could not be evaluated.
    pub error: Option<String>,
}

impl CriterionReport {
    /// `PASS  6 jump production (12.3 s)`, with the failing checks appended.
    pub fn summary_line(&self) -> String {
        let mut line = format!(
            "{} {:>2} {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.runtime_s
        );
        if let Some(e) = &self.error {
            line.push_str(&format!(": error: {e}"));
        }
        let failing: Vec<&Check> = self.checks.iter().filter(|c| !c.passed).collect();
        if let Some(c) = failing.first() {
            line.push_str(&format!(": {} = {:.6e}, want {}", c.name, c.value, c.target));
        }
        if failing.len() > 1 {
            line.push_str(&format!(" (+{} more failing checks)", failing.len() - 1));
        }
        line
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub passed: bool,
    pub n: usize,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
}

pub fn run_all(cfg: &ExperimentConfig) -> AcceptanceReport {
    let criteria: Vec<_> = CRITERIA.iter().map(|c| run_criterion(c.0, cfg)).collect();
    AcceptanceReport {
        passed: criteria.iter().all(|c| c.passed),
        n: cfg.n,
        seed: cfg.seed,
        criteria,
    }
}

/// Runs criterion `id` (1..=11); panics on any other id.
pub fn run_criterion(id: u8, cfg: &ExperimentConfig) -> CriterionReport {
    let &(_, name, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .unwrap_or_else(|| panic!("no criterion {id}"));
    let start = Instant::now();
    let result = match id {
        1 => closed_form_xi(cfg),
        2 => coercivity(cfg),
        3 => delta_decay(cfg),
        4 => mollification_scalings(cfg),
        5 => entropy_pipeline(cfg),
        6 => jump_production(cfg),
        7 => cost_function(cfg),
        8 => kinetic_jumps(cfg),
        9 => vortex(cfg),
        10 => quartic_bound(cfg),
        _ => besov(cfg),
    };
    let runtime_s = start.elapsed().as_secs_f64();
    let (mut checks, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    checks.push(Check::new("runtime (s)", runtime_s, format!("< {budget}"), runtime_s < budget));
    CriterionReport {
        id,
        name: name.into(),
        passed: error.is_none() && checks.iter().all(|c| c.passed),
        checks,
        runtime_s,
        budget_s: budget,
        error,
    }
}

fn rng_for(cfg: &ExperimentConfig, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ (u64::from(id) << 56))
}

fn jump_field(beta: f64, n: usize, cfg: &ExperimentConfig) -> AngleField {
    make_jump_field(&JumpConfig::symmetric(beta), [0.5 * cfg.l, 0.5 * cfg.l], n, cfg.l)
}

fn random_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> TrigPolynomial {
    let d = rng.gen_range(1..=max_degree);
    let cos = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let sin = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TrigPolynomial::new(rng.gen_range(-1.0..1.0), cos, sin)
}

/// Smallest ratio between successive entries of a refinement sequence.
fn worst_decay(values: &[f64]) -> f64 {
    values.windows(2).map(|w| w[0] / w[1]).fold(f64::INFINITY, f64::min)
}

fn closed_form_xi(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let mut checks = vec![
        Check::abs("Xi(pi/4)", xi_closed_form(FRAC_PI_4)?, 8.0 * (FRAC_PI_2 - 1.0), tol.xi_exact),
        Check::at_most(
            "branch gap at pi/4",
            (xi_small_branch(FRAC_PI_4) - xi_large_branch(FRAC_PI_4)).abs(),
            tol.xi_exact,
        ),
    ];
    let mut rng = rng_for(cfg, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let a = rng.gen_range(0.0..TAU);
        let beta = rng.gen_range(0.1..FRAC_PI_2);
        let (m1, m2) = (UnitVec::from_angle(a + beta), UnitVec::from_angle(a - beta));
        let exact = xi_general(m1, m2);
        let quad = delta_quadrature(m1, m2, cfg.delta_cells)?;
        worst = worst.max((quad / exact - 1.0).abs());
    }
    checks.push(Check::at_most(
        format!("max relative quadrature error, 50 pairs, M = {}", cfg.delta_cells),
        worst,
        tol.delta_quadrature_rel,
    ));
    Ok(checks)
}

fn coercivity(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let scan = coercivity_scan(cfg.coercivity_samples)?;
    Ok(vec![
        Check::at_least("min Xi / (2 sin b)^3", scan.min_ratio, 1.0),
        Check::rel("ratio as b -> 0", scan.small_beta_ratio, 4.0 / 3.0, tol.coercivity_limit_rel),
        Check::abs("ratio at b = pi/2", scan.endpoint_ratio, PI - 2.0, tol.coercivity_endpoint),
    ])
}

fn delta_decay(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let f = jump_field(FRAC_PI_4, cfg.n, cfg);
    let pairs = cfg
        .h
        .iter()
        .map(|&h| Ok((h, delta_field_integral(&f, h, UnitVec::E1, cfg.margin)?)))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_exponent(&pairs)?;
    Ok(vec![Check::abs("exponent of h -> int Delta", fit.slope, 1.0, cfg.tolerances.exponent)])
}

fn mollification_scalings(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let f = jump_field(FRAC_PI_4, cfg.n, cfg);
    let mut grad = Vec::new();
    let mut def = Vec::new();
    for &eps in &cfg.eps {
        grad.push((eps, grad_cubed_probe(&f, eps, cfg.margin)?));
        def.push((eps, defect_probe(&f, eps, cfg.margin)?));
    }
    let tol = cfg.tolerances.probe_exponent;
    Ok(vec![
        Check::abs("exponent of |grad m_eps|^3", fit_exponent(&grad)?.slope, -2.0, tol),
        Check::abs("exponent of (1 - |m_eps|^2)", fit_exponent(&def)?.slope, 1.0, tol),
    ])
}

fn entropy_pipeline(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let phi = build_entropy(&TrigPolynomial::cos_mode(2));
    let jk = jin_kohn(Angle::new(0.0)).scaled(-0.5);
    let mut rng = rng_for(cfg, 5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let e = build_entropy(&random_poly(&mut rng, 8));
        worst = worst.max(entropy_defect(&e, 256)?);
    }
    let mut odd: f64 = 0.0;
    for k in [1, 3, 5, 7, 9] {
        for f in [TrigPolynomial::cos_mode(k), TrigPolynomial::sin_mode(k)] {
            let e = build_entropy(&f);
            odd = odd.max(e.p.max_abs_coeff()).max(e.q.max_abs_coeff());
        }
    }
    Ok(vec![
        Check::at_most("max coefficient gap Phi_cos2t vs -Sigma/2", phi.max_coeff_diff(&jk), tol.coefficient),
        Check::at_most("max entropy defect, 100 random f", worst, tol.entropy_defect),
        Check::at_most("largest coefficient from odd modes", odd, tol.coefficient),
    ])
}

fn jump_production(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = cfg.tolerances.production_rel;
    let n = cfg.n;
    let eps = 4.0 * cfg.cell();
    let cos2 = build_entropy(&TrigPolynomial::cos_mode(2));
    let (jk0, jk1) = (jin_kohn(Angle::new(0.0)), jin_kohn(Angle::new(FRAC_PI_4)));
    let mut checks = Vec::new();
    for (label, beta) in [("pi/6", FRAC_PI_6), ("pi/4", FRAC_PI_4), ("pi/2", FRAC_PI_2)] {
        let f = jump_field(beta, n, cfg);
        let proj = ProjectedField::new(&f, eps)?;
        let mu = production_from_projected(&proj, &cos2, cfg.margin);
        let cubic = (2.0 * beta.sin()).powi(3);
        checks.push(Check::rel(
            format!("b = {label}: |div Phi_cos2t| per length"),
            mu.total_variation() / mu.window_side(),
            cubic / 6.0,
            tol,
        ));
        // the 64 frames are linear in (Sigma_0, Sigma_pi/4)
        let s0 = production_from_projected(&proj, &jk0, cfg.margin);
        let s1 = production_from_projected(&proj, &jk1, cfg.margin);
        let mut acc = LubAccumulator::new(n, cfg.l, cfg.margin, coarse_block_cells(eps, n, cfg.l));
        for k in 0..64 {
            let a = k as f64 * PI / 128.0;
            acc.push(&GridMeasure::linear_combination(&[((2.0 * a).cos(), &s0), ((2.0 * a).sin(), &s1)])?)?;
        }
        checks.push(Check::rel(
            format!("b = {label}: lub of 64 frames per length"),
            acc.coarse_total_variation() / s0.window_side(),
            cubic / 3.0,
            tol,
        ));
    }
    Ok(checks)
}

fn cost_function(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let mut checks = vec![
        Check::abs("c(2), closed form", cost(2.0)?, 1.6843, tol.cost_abs),
        Check::abs("c(2), |g_b| quadrature", cost_by_quadrature(2.0)?, 1.6843, tol.cost_abs),
    ];
    let curve = cost_curve(cfg.cost_samples)?;
    let margin = curve
        .iter()
        .map(|p| p.c_value - p.s.powi(3) / 6.0)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        format!("min c(s) - s^3/6 over {} points", curve.len()),
        margin,
        "> 0".into(),
        margin > 0.0,
    ));
    let (lo, hi) = (
        (1.0 - tol.cost_asymptotic_rel) / 6.0,
        (1.0 + tol.cost_asymptotic_rel) / 6.0,
    );
    for k in 1..=10 {
        let s = 0.01 * k as f64;
        checks.push(Check::band(format!("c({s:.2}) / s^3"), cost(s)? / s.powi(3), lo, hi));
    }
    let mut rng = rng_for(cfg, 7);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let beta = rng.gen_range(0.0..FRAC_PI_2);
        let f = random_poly(&mut rng, 8);
        worst = worst.max(pairing_identity_check(beta, &f, 8192));
    }
    checks.push(Check::at_most("max pairing identity gap, 20 draws", worst, tol.pairing_identity));
    Ok(checks)
}

fn kinetic_jumps(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let m = cfg.angular_samples;
    let mut checks = Vec::new();
    for (label, beta) in [("pi/6", FRAC_PI_6), ("pi/4", FRAC_PI_4), ("pi/2", FRAC_PI_2)] {
        let s = sigma_jump(&JumpConfig::symmetric(beta), m)?;
        let (dist, _) = s.l1_distance_up_to_sign(|t| g_beta(beta, t));
        checks.push(Check::at_most(format!("b = {label}: L1(sigma, +-g_b), M = {m}"), dist, tol.sigma_l1));
    }
    let jump = JumpConfig::symmetric(0.9);
    let s = sigma_jump(&jump, m)?;
    let line = KineticMeasure::Line {
        density: &s,
        point: [0.5 * cfg.l, 0.5 * cfg.l],
        normal: UnitVec::E1,
    };
    let psi = TrigPolynomial::new(0.0, vec![0.0, 1.0, 0.3], vec![0.0, -0.5, 0.8]);
    let zeta = default_bump();
    zeta.check_inside(cfg.l, cfg.margin)?;
    let mut residuals = Vec::new();
    let mut low: f64 = 0.0;
    for &n in &cfg.ladder {
        let f = make_jump_field(&jump, [0.5 * cfg.l, 0.5 * cfg.l], n, cfg.l);
        residuals.push(kinetic_residual(&f, &line, &zeta, &psi));
        low = low.max(low_mode_pairings(&f, &zeta).iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    checks.push(Check::at_least("worst residual decay per doubling", worst_decay(&residuals), tol.kinetic_ratio));
    checks.push(Check::at_most("max |<nu, zeta psi>|, psi in {1, cos, sin}", low, tol.low_mode));
    Ok(checks)
}

fn vortex(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = cfg.tolerances.vortex_ratio;
    let cos2 = build_entropy(&TrigPolynomial::cos_mode(2));
    let psi = TrigPolynomial::new(0.0, vec![0.0, 1.0, 0.3], vec![0.0, -0.5, 0.8]);
    let zeta = default_bump();
    let mut tv = Vec::new();
    let mut res = Vec::new();
    for &n in &cfg.ladder {
        let f = make_vortex_field([0.5 * cfg.l, 0.5 * cfg.l], true, n, cfg.l)?;
        let eps = 4.0 * cfg.l / n as f64;
        tv.push(entropy_production_in(&f, &cos2, eps, cfg.margin)?.total_variation());
        res.push(kinetic_residual(&f, &KineticMeasure::Zero, &zeta, &psi));
    }
    Ok(vec![
        Check::at_least("worst production decay per doubling", worst_decay(&tv), tol),
        Check::at_least("worst residual decay per doubling (sigma = 0)", worst_decay(&res), tol),
    ])
}

fn quartic_bound(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let a = jk_quartic_scan(cfg.quartic_pairs)?;
    let b = jk_quartic_scan(2 * cfg.quartic_pairs)?;
    let f = jump_field(FRAC_PI_4, cfg.n, cfg);
    let pairs = cfg
        .h
        .iter()
        .map(|&h| Ok((h, quartic_increment_integral(&f, h, cfg.margin)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(vec![
        Check::new(
            format!("min det / |X - Y|^4 over {} pairs", a.pairs),
            a.min_ratio,
            "> 0".into(),
            a.min_ratio > 0.0 && a.all_positive,
        ),
        Check::at_most(
            "relative change under doubling",
            (b.min_ratio / a.min_ratio - 1.0).abs(),
            cfg.tolerances.quartic_rel,
        ),
        Check::abs("exponent of h -> int |D^h m|^4", fit_exponent(&pairs)?.slope, 1.0, cfg.tolerances.exponent),
    ])
}

fn besov(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let tol = &cfg.tolerances;
    let n = cfg.besov_n.min(cfg.n);
    let jump = besov_profile(&jump_field(FRAC_PI_4, n, cfg), cfg.margin, &cfg.besov_t)?;
    let max = jump.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = jump.iter().copied().fold(f64::INFINITY, f64::min);
    let smooth = besov_profile(&make_smooth_field(2.0, n, cfg.l), cfg.margin, &cfg.besov_t)?;
    let pairs: Vec<_> = cfg.besov_t.iter().copied().zip(smooth).collect();
    Ok(vec![
        Check::at_most("jump: max / min of N_t", max / min, tol.besov_flatness),
        Check::abs("smooth: exponent of N_t", fit_exponent(&pairs)?.slope, 2.0 / 3.0, tol.besov_exponent),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_bands() {
        assert!(Check::abs("a", 1.0005, 1.0, 1e-3).passed);
        assert!(!Check::rel("a", 1.1, 1.0, 0.05).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
        assert!(Check::band("a", 0.5, 0.0, 1.0).passed);
    }

    #[test]
    fn reports_carry_failures() {
        let r = run_criterion(2, &ExperimentConfig::default());
        assert!(r.passed, "{}", r.summary_line());
        assert!(r.summary_line().starts_with("PASS  2 cubic coercivity"));
        let cfg = ExperimentConfig {
            coercivity_samples: 10,
            ..Default::default()
        };
        let r = run_criterion(2, &cfg);
        assert!(!r.passed && r.error.is_some());
    }

    #[test]
    fn decay_ratio() {
        assert_eq!(worst_decay(&[8.0, 4.0, 1.0]), 2.0);
    }
}
