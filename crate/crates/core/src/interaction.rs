//! The kernel `phi`, the interaction quantity `Xi` with its closed form,
//! cubic coercivity, increment integrals on fields, and the Jin-Kohn
//! quartic diagnostics.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circlegeom::{x_minus_sin, UnitVec};
use crate::entropy::jin_kohn_direct;
use crate::error::{LabError, Result};
use crate::fields::{interior_range, AngleField};

/// `phi~(psi - theta)` with `phi~ = +1` on `(0, pi/2)` and `-1` on
/// `(pi/2, pi)` modulo `pi`, and `0` on the boundary angles.
pub fn phi_kernel(theta: f64, psi: f64) -> i8 {
    phi_tilde(psi - theta)
}

fn phi_tilde(omega: f64) -> i8 {
    let w = omega.rem_euclid(PI);
    if w == 0.0 || w == FRAC_PI_2 {
        0
    } else if w < FRAC_PI_2 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiBranch {
    Small,
    Large,
}

/// `Xi(e^{-i beta}, e^{i beta})` with its branch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiProfile {
    pub beta: f64,
    pub value: f64,
    pub branch: XiBranch,
}

impl XiProfile {
    pub fn new(beta: f64) -> Result<Self> {
        let value = xi_closed_form(beta)?;
        let branch = if beta <= FRAC_PI_4 {
            XiBranch::Small
        } else {
            XiBranch::Large
        };
        Ok(XiProfile {
            beta,
            value,
            branch,
        })
    }
}

/// `8 (2b - sin 2b)` for `b <= pi/4`, `8 (sin 2b + 2b - 2)` above.
pub fn xi_closed_form(beta: f64) -> Result<f64> {
    if !(0.0..=FRAC_PI_2 * (1.0 + 1e-14)).contains(&beta) {
        return Err(LabError::OutOfRange(format!(
            "half-angle {beta} outside [0, pi/2]"
        )));
    }
    Ok(if beta <= FRAC_PI_4 {
        xi_small_branch(beta)
    } else {
        xi_large_branch(beta)
    })
}

pub fn xi_small_branch(beta: f64) -> f64 {
    8.0 * x_minus_sin(2.0 * beta)
}

pub fn xi_large_branch(beta: f64) -> f64 {
    8.0 * ((2.0 * beta).sin() + 2.0 * beta - 2.0)
}

/// Half the angle between `m1` and `m2`, in `[0, pi/2]`.
pub fn half_angle(m1: UnitVec, m2: UnitVec) -> f64 {
    0.5 * m1.wedge(m2).abs().atan2(m1.dot(m2))
}

/// `Xi(m1, m2)` through the rotation reduction to a symmetric pair.
pub fn xi_general(m1: UnitVec, m2: UnitVec) -> f64 {
    xi_closed_form(half_angle(m1, m2).min(FRAC_PI_2)).expect("half-angle lies in [0, pi/2]")
}

/// Cell averages of `1_{e^{is} . m > 0}` over `M` angular cells
/// `[k w, (k+1) w)`.
fn maxwellian_cells(m: UnitVec, cells: usize) -> Vec<f64> {
    let w = TAU / cells as f64;
    let c = m.angle().value();
    let (a, b) = (c - FRAC_PI_2, c + FRAC_PI_2);
    (0..cells)
        .map(|k| {
            let (lo, hi) = (k as f64 * w, (k + 1) as f64 * w);
            let mut inside = 0.0;
            for shift in [-TAU, 0.0, TAU] {
                let l = lo.max(a + shift);
                let r = hi.min(b + shift);
                inside += (r - l).max(0.0);
            }
            inside / w
        })
        .collect()
}

/// `M x M` quadrature of
/// `iint phi(xi, eta) (xi ^ eta) D(xi) D(eta)`, `D = chi_{m1} - chi_{m2}`,
/// with cell-averaged Maxwellians and the kernel sampled at lattice angle
/// differences.
pub fn delta_quadrature(m1: UnitVec, m2: UnitVec, cells: usize) -> Result<f64> {
    if cells < 256 {
        return Err(LabError::InsufficientSampling(format!(
            "delta quadrature needs M >= 256, got {cells}"
        )));
    }
    let w = TAU / cells as f64;
    let a = maxwellian_cells(m1, cells);
    let b = maxwellian_cells(m2, cells);
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let kernel: Vec<f64> = (0..cells)
        .map(|k| {
            let om = k as f64 * w;
            f64::from(phi_tilde(om)) * om.sin()
        })
        .collect();
    let support: Vec<usize> = (0..cells).filter(|&j| d[j] != 0.0).collect();
    let total: f64 = support
        .par_iter()
        .map(|&j| {
            let inner: f64 = support
                .iter()
                .map(|&k| kernel[(k + cells - j) % cells] * d[k])
                .sum();
            d[j] * inner
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(total * w * w)
}

/// Result of scanning `Xi(beta) / (2 sin beta)^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoercivityScan {
    pub min_ratio: f64,
    pub argmin_beta: f64,
    /// Ratio at the smallest grid point, approximating the `beta -> 0` limit.
    pub small_beta_ratio: f64,
    pub endpoint_ratio: f64,
}

pub fn coercivity_ratio(beta: f64) -> Result<f64> {
    Ok(xi_closed_form(beta)? / (2.0 * beta.sin()).powi(3))
}

/// Scans `beta_k = k (pi/2) / K`, `k = 1..=K`.
pub fn coercivity_scan(samples: usize) -> Result<CoercivityScan> {
    if samples < 100 {
        return Err(LabError::InsufficientSampling(format!(
            "coercivity scan needs K >= 100, got {samples}"
        )));
    }
    let step = FRAC_PI_2 / samples as f64;
    let mut min_ratio = f64::INFINITY;
    let mut argmin_beta = f64::NAN;
    let mut first = f64::NAN;
    let mut last = f64::NAN;
    for k in 1..=samples {
        let beta = if k == samples { FRAC_PI_2 } else { step * k as f64 };
        let r = coercivity_ratio(beta)?;
        if k == 1 {
            first = r;
        }
        last = r;
        if r < min_ratio {
            min_ratio = r;
            argmin_beta = beta;
        }
    }
    Ok(CoercivityScan {
        min_ratio,
        argmin_beta,
        small_beta_ratio: first,
        endpoint_ratio: last,
    })
}

/// Integer cell displacement for the physical shift `h e`.
pub fn grid_displacement(field: &AngleField, h: f64, e: UnitVec) -> Result<(isize, isize)> {
    let dx = field.h();
    if h < 2.0 * dx * (1.0 - 1e-12) {
        return Err(LabError::Resolution(format!(
            "shift {h} is below two grid spacings ({})",
            2.0 * dx
        )));
    }
    let zx = h * e.x / dx;
    let zy = h * e.y / dx;
    let (rx, ry) = (zx.round(), zy.round());
    if (zx - rx).abs() > 1e-6 || (zy - ry).abs() > 1e-6 {
        return Err(LabError::Resolution(format!(
            "shift {h} along ({}, {}) is not a whole number of cells",
            e.x, e.y
        )));
    }
    Ok((rx as isize, ry as isize))
}

fn sum_over_window<F>(field: &AngleField, z: (isize, isize), margin: f64, f: F) -> f64
where
    F: Fn(UnitVec, UnitVec) -> f64 + Sync,
{
    let n = field.n();
    let (lo, hi) = interior_range(n, field.l(), margin);
    let cell = field.h() * field.h();
    (lo..hi)
        .into_par_iter()
        .map(|iy| {
            let jy = iy as isize + z.1;
            if jy < 0 || jy >= n as isize {
                return 0.0;
            }
            let mut acc = 0.0;
            for ix in lo..hi {
                let jx = ix as isize + z.0;
                if jx < 0 || jx >= n as isize {
                    continue;
                }
                if let (Some(a), Some(b)) = (field.unit(jx as usize, jy as usize), field.unit(ix, iy)) {
                    acc += f(a, b);
                }
            }
            acc * cell
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// `int_U Xi(m(x + h e), m(x)) dx`.
pub fn delta_field_integral(field: &AngleField, h: f64, e: UnitVec, margin: f64) -> Result<f64> {
    let z = grid_displacement(field, h, e)?;
    Ok(sum_over_window(field, z, margin, xi_general))
}

/// `int_U |D^{h e} m|^3`.
pub fn cubic_increment_integral(field: &AngleField, h: f64, e: UnitVec, margin: f64) -> Result<f64> {
    let z = grid_displacement(field, h, e)?;
    Ok(sum_over_window(field, z, margin, |a, b| {
        let d = a.minus(b);
        d[0].hypot(d[1]).powi(3)
    }))
}

/// `max over e in {e1, e2} of int_U |D^{h e} m|^4`.
pub fn quartic_increment_integral(field: &AngleField, h: f64, margin: f64) -> Result<f64> {
    let quartic = |a: UnitVec, b: UnitVec| {
        let d = a.minus(b);
        (d[0] * d[0] + d[1] * d[1]).powi(2)
    };
    let mut best: f64 = 0.0;
    for e in [UnitVec::E1, UnitVec::E2] {
        let z = grid_displacement(field, h, e)?;
        best = best.max(sum_over_window(field, z, margin, quartic));
    }
    Ok(best)
}

/// `2 x 2` matrix `[Sigma_{e1,e2}(m) | Sigma_{eps1,eps2}(m)]`, rows are the
/// output components.
pub fn jk_matrix(m: UnitVec) -> [[f64; 2]; 2] {
    let a = jin_kohn_direct(0.0, [m.x, m.y]);
    let b = jin_kohn_direct(FRAC_PI_4, [m.x, m.y]);
    [[a[0], b[0]], [a[1], b[1]]]
}

fn mat_sub(x: [[f64; 2]; 2], y: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [x[0][0] - y[0][0], x[0][1] - y[0][1]],
        [x[1][0] - y[1][0], x[1][1] - y[1][1]],
    ]
}

fn det(a: [[f64; 2]; 2]) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn frobenius(a: [[f64; 2]; 2]) -> f64 {
    (a[0][0].powi(2) + a[0][1].powi(2) + a[1][0].powi(2) + a[1][1].powi(2)).sqrt()
}

/// `det(X - Y) / |X - Y|^4` for `X = jk_matrix(m1)`, `Y = jk_matrix(m2)`.
pub fn quartic_ratio(t1: f64, t2: f64) -> f64 {
    let d = mat_sub(jk_matrix(UnitVec::from_angle(t1)), jk_matrix(UnitVec::from_angle(t2)));
    det(d) / frobenius(d).powi(4)
}

/// Smallest singular values along the curve `t -> jk_matrix(e^{it})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImmersionCheck {
    /// `min_t |d/dt jk_matrix(e^{it})|`.
    pub min_speed: f64,
    /// `min_t` of the second singular value of the `4 x 2` Jacobian of the
    /// cubic extension `z -> (Sigma_0(z), Sigma_{pi/4}(z))` at `z = e^{it}`.
    pub min_extension_singular: f64,
}

pub fn immersion_check(samples: usize) -> ImmersionCheck {
    let mut min_speed = f64::INFINITY;
    let mut min_sing = f64::INFINITY;
    for k in 0..samples {
        let t = TAU * k as f64 / samples as f64;
        let j = extension_jacobian(t);
        // tangent e^{it} rotated: (-sin t, cos t)
        let (s, c) = t.sin_cos();
        let speed = j
            .iter()
            .map(|row| (row[0] * -s + row[1] * c).powi(2))
            .sum::<f64>()
            .sqrt();
        min_speed = min_speed.min(speed);
        // J^T J
        let mut g = [[0.0; 2]; 2];
        for row in &j {
            for a in 0..2 {
                for b in 0..2 {
                    g[a][b] += row[a] * row[b];
                }
            }
        }
        let tr = g[0][0] + g[1][1];
        let dt = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let lam_min = 0.5 * (tr - (tr * tr - 4.0 * dt).max(0.0).sqrt());
        min_sing = min_sing.min(lam_min.max(0.0).sqrt());
    }
    ImmersionCheck {
        min_speed,
        min_extension_singular: min_sing,
    }
}

/// Rows: the four entries of `jk_matrix`, columns: `d/dz1`, `d/dz2`.
fn extension_jacobian(t: f64) -> [[f64; 2]; 4] {
    let z = [t.cos(), t.sin()];
    let mut rows = [[0.0; 2]; 4];
    for (col, alpha) in [0.0, FRAC_PI_4].into_iter().enumerate() {
        let a1 = [alpha.cos(), alpha.sin()];
        let a2 = [-alpha.sin(), alpha.cos()];
        let p1 = z[0] * a1[0] + z[1] * a1[1];
        let p2 = z[0] * a2[0] + z[1] * a2[1];
        // d/dz of 4/3 ((z.a2)^3 a1 + (z.a1)^3 a2)
        for comp in 0..2 {
            for var in 0..2 {
                rows[comp * 2 + col][var] =
                    4.0 * (p2 * p2 * a1[comp] * a2[var] + p1 * p1 * a2[comp] * a1[var]);
            }
        }
    }
    rows
}

/// Minimum of [`quartic_ratio`] over sampled pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticScan {
    pub min_ratio: f64,
    pub argmin: (f64, f64),
    pub pairs: usize,
    pub all_positive: bool,
}

/// Smallest angular separation sampled.
pub const QUARTIC_MIN_SEPARATION: f64 = 1e-3;

/// Half the pairs on a uniform grid of `[0, 2 pi)^2`, half near the
/// diagonal with log-spaced separations in `[1e-3, 0.5]`.
pub fn jk_quartic_scan(pairs: usize) -> Result<QuarticScan> {
    if pairs < 10_000 {
        return Err(LabError::InsufficientSampling(format!(
            "quartic scan needs K >= 10^4 pairs, got {pairs}"
        )));
    }
    let side = ((pairs / 2) as f64).sqrt().ceil() as usize;
    let grid = (0..side).into_par_iter().flat_map_iter(move |i| {
        let t1 = TAU * i as f64 / side as f64;
        (0..side).filter_map(move |j| {
            let t2 = TAU * j as f64 / side as f64;
            let sep = (t2 - t1).rem_euclid(TAU);
            (sep.min(TAU - sep) >= QUARTIC_MIN_SEPARATION).then_some((t1, t2))
        })
    });
    let (lmin, lmax) = (QUARTIC_MIN_SEPARATION.ln(), 0.5f64.ln());
    let near = (0..side).into_par_iter().flat_map_iter(move |i| {
        let t1 = TAU * (i as f64 + 0.5) / side as f64;
        (0..side).map(move |j| {
            let sep = (lmin + (lmax - lmin) * j as f64 / (side - 1) as f64).exp();
            (t1, t1 + sep)
        })
    });
    let (count, min_ratio, argmin, all_positive) = grid
        .chain(near)
        .map(|(a, b)| {
            let r = quartic_ratio(a, b);
            (1usize, r, (a, b), r > 0.0)
        })
        .reduce(
            || (0, f64::INFINITY, (f64::NAN, f64::NAN), true),
            |x, y| {
                let (r, arg) = if x.1 <= y.1 { (x.1, x.2) } else { (y.1, y.2) };
                (x.0 + y.0, r, arg, x.3 && y.3)
            },
        );
    Ok(QuarticScan {
        min_ratio,
        argmin,
        pairs: count,
        all_positive,
    })
}
