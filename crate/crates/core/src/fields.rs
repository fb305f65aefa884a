//! Grid-sampled unit fields on the square `[0, L]^2`.
//!
//! Cells are indexed row-major, `idx = iy * n + ix`, with centers at
//! `((ix + 1/2) h, (iy + 1/2) h)` and `h = L / n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::circlegeom::UnitVec;
use crate::entropy::{JumpConfig, ADMISSIBILITY_TOL};
use crate::error::{LabError, Result};
use crate::fft;

/// Default width of the boundary layer excluded from interior integrals, as
/// a fraction of `L`.
pub const DEFAULT_MARGIN: f64 = 0.15;

/// Stencil radius above which mollification switches to FFT correlation.
const DIRECT_STENCIL_MAX_RADIUS: usize = 8;

/// Angle field with a mask of cells where the field is undefined.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleField {
    n: usize,
    l: f64,
    theta: Vec<f64>,
    mask: Vec<bool>,
}

impl AngleField {
    pub fn new(n: usize, l: f64, theta: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if n == 0 || !(l > 0.0) {
            return Err(LabError::Config(format!("empty grid n = {n}, l = {l}")));
        }
        if theta.len() != n * n || mask.len() != n * n {
            return Err(LabError::GridMismatch(format!(
                "expected {} cells, got {} angles and {} mask entries",
                n * n,
                theta.len(),
                mask.len()
            )));
        }
        Ok(AngleField { n, l, theta, mask })
    }

    /// Samples `f(x, y)` at cell centers; `None` masks the cell.
    pub fn from_fn<F>(n: usize, l: f64, f: F) -> Self
    where
        F: Fn(f64, f64) -> Option<f64> + Sync,
    {
        let h = l / n as f64;
        let cells: Vec<Option<f64>> = (0..n * n)
            .into_par_iter()
            .map(|i| {
                let (ix, iy) = (i % n, i / n);
                f((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h)
            })
            .collect();
        let mask = cells.iter().map(Option::is_none).collect();
        let theta = cells.into_iter().map(|c| c.unwrap_or(0.0)).collect();
        AngleField { n, l, theta, mask }
    }

    pub fn constant(n: usize, l: f64, theta: f64) -> Self {
        Self::from_fn(n, l, |_, _| Some(theta))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Grid spacing `h = L / n`.
    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn center(&self, ix: usize, iy: usize) -> [f64; 2] {
        let h = self.h();
        [(ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h]
    }

    pub fn unit(&self, ix: usize, iy: usize) -> Option<UnitVec> {
        let i = iy * self.n + ix;
        (!self.mask[i]).then(|| UnitVec::from_angle(self.theta[i]))
    }

    /// Cartesian components; masked cells hold `NaN`.
    pub fn components(&self) -> (Vec<f64>, Vec<f64>) {
        self.theta
            .iter()
            .zip(&self.mask)
            .map(|(&t, &m)| {
                if m {
                    (f64::NAN, f64::NAN)
                } else {
                    let (s, c) = t.sin_cos();
                    (c, s)
                }
            })
            .unzip()
    }

    /// Rotates the grid by `+90` degrees about the center of the square,
    /// rotating the field values with it: `m'(R x) = R m(x)`.
    pub fn rotate90(&self) -> AngleField {
        let n = self.n;
        let mut theta = vec![0.0; n * n];
        let mut mask = vec![false; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let (jx, jy) = (n - 1 - iy, ix);
                theta[jy * n + jx] = self.theta[iy * n + ix] + PI / 2.0;
                mask[jy * n + jx] = self.mask[iy * n + ix];
            }
        }
        AngleField {
            n,
            l: self.l,
            theta,
            mask,
        }
    }

    /// Translates the field by whole cells; vacated cells are masked.
    pub fn translate(&self, sx: isize, sy: isize) -> AngleField {
        let n = self.n as isize;
        let mut theta = vec![0.0; self.theta.len()];
        let mut mask = vec![true; self.mask.len()];
        for iy in 0..n {
            for ix in 0..n {
                let (ox, oy) = (ix - sx, iy - sy);
                if ox >= 0 && oy >= 0 && ox < n && oy < n {
                    let src = (oy * n + ox) as usize;
                    let dst = (iy * n + ix) as usize;
                    theta[dst] = self.theta[src];
                    mask[dst] = self.mask[src];
                }
            }
        }
        AngleField {
            n: self.n,
            l: self.l,
            theta,
            mask,
        }
    }
}

/// Plane-valued grid field, e.g. a mollified or incremented unit field.
#[derive(Clone, Debug, PartialEq)]
pub struct VecField {
    pub n: usize,
    pub l: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Cells where the value is defined.
    pub valid: Vec<bool>,
    /// Mollification radius, when produced by [`mollify`].
    pub eps: Option<f64>,
}

impl VecField {
    pub fn norm(&self, i: usize) -> f64 {
        self.x[i].hypot(self.y[i])
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    /// Largest `|v|` over valid cells.
    pub fn max_norm(&self) -> f64 {
        (0..self.x.len())
            .filter(|&i| self.valid[i])
            .map(|i| self.norm(i))
            .fold(0.0, f64::max)
    }
}

/// Radial kernel: 1 on `[0, eps/2]`, a smooth bump `exp(1 - 1/(1 - s^2))`
/// on `[eps/2, eps)`, zero beyond; normalized on the discrete stencil.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    eps: f64,
    radius: usize,
    weights: Vec<f64>,
}

impl Mollifier {
    pub fn new(eps: f64, n: usize, l: f64) -> Result<Self> {
        let h = l / n as f64;
        if !(eps >= 2.0 * h * (1.0 - 1e-12)) {
            return Err(LabError::Resolution(format!(
                "mollifier radius {eps} is below two grid spacings ({})",
                2.0 * h
            )));
        }
        let radius = (eps / h - 1e-9).ceil() as usize;
        let w = 2 * radius + 1;
        let mut weights = vec![0.0; w * w];
        for dy in 0..w {
            for dx in 0..w {
                let ox = dx as f64 - radius as f64;
                let oy = dy as f64 - radius as f64;
                weights[dy * w + dx] = Self::profile(ox.hypot(oy) * h, eps);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|v| *v /= total);
        Ok(Mollifier {
            eps,
            radius,
            weights,
        })
    }

    /// Unnormalized radial profile at distance `u`.
    pub fn profile(u: f64, eps: f64) -> f64 {
        let half = eps / 2.0;
        if u <= half {
            1.0
        } else if u < eps {
            let s = (u - half) / half;
            (1.0 - 1.0 / (1.0 - s * s)).exp()
        } else {
            0.0
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Stencil half-width `r = ceil(eps / h)`.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, ox: isize, oy: isize) -> f64 {
        let r = self.radius as isize;
        if ox.abs() > r || oy.abs() > r {
            return 0.0;
        }
        let w = 2 * self.radius + 1;
        self.weights[(oy + r) as usize * w + (ox + r) as usize]
    }
}

/// `m * rho_eps`, excluding masked cells and cells outside the square and
/// renormalizing the remaining weights.
pub fn mollify(field: &AngleField, moll: &Mollifier) -> Result<VecField> {
    if moll.eps < 2.0 * field.h() * (1.0 - 1e-12) {
        return Err(LabError::Resolution(format!(
            "mollifier radius {} is below two grid spacings",
            moll.eps
        )));
    }
    if moll.radius > DIRECT_STENCIL_MAX_RADIUS {
        Ok(mollify_fft(field, moll))
    } else {
        Ok(mollify_direct(field, moll))
    }
}

/// Direct stencil sum; the reference implementation.
pub fn mollify_direct(field: &AngleField, moll: &Mollifier) -> VecField {
    let n = field.n;
    let r = moll.radius as isize;
    let w = 2 * moll.radius + 1;
    let (cx, cy) = field.components();
    let rows: Vec<Vec<(f64, f64, bool)>> = (0..n)
        .into_par_iter()
        .map(|iy| {
            (0..n)
                .map(|ix| {
                    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
                    for oy in -r..=r {
                        let jy = iy as isize + oy;
                        if jy < 0 || jy >= n as isize {
                            continue;
                        }
                        let row = (oy + r) as usize * w;
                        for ox in -r..=r {
                            let jx = ix as isize + ox;
                            if jx < 0 || jx >= n as isize {
                                continue;
                            }
                            let j = jy as usize * n + jx as usize;
                            if field.mask[j] {
                                continue;
                            }
                            let wt = moll.weights[row + (ox + r) as usize];
                            sx += wt * cx[j];
                            sy += wt * cy[j];
                            sw += wt;
                        }
                    }
                    if sw > 0.0 {
                        (sx / sw, sy / sw, true)
                    } else {
                        (0.0, 0.0, false)
                    }
                })
                .collect()
        })
        .collect();
    collect_vec_field(n, field.l, moll.eps, rows.into_iter().flatten())
}

fn mollify_fft(field: &AngleField, moll: &Mollifier) -> VecField {
    let n = field.n;
    let (cx, cy) = field.components();
    let values: Vec<Complex<f64>> = (0..n * n)
        .map(|i| {
            if field.mask[i] {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(cx[i], cy[i])
            }
        })
        .collect();
    let support: Vec<Complex<f64>> = field
        .mask
        .iter()
        .map(|&m| Complex::new(if m { 0.0 } else { 1.0 }, 0.0))
        .collect();
    let out = fft::convolve_many(&[&values, &support], n, &moll.weights, moll.radius);
    // weight sums below this are roundoff of an empty stencil
    let floor = 1e-9 * moll.weights.iter().cloned().fold(0.0, f64::max);
    let cells = (0..n * n).map(|i| {
        let sw = out[1][i].re;
        if sw > floor {
            let v = out[0][i] / sw;
            (v.re, v.im, true)
        } else {
            (0.0, 0.0, false)
        }
    });
    collect_vec_field(n, field.l, moll.eps, cells)
}

fn collect_vec_field<I: Iterator<Item = (f64, f64, bool)>>(
    n: usize,
    l: f64,
    eps: f64,
    cells: I,
) -> VecField {
    let mut x = Vec::with_capacity(n * n);
    let mut y = Vec::with_capacity(n * n);
    let mut valid = Vec::with_capacity(n * n);
    for (a, b, v) in cells {
        x.push(a);
        y.push(b);
        valid.push(v);
    }
    VecField {
        n,
        l,
        x,
        y,
        valid,
        eps: Some(eps),
    }
}

/// `D^z m(x) = m(x + z) - m(x)` for an integer cell displacement `z`, set to
/// zero unless both cells lie in the square and are unmasked.
pub fn increment(field: &AngleField, z: (isize, isize)) -> VecField {
    let n = field.n as isize;
    let (cx, cy) = field.components();
    let mut x = vec![0.0; cx.len()];
    let mut y = vec![0.0; cx.len()];
    for iy in 0..n {
        for ix in 0..n {
            let (jx, jy) = (ix + z.0, iy + z.1);
            if jx < 0 || jy < 0 || jx >= n || jy >= n {
                continue;
            }
            let (i, j) = ((iy * n + ix) as usize, (jy * n + jx) as usize);
            if field.mask[i] || field.mask[j] {
                continue;
            }
            x[i] = cx[j] - cx[i];
            y[i] = cy[j] - cy[i];
        }
    }
    VecField {
        n: field.n,
        l: field.l,
        x,
        y,
        valid: vec![true; (n * n) as usize],
        eps: None,
    }
}

/// Cell index range `[lo, hi)` (in each axis) of the cells whose centers lie
/// in `[margin, L - margin]`.
pub fn interior_range(n: usize, l: f64, margin: f64) -> (usize, usize) {
    let h = l / n as f64;
    let lo = ((margin / h - 0.5) - 1e-9).ceil().max(0.0) as usize;
    let hi = n.saturating_sub(lo);
    (lo.min(hi), hi)
}

/// Straight jump `theta+ | theta-` across the line through `point` with
/// normal `jump.normal()`.
pub fn make_jump_field(jump: &JumpConfig, point: [f64; 2], n: usize, l: f64) -> AngleField {
    let nu = jump.normal();
    let (tp, tm) = (jump.theta_plus().value(), jump.theta_minus().value());
    AngleField::from_fn(n, l, |x, y| {
        let side = nu.dot_xy([x - point[0], y - point[1]]);
        Some(if side > 0.0 { tp } else { tm })
    })
}

/// `sign (x - p)^perp / |x - p|`; the cell containing `p` is masked.
pub fn make_vortex_field(center: [f64; 2], positive: bool, n: usize, l: f64) -> Result<AngleField> {
    if !(0.0..l).contains(&center[0]) || !(0.0..l).contains(&center[1]) {
        return Err(LabError::OutOfRange(format!(
            "vortex center {center:?} outside [0, {l})^2"
        )));
    }
    let h = l / n as f64;
    let (px, py) = ((center[0] / h) as usize, (center[1] / h) as usize);
    let turn = if positive { 0.0 } else { PI };
    Ok(AngleField::from_fn(n, l, |x, y| {
        let (ix, iy) = ((x / h) as usize, (y / h) as usize);
        if ix == px && iy == py {
            return None;
        }
        let (dx, dy) = (x - center[0], y - center[1]);
        // (dx, dy)^perp = (-dy, dx)
        Some(dx.atan2(-dy) + turn)
    }))
}

/// Piecewise-constant field with parallel jump lines `x . nu = offsets[k]`
/// (increasing) and values `thetas[0..=k]`; every consecutive pair must be
/// admissible for `nu`.
pub fn make_piecewise_field(
    normal: UnitVec,
    offsets: &[f64],
    thetas: &[f64],
    n: usize,
    l: f64,
) -> Result<AngleField> {
    if thetas.len() != offsets.len() + 1 {
        return Err(LabError::Config(format!(
            "{} lines need {} states, got {}",
            offsets.len(),
            offsets.len() + 1,
            thetas.len()
        )));
    }
    if offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Config("jump offsets must increase".into()));
    }
    for w in thetas.windows(2) {
        let d = UnitVec::from_angle(w[1]).minus(UnitVec::from_angle(w[0]));
        let defect = normal.dot_xy(d).abs();
        if defect > ADMISSIBILITY_TOL {
            return Err(LabError::InadmissibleJump(defect));
        }
    }
    let offsets = offsets.to_vec();
    let thetas = thetas.to_vec();
    Ok(AngleField::from_fn(n, l, move |x, y| {
        let s = normal.dot_xy([x, y]);
        let k = offsets.iter().filter(|&&o| s > o).count();
        Some(thetas[k])
    }))
}

/// `theta = a x1`. Smooth but not divergence-free; used to contrast
/// regularity scalings with the jump fields.
pub fn make_smooth_field(a: f64, n: usize, l: f64) -> AngleField {
    AngleField::from_fn(n, l, |x, _| Some(a * x))
}
