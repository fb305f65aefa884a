//! Entropy production of grid fields, least upper bounds of measure
//! families, the Besov functional `N_t`, and the mollification probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::Entropy;
use crate::error::{LabError, Result};
use crate::fields::{interior_range, mollify, AngleField, Mollifier, VecField, DEFAULT_MARGIN};

/// Cells with `|m_eps|` below this are excluded from the projection.
pub const PROJECTION_THRESHOLD: f64 = 0.1;

/// Signed density per unit area on the interior window of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMeasure {
    pub n: usize,
    pub l: f64,
    pub margin: f64,
    /// Row-major, zero outside the interior window.
    pub density: Vec<f64>,
    /// Cells in the window where the projection was undefined.
    pub masked: usize,
}

impl GridMeasure {
    pub fn zero(n: usize, l: f64, margin: f64) -> Self {
        GridMeasure {
            n,
            l,
            margin,
            density: vec![0.0; n * n],
            masked: 0,
        }
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.l / self.n as f64;
        h * h
    }

    pub fn window(&self) -> (usize, usize) {
        interior_range(self.n, self.l, self.margin)
    }

    /// Side length of the interior window.
    pub fn window_side(&self) -> f64 {
        let (lo, hi) = self.window();
        (hi - lo) as f64 * self.l / self.n as f64
    }

    pub fn total_variation(&self) -> f64 {
        self.density.iter().map(|d| d.abs()).sum::<f64>() * self.cell_area()
    }

    /// Total variation over the cell rectangle `[x0, x1) x [y0, y1)`.
    pub fn total_variation_on(&self, x0: usize, x1: usize, y0: usize, y1: usize) -> f64 {
        let mut acc = 0.0;
        for iy in y0..y1.min(self.n) {
            for ix in x0..x1.min(self.n) {
                acc += self.density[iy * self.n + ix].abs();
            }
        }
        acc * self.cell_area()
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.cell_area()
    }

    fn same_grid(&self, other: &GridMeasure) -> Result<()> {
        if self.n != other.n || self.l != other.l || self.margin != other.margin {
            return Err(LabError::GridMismatch(format!(
                "measure on {}x{} (L = {}, margin {}) against {}x{} (L = {}, margin {})",
                self.n, self.n, self.l, self.margin, other.n, other.n, other.l, other.margin
            )));
        }
        Ok(())
    }

    /// `sum_i w_i mu_i` on a common grid.
    pub fn linear_combination(terms: &[(f64, &GridMeasure)]) -> Result<GridMeasure> {
        let first = terms
            .first()
            .ok_or_else(|| LabError::Config("empty combination".into()))?
            .1;
        let mut out = GridMeasure::zero(first.n, first.l, first.margin);
        for (w, m) in terms {
            first.same_grid(m)?;
            out.masked = out.masked.max(m.masked);
            for (o, d) in out.density.iter_mut().zip(&m.density) {
                *o += w * d;
            }
        }
        Ok(out)
    }
}

/// `m_eps / |m_eps|` as cosine/sine arrays, with a validity mask.
#[derive(Clone, Debug)]
pub struct ProjectedField {
    pub n: usize,
    pub l: f64,
    pub c: Vec<f64>,
    pub s: Vec<f64>,
    pub valid: Vec<bool>,
}

impl ProjectedField {
    pub fn from_mollified(m: &VecField) -> Self {
        let len = m.x.len();
        let mut c = vec![0.0; len];
        let mut s = vec![0.0; len];
        let mut valid = vec![false; len];
        for i in 0..len {
            let r = m.norm(i);
            if m.valid[i] && r >= PROJECTION_THRESHOLD {
                c[i] = m.x[i] / r;
                s[i] = m.y[i] / r;
                valid[i] = true;
            }
        }
        ProjectedField {
            n: m.n,
            l: m.l,
            c,
            s,
            valid,
        }
    }

    pub fn new(field: &AngleField, eps: f64) -> Result<Self> {
        let moll = Mollifier::new(eps, field.n(), field.l())?;
        Ok(Self::from_mollified(&mollify(field, &moll)?))
    }
}

/// Divergence of `Phi(m_eps / |m_eps|)` as a measure on the interior window
/// with the default margin.
pub fn entropy_production(field: &AngleField, phi: &Entropy, eps: f64) -> Result<GridMeasure> {
    entropy_production_in(field, phi, eps, DEFAULT_MARGIN)
}

pub fn entropy_production_in(
    field: &AngleField,
    phi: &Entropy,
    eps: f64,
    margin: f64,
) -> Result<GridMeasure> {
    let proj = ProjectedField::new(field, eps)?;
    Ok(production_from_projected(&proj, phi, margin))
}

/// Finite-volume divergence: on each face the flux is the mean of the
/// adjacent valid cells, or the valid one, or (between two invalid cells)
/// the linear interpolation between the nearest valid cells of that grid
/// line. Face values are shared, so mass telescopes exactly; away from
/// invalid cells this is the centered difference.
pub fn production_from_projected(
    proj: &ProjectedField,
    phi: &Entropy,
    margin: f64,
) -> GridMeasure {
    let n = proj.n;
    let h = proj.l / n as f64;
    let (lo, hi) = interior_range(n, proj.l, margin);
    let px: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|i| if proj.valid[i] { phi.p.eval_unit(proj.c[i], proj.s[i]) } else { 0.0 })
        .collect();
    let py: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|i| if proj.valid[i] { phi.q.eval_unit(proj.c[i], proj.s[i]) } else { 0.0 })
        .collect();

    // fx[iy][k]: flux through the face left of cell k in row iy, k = 0..=n
    let fx: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|iy| {
            face_values(n, |k| (proj.valid[iy * n + k], px[iy * n + k]))
        })
        .collect();
    let fy: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|ix| {
            face_values(n, |k| (proj.valid[k * n + ix], py[k * n + ix]))
        })
        .collect();

    let mut density = vec![0.0; n * n];
    let mut masked = 0;
    for iy in lo..hi {
        for ix in lo..hi {
            let i = iy * n + ix;
            if !proj.valid[i] {
                masked += 1;
            }
            density[i] = (fx[iy][ix + 1] - fx[iy][ix] + fy[ix][iy + 1] - fy[ix][iy]) / h;
        }
    }
    GridMeasure {
        n,
        l: proj.l,
        margin,
        density,
        masked,
    }
}

/// Face values along one grid line of `n` cells; `cell(k)` is
/// `(valid, value)`.
fn face_values<F: Fn(usize) -> (bool, f64)>(n: usize, cell: F) -> Vec<f64> {
    let cells: Vec<(bool, f64)> = (0..n).map(cell).collect();
    let mut prev_valid: Vec<Option<usize>> = vec![None; n];
    let mut last = None;
    for k in 0..n {
        if cells[k].0 {
            last = Some(k);
        }
        prev_valid[k] = last;
    }
    let mut next_valid: Vec<Option<usize>> = vec![None; n];
    last = None;
    for k in (0..n).rev() {
        if cells[k].0 {
            last = Some(k);
        }
        next_valid[k] = last;
    }
    let mut faces = vec![0.0; n + 1];
    for (k, face) in faces.iter_mut().enumerate() {
        let left = k.checked_sub(1).map(|j| cells[j]);
        let right = (k < n).then(|| cells[k]);
        *face = match (left, right) {
            (Some((true, a)), Some((true, b))) => 0.5 * (a + b),
            (Some((true, a)), _) => a,
            (_, Some((true, b))) => b,
            _ => {
                let a = k.checked_sub(1).and_then(|j| prev_valid[j]);
                let b = if k < n { next_valid[k] } else { None };
                match (a, b) {
                    (Some(a), Some(b)) => {
                        // cell centers at j + 1/2, this face at k
                        let w = (k as f64 - (a as f64 + 0.5)) / (b as f64 - a as f64);
                        (1.0 - w) * cells[a].1 + w * cells[b].1
                    }
                    (Some(a), None) => cells[a].1,
                    (None, Some(b)) => cells[b].1,
                    (None, None) => 0.0,
                }
            }
        };
    }
    faces
}

/// Cellwise maximum of absolute densities.
///
/// On a grid this is the finest-partition least upper bound of the discrete
/// measures. When the measures come from a mollified transition layer it
/// resolves the layer and exceeds the upper bound of the limiting line
/// measures; [`LubAccumulator`] estimates the latter.
pub fn lub_measure(measures: &[GridMeasure]) -> Result<GridMeasure> {
    let first = measures
        .first()
        .ok_or_else(|| LabError::Config("least upper bound of an empty family".into()))?;
    let mut out = GridMeasure::zero(first.n, first.l, first.margin);
    for m in measures {
        first.same_grid(m)?;
        out.masked = out.masked.max(m.masked);
        for (o, d) in out.density.iter_mut().zip(&m.density) {
            *o = o.max(d.abs());
        }
    }
    Ok(out)
}

/// Streaming least upper bound over a family of measures on one grid.
///
/// Keeps the cellwise maximum and, for coarse block partitions of the
/// interior window, the largest absolute block mass seen per block. The
/// coarse estimate is `min` over the partitions (offset by half a block) of
/// `sum_blocks max_alpha |mu_alpha(block)|`; with blocks much wider than the
/// transition layer one of the partitions contains each layer crossing
/// whole, and the estimate converges to the upper bound of the limits.
#[derive(Clone, Debug)]
pub struct LubAccumulator {
    n: usize,
    l: f64,
    margin: f64,
    block: usize,
    cellwise: Vec<f64>,
    partitions: Vec<Vec<f64>>,
    count: usize,
    masked: usize,
}

impl LubAccumulator {
    /// `block` is the block side in cells.
    pub fn new(n: usize, l: f64, margin: f64, block: usize) -> Self {
        let block = block.max(1);
        let (lo, hi) = interior_range(n, l, margin);
        let offsets = Self::offsets_for(block);
        let partitions = offsets
            .iter()
            .map(|&o| vec![0.0; Self::blocks_per_axis(lo, hi, block, o).pow(2)])
            .collect();
        LubAccumulator {
            n,
            l,
            margin,
            block,
            cellwise: vec![0.0; n * n],
            partitions,
            count: 0,
            masked: 0,
        }
    }

    fn offsets_for(block: usize) -> Vec<usize> {
        if block > 1 {
            vec![0, block / 2]
        } else {
            vec![0]
        }
    }

    fn blocks_per_axis(lo: usize, hi: usize, block: usize, offset: usize) -> usize {
        // the first block is [lo, lo + block - offset)
        (hi - lo + offset).div_ceil(block)
    }

    pub fn push(&mut self, m: &GridMeasure) -> Result<()> {
        if m.n != self.n || m.l != self.l || m.margin != self.margin {
            return Err(LabError::GridMismatch(format!(
                "measure on {}x{} pushed into accumulator on {}x{}",
                m.n, m.n, self.n, self.n
            )));
        }
        let n = self.n;
        let (lo, hi) = interior_range(n, self.l, self.margin);
        for (c, d) in self.cellwise.iter_mut().zip(&m.density) {
            *c = c.max(d.abs());
        }
        let area = m.cell_area();
        for (p, &offset) in Self::offsets_for(self.block).iter().enumerate() {
            let nb = Self::blocks_per_axis(lo, hi, self.block, offset);
            let mut mass = vec![0.0; nb * nb];
            for iy in lo..hi {
                let by = (iy - lo + offset) / self.block;
                for ix in lo..hi {
                    let bx = (ix - lo + offset) / self.block;
                    mass[by * nb + bx] += m.density[iy * n + ix];
                }
            }
            for (best, v) in self.partitions[p].iter_mut().zip(mass) {
                *best = best.max(v.abs() * area);
            }
        }
        self.count += 1;
        self.masked = self.masked.max(m.masked);
        Ok(())
    }

    pub fn family_size(&self) -> usize {
        self.count
    }

    pub fn cellwise(&self) -> GridMeasure {
        GridMeasure {
            n: self.n,
            l: self.l,
            margin: self.margin,
            density: self.cellwise.clone(),
            masked: self.masked,
        }
    }

    /// Block-partition estimate of the total variation of the upper bound.
    pub fn coarse_total_variation(&self) -> f64 {
        self.partitions
            .iter()
            .map(|p| p.iter().sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Block side (in cells) used for coarse least upper bounds at mollifier
/// radius `eps`: eight stencil radii.
pub fn coarse_block_cells(eps: f64, n: usize, l: f64) -> usize {
    let r = (eps * n as f64 / l - 1e-9).ceil().max(1.0) as usize;
    8 * r
}

/// `sum_{x in U} |D^z m(x)|^3 h^2` for every integer displacement with
/// `|z| <= radius` cells, keyed by `(zx, zy)`.
pub fn cubic_increment_table(
    field: &AngleField,
    margin: f64,
    radius: usize,
) -> Vec<((isize, isize), f64)> {
    let n = field.n();
    let h = field.h();
    let (lo, hi) = interior_range(n, field.l(), margin);
    let (cx, cy) = field.components();
    let mask = field.mask();
    let r = radius as isize;
    let mut zs = Vec::new();
    for zy in -r..=r {
        for zx in -r..=r {
            if zx * zx + zy * zy <= r * r {
                zs.push((zx, zy));
            }
        }
    }
    zs.into_par_iter()
        .map(|(zx, zy)| {
            let mut acc = 0.0;
            for iy in lo..hi {
                let jy = iy as isize + zy;
                if jy < 0 || jy >= n as isize {
                    continue;
                }
                for ix in lo..hi {
                    let jx = ix as isize + zx;
                    if jx < 0 || jx >= n as isize {
                        continue;
                    }
                    let i = iy * n + ix;
                    let j = jy as usize * n + jx as usize;
                    if mask[i] || mask[j] {
                        continue;
                    }
                    // |m - m'|^2 = 2 - 2 m . m'
                    let d2 = (2.0 - 2.0 * (cx[i] * cx[j] + cy[i] * cy[j])).max(0.0);
                    acc += d2 * d2.sqrt();
                }
            }
            ((zx, zy), acc * h * h)
        })
        .collect()
}

/// `N_t(m, U) = max_{|z| <= t} t^{-1/3} ||D^z m||_{L^3(U)}` over integer
/// displacements.
pub fn besov_seminorm(field: &AngleField, margin: f64, t: f64) -> Result<f64> {
    Ok(besov_profile(field, margin, &[t])?[0])
}

/// `N_t` for several `t`, sharing one increment table.
pub fn besov_profile(field: &AngleField, margin: f64, ts: &[f64]) -> Result<Vec<f64>> {
    let h = field.h();
    for &t in ts {
        if t < 2.0 * h * (1.0 - 1e-12) {
            return Err(LabError::Resolution(format!(
                "Besov scale {t} is below two grid spacings ({})",
                2.0 * h
            )));
        }
        if t > field.l() / 4.0 * (1.0 + 1e-12) {
            return Err(LabError::OutOfRange(format!(
                "Besov scale {t} exceeds L/4 = {}",
                field.l() / 4.0
            )));
        }
    }
    let cells = |t: f64| (t / h + 1e-9).floor() as isize;
    let radius = ts.iter().map(|&t| cells(t)).max().unwrap_or(0) as usize;
    let table = cubic_increment_table(field, margin, radius);
    Ok(ts
        .iter()
        .map(|&t| {
            let r = cells(t);
            let best = table
                .iter()
                .filter(|((zx, zy), _)| zx * zx + zy * zy <= r * r)
                .map(|(_, v)| *v)
                .fold(0.0, f64::max);
            best.cbrt() / t.cbrt()
        })
        .collect())
}

/// `int_U |grad m_eps|^3` with centered differences; cells whose stencil
/// touches an undefined value are skipped.
pub fn grad_cubed_probe(field: &AngleField, eps: f64, margin: f64) -> Result<f64> {
    let moll = Mollifier::new(eps, field.n(), field.l())?;
    let m = mollify(field, &moll)?;
    Ok(grad_cubed(&m, margin))
}

pub fn grad_cubed(m: &VecField, margin: f64) -> f64 {
    let n = m.n;
    let h = m.h();
    let (lo, hi) = interior_range(n, m.l, margin);
    let lo = lo.max(1);
    let hi = hi.min(n - 1);
    (lo..hi)
        .into_par_iter()
        .map(|iy| {
            let mut acc = 0.0;
            for ix in lo..hi {
                let (e, w, nn, s) = (
                    iy * n + ix + 1,
                    iy * n + ix - 1,
                    (iy + 1) * n + ix,
                    (iy - 1) * n + ix,
                );
                if !(m.valid[e] && m.valid[w] && m.valid[nn] && m.valid[s]) {
                    continue;
                }
                let dxx = (m.x[e] - m.x[w]) / (2.0 * h);
                let dxy = (m.y[e] - m.y[w]) / (2.0 * h);
                let dyx = (m.x[nn] - m.x[s]) / (2.0 * h);
                let dyy = (m.y[nn] - m.y[s]) / (2.0 * h);
                let g2 = dxx * dxx + dxy * dxy + dyx * dyx + dyy * dyy;
                acc += g2 * g2.sqrt();
            }
            acc * h * h
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// `int_U (1 - |m_eps|^2)^{3/2}`.
pub fn defect_probe(field: &AngleField, eps: f64, margin: f64) -> Result<f64> {
    let moll = Mollifier::new(eps, field.n(), field.l())?;
    let m = mollify(field, &moll)?;
    Ok(defect(&m, margin))
}

pub fn defect(m: &VecField, margin: f64) -> f64 {
    let n = m.n;
    let h = m.h();
    let (lo, hi) = interior_range(n, m.l, margin);
    let mut acc = 0.0;
    for iy in lo..hi {
        for ix in lo..hi {
            let i = iy * n + ix;
            if m.valid[i] {
                let d = (1.0 - m.x[i] * m.x[i] - m.y[i] * m.y[i]).max(0.0);
                acc += d * d.sqrt();
            }
        }
    }
    acc * h * h
}

/// Least-squares line through `(ln x_i, ln y_i)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log coordinates.
    pub residual: f64,
}

pub fn fit_exponent(pairs: &[(f64, f64)]) -> Result<PowerFit> {
    if pairs.len() < 3 {
        return Err(LabError::InsufficientSampling(format!(
            "exponent fit needs at least 3 points, got {}",
            pairs.len()
        )));
    }
    if let Some(&(x, y)) = pairs.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(LabError::OutOfRange(format!(
            "nonpositive pair ({x}, {y}) in log-log fit"
        )));
    }
    let k = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::OutOfRange("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(PowerFit {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circlegeom::{Angle, TrigPolynomial};
    use crate::entropy::{build_entropy, jin_kohn, JumpConfig};
    use crate::fields::{make_jump_field, make_smooth_field, make_vortex_field};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cos2() -> Entropy {
        build_entropy(&TrigPolynomial::cos_mode(2))
    }

    #[test]
    fn constant_field_produces_nothing() {
        let f = AngleField::constant(64, 1.0, 0.3);
        let mu = entropy_production(&f, &jin_kohn(Angle::new(0.2)), 4.0 / 64.0).unwrap();
        assert!(mu.total_variation() < 1e-12);
        assert!(grad_cubed_probe(&f, 4.0 / 64.0, 0.15).unwrap() < 1e-20);
        assert!(defect_probe(&f, 4.0 / 64.0, 0.15).unwrap() < 1e-20);
        assert_eq!(besov_seminorm(&f, 0.15, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn resolution_is_enforced() {
        let f = AngleField::constant(64, 1.0, 0.3);
        assert!(matches!(
            entropy_production(&f, &cos2(), 1.0 / 64.0),
            Err(LabError::Resolution(_))
        ));
        assert!(matches!(
            besov_seminorm(&f, 0.15, 1.0 / 64.0),
            Err(LabError::Resolution(_))
        ));
        assert!(besov_seminorm(&f, 0.15, 0.3).is_err());
    }

    #[test]
    fn jump_production_matches_pairing() {
        let n = 256;
        for beta in [PI / 6.0, PI / 4.0, PI / 2.0] {
            let f = make_jump_field(&JumpConfig::symmetric(beta), [0.5, 0.5], n, 1.0);
            let mu = entropy_production(&f, &cos2(), 4.0 / n as f64).unwrap();
            let per_length = mu.total_variation() / mu.window_side();
            let want = (2.0 * beta.sin()).powi(3) / 6.0;
            assert!((per_length / want - 1.0).abs() < 0.01, "{beta}: {per_length} vs {want}");
            // the mass (not just the variation) is the signed pairing
            assert!((mu.mass().abs() / mu.window_side() / want - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn production_is_linear_in_phi() {
        let f = make_vortex_field([0.37, 0.61], true, 64, 1.0).unwrap();
        let proj = ProjectedField::new(&f, 4.0 / 64.0).unwrap();
        let a = jin_kohn(Angle::new(0.3));
        let b = build_entropy(&TrigPolynomial::new(0.0, vec![0.0, 0.4, -0.2, 0.1], vec![0.0, 0.3, 0.5, 0.0]));
        let combo = Entropy::linear_combination(&[(2.0, &a), (-0.7, &b)]);
        let ma = production_from_projected(&proj, &a, 0.15);
        let mb = production_from_projected(&proj, &b, 0.15);
        let mc = production_from_projected(&proj, &combo, 0.15);
        let lin = GridMeasure::linear_combination(&[(2.0, &ma), (-0.7, &mb)]).unwrap();
        for (x, y) in mc.density.iter().zip(&lin.density) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn faces_interpolate_across_invalid_runs() {
        let faces = face_values(4, |k| ([true, false, false, true][k], [1.0, 0.0, 0.0, 4.0][k]));
        assert_eq!(faces, vec![1.0, 1.0, 2.5, 4.0, 4.0]);
    }

    #[test]
    fn divergence_telescopes_across_masked_cells() {
        // the window mass equals the flux through the window boundary
        let n = 64;
        let c = 32.5 / n as f64;
        let f = make_vortex_field([c, c], true, n, 1.0).unwrap();
        let proj = ProjectedField::new(&f, 6.0 / n as f64).unwrap();
        let phi = jin_kohn(Angle::new(0.4));
        let mu = production_from_projected(&proj, &phi, 0.15);
        assert!(mu.masked > 0);
        let (lo, hi) = mu.window();
        let h = 1.0 / n as f64;
        let flux = |i: usize, j: usize, comp: usize| {
            let v = |k: usize| {
                let e = if comp == 0 { &phi.p } else { &phi.q };
                e.eval_unit(proj.c[k], proj.s[k])
            };
            0.5 * (v(i) + v(j))
        };
        let mut boundary = 0.0;
        for k in lo..hi {
            boundary += flux(k * n + hi - 1, k * n + hi, 0) - flux(k * n + lo - 1, k * n + lo, 0);
            boundary += flux((hi - 1) * n + k, hi * n + k, 1) - flux((lo - 1) * n + k, lo * n + k, 1);
        }
        assert!((mu.mass() - boundary * h).abs() < 1e-12, "{} vs {}", mu.mass(), boundary * h);
    }

    #[test]
    fn vortex_production_decays() {
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256] {
            let f = make_vortex_field([0.5, 0.5], true, n, 1.0).unwrap();
            let tv = entropy_production(&f, &cos2(), 4.0 / n as f64).unwrap().total_variation();
            assert!(tv < prev / 1.5, "{n}: {tv} vs {prev}");
            prev = tv;
        }
    }

    #[test]
    fn lub_examples() {
        let n = 32;
        let mut a = GridMeasure::zero(n, 1.0, 0.15);
        let mut b = GridMeasure::zero(n, 1.0, 0.15);
        a.density[10 * n + 10] = -3.0;
        b.density[12 * n + 20] = 2.0;
        let single = lub_measure(&[a.clone()]).unwrap();
        assert_eq!(single.density[10 * n + 10], 3.0);
        let both = lub_measure(&[a.clone(), b.clone()]).unwrap();
        let tv = a.total_variation() + b.total_variation();
        assert!((both.total_variation() - tv).abs() < 1e-15);
        let other = GridMeasure::zero(16, 1.0, 0.15);
        assert!(matches!(lub_measure(&[a, other]), Err(LabError::GridMismatch(_))));
        assert!(lub_measure(&[]).is_err());
    }

    #[test]
    fn coarse_lub_of_jin_kohn_frames() {
        let n = 256;
        let eps = 4.0 / n as f64;
        let beta = PI / 4.0;
        let f = make_jump_field(&JumpConfig::symmetric(beta), [0.5, 0.5], n, 1.0);
        let proj = ProjectedField::new(&f, eps).unwrap();
        let s0 = production_from_projected(&proj, &jin_kohn(Angle::new(0.0)), 0.15);
        let s1 = production_from_projected(&proj, &jin_kohn(Angle::new(PI / 4.0)), 0.15);
        let mut acc = LubAccumulator::new(n, 1.0, 0.15, coarse_block_cells(eps, n, 1.0));
        for k in 0..64 {
            let a = k as f64 * PI / 128.0;
            let (c, s) = ((2.0 * a).cos(), (2.0 * a).sin());
            acc.push(&GridMeasure::linear_combination(&[(c, &s0), (s, &s1)]).unwrap()).unwrap();
        }
        let want = (2.0 * beta.sin()).powi(3) / 3.0;
        let coarse = acc.coarse_total_variation() / s0.window_side();
        assert!((coarse / want - 1.0).abs() < 0.01, "{coarse} vs {want}");
        // the cellwise bound resolves the layer and overshoots
        let fine = acc.cellwise().total_variation() / s0.window_side();
        assert!(fine > coarse * 1.01);
        // and dominates every member on every subregion
        let cw = acc.cellwise();
        assert!(cw.total_variation_on(100, 140, 50, 90) >= s1.total_variation_on(100, 140, 50, 90));
    }

    #[test]
    fn besov_jump_is_flat_and_smooth_scales() {
        let n = 128;
        let beta = 0.7;
        let f = make_jump_field(&JumpConfig::symmetric(beta), [0.5, 0.5], n, 1.0);
        let ts = [4.0 / 128.0, 8.0 / 128.0, 16.0 / 128.0];
        let prof = besov_profile(&f, 0.15, &ts).unwrap();
        let (lo, hi) = interior_range(n, 1.0, 0.15);
        let side = (hi - lo) as f64 / n as f64;
        // jump length per unit area of U
        let ell = side / (side * side);
        let want = ((2.0 * beta.sin()).powi(3) * ell * side * side).cbrt();
        for v in &prof {
            assert!((v / want - 1.0).abs() < 1e-10, "{v} vs {want}");
        }
        let g = make_smooth_field(2.0, n, 1.0);
        let prof = besov_profile(&g, 0.15, &ts).unwrap();
        let fit = fit_exponent(&ts.iter().copied().zip(prof).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() < 0.05);
    }

    #[test]
    fn besov_rotation_and_monotonicity() {
        let n = 64;
        let f = make_vortex_field([0.43, 0.55], false, n, 1.0).unwrap();
        let t = 5.0 / n as f64;
        let a = besov_seminorm(&f, 0.15, t).unwrap();
        let b = besov_seminorm(&f.rotate90(), 0.15, t).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
        let bigger = besov_seminorm(&f, 0.1, t).unwrap();
        assert!(bigger >= a);
    }

    #[test]
    fn probes_vanish_together() {
        let n = 64;
        let eps = 4.0 / n as f64;
        for f in [
            AngleField::constant(n, 1.0, 1.0),
            make_jump_field(&JumpConfig::symmetric(0.5), [0.5, 0.5], n, 1.0),
            make_vortex_field([0.5, 0.5], true, n, 1.0).unwrap(),
            make_smooth_field(2.0, n, 1.0),
        ] {
            let g = grad_cubed_probe(&f, eps, 0.15).unwrap();
            let d = defect_probe(&f, eps, 0.15).unwrap();
            assert_eq!(g < 1e-20, d < 1e-20);
            let constant = f.theta().iter().all(|&t| t == f.theta()[0]);
            assert_eq!(g < 1e-20, constant);
        }
    }

    #[test]
    fn fit_examples() {
        let eps = [0.01, 0.02, 0.04, 0.08];
        let sq: Vec<_> = eps.iter().map(|&e| (e, e * e)).collect();
        assert!((fit_exponent(&sq).unwrap().slope - 2.0).abs() < 1e-12);
        let c: Vec<_> = eps.iter().map(|&e| (e, 3.5)).collect();
        assert!(fit_exponent(&c).unwrap().slope.abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noisy: Vec<_> = eps
            .iter()
            .map(|&e| (e, e.powi(-2) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))))
            .collect();
        let fit = fit_exponent(&noisy).unwrap();
        assert!((fit.slope + 2.0).abs() < 0.05 && fit.residual < 0.02);
        assert!(fit_exponent(&sq[..2]).is_err());
        assert!(fit_exponent(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]).is_err());
    }
}
