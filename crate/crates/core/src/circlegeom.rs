//! Trigonometric polynomials on `R / 2pi Z` and quadrature on the circle.
//!
//! A [`TrigPolynomial`] stores `a0 + sum_k (a_k cos kt + b_k sin kt)`. All
//! the linear operations needed by the entropy construction (projection,
//! antiderivative, shifts, multiplication by `cos t` / `sin t`) act exactly on
//! the coefficients.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// An angle with canonical representative in `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(t: f64) -> Self {
        Angle(wrap(t))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn unit(self) -> UnitVec {
        UnitVec::from_angle(self.0)
    }
}

/// Reduce `t` to `[0, 2pi)`.
pub fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A point of the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitVec {
    pub x: f64,
    pub y: f64,
}

impl UnitVec {
    pub const E1: UnitVec = UnitVec { x: 1.0, y: 0.0 };
    pub const E2: UnitVec = UnitVec { x: 0.0, y: 1.0 };

    pub fn from_angle(t: f64) -> Self {
        let (y, x) = t.sin_cos();
        UnitVec { x, y }
    }

    /// Accepts `(x, y)` only if it lies on the circle to `1e-12`.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        let dev = (x * x + y * y - 1.0).abs();
        if dev > 1e-12 {
            return Err(LabError::OutOfRange(format!(
                "|({x}, {y})|^2 - 1 = {dev:e} is not a unit vector"
            )));
        }
        Ok(UnitVec { x, y })
    }

    /// Projects a nonzero plane vector onto the circle.
    pub fn normalize(x: f64, y: f64) -> Option<Self> {
        let r = x.hypot(y);
        if r > 0.0 && r.is_finite() {
            Some(UnitVec { x: x / r, y: y / r })
        } else {
            None
        }
    }

    pub fn angle(self) -> Angle {
        Angle::new(self.y.atan2(self.x))
    }

    pub fn dot(self, other: UnitVec) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn dot_xy(self, v: [f64; 2]) -> f64 {
        self.x * v[0] + self.y * v[1]
    }

    /// `self ^ other = x1 y2 - y1 x2`.
    pub fn wedge(self, other: UnitVec) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Rotation by `+pi/2`.
    pub fn perp(self) -> UnitVec {
        UnitVec {
            x: -self.y,
            y: self.x,
        }
    }

    pub fn rotate(self, t: f64) -> UnitVec {
        let (s, c) = t.sin_cos();
        UnitVec {
            x: c * self.x - s * self.y,
            y: s * self.x + c * self.y,
        }
    }

    pub fn neg(self) -> UnitVec {
        UnitVec {
            x: -self.x,
            y: -self.y,
        }
    }

    pub fn minus(self, other: UnitVec) -> [f64; 2] {
        [self.x - other.x, self.y - other.y]
    }
}

/// `a0 + sum_{k=1..D} (cos[k-1] cos kt + sin[k-1] sin kt)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    pub a0: f64,
    #[serde(rename = "cos")]
    cos: Vec<f64>,
    #[serde(rename = "sin")]
    sin: Vec<f64>,
}

impl Default for TrigPolynomial {
    fn default() -> Self {
        Self::zero()
    }
}

impl TrigPolynomial {
    pub fn new(a0: f64, mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        let d = cos.len().max(sin.len());
        cos.resize(d, 0.0);
        sin.resize(d, 0.0);
        TrigPolynomial { a0, cos, sin }
    }

    pub fn zero() -> Self {
        TrigPolynomial::new(0.0, vec![], vec![])
    }

    pub fn constant(c: f64) -> Self {
        TrigPolynomial::new(c, vec![], vec![])
    }

    /// `cos(k t)`; `k = 0` gives the constant 1.
    pub fn cos_mode(k: usize) -> Self {
        if k == 0 {
            return Self::constant(1.0);
        }
        let mut c = vec![0.0; k];
        c[k - 1] = 1.0;
        TrigPolynomial::new(0.0, c, vec![])
    }

    /// `sin(k t)`; `k = 0` gives zero.
    pub fn sin_mode(k: usize) -> Self {
        if k == 0 {
            return Self::zero();
        }
        let mut s = vec![0.0; k];
        s[k - 1] = 1.0;
        TrigPolynomial::new(0.0, vec![], s)
    }

    /// Nominal degree (length of the coefficient vectors).
    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Degree after discarding trailing zero modes.
    pub fn effective_degree(&self) -> usize {
        (1..=self.degree())
            .rev()
            .find(|&k| self.cos[k - 1] != 0.0 || self.sin[k - 1] != 0.0)
            .unwrap_or(0)
    }

    /// Cosine coefficient `a_k`; `a_0` for `k = 0`.
    pub fn a(&self, k: usize) -> f64 {
        match k {
            0 => self.a0,
            _ => self.cos.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    /// Sine coefficient `b_k` (zero for `k = 0`).
    pub fn b(&self, k: usize) -> f64 {
        match k {
            0 => 0.0,
            _ => self.sin.get(k - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        self.eval_unit(c, s)
    }

    /// Evaluates at the angle whose cosine and sine are `(c, s)`, using the
    /// Chebyshev recurrence instead of recomputing `cos kt`.
    pub fn eval_unit(&self, c: f64, s: f64) -> f64 {
        let mut acc = self.a0;
        let (mut ck, mut sk) = (1.0, 0.0);
        for (ak, bk) in self.cos.iter().zip(&self.sin) {
            let cn = ck * c - sk * s;
            let sn = sk * c + ck * s;
            ck = cn;
            sk = sn;
            acc += ak * ck + bk * sk;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let cos = (1..=self.degree()).map(|k| k as f64 * self.sin[k - 1]).collect();
        let sin = (1..=self.degree())
            .map(|k| -(k as f64) * self.cos[k - 1])
            .collect();
        TrigPolynomial::new(0.0, cos, sin)
    }

    /// The periodic antiderivative `psi` with `psi(0) = 0`.
    pub fn antiderivative_zero_at_origin(&self) -> Result<Self> {
        if self.a0.abs() > 1e-12 {
            return Err(LabError::NonzeroMean(self.a0));
        }
        let d = self.degree();
        let cos: Vec<f64> = (1..=d).map(|k| -self.sin[k - 1] / k as f64).collect();
        let sin: Vec<f64> = (1..=d).map(|k| self.cos[k - 1] / k as f64).collect();
        let a0 = -cos.iter().sum::<f64>();
        Ok(TrigPolynomial::new(a0, cos, sin))
    }

    /// Removes the null mode and the first Fourier modes.
    pub fn project_out_low_modes(&self) -> Self {
        let mut out = self.clone();
        out.a0 = 0.0;
        if out.degree() >= 1 {
            out.cos[0] = 0.0;
            out.sin[0] = 0.0;
        }
        out
    }

    /// `t -> p(t + tau)`.
    pub fn shift(&self, tau: f64) -> Self {
        let mut cos = Vec::with_capacity(self.degree());
        let mut sin = Vec::with_capacity(self.degree());
        for k in 1..=self.degree() {
            let (s, c) = (k as f64 * tau).sin_cos();
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            cos.push(a * c + b * s);
            sin.push(b * c - a * s);
        }
        TrigPolynomial::new(self.a0, cos, sin)
    }

    /// `t -> p(t) cos t`.
    pub fn mul_cos(&self) -> Self {
        let d = self.degree();
        let mut out = TrigPolynomial::new(0.0, vec![0.0; d + 1], vec![0.0; d + 1]);
        out.add_mode(1, self.a0, 0.0);
        for k in 1..=d {
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            // cos kt cos t = (cos(k+1)t + cos(k-1)t)/2 ; sin kt cos t = (sin(k+1)t + sin(k-1)t)/2
            out.add_mode(k + 1, a / 2.0, b / 2.0);
            out.add_mode(k - 1, a / 2.0, b / 2.0);
        }
        out
    }

    /// `t -> p(t) sin t`.
    pub fn mul_sin(&self) -> Self {
        let d = self.degree();
        let mut out = TrigPolynomial::new(0.0, vec![0.0; d + 1], vec![0.0; d + 1]);
        out.add_mode(1, 0.0, self.a0);
        for k in 1..=d {
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            // cos kt sin t = (sin(k+1)t - sin(k-1)t)/2 ; sin kt sin t = (cos(k-1)t - cos(k+1)t)/2
            out.add_mode(k + 1, -b / 2.0, a / 2.0);
            out.add_mode(k - 1, b / 2.0, -a / 2.0);
        }
        out
    }

    fn add_mode(&mut self, k: usize, a: f64, b: f64) {
        if k == 0 {
            self.a0 += a;
            return;
        }
        if k > self.degree() {
            self.cos.resize(k, 0.0);
            self.sin.resize(k, 0.0);
        }
        self.cos[k - 1] += a;
        self.sin[k - 1] += b;
    }

    /// Exact `int_a^b p(t) dt`.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let mut acc = self.a0 * (b - a);
        for k in 1..=self.degree() {
            let kf = k as f64;
            let (sb, cb) = (kf * b).sin_cos();
            let (sa, ca) = (kf * a).sin_cos();
            acc += self.cos[k - 1] * (sb - sa) / kf - self.sin[k - 1] * (cb - ca) / kf;
        }
        acc
    }

    /// Largest coefficientwise distance, treating missing modes as zero.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let d = self.degree().max(other.degree());
        (1..=d)
            .flat_map(|k| {
                [
                    (self.a(k) - other.a(k)).abs(),
                    (self.b(k) - other.b(k)).abs(),
                ]
            })
            .fold((self.a0 - other.a0).abs(), f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.max_coeff_diff(&Self::zero())
    }

    /// `sum_k k^2 (|a_k| + |b_k|)`, an upper bound for `sup |p''|`.
    pub fn second_derivative_bound(&self) -> f64 {
        (1..=self.degree())
            .map(|k| (k * k) as f64 * (self.cos[k - 1].abs() + self.sin[k - 1].abs()))
            .sum()
    }

    /// `max_j |p(2 pi j / m)|`.
    pub fn sup_norm_sampled(&self, m: usize) -> f64 {
        (0..m)
            .map(|j| self.eval(TAU * j as f64 / m as f64).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn add(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        let d = self.degree().max(rhs.degree());
        TrigPolynomial::new(
            self.a0 + rhs.a0,
            (1..=d).map(|k| self.a(k) + rhs.a(k)).collect(),
            (1..=d).map(|k| self.b(k) + rhs.b(k)).collect(),
        )
    }
}

impl Sub for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn sub(self, rhs: &TrigPolynomial) -> TrigPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn neg(self) -> TrigPolynomial {
        self * -1.0
    }
}

impl Mul<f64> for &TrigPolynomial {
    type Output = TrigPolynomial;
    fn mul(self, rhs: f64) -> TrigPolynomial {
        TrigPolynomial::new(
            self.a0 * rhs,
            self.cos.iter().map(|c| c * rhs).collect(),
            self.sin.iter().map(|s| s * rhs).collect(),
        )
    }
}

/// Discrete Fourier analysis of `samples` taken at `t_j = 2 pi j / M`.
///
/// Returns the trigonometric polynomial of degree `floor((M - 1) / 2)` whose
/// coefficients are the discrete Fourier coefficients; for odd `M` it
/// interpolates the samples.
pub fn fourier_analyze(samples: &[f64]) -> Result<TrigPolynomial> {
    let m = samples.len();
    if m < 3 {
        return Err(LabError::InsufficientSampling(format!(
            "fourier_analyze needs at least 3 samples, got {m}"
        )));
    }
    let d = (m - 1) / 2;
    let table: Vec<(f64, f64)> = (0..m)
        .map(|j| (TAU * j as f64 / m as f64).sin_cos())
        .collect();
    let a0 = samples.iter().sum::<f64>() / m as f64;
    let mut cos = Vec::with_capacity(d);
    let mut sin = Vec::with_capacity(d);
    for k in 1..=d {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in samples.iter().enumerate() {
            let (s, c) = table[(k * j) % m];
            a += v * c;
            b += v * s;
        }
        cos.push(2.0 * a / m as f64);
        sin.push(2.0 * b / m as f64);
    }
    Ok(TrigPolynomial::new(a0, cos, sin))
}

/// Samples `h` at `M` equispaced angles and analyzes the result.
pub fn interpolate<F: Fn(f64) -> f64>(h: F, m: usize) -> Result<TrigPolynomial> {
    let samples: Vec<f64> = (0..m).map(|j| h(TAU * j as f64 / m as f64)).collect();
    fourier_analyze(&samples)
}

/// Periodic trapezoidal rule `2pi/M sum_j h(2 pi j / M)`.
///
/// Exact for trigonometric polynomials of degree `< M`; panics if `M < 16`.
pub fn quadrature_circle<F: Fn(f64) -> f64>(h: F, m: usize) -> f64 {
    assert!(m >= 16, "quadrature_circle needs M >= 16, got {m}");
    let w = TAU / m as f64;
    (0..m).map(|j| h(w * j as f64)).sum::<f64>() * w
}

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(h: F, a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = (n.max(2) + 1) & !1;
    let dx = (b - a) / n as f64;
    let mut acc = h(a) + h(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * h(a + dx * i as f64);
    }
    acc * dx / 3.0
}

/// Composite Simpson on `[a, b]` split at the given breakpoints, so that a
/// piecewise-smooth integrand is integrated to high order.
pub fn simpson_piecewise<F: Fn(f64) -> f64>(
    h: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    n_per_piece: usize,
) -> f64 {
    let mut pts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.windows(2)
        .map(|w| simpson(&h, w[0], w[1], n_per_piece))
        .sum()
}

/// `x - sin x`, accurate for small `x`.
pub fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        // x^3/6 - x^5/120 + x^7/5040 - x^9/362880
        x * x2 * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0 - x2 / 362880.0)))
    } else {
        x - x.sin()
    }
}

/// Half-open arc test `t in (c - pi/2, c + pi/2)` modulo `2 pi`.
pub fn in_half_circle(t: f64, c: f64) -> bool {
    let d = (t - c + PI).rem_euclid(TAU) - PI;
    d.abs() < PI / 2.0
}
