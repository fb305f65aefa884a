//! Zero-padded 2D convolution through `rustfft`, used for wide mollifier
//! stencils where the direct sum is too slow.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Smallest size `>= n` whose prime factors are 2, 3 and 5.
fn good_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut k = m;
            for p in [2, 3, 5] {
                while k % p == 0 {
                    k /= p;
                }
            }
            k == 1
        })
        .expect("unbounded search")
}

struct Plan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Plan {
    fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plan {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    fn transform(&self, buf: &mut [Complex<f64>], inverse: bool) {
        let p = self.size;
        let fft = if inverse { &self.inverse } else { &self.forward };
        fft.process(buf);
        transpose(buf, p);
        fft.process(buf);
        transpose(buf, p);
    }
}

fn transpose(buf: &mut [Complex<f64>], p: usize) {
    for i in 0..p {
        for j in (i + 1)..p {
            buf.swap(i * p + j, j * p + i);
        }
    }
}

/// Correlates each `n x n` row-major input with the `(2r+1) x (2r+1)` kernel
/// (centered): `out[i] = sum_d kernel[d] input[i + d - r]`, with everything
/// outside the grid treated as zero.
pub(crate) fn convolve_many(
    inputs: &[&[Complex<f64>]],
    n: usize,
    kernel: &[f64],
    r: usize,
) -> Vec<Vec<Complex<f64>>> {
    let w = 2 * r + 1;
    debug_assert_eq!(kernel.len(), w * w);
    let p = good_size(n + r);
    let plan = Plan::new(p);

    let mut kbuf = vec![Complex::new(0.0, 0.0); p * p];
    for dy in 0..w {
        for dx in 0..w {
            let oy = (r as isize - dy as isize).rem_euclid(p as isize) as usize;
            let ox = (r as isize - dx as isize).rem_euclid(p as isize) as usize;
            kbuf[oy * p + ox] = Complex::new(kernel[dy * w + dx], 0.0);
        }
    }
    plan.transform(&mut kbuf, false);

    let scale = 1.0 / (p * p) as f64;
    inputs
        .iter()
        .map(|input| {
            let mut buf = vec![Complex::new(0.0, 0.0); p * p];
            for iy in 0..n {
                buf[iy * p..iy * p + n].copy_from_slice(&input[iy * n..(iy + 1) * n]);
            }
            plan.transform(&mut buf, false);
            for (b, k) in buf.iter_mut().zip(&kbuf) {
                *b *= k;
            }
            plan.transform(&mut buf, true);
            let mut out = Vec::with_capacity(n * n);
            for iy in 0..n {
                out.extend(buf[iy * p..iy * p + n].iter().map(|c| c * scale));
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_are_smooth() {
        assert_eq!(good_size(1024), 1024);
        assert_eq!(good_size(1031), 1080);
        assert_eq!(good_size(7), 8);
    }

    #[test]
    fn matches_direct_sum() {
        let n = 13;
        let r = 3;
        let w = 2 * r + 1;
        let kernel: Vec<f64> = (0..w * w).map(|i| ((i * 7) % 5) as f64 + 0.5).collect();
        let input: Vec<Complex<f64>> = (0..n * n)
            .map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let out = &convolve_many(&[&input], n, &kernel, r)[0];
        for iy in 0..n {
            for ix in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                for dy in 0..w {
                    for dx in 0..w {
                        let sy = iy as isize + dy as isize - r as isize;
                        let sx = ix as isize + dx as isize - r as isize;
                        if sy >= 0 && sx >= 0 && (sy as usize) < n && (sx as usize) < n {
                            acc += input[sy as usize * n + sx as usize] * kernel[dy * w + dx];
                        }
                    }
                }
                assert!((acc - out[iy * n + ix]).norm() < 1e-11);
            }
        }
    }
}
