//! Discrete Fourier transform for every length `n ≥ 1`.
//!
//! Convention: `forward` computes `X_j = Σ_k x_k e^{-2πi jk/n}` (unnormalized) and
//! `inverse` computes `x_k = (1/n) Σ_j X_j e^{+2πi jk/n}`, so `inverse ∘ forward = id`.
//!
//! A unitary Fourier matrix with positive exponent, `F = {e^{2πi jk/n}/√n}`, maps to
//! this convention as `F v = √n · inverse(v)` and `F* v = forward(v) / √n`.
//!
//! Powers of two use an iterative radix-2 kernel. Other lengths up to
//! [`DIRECT_THRESHOLD`] use a tabulated O(n²) sum; longer ones go through
//! Bluestein's chirp-z reformulation on a padded power-of-two grid.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Non-power-of-two lengths above this use the chirp-z path.
pub const DIRECT_THRESHOLD: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone)]
enum Kernel {
    Trivial,
    Radix2 {
        /// `e^{-2πi k/n}` for `k < n/2`
        twiddles: Vec<Complex64>,
        bitrev: Vec<u32>,
    },
    Direct {
        /// `e^{-2πi k/n}` for `k < n`
        roots: Vec<Complex64>,
    },
    Bluestein {
        inner: alloc::boxed::Box<DftPlan>,
        /// `e^{-πi k²/n}`
        chirp: Vec<Complex64>,
        /// forward transform of the conjugate chirp filter, pre-divided by the inner length
        filter_hat: Vec<Complex64>,
    },
}

/// Precomputed transform of a fixed length.
#[derive(Debug, Clone)]
pub struct DftPlan {
    n: usize,
    kernel: Kernel,
}

#[inline]
fn root(k: usize, n: usize) -> Complex64 {
    // exact reduction keeps the angle small for large k
    let a = -2.0 * PI * ((k % n) as f64) / (n as f64);
    Complex64::new(libm::cos(a), libm::sin(a))
}

impl DftPlan {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_threshold(n, DIRECT_THRESHOLD)
    }

    /// Same as [`DftPlan::new`] but with an explicit direct/chirp-z cut-over.
    pub fn with_threshold(n: usize, threshold: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let kernel = if n == 1 {
            Kernel::Trivial
        } else if n.is_power_of_two() {
            let bits = n.trailing_zeros();
            Kernel::Radix2 {
                twiddles: (0..n / 2).map(|k| root(k, n)).collect(),
                bitrev: (0..n as u32)
                    .map(|i| i.reverse_bits() >> (32 - bits))
                    .collect(),
            }
        } else if n <= threshold {
            Kernel::Direct {
                roots: (0..n).map(|k| root(k, n)).collect(),
            }
        } else {
            let m = (2 * n - 1).next_power_of_two();
            let inner = DftPlan::new(m)?;
            let two_n = 2 * n as u128;
            let chirp: Vec<Complex64> = (0..n)
                .map(|k| {
                    let kk = ((k as u128 * k as u128) % two_n) as f64;
                    let a = -PI * kk / n as f64;
                    Complex64::new(libm::cos(a), libm::sin(a))
                })
                .collect();
            let mut filter = vec![Complex64::new(0.0, 0.0); m];
            filter[0] = chirp[0].conj();
            for k in 1..n {
                filter[k] = chirp[k].conj();
                filter[m - k] = chirp[k].conj();
            }
            inner.forward(&mut filter);
            let scale = 1.0 / m as f64;
            for f in filter.iter_mut() {
                *f *= scale;
            }
            Kernel::Bluestein {
                inner: alloc::boxed::Box::new(inner),
                chirp,
                filter_hat: filter,
            }
        };
        Ok(Self { n, kernel })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        match direction {
            Direction::Forward => self.forward(data),
            Direction::Inverse => self.inverse(data),
        }
    }

    /// Unnormalized transform with negative exponent.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.n, "DFT length mismatch");
        match &self.kernel {
            Kernel::Trivial => {}
            Kernel::Radix2 { twiddles, bitrev } => radix2(data, twiddles, bitrev),
            Kernel::Direct { roots } => {
                let n = self.n;
                let src = data.to_vec();
                for (j, out) in data.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut idx = 0usize;
                    for &x in &src {
                        acc += x * roots[idx];
                        idx += j;
                        if idx >= n {
                            idx -= n;
                        }
                    }
                    *out = acc;
                }
            }
            Kernel::Bluestein {
                inner,
                chirp,
                filter_hat,
            } => {
                let m = inner.len();
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for ((b, &x), &w) in buf.iter_mut().zip(data.iter()).zip(chirp) {
                    *b = x * w;
                }
                inner.forward(&mut buf);
                for (b, &f) in buf.iter_mut().zip(filter_hat) {
                    *b *= f;
                }
                // inverse through conjugation; the 1/m factor lives in filter_hat
                for b in buf.iter_mut() {
                    *b = b.conj();
                }
                inner.forward(&mut buf);
                for ((out, b), &w) in data.iter_mut().zip(&buf).zip(chirp) {
                    *out = b.conj() * w;
                }
            }
        }
    }

    /// Positive exponent, scaled by `1/n`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for x in data.iter_mut() {
            *x = x.conj();
        }
        self.forward(data);
        let s = 1.0 / self.n as f64;
        for x in data.iter_mut() {
            *x = x.conj() * s;
        }
    }

    /// Transform every column of a row-major `n × width` block in place.
    pub fn process_columns(&self, data: &mut [Complex64], width: usize, direction: Direction) {
        assert_eq!(data.len(), self.n * width, "column block length mismatch");
        let mut col = vec![Complex64::new(0.0, 0.0); self.n];
        for c in 0..width {
            for (r, x) in col.iter_mut().enumerate() {
                *x = data[r * width + c];
            }
            self.process(&mut col, direction);
            for (r, x) in col.iter().enumerate() {
                data[r * width + c] = *x;
            }
        }
    }
}

fn radix2(data: &mut [Complex64], twiddles: &[Complex64], bitrev: &[u32]) {
    let n = data.len();
    for i in 0..n {
        let j = bitrev[i] as usize;
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * step];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

/// One-shot transform of a copy of `v`.
pub fn dft(v: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    let plan = DftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.process(&mut out, direction);
    Ok(out)
}

/// Separable 2D transform on row-major `rows × cols` grids.
#[derive(Debug, Clone)]
pub struct Dft2Plan {
    rows: DftPlan,
    cols: DftPlan,
}

impl Dft2Plan {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        Ok(Self {
            rows: DftPlan::new(rows)?,
            cols: DftPlan::new(cols)?,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        let width = self.cols.len();
        for row in data.chunks_exact_mut(width) {
            self.cols.process(row, direction);
        }
        self.rows.process_columns(data, width, direction);
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, Direction::Forward)
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, Direction::Inverse)
    }
}
