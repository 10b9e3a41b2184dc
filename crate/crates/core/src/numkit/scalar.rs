use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field element used by the dense kernels and GMRES: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    const IS_COMPLEX: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
    fn abs_sqr(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn scale(self, k: f64) -> Self;
    fn is_finite(self) -> bool;
    fn to_c64(self) -> Complex64;
    /// Narrowing conversion; the real field drops the imaginary part.
    fn from_c64(z: Complex64) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn one() -> Self {
        1.0
    }
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn abs(self) -> f64 {
        libm::fabs(self)
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        self * k
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    #[inline]
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    #[inline]
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    #[inline]
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
    #[inline]
    fn abs_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn scale(self, k: f64) -> Self {
        Complex64::new(self.re * k, self.im * k)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn to_c64(self) -> Complex64 {
        self
    }
    #[inline]
    fn from_c64(z: Complex64) -> Self {
        z
    }
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(v: &[T]) -> f64 {
    // scaled accumulation keeps tiny/huge vectors from under/overflowing
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| x.scale(1.0 / scale).abs_sqr()).sum();
    scale * libm::sqrt(s)
}

/// Inner product `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x.conj() * y)
}

/// `y += k x`
pub fn axpy<T: Scalar>(k: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += k * xi;
    }
}

/// Largest `|Im z| / max|z|` over a complex vector, 0 for the zero vector.
pub fn imag_ratio(v: &[Complex64]) -> f64 {
    let mut max_abs = 0.0f64;
    let mut max_im = 0.0f64;
    for z in v {
        max_abs = max_abs.max(Scalar::abs(*z));
        max_im = max_im.max(libm::fabs(z.im));
    }
    if max_abs == 0.0 {
        0.0
    } else {
        max_im / max_abs
    }
}
