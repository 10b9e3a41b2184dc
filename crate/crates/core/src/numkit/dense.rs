use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &d) in entries.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * k).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self[(i / r2, j / c2)] * other[(i % r2, j % c2)]
        })
    }

    /// 2×2 block matrix `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::DimensionMismatch {
                expected: a.rows,
                found: b.rows,
            });
        }
        let (top, left) = (a.rows, a.cols);
        Ok(Self::from_fn(a.rows + c.rows, a.cols + b.cols, |i, j| {
            match (i < top, j < left) {
                (true, true) => a[(i, j)],
                (true, false) => b[(i, j - left)],
                (false, true) => c[(i - top, j)],
                (false, false) => d[(i - top, j - left)],
            }
        }))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Relative pivot threshold below which a factorization is flagged singular.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// `PA = LU` with partial pivoting, stored packed (unit-diagonal `L` below, `U` on and above).
#[derive(Debug, Clone)]
pub struct LuFactors<T> {
    lu: DenseMatrix<T>,
    /// `perm[i]` is the row of `A` that ended up in row `i`.
    perm: Vec<usize>,
    singular: Option<usize>,
}

pub fn lu_factor<T: Scalar>(a: &DenseMatrix<T>) -> Result<LuFactors<T>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let threshold = PIVOT_THRESHOLD * a.max_abs();
    let mut singular = None;

    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        if pmax <= threshold || pmax == 0.0 {
            singular.get_or_insert(k);
            continue;
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / pivot;
            lu[(i, k)] = l;
            if l == T::zero() {
                continue;
            }
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= l * u;
            }
        }
    }
    Ok(LuFactors { lu, perm, singular })
}

impl<T: Scalar> LuFactors<T> {
    pub fn order(&self) -> usize {
        self.lu.rows()
    }

    pub fn is_singular(&self) -> bool {
        self.singular.is_some()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn lower(&self) -> DenseMatrix<T> {
        let n = self.order();
        DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Greater => self.lu[(i, j)],
            core::cmp::Ordering::Equal => T::one(),
            core::cmp::Ordering::Less => T::zero(),
        })
    }

    pub fn upper(&self) -> DenseMatrix<T> {
        let n = self.order();
        DenseMatrix::from_fn(n, n, |i, j| if i <= j { self.lu[(i, j)] } else { T::zero() })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [T]) -> Result<()> {
        if let Some(pivot) = self.singular {
            return Err(Error::SingularMatrix { pivot });
        }
        let n = self.order();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = y[i];
            for j in 0..i {
                s -= row[j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = y[i];
            for j in i + 1..n {
                s -= row[j] * y[j];
            }
            y[i] = s / row[i];
        }
        b.copy_from_slice(&y);
        Ok(())
    }

    /// `A⁻¹ B` column by column.
    pub fn solve_matrix(&self, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let n = self.order();
        if b.rows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.rows(),
            });
        }
        let mut out = DenseMatrix::zeros(n, b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j))?;
            for (i, xi) in x.into_iter().enumerate() {
                out[(i, j)] = xi;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<DenseMatrix<T>> {
        self.solve_matrix(&DenseMatrix::identity(self.order()))
    }
}

/// Convenience: factor and solve once.
pub fn lu_solve<T: Scalar>(f: &LuFactors<T>, b: &[T]) -> Result<Vec<T>> {
    f.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_factors_trivially() {
        let f = lu_factor(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.permutation(), &[0, 1, 2]);
        for k in 0..3 {
            let mut e = [0.0; 3];
            e[k] = 1.0;
            assert_eq!(f.solve(&e).unwrap(), e.to_vec());
        }
    }

    #[test]
    fn permutation_matrix_swaps() {
        let a = DenseMatrix::from_row_major(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.permutation(), &[1, 0]);
        assert_eq!(f.solve(&[1.0, 2.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn diagonal_solve() {
        let f = lu_factor(&DenseMatrix::diag(&[2.0, 4.0])).unwrap();
        assert_eq!(f.solve(&[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn non_square_rejected() {
        let a = DenseMatrix::<f64>::zeros(2, 3);
        assert_eq!(
            lu_factor(&a).unwrap_err(),
            Error::NotSquare { rows: 2, cols: 3 }
        );
    }

    #[test]
    fn singular_flagged_and_solve_refused() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 2.0, 4.0]).unwrap();
        let f = lu_factor(&a).unwrap();
        assert!(f.is_singular());
        assert!(matches!(f.solve(&[1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn dimension_mismatch_on_solve() {
        let f = lu_factor(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert!(matches!(
            f.solve(&[1.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 1 })
        ));
    }

    #[test]
    fn complex_solve_round_trip() {
        let a = DenseMatrix::from_fn(3, 3, |i, j| {
            Complex64::new((i + 2 * j) as f64 + if i == j { 5.0 } else { 0.0 }, (i as f64) - (j as f64))
        });
        let x = vec![
            Complex64::new(1.0, -1.0),
            Complex64::new(0.5, 2.0),
            Complex64::new(-3.0, 0.25),
        ];
        let b = a.matvec(&x).unwrap();
        let y = lu_factor(&a).unwrap().solve(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn kron_and_blocks() {
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let i2 = DenseMatrix::<f64>::identity(2);
        let k = a.kron(&i2);
        assert_eq!(k[(0, 2)], 2.0);
        assert_eq!(k[(3, 1)], 3.0);
        assert_eq!(k[(1, 0)], 0.0);
        let z = DenseMatrix::zeros(2, 2);
        let b = DenseMatrix::block2(&a, &z, &z, &i2).unwrap();
        assert_eq!(b[(1, 1)], 4.0);
        assert_eq!(b[(3, 3)], 1.0);
        assert_eq!(b[(0, 3)], 0.0);
    }
}
