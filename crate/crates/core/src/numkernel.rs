//! Dense complex matrices of small order with tolerance-aware predicates.
//!
//! Predicates compare entrywise (max-norm); residuals are reported in the
//! Frobenius norm.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Largest matrix order accepted by any constructor.
pub const MAX_ORDER: usize = 64;

pub const DEFAULT_EPS: f64 = 1e-10;

/// Absolute tolerance for structural predicates.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Tolerance(f64);

impl Tolerance {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps < 1.0 {
            Ok(Tolerance(eps))
        } else {
            Err(Error::InvalidTolerance(eps))
        }
    }

    #[inline]
    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_EPS)
    }
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<ComplexScalar>,
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        Err(Error::InvalidOrder(n))
    } else {
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_order(n)?;
        Ok(ComplexMatrix {
            n,
            data: vec![ComplexScalar::new(0.0, 0.0); n * n],
        })
    }

    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn from_row_major(n: usize, data: Vec<ComplexScalar>) -> Result<Self> {
        check_order(n)?;
        if data.len() != n * n {
            return Err(Error::BadShape {
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite {
                row: pos / n,
                col: pos % n,
            });
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<ComplexScalar>]) -> Result<Self> {
        let n = rows.len();
        check_order(n)?;
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::BadShape {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(n, data)
    }

    /// Real matrix from rows.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<ComplexScalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| ComplexScalar::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_diagonal(diag: &[ComplexScalar]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (j, &z) in diag.iter().enumerate() {
            m[(j, j)] = z;
        }
        Self::from_row_major(m.n, m.data)
    }

    /// Generates every entry from its (row, column) index.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> ComplexScalar) -> Result<Self> {
        check_order(n)?;
        let data = (0..n * n).map(|p| f(p / n, p % n)).collect();
        Self::from_row_major(n, data)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ComplexScalar]> {
        self.data.chunks(self.n)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i].conj());
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i]);
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn scale(&self, z: ComplexScalar) -> Self {
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().map(|&x| x * z).collect(),
        }
    }

    pub fn scale_real(&self, x: f64) -> Self {
        self.scale(ComplexScalar::new(x, 0.0))
    }

    pub fn trace(&self) -> ComplexScalar {
        (0..self.n).map(|j| self.data[j * self.n + j]).sum()
    }

    pub fn diagonal(&self) -> Vec<ComplexScalar> {
        (0..self.n).map(|j| self.data[j * self.n + j]).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A_ij - B_ij|`; panics on order mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "order mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest off-diagonal modulus.
    pub fn max_offdiag_abs(&self) -> f64 {
        let n = self.n;
        self.data
            .iter()
            .enumerate()
            .filter(|(p, _)| p / n != p % n)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max)
    }

    /// `‖A·A† − I‖_max`
    pub fn unitarity_defect(&self) -> f64 {
        let prod = mat_mul_unchecked(self, &self.adjoint());
        prod.max_abs_diff(&identity_unchecked(self.n))
    }

    /// `‖A − A†‖_max`
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Conjugation `P·A·Pᵀ` by the permutation matrix with `P e_j = e_{perm[j]}`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                left: self.n,
                right: perm.len(),
            });
        }
        let n = self.n;
        let mut out = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..n {
                out[(perm[i], perm[j])] = self[(i, j)];
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = ComplexScalar;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexScalar {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.n, self.n)?;
        for row in self.rows() {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn zip_with(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    f: impl Fn(ComplexScalar, ComplexScalar) -> ComplexScalar,
) -> ComplexMatrix {
    assert_eq!(a.n, b.n, "order mismatch");
    ComplexMatrix {
        n: a.n,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on order mismatch; use [`mat_mul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "order mismatch");
        mat_mul_unchecked(self, rhs)
    }
}

fn identity_unchecked(n: usize) -> ComplexMatrix {
    let mut data = vec![ComplexScalar::new(0.0, 0.0); n * n];
    for j in 0..n {
        data[j * n + j] = ComplexScalar::new(1.0, 0.0);
    }
    ComplexMatrix { n, data }
}

fn mat_mul_unchecked(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.n;
    let mut data = vec![ComplexScalar::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik == ComplexScalar::new(0.0, 0.0) {
                continue;
            }
            let brow = &b.data[k * n..(k + 1) * n];
            let out = &mut data[i * n..(i + 1) * n];
            for (o, &bkj) in out.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    ComplexMatrix { n, data }
}

/// `I^(n)`
pub fn identity(n: usize) -> Result<ComplexMatrix> {
    check_order(n)?;
    Ok(identity_unchecked(n))
}

/// `J^(n)`, the all-ones matrix.
pub fn all_ones(n: usize) -> Result<ComplexMatrix> {
    check_order(n)?;
    Ok(ComplexMatrix {
        n,
        data: vec![ComplexScalar::new(1.0, 0.0); n * n],
    })
}

pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { left: a.n, right: b.n });
    }
    Ok(mat_mul_unchecked(a, b))
}

/// Solves `A·X = B` by Gaussian elimination with partial pivoting.
///
/// A pivot of modulus at most `tol.eps()` is reported as
/// [`Error::SingularMatrix`].
pub fn solve_linear(a: &ComplexMatrix, b: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { left: a.n, right: b.n });
    }
    let n = a.n;
    let mut lhs = a.data.clone();
    let mut rhs = b.data.clone();

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, lhs[r * n + col].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= tol.eps() {
            return Err(Error::SingularMatrix {
                column: col,
                pivot: pivot_abs,
            });
        }
        if pivot_row != col {
            for j in 0..n {
                lhs.swap(col * n + j, pivot_row * n + j);
                rhs.swap(col * n + j, pivot_row * n + j);
            }
        }
        let pivot = lhs[col * n + col];
        for r in col + 1..n {
            let factor = lhs[r * n + col] / pivot;
            if factor == ComplexScalar::new(0.0, 0.0) {
                continue;
            }
            lhs[r * n + col] = ComplexScalar::new(0.0, 0.0);
            for j in col + 1..n {
                let upper = lhs[col * n + j];
                lhs[r * n + j] -= factor * upper;
            }
            for j in 0..n {
                let upper = rhs[col * n + j];
                rhs[r * n + j] -= factor * upper;
            }
        }
    }

    // back substitution, one right-hand column at a time
    let mut x = vec![ComplexScalar::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in (0..n).rev() {
            let mut acc = rhs[i * n + j];
            for k in i + 1..n {
                acc -= lhs[i * n + k] * x[k * n + j];
            }
            x[i * n + j] = acc / lhs[i * n + i];
        }
    }
    ComplexMatrix::from_row_major(n, x)
}

/// `trace(A†·B)`
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexScalar> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch { left: a.n, right: b.n });
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

pub fn is_unitary(a: &ComplexMatrix, tol: Tolerance) -> bool {
    a.unitarity_defect() <= tol.eps()
}

pub fn is_hermitian(a: &ComplexMatrix, tol: Tolerance) -> bool {
    a.hermiticity_defect() <= tol.eps()
}

pub fn is_diagonal(a: &ComplexMatrix, tol: Tolerance) -> bool {
    a.max_offdiag_abs() <= tol.eps()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn free3() -> ComplexMatrix {
        &all_ones(3).unwrap().scale_real(2.0 / 3.0) - &identity(3).unwrap()
    }

    #[test]
    fn identity_and_ones() {
        assert_eq!(identity(1).unwrap().as_slice(), &[c(1.0, 0.0)]);
        let i2 = identity(2).unwrap();
        assert_eq!(i2.as_slice(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let i3 = identity(3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(i3[(i, j)], c(if i == j { 1.0 } else { 0.0 }, 0.0));
            }
        }
        assert_eq!(all_ones(1).unwrap().as_slice(), &[c(1.0, 0.0)]);
        assert!(all_ones(2).unwrap().as_slice().iter().all(|&z| z == c(1.0, 0.0)));
        assert_eq!(all_ones(3).unwrap().as_slice().len(), 9);
        assert!(identity(0).is_err());
        assert!(identity(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn products() {
        let m = free3();
        assert_eq!(mat_mul(&identity(3).unwrap(), &m).unwrap(), m);
        let j2 = all_ones(2).unwrap();
        assert_eq!(mat_mul(&j2, &j2).unwrap(), j2.scale_real(2.0));
        let j3 = all_ones(3).unwrap();
        assert_eq!(mat_mul(&j3, &j3).unwrap(), j3.scale_real(3.0));
        assert!(matches!(
            mat_mul(&j2, &j3),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn solves() {
        let m = free3();
        let x = solve_linear(&identity(3).unwrap(), &m, tol()).unwrap();
        assert!(x.max_abs_diff(&m) < 1e-15);

        let i2 = identity(2).unwrap();
        let x = solve_linear(&i2.scale_real(2.0), &i2, tol()).unwrap();
        assert!(x.max_abs_diff(&i2.scale_real(0.5)) < 1e-15);

        let a = ComplexMatrix::from_diagonal(&[c(0.0, 1.0), c(0.0, -1.0)]).unwrap();
        let x = solve_linear(&a, &i2, tol()).unwrap();
        let expected = ComplexMatrix::from_diagonal(&[c(0.0, -1.0), c(0.0, 1.0)]).unwrap();
        assert!(x.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let j2 = all_ones(2).unwrap();
        let err = solve_linear(&j2, &identity(2).unwrap(), tol()).unwrap_err();
        assert!(matches!(err, Error::SingularMatrix { column: 1, .. }));
    }

    #[test]
    fn solve_needs_pivoting() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let x = solve_linear(&a, &b, tol()).unwrap();
        assert!((&(&a * &x) - &b).frobenius_norm() < 1e-14);
    }

    #[test]
    fn inner_products() {
        for n in 1..6 {
            let i = identity(n).unwrap();
            let j = all_ones(n).unwrap();
            let nf = n as f64;
            assert_eq!(frobenius_inner(&i, &i).unwrap(), c(nf, 0.0));
            assert_eq!(frobenius_inner(&i, &j).unwrap(), c(nf, 0.0));
            assert_eq!(frobenius_inner(&j, &j).unwrap(), c(nf * nf, 0.0));
        }
    }

    #[test]
    fn predicates() {
        assert!(is_unitary(&identity(4).unwrap(), tol()));
        assert!(is_unitary(&free3(), tol()));
        assert!(!is_unitary(&all_ones(2).unwrap(), tol()));

        assert!(is_hermitian(&identity(3).unwrap(), tol()));
        let h = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]]).unwrap();
        assert!(is_hermitian(&h, tol()));
        let nh = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap();
        assert!(!is_hermitian(&nh, tol()));

        assert!(is_diagonal(&identity(3).unwrap(), tol()));
        let d = ComplexMatrix::from_diagonal(&[ComplexScalar::from_polar(1.0, PI / 3.0), c(-1.0, 0.0)]).unwrap();
        assert!(is_diagonal(&d, tol()));
        assert!(!is_diagonal(&free3(), tol()));
    }

    #[test]
    fn rejects_non_finite() {
        let err = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(f64::NAN, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(err, Err(Error::NonFinite { row: 0, col: 1 })));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1.0).is_err());
        assert!(Tolerance::new(1e-3).is_ok());
        assert_eq!(Tolerance::default().eps(), 1e-10);
    }
}
