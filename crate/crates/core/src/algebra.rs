//! Dense complex operators on tensor-product spaces.
//!
//! An [`Operator`] is a square row-major matrix that remembers the dimensions
//! of the tensor factors it acts on, e.g. `[fock_dim, 2]` for a bosonic mode
//! coupled to a two-level system. Products skip zero entries of the left
//! factor, which keeps the ladder-structured Hamiltonians used here cheap to
//! multiply without giving up dense storage.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Relative anti-Hermitian tolerance accepted by [`Operator::eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    factors: Vec<usize>,
    data: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator {{ dim: {}, factors: {:?} }}", self.dim, self.factors)?;
        for i in 0..self.dim.min(12) {
            for j in 0..self.dim.min(12) {
                let z = self.get(i, j);
                write!(f, " {:+.3}{:+.3}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Operator {
    pub fn zeros(factors: &[usize]) -> Self {
        assert!(!factors.is_empty() && factors.iter().all(|&d| d > 0), "factor dims must be positive");
        let dim = factors.iter().product();
        Self { dim, factors: factors.to_vec(), data: vec![ZERO; dim * dim] }
    }

    pub fn identity(factors: &[usize]) -> Self {
        let mut op = Self::zeros(factors);
        for i in 0..op.dim {
            op.data[i * op.dim + i] = ONE;
        }
        op
    }

    pub fn from_fn(factors: &[usize], mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut op = Self::zeros(factors);
        let dim = op.dim;
        for i in 0..dim {
            for j in 0..dim {
                op.data[i * dim + j] = f(i, j);
            }
        }
        op
    }

    pub fn from_diagonal(factors: &[usize], diag: impl IntoIterator<Item = C64>) -> Self {
        let mut op = Self::zeros(factors);
        let dim = op.dim;
        let mut count = 0;
        for (i, z) in diag.into_iter().enumerate() {
            assert!(i < dim, "diagonal longer than operator dimension");
            op.data[i * dim + i] = z;
            count += 1;
        }
        assert_eq!(count, dim, "diagonal length must equal operator dimension");
        op
    }

    pub fn from_real_diagonal(factors: &[usize], diag: impl IntoIterator<Item = f64>) -> Self {
        Self::from_diagonal(factors, diag.into_iter().map(|x| C64::new(x, 0.0)))
    }

    /// Build from row-major entries over a single factor.
    pub fn from_rows(dim: usize, rows: &[C64]) -> Self {
        assert_eq!(rows.len(), dim * dim);
        Self { dim, factors: vec![dim], data: rows.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.dim + j] = z;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Replace the factor structure, keeping the entries. The product of the
    /// new factors must equal the dimension.
    pub fn with_factors(mut self, factors: &[usize]) -> Self {
        assert_eq!(factors.iter().product::<usize>(), self.dim, "factor product must equal dim");
        self.factors = factors.to_vec();
        self
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self.get(i, j) == ZERO))
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        let (m, n) = (self.dim, other.dim);
        let mut out = Operator::zeros(&factors);
        let dim = out.dim;
        for i in 0..m {
            for j in 0..m {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..n {
                    let row = (i * n + k) * dim + j * n;
                    for l in 0..n {
                        out.data[row + l] = a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn try_matmul(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim, other.dim)?;
        let dim = self.dim;
        let mut out = Operator { dim, factors: self.factors.clone(), data: vec![ZERO; dim * dim] };
        for i in 0..dim {
            let out_row = &mut out.data[i * dim..(i + 1) * dim];
            for k in 0..dim {
                let a = self.data[i * dim + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * dim..(k + 1) * dim];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, exponent: u32) -> Operator {
        let mut out = Operator::identity(&self.factors);
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    pub fn scale(&self, c: C64) -> Operator {
        Operator {
            dim: self.dim,
            factors: self.factors.clone(),
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_fn(&self.factors, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖A − A†‖_F / ‖A‖_F (0 for the zero operator).
    pub fn hermiticity_residual(&self) -> f64 {
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        acc.sqrt() / norm
    }

    /// Submatrix on the given basis indices, as a single-factor operator.
    pub fn restrict(&self, keep: &[usize]) -> Operator {
        let n = keep.len();
        let mut data = Vec::with_capacity(n * n);
        for &i in keep {
            for &j in keep {
                data.push(self.get(i, j));
            }
        }
        Operator { dim: n, factors: vec![n.max(1)], data }
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dims(self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| **a != ZERO)
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect())
    }

    /// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
    pub fn eig_hermitian(&self) -> Result<Eigen> {
        let residual = self.hermiticity_residual();
        if residual >= HERMITIAN_TOL || !self.is_finite() {
            return Err(Error::NotHermitian { residual });
        }
        let dim = self.dim;
        // symmetrize so the solver sees an exactly Hermitian input
        let m = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (self.get(i, j) + self.get(j, i).conj()));
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Operator::from_fn(&self.factors, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Eigen { values, vectors })
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// `A = V diag(values) V†` with `V` unitary; column `k` of `vectors` is the
/// eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl Eigen {
    pub fn reconstruct(&self) -> Operator {
        let v = &self.vectors;
        let dim = v.dim();
        Operator::from_fn(v.factors(), |i, j| {
            (0..dim).map(|k| v.get(i, k) * self.values[k] * v.get(j, k).conj()).sum()
        })
    }
}

/// `AB − BA`.
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    Ok(&a.try_matmul(b)? - &b.try_matmul(a)?)
}

/// Frobenius norm of the submatrix on `keep`, without materializing it.
pub fn restricted_norm(op: &Operator, keep: &[usize]) -> f64 {
    keep.iter()
        .flat_map(|&i| keep.iter().map(move |&j| op.get(i, j).norm_sqr()))
        .sum::<f64>()
        .sqrt()
}

/// `⟨ψ|A|ψ⟩`.
pub fn expectation(psi: &Ket, a: &Operator) -> Result<C64> {
    let av = a.apply(psi.amplitudes())?;
    Ok(psi.amplitudes().iter().zip(&av).map(|(x, y)| x.conj() * y).sum())
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator sum");
        Operator {
            dim: self.dim,
            factors: self.factors.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in operator difference");
        Operator {
            dim: self.dim,
            factors: self.factors.clone(),
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_matmul(rhs).expect("dimension mismatch in operator product")
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: Vec<C64>,
}

impl Ket {
    /// Normalizes `amplitudes`; fails on zero or non-finite input.
    pub fn new(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::BadState);
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}
