//! Truncated Fock-space linear algebra.
//!
//! Operators and density matrices are dense `dim × dim` complex matrices.
//! The ladder operators are the usual truncated representation, so
//! `[a, a†] = 1` holds exactly on the leading `(dim−1) × (dim−1)` block and
//! fails only in the last row and column.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerances that a [`DensityOperator`] must satisfy.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    dim: usize,
}

impl HilbertSpace {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of `|n⟩⟨m|` in the row-major vectorisation used by the
    /// Liouvillian.
    #[inline]
    pub fn vec_index(&self, n: usize, m: usize) -> usize {
        n * self.dim + m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    entries: DMatrix<Complex64>,
}

impl Operator {
    pub fn from_matrix(space: HilbertSpace, entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(space, &entries)?;
        Ok(Self { space, entries })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        Self { space, entries: DMatrix::zeros(space.dim, space.dim) }
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self { space, entries: DMatrix::identity(space.dim, space.dim) }
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, entries: self.entries.adjoint() }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { space: self.space, entries: &self.entries * factor }
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        same_space(self.space, other.space)?;
        Ok(Self { space: self.space, entries: &self.entries + &other.entries })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        same_space(self.space, other.space)?;
        Ok(Self { space: self.space, entries: &self.entries * &other.entries })
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = DMatrix::identity(self.dim(), self.dim());
        for _ in 0..exponent {
            out = &out * &self.entries;
        }
        Self { space: self.space, entries: out }
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        same_space(self.space, other.space)?;
        Ok(Self {
            space: self.space,
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
        })
    }

    /// Largest elementwise `|A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_hermitian_defect(&self.entries)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Truncated annihilation operator: `a[n−1, n] = √n`.
pub fn annihilation(space: HilbertSpace) -> Operator {
    let mut entries = DMatrix::zeros(space.dim, space.dim);
    for n in 1..space.dim {
        entries[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Operator { space, entries }
}

pub fn creation(space: HilbertSpace) -> Operator {
    annihilation(space).adjoint()
}

/// `a†a` with diagonal `0, 1, …, dim−1`.
pub fn number(space: HilbertSpace) -> Operator {
    let mut entries = DMatrix::zeros(space.dim, space.dim);
    for n in 0..space.dim {
        entries[(n, n)] = Complex64::new(n as f64, 0.0);
    }
    Operator { space, entries }
}

/// Frobenius norm of `[a, a†] − 1` over the retained `(dim−1)`-block.
///
/// Zero up to rounding for every dimension; the truncation defect sits entirely in the last
/// diagonal entry, reported separately by [`truncation_defect`].
pub fn commutator_defect(space: HilbertSpace) -> f64 {
    let a = annihilation(space);
    let ad = creation(space);
    let comm = a.commutator(&ad).expect("same space");
    let k = space.dim - 1;
    let mut acc = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { ONE } else { ZERO };
            acc += (comm.entries[(i, j)] - target).norm_sqr();
        }
    }
    acc.sqrt()
}

/// `|([a, a†] − 1)[dim−1, dim−1]|`, i.e. `dim`: the one entry the truncation
/// corrupts.
pub fn truncation_defect(space: HilbertSpace) -> f64 {
    let a = annihilation(space);
    let comm = a.commutator(&creation(space)).expect("same space");
    let last = space.dim - 1;
    (comm.entries[(last, last)] - ONE).norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    space: HilbertSpace,
    entries: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(space: HilbertSpace, entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(space, &entries)?;
        let rho = Self { space, entries };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation; callers must ensure the invariants.
    pub(crate) fn new_unchecked(space: HilbertSpace, entries: DMatrix<Complex64>) -> Self {
        Self { space, entries }
    }

    pub fn pure(space: HilbertSpace, amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != space.dim {
            return Err(Error::DimensionMismatch { expected: space.dim, got: amplitudes.len() });
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(Error::InvalidParameter("zero state vector".into()));
        }
        let v = nalgebra::DVector::from_iterator(
            space.dim,
            amplitudes.iter().map(|z| z / norm.sqrt()),
        );
        Ok(Self { space, entries: &v * v.adjoint() })
    }

    pub fn fock(space: HilbertSpace, n: usize) -> Result<Self> {
        if n >= space.dim {
            return Err(Error::OutOfRange(format!("Fock level {n} >= dim {}", space.dim)));
        }
        let mut entries = DMatrix::zeros(space.dim, space.dim);
        entries[(n, n)] = ONE;
        Ok(Self { space, entries })
    }

    /// Coherent state `|β⟩` truncated to the space and renormalised.
    pub fn coherent(space: HilbertSpace, beta: Complex64) -> Self {
        let mut amps = Vec::with_capacity(space.dim);
        let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
        for n in 0..space.dim {
            if n > 0 {
                c = c * beta / (n as f64).sqrt();
            }
            amps.push(c);
        }
        Self::pure(space, &amps).expect("nonzero coherent amplitudes")
    }

    pub fn space(&self) -> HilbertSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    pub fn population(&self, n: usize) -> f64 {
        self.entries[(n, n)].re
    }

    /// Total population in levels `n ≥ dim − levels`.
    pub fn tail_population(&self, levels: usize) -> f64 {
        let start = self.space.dim.saturating_sub(levels);
        (start..self.space.dim).map(|n| self.entries[(n, n)].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_hermitian_defect(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_defect();
        if herm > HERMITIAN_TOL {
            return Err(Error::NonHermitian(herm));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidParameter(format!("trace {tr} differs from 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidParameter(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }
}

pub fn vacuum_state(space: HilbertSpace) -> DensityOperator {
    DensityOperator::fock(space, 0).expect("dim >= 2")
}

/// `Tr(op · ρ)`.
pub fn expectation(op: &Operator, rho: &DensityOperator) -> Result<Complex64> {
    same_space(op.space, rho.space)?;
    let (a, r) = (&op.entries, &rho.entries);
    let dim = op.dim();
    let mut acc = ZERO;
    for i in 0..dim {
        for k in 0..dim {
            acc += a[(i, k)] * r[(k, i)];
        }
    }
    Ok(acc)
}

fn check_shape(space: HilbertSpace, m: &DMatrix<Complex64>) -> Result<()> {
    if m.nrows() != space.dim || m.ncols() != space.dim {
        return Err(Error::DimensionMismatch {
            expected: space.dim,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

fn same_space(a: HilbertSpace, b: HilbertSpace) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a.dim, got: b.dim });
    }
    Ok(())
}

pub(crate) fn max_hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
