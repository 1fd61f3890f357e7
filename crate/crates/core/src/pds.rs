//! State vectors and production–destruction systems.
//!
//! A conservative PDS is described entirely by its production matrix
//! `P(y)`; destruction terms are the transpose, `d_ij(y) = p_ji(y)`, so
//! conservation holds by construction.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance for column sums of a linear PDS matrix.
pub const COLUMN_SUM_TOLERANCE: f64 = 1e-14;

/// A finite state vector with `N >= 1` components.
///
/// Positivity is not enforced here; integrator entry points check it.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "state vector must have at least one component".into(),
            ));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    /// Sum of all components; the conserved quantity of a conservative PDS.
    pub fn total_mass(&self) -> f64 {
        total_mass(&self.0)
    }

    /// Fails with `NonPositiveInput` on the first component that is not `> 0`.
    pub fn ensure_positive(&self) -> Result<()> {
        match self.0.iter().enumerate().find(|(_, &v)| v <= 0.0) {
            Some((index, &value)) => Err(Error::NonPositiveInput { index, value }),
            None => Ok(()),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub(crate) fn from_dvector_unchecked(v: &DVector<f64>) -> Self {
        Self(v.iter().copied().collect())
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for StateVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl<const N: usize> TryFrom<[f64; N]> for StateVector {
    type Error = Error;

    fn try_from(values: [f64; N]) -> Result<Self> {
        Self::new(values.to_vec())
    }
}

pub fn total_mass(values: &[f64]) -> f64 {
    values.iter().sum()
}

/// A conservative production–destruction system.
///
/// Implementors return the full `N x N` production matrix with a zero
/// diagonal and nonnegative entries for every positive `y`.
pub trait ProductionSystem {
    fn dimension(&self) -> usize;

    fn production(&self, y: &[f64]) -> Result<DMatrix<f64>>;
}

impl<T: ProductionSystem + ?Sized> ProductionSystem for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }

    fn production(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        (**self).production(y)
    }
}

/// Production system backed by a closure.
pub struct FnProduction<F> {
    dimension: usize,
    f: F,
}

impl<F> FnProduction<F>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F> ProductionSystem for FnProduction<F>
where
    F: Fn(&[f64]) -> Result<DMatrix<f64>>,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn production(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        (self.f)(y)
    }
}

/// Checks the structural invariants of an evaluated production matrix.
pub(crate) fn check_production(p: &DMatrix<f64>, n: usize) -> Result<()> {
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if p.nrows() != n { p.nrows() } else { p.ncols() },
        });
    }
    for j in 0..n {
        for i in 0..n {
            let v = p[(i, j)];
            let bad = if i == j {
                v != 0.0
            } else {
                !(v >= 0.0) || !v.is_finite()
            };
            if bad {
                return Err(Error::InvalidProduction {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}

/// Checks the sign pattern and zero column sums of a linear PDS matrix.
pub fn validate_linear_pds(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let n = a.nrows();
    for j in 0..n {
        for i in 0..n {
            let v = a[(i, j)];
            if !v.is_finite() || (i == j && v > 0.0) || (i != j && v < 0.0) {
                return Err(Error::SignPatternViolation {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for j in 0..n {
        let col = a.column(j);
        let sum: f64 = col.iter().sum();
        let scale = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if sum.abs() > COLUMN_SUM_TOLERANCE * scale {
            return Err(Error::NotConservative { col: j, sum });
        }
    }
    Ok(())
}

/// A validated matrix `A` of a positive and conservative linear PDS `y' = A y`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPdsMatrix(DMatrix<f64>);

impl LinearPdsMatrix {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        validate_linear_pds(&a)?;
        Ok(Self(a))
    }

    /// Row-major convenience constructor.
    pub fn from_rows(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Splits `A = A_P - A_D` into a zero-diagonal production part and a
    /// nonnegative diagonal destruction part.
    pub fn production_split(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.dimension();
        let mut a_p = self.0.clone();
        let mut a_d = DMatrix::zeros(n, n);
        for i in 0..n {
            a_p[(i, i)] = 0.0;
            a_d[(i, i)] = -self.0[(i, i)];
        }
        (a_p, a_d)
    }

    /// The induced production system `p_ij(y) = a_ij y_j` for `i != j`.
    pub fn production_system(&self) -> LinearProduction<'_> {
        LinearProduction { a: self }
    }
}

/// Production system induced by a linear PDS matrix.
#[derive(Debug, Clone, Copy)]
pub struct LinearProduction<'a> {
    a: &'a LinearPdsMatrix,
}

impl ProductionSystem for LinearProduction<'_> {
    fn dimension(&self) -> usize {
        self.a.dimension()
    }

    fn production(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dimension();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        let a = self.a.matrix();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                a[(i, j)] * y[j]
            }
        }))
    }
}
