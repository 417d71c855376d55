//! Small dense helpers shared by the engines and the oracle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// The averaging matrix J = 11ᵀ/n.
pub fn averaging(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, n, 1.0 / n as f64)
}

/// I − J.
pub fn centering(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) - averaging(n)
}

/// Replace `m` by (I − J) m (I − J) in place.
pub fn project_both_sides(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let col_means: Vec<f64> = (0..n).map(|j| m.column(j).mean()).collect();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] -= col_means[j];
        }
    }
    let row_means: Vec<f64> = (0..n).map(|i| m.row(i).mean()).collect();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] -= row_means[i];
        }
    }
}

/// Remove the component along the all-ones vector.
pub fn project_out_ones(x: &mut DVector<f64>) {
    let mean = x.mean();
    x.add_scalar_mut(-mean);
}

pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    Ok(m.nrows())
}

/// Reject matrices whose asymmetry exceeds a scale-relative tolerance.
pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    check_square(m)?;
    let scale = m.amax().max(1.0);
    let asym = max_asymmetry(m);
    if asym > 1e-9 * scale {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Eigendecomposition of the symmetrized input.
pub fn sym_eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let mut s = m.clone();
    symmetrize(&mut s);
    SymmetricEigen::new(s)
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sym_eigen(m).eigenvalues.min()
}

/// Apply a function to the eigenvalues of a symmetric matrix.
pub fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = sym_eigen(m);
    let mapped = eig.eigenvalues.map(f);
    &eig.eigenvectors * DMatrix::from_diagonal(&mapped) * eig.eigenvectors.transpose()
}

/// A symmetric linear map given only through its action on vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DVector<f64>) -> DVector<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self * x
    }
}
