use super::CsrMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_JACOBI_DAMPING: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Forward,
    Backward,
}

fn check_system(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.n_rows() != a.n_cols() || x.len() != a.n_rows() || b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with x of length {} and b of length {}",
            a.n_rows(),
            a.n_cols(),
            x.len(),
            b.len()
        )));
    }
    let diag = a.diagonal();
    match diag.iter().position(|&d| d == 0.0) {
        Some(i) => Err(Error::ZeroDiagonal(i)),
        None => Ok(diag),
    }
}

/// One in-place Gauss-Seidel sweep. Forward order realizes `(D + L)⁻¹`,
/// backward order its adjoint `(D + U)⁻¹`.
pub fn gauss_seidel_sweep(a: &CsrMatrix, x: &mut [f64], b: &[f64], direction: SweepDirection) -> Result<()> {
    let diag = check_system(a, x, b)?;
    gauss_seidel_sweep_unchecked(a, &diag, x, b, direction);
    Ok(())
}

/// Same as [`gauss_seidel_sweep`] with a precomputed, nonzero diagonal.
pub(crate) fn gauss_seidel_sweep_unchecked(
    a: &CsrMatrix,
    diag: &[f64],
    x: &mut [f64],
    b: &[f64],
    direction: SweepDirection,
) {
    let relax = |i: usize, x: &mut [f64]| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        for (&c, &v) in cols.iter().zip(vals) {
            if c != i {
                s -= v * x[c];
            }
        }
        x[i] = s / diag[i];
    };
    match direction {
        SweepDirection::Forward => (0..x.len()).for_each(|i| relax(i, x)),
        SweepDirection::Backward => (0..x.len()).rev().for_each(|i| relax(i, x)),
    }
}

/// One damped Jacobi step `x ← x + ω D⁻¹ (b − A x)`.
pub fn jacobi_sweep(a: &CsrMatrix, x: &mut [f64], b: &[f64], omega: f64) -> Result<()> {
    let diag = check_system(a, x, b)?;
    jacobi_sweep_unchecked(a, &diag, x, b, omega);
    Ok(())
}

pub(crate) fn jacobi_sweep_unchecked(a: &CsrMatrix, diag: &[f64], x: &mut [f64], b: &[f64], omega: f64) {
    let ax = a.spmv(x).expect("dimensions checked");
    x.iter_mut()
        .zip(ax.iter().zip(b).zip(diag))
        .for_each(|(xi, ((axi, bi), di))| *xi += omega * (bi - axi) / di);
}
