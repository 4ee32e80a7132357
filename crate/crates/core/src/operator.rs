use crate::dense::{DenseFactor, DenseMatrix};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// A square linear map `x ↦ y` on `R^n`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()>;

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }
}

fn check(n: usize, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n} applied to vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.n_rows(), self.n_cols());
        self.n_rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        self.spmv_into(x, y)
    }
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check(self.n_rows(), x, y)?;
        y.copy_from_slice(&self.matvec(x));
        Ok(())
    }
}

/// A Cholesky factor applied as the inverse of its matrix.
impl LinearOperator for DenseFactor {
    fn dim(&self) -> usize {
        DenseFactor::dim(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check(DenseFactor::dim(self), x, y)?;
        y.copy_from_slice(x);
        self.solve_in_place(y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check(self.0, x, y)?;
        y.copy_from_slice(x);
        Ok(())
    }
}
