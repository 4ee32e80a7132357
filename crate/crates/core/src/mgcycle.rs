//! The level hierarchy `V_0 ⊂ … ⊂ V_J ⊂ V_{J+1}` and the symmetric V-cycle
//! preconditioner built on it.
//!
//! Levels `0..=J` are conforming P1 spaces on the refined meshes; the top
//! level `J + 1` is the Crouzeix-Raviart space on the finest mesh. One
//! application of the preconditioner at level `j`:
//!
//! 1. `ν` pre-smoothing sweeps on `A_j w = g` from `w = 0`,
//! 2. restriction of the residual by `P_jᵀ`, a recursive application on level
//!    `j − 1`, and prolongation of the correction by `P_j`,
//! 3. `ν` post-smoothing sweeps with the adjoint smoother.
//!
//! Level 0 is solved exactly with a dense Cholesky factorization. Restricting
//! the residual with `Pᵀ` is the matrix form of the L² projection onto the
//! coarse space when acting on residuals (dual vectors), so no mass matrices
//! appear.

use std::sync::Arc;

use crate::assembly::{assemble_load, assemble_operator, DofMap, SpaceKind};
use crate::dense::{cholesky_factor, DenseFactor};
use crate::error::{Error, Result};
use crate::mesh::{build_initial_mesh, evaluate_coefficient, refine_uniform, CoefficientField, Domain, SimplicialMesh};
use crate::operator::LinearOperator;
use crate::sparse::smoother::{gauss_seidel_sweep_unchecked, jacobi_sweep_unchecked};
use crate::sparse::{CsrMatrix, SweepDirection, DEFAULT_JACOBI_DAMPING};
use crate::transfer::{cr_inclusion, p1_prolongation};

/// Relative Frobenius tolerance for `Pᵀ A_fine P = A_coarse`.
pub const GALERKIN_TOLERANCE: f64 = 1e-12;

/// Builds the chain of meshes `0..=finest_level` by uniform refinement.
pub fn build_mesh_chain(
    domain: Domain,
    h0: f64,
    field: &CoefficientField,
    finest_level: usize,
) -> Result<Vec<SimplicialMesh>> {
    let mut meshes = vec![build_initial_mesh(domain, h0, field)?];
    for _ in 0..finest_level {
        let next = refine_uniform(meshes.last().unwrap());
        meshes.push(next);
    }
    Ok(meshes)
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    /// Indexed by level; the last one is the operator being preconditioned.
    operators: Vec<CsrMatrix>,
    /// `prolongations[j - 1]` maps level `j − 1` into level `j`.
    prolongations: Vec<CsrMatrix>,
    meshes: Option<Arc<Vec<SimplicialMesh>>>,
    dof_maps: Vec<DofMap>,
    finest_mesh: usize,
}

impl Hierarchy {
    /// Assembles the full conforming-plus-CR hierarchy on `meshes[0..=finest]`
    /// for the coefficient `field`, then checks the variational identity on
    /// every level.
    pub fn assemble(meshes: Arc<Vec<SimplicialMesh>>, finest: usize, field: &CoefficientField) -> Result<Self> {
        if finest >= meshes.len() {
            return Err(Error::InvalidConfig(format!(
                "finest level {finest} requested from a chain of {} meshes",
                meshes.len()
            )));
        }
        let mut operators = Vec::with_capacity(finest + 2);
        let mut dof_maps = Vec::with_capacity(finest + 2);
        let mut prolongations = Vec::with_capacity(finest + 1);
        for (j, mesh) in meshes[..=finest].iter().enumerate() {
            let kappa = evaluate_coefficient(field, mesh);
            let (a, dofs) = assemble_operator(mesh, &kappa, SpaceKind::ConformingP1)?;
            if j > 0 {
                prolongations.push(p1_prolongation(&meshes[j - 1], &dof_maps[j - 1], mesh, &dofs)?);
            }
            operators.push(a);
            dof_maps.push(dofs);
        }
        let fine = &meshes[finest];
        let kappa = evaluate_coefficient(field, fine);
        let (a_cr, cr_dofs) = assemble_operator(fine, &kappa, SpaceKind::CrouzeixRaviart)?;
        prolongations.push(cr_inclusion(fine, &dof_maps[finest], &cr_dofs)?);
        operators.push(a_cr);
        dof_maps.push(cr_dofs);

        let h = Self { operators, prolongations, meshes: Some(meshes), dof_maps, finest_mesh: finest };
        h.check_galerkin()?;
        Ok(h)
    }

    /// Convenience: mesh chain plus [`Hierarchy::assemble`].
    pub fn build(domain: Domain, h0: f64, field: &CoefficientField, finest: usize) -> Result<Self> {
        let meshes = Arc::new(build_mesh_chain(domain, h0, field, finest)?);
        Self::assemble(meshes, finest, field)
    }

    /// A hierarchy from bare matrices, without meshes. `prolongations[j - 1]`
    /// must map level `j − 1` into level `j`. No variational check is made.
    pub fn from_parts(operators: Vec<CsrMatrix>, prolongations: Vec<CsrMatrix>) -> Result<Self> {
        if operators.is_empty() || prolongations.len() + 1 != operators.len() {
            return Err(Error::InvalidConfig(format!(
                "{} operators need {} prolongations, got {}",
                operators.len(),
                operators.len().saturating_sub(1),
                prolongations.len()
            )));
        }
        for (j, a) in operators.iter().enumerate() {
            if a.n_rows() != a.n_cols() {
                return Err(Error::DimensionMismatch(format!("operator {j} is not square")));
            }
            if j > 0 {
                let p = &prolongations[j - 1];
                if p.n_rows() != a.n_rows() || p.n_cols() != operators[j - 1].n_rows() {
                    return Err(Error::DimensionMismatch(format!(
                        "prolongation into level {j} is {}x{}, expected {}x{}",
                        p.n_rows(),
                        p.n_cols(),
                        a.n_rows(),
                        operators[j - 1].n_rows()
                    )));
                }
            }
        }
        Ok(Self { operators, prolongations, meshes: None, dof_maps: Vec::new(), finest_mesh: 0 })
    }

    /// Relative Frobenius error of `P_jᵀ A_j P_j` against `A_{j−1}`, for
    /// `j = 1..levels`.
    pub fn galerkin_errors(&self) -> Result<Vec<f64>> {
        (1..self.operators.len())
            .map(|j| {
                self.operators[j]
                    .galerkin_product(&self.prolongations[j - 1])?
                    .relative_difference(&self.operators[j - 1])
            })
            .collect()
    }

    fn check_galerkin(&self) -> Result<()> {
        for (j, e) in self.galerkin_errors()?.into_iter().enumerate() {
            if !(e <= GALERKIN_TOLERANCE) {
                return Err(Error::GalerkinMismatch { level: j + 1, error: e });
            }
        }
        Ok(())
    }

    pub fn num_levels(&self) -> usize {
        self.operators.len()
    }

    pub fn operator(&self, level: usize) -> &CsrMatrix {
        &self.operators[level]
    }

    /// The prolongation into `level` (`level ≥ 1`).
    pub fn prolongation(&self, level: usize) -> &CsrMatrix {
        &self.prolongations[level - 1]
    }

    pub fn finest_operator(&self) -> &CsrMatrix {
        self.operators.last().unwrap()
    }

    pub fn dim(&self) -> usize {
        self.finest_operator().n_rows()
    }

    /// Meshes `0..=J`, when the hierarchy was assembled from meshes.
    pub fn meshes(&self) -> Option<&[SimplicialMesh]> {
        self.meshes.as_deref().map(|m| &m[..=self.finest_mesh])
    }

    pub fn dof_maps(&self) -> &[DofMap] {
        &self.dof_maps
    }

    /// Load vector of the top-level space for a constant source `f`.
    pub fn finest_load(&self, f: f64) -> Option<Vec<f64>> {
        let meshes = self.meshes()?;
        let kind = self.dof_maps.last()?.kind();
        Some(assemble_load(meshes.last()?, f, kind))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmootherKind {
    /// Forward sweeps before, backward sweeps after the coarse correction.
    GaussSeidel,
    /// Damped Jacobi, which is its own adjoint.
    Jacobi { omega: f64 },
    /// Exact solve with the level operator (small problems; for testing).
    Exact,
}

impl SmootherKind {
    pub fn jacobi() -> Self {
        SmootherKind::Jacobi { omega: DEFAULT_JACOBI_DAMPING }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgConfig {
    smoother: SmootherKind,
    sweeps: usize,
}

impl MgConfig {
    /// `sweeps` pre- and the same number of post-smoothing sweeps.
    pub fn new(smoother: SmootherKind, sweeps: usize) -> Result<Self> {
        if sweeps == 0 {
            return Err(Error::InvalidConfig("at least one smoothing sweep is required".into()));
        }
        if let SmootherKind::Jacobi { omega } = smoother {
            if !(omega > 0.0 && omega < 2.0) {
                return Err(Error::InvalidConfig(format!("Jacobi damping {omega} outside (0, 2)")));
            }
        }
        Ok(Self { smoother, sweeps })
    }

    pub fn gauss_seidel(sweeps: usize) -> Result<Self> {
        Self::new(SmootherKind::GaussSeidel, sweeps)
    }

    pub fn smoother(&self) -> SmootherKind {
        self.smoother
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }
}

impl Default for MgConfig {
    fn default() -> Self {
        Self { smoother: SmootherKind::GaussSeidel, sweeps: 1 }
    }
}

/// The V-cycle `B`. Applying it is a fixed linear map; it is symmetric and
/// positive definite whenever every level operator is SPD.
#[derive(Debug, Clone)]
pub struct MgPreconditioner<'h> {
    hierarchy: &'h Hierarchy,
    config: MgConfig,
    coarse: DenseFactor,
    diagonals: Vec<Vec<f64>>,
    exact: Vec<Option<DenseFactor>>,
}

impl<'h> MgPreconditioner<'h> {
    pub fn build(hierarchy: &'h Hierarchy, config: MgConfig) -> Result<Self> {
        let coarse = cholesky_factor(&hierarchy.operator(0).to_dense())?;
        let mut diagonals = Vec::with_capacity(hierarchy.num_levels());
        let mut exact = Vec::with_capacity(hierarchy.num_levels());
        for j in 0..hierarchy.num_levels() {
            let a = hierarchy.operator(j);
            let d = a.diagonal();
            if j > 0 {
                if let Some(i) = d.iter().position(|&v| v == 0.0) {
                    return Err(Error::ZeroDiagonal(i));
                }
            }
            diagonals.push(d);
            exact.push(match config.smoother {
                SmootherKind::Exact if j > 0 => Some(cholesky_factor(&a.to_dense())?),
                _ => None,
            });
        }
        Ok(Self { hierarchy, config, coarse, diagonals, exact })
    }

    pub fn config(&self) -> MgConfig {
        self.config
    }

    pub fn hierarchy(&self) -> &'h Hierarchy {
        self.hierarchy
    }

    fn smooth(&self, level: usize, w: &mut [f64], g: &[f64], direction: SweepDirection) {
        let a = self.hierarchy.operator(level);
        let diag = &self.diagonals[level];
        for _ in 0..self.config.sweeps {
            match self.config.smoother {
                SmootherKind::GaussSeidel => gauss_seidel_sweep_unchecked(a, diag, w, g, direction),
                SmootherKind::Jacobi { omega } => jacobi_sweep_unchecked(a, diag, w, g, omega),
                SmootherKind::Exact => {
                    w.copy_from_slice(g);
                    self.exact[level].as_ref().unwrap().solve_in_place(w).expect("sizes match");
                }
            }
        }
    }

    fn cycle(&self, level: usize, g: &[f64]) -> Vec<f64> {
        if level == 0 {
            return self.coarse.solve(g).expect("sizes match");
        }
        let a = self.hierarchy.operator(level);
        let p = self.hierarchy.prolongation(level);

        let mut w = vec![0.0; g.len()];
        self.smooth(level, &mut w, g, SweepDirection::Forward);

        let mut r = a.spmv(&w).expect("sizes match");
        r.iter_mut().zip(g).for_each(|(ri, gi)| *ri = gi - *ri);
        let coarse_r = p.spmv_transpose(&r).expect("sizes match");
        let coarse_e = self.cycle(level - 1, &coarse_r);
        let e = p.spmv(&coarse_e).expect("sizes match");
        w.iter_mut().zip(&e).for_each(|(wi, ei)| *wi += ei);

        self.smooth(level, &mut w, g, SweepDirection::Backward);
        w
    }

    /// `x − B A x` with `A` the finest operator.
    pub fn error_propagation(&self, x: &[f64]) -> Result<Vec<f64>> {
        apply_error_propagation(self, self.hierarchy.finest_operator(), x)
    }
}

impl LinearOperator for MgPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.hierarchy.dim()
    }

    fn apply_into(&self, g: &[f64], y: &mut [f64]) -> Result<()> {
        let n = self.hierarchy.dim();
        if g.len() != n || y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "preconditioner of size {n} applied to vectors of length {} and {}",
                g.len(),
                y.len()
            )));
        }
        y.copy_from_slice(&self.cycle(self.hierarchy.num_levels() - 1, g));
        Ok(())
    }
}

/// `(I − B A) x`.
pub fn apply_error_propagation(b: &dyn LinearOperator, a: &CsrMatrix, x: &[f64]) -> Result<Vec<f64>> {
    let ax = a.spmv(x)?;
    let bax = b.apply(&ax)?;
    Ok(x.iter().zip(&bax).map(|(xi, yi)| xi - yi).collect())
}
