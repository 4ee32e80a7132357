//! Prolongation matrices between nested spaces. Restriction is always the
//! transpose of a prolongation and is never assembled on its own.

use crate::assembly::{DofMap, SpaceKind};
use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::sparse::CsrMatrix;

fn check_nested<'a>(coarse: &SimplicialMesh, fine: &'a SimplicialMesh) -> Result<&'a [[usize; 2]]> {
    let parents = fine
        .vertex_parents()
        .ok_or_else(|| Error::MeshMismatch("fine mesh was not produced by refinement".into()))?;
    if fine.dim() != coarse.dim()
        || fine.level() != coarse.level() + 1
        || fine.parent_vertex_count() != coarse.num_vertices()
        || fine.num_simplices() != coarse.num_simplices() << coarse.dim()
    {
        return Err(Error::MeshMismatch(format!(
            "level-{} mesh ({} vertices) is not the refinement of level-{} mesh ({} vertices)",
            fine.level(),
            fine.num_vertices(),
            coarse.level(),
            coarse.num_vertices()
        )));
    }
    Ok(parents)
}

fn p1_interpolation(
    parents: &[[usize; 2]],
    rows: &[usize],
    n_cols: usize,
    col: impl Fn(usize) -> Option<usize>,
) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(2 * rows.len());
    for (r, &v) in rows.iter().enumerate() {
        let [a, b] = parents[v];
        if a == b {
            if let Some(c) = col(a) {
                triplets.push((r, c, 1.0));
            }
        } else {
            for p in [a, b] {
                if let Some(c) = col(p) {
                    triplets.push((r, c, 0.5));
                }
            }
        }
    }
    CsrMatrix::from_triplets(rows.len(), n_cols, &triplets)
}

/// Nested P1 interpolation from `coarse` to its refinement `fine`, over free
/// unknowns only. Rows of surviving vertices hold a single 1; rows of edge
/// midpoints hold ½ for each interior endpoint.
pub fn p1_prolongation(
    coarse: &SimplicialMesh,
    coarse_dofs: &DofMap,
    fine: &SimplicialMesh,
    fine_dofs: &DofMap,
) -> Result<CsrMatrix> {
    coarse_dofs.check_mesh(coarse, SpaceKind::ConformingP1)?;
    fine_dofs.check_mesh(fine, SpaceKind::ConformingP1)?;
    let parents = check_nested(coarse, fine)?;
    p1_interpolation(parents, fine_dofs.free_entities(), coarse_dofs.num_free(), |v| {
        coarse_dofs.free_index(v)
    })
}

/// [`p1_prolongation`] over all vertices, boundary included.
pub fn p1_prolongation_full(coarse: &SimplicialMesh, fine: &SimplicialMesh) -> Result<CsrMatrix> {
    let parents = check_nested(coarse, fine)?;
    let rows: Vec<usize> = (0..fine.num_vertices()).collect();
    p1_interpolation(parents, &rows, coarse.num_vertices(), Some)
}

fn inclusion(
    mesh: &SimplicialMesh,
    rows: &[usize],
    n_cols: usize,
    col: impl Fn(usize) -> Option<usize>,
) -> Result<CsrMatrix> {
    let w = 1.0 / mesh.dim() as f64;
    let mut triplets = Vec::with_capacity(mesh.dim() * rows.len());
    for (r, &f) in rows.iter().enumerate() {
        for &v in mesh.facet(f) {
            if let Some(c) = col(v) {
                triplets.push((r, c, w));
            }
        }
    }
    CsrMatrix::from_triplets(rows.len(), n_cols, &triplets)
}

/// Matrix of the natural inclusion of the conforming P1 space into the CR
/// space on the same mesh: a CR unknown is the value at its facet
/// barycenter, i.e. the mean of the facet's `d` vertex values, so every
/// stored entry is `1/d` on the facet-to-vertex incidence pattern.
pub fn cr_inclusion(mesh: &SimplicialMesh, p1_dofs: &DofMap, cr_dofs: &DofMap) -> Result<CsrMatrix> {
    p1_dofs.check_mesh(mesh, SpaceKind::ConformingP1)?;
    cr_dofs.check_mesh(mesh, SpaceKind::CrouzeixRaviart)?;
    inclusion(mesh, cr_dofs.free_entities(), p1_dofs.num_free(), |v| p1_dofs.free_index(v))
}

/// [`cr_inclusion`] over all facets and vertices.
pub fn cr_inclusion_full(mesh: &SimplicialMesh) -> Result<CsrMatrix> {
    let rows: Vec<usize> = (0..mesh.num_facets()).collect();
    inclusion(mesh, &rows, mesh.num_vertices(), Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_initial_mesh, refine_uniform, CoefficientField, Domain};

    fn meshes(domain: Domain) -> (SimplicialMesh, SimplicialMesh) {
        let field = CoefficientField::model_problem(domain, 0.1).unwrap();
        let h0 = if domain == Domain::Square2d { 0.5 } else { 0.25 };
        let m0 = build_initial_mesh(domain, h0, &field).unwrap();
        let m1 = refine_uniform(&m0);
        (m0, m1)
    }

    fn affine(x: &[f64]) -> f64 {
        2.0 * x[0] - x[1] + if x.len() > 2 { 0.5 * x[2] } else { 0.0 }
    }

    #[test]
    fn p1_prolongation_reproduces_affine_functions() {
        for domain in [Domain::Square2d, Domain::Cube3d] {
            let (m0, m1) = meshes(domain);
            let p = p1_prolongation_full(&m0, &m1).unwrap();
            let u0: Vec<f64> = (0..m0.num_vertices()).map(|v| affine(m0.vertex(v))).collect();
            let u1 = p.spmv(&u0).unwrap();
            for v in 0..m1.num_vertices() {
                assert!((u1[v] - affine(m1.vertex(v))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn p1_prolongation_row_structure() {
        let (m0, m1) = meshes(Domain::Square2d);
        let (d0, d1) = (DofMap::new(&m0, SpaceKind::ConformingP1), DofMap::new(&m1, SpaceKind::ConformingP1));
        let p = p1_prolongation(&m0, &d0, &m1, &d1).unwrap();
        assert_eq!((p.n_rows(), p.n_cols()), (d1.num_free(), d0.num_free()));
        let parents = m1.vertex_parents().unwrap();
        let mut saw_single_half = false;
        for (r, &v) in d1.free_entities().iter().enumerate() {
            let (_, vals) = p.row(r);
            assert!(vals.len() <= 2);
            let [a, b] = parents[v];
            if a == b {
                assert_eq!(vals, &[1.0]);
            } else if m0.is_boundary_vertex(a) != m0.is_boundary_vertex(b) {
                assert_eq!(vals, &[0.5]);
                saw_single_half = true;
            }
        }
        assert!(saw_single_half);
    }

    #[test]
    fn p1_prolongation_rejects_unrelated_meshes() {
        let (m0, m1) = meshes(Domain::Square2d);
        let m2 = refine_uniform(&m1);
        let d = |m: &SimplicialMesh| DofMap::new(m, SpaceKind::ConformingP1);
        assert!(matches!(p1_prolongation(&m0, &d(&m0), &m2, &d(&m2)), Err(Error::MeshMismatch(_))));
        assert!(matches!(p1_prolongation(&m1, &d(&m1), &m0, &d(&m0)), Err(Error::MeshMismatch(_))));
        assert!(p1_prolongation(&m0, &d(&m1), &m1, &d(&m1)).is_err());
    }

    #[test]
    fn cr_inclusion_entries_are_one_over_d() {
        for (domain, w) in [(Domain::Square2d, 0.5), (Domain::Cube3d, 1.0 / 3.0)] {
            let (_, m1) = meshes(domain);
            let p1 = DofMap::new(&m1, SpaceKind::ConformingP1);
            let cr = DofMap::new(&m1, SpaceKind::CrouzeixRaviart);
            let p = cr_inclusion(&m1, &p1, &cr).unwrap();
            assert!(p.values().iter().all(|&v| v == w));
            assert!((0..p.n_rows()).all(|r| p.row_nnz(r) <= m1.dim()));
            // all-ones: k interior vertices give k/d
            let y = p.spmv(&vec![1.0; p1.num_free()]).unwrap();
            for (r, &f) in cr.free_entities().iter().enumerate() {
                let k = m1.facet(f).iter().filter(|&&v| !m1.is_boundary_vertex(v)).count();
                assert_eq!(y[r], k as f64 * w);
            }
        }
    }

    #[test]
    fn cr_inclusion_evaluates_affine_functions_at_barycenters() {
        for domain in [Domain::Square2d, Domain::Cube3d] {
            let (_, m1) = meshes(domain);
            let p = cr_inclusion_full(&m1).unwrap();
            let u: Vec<f64> = (0..m1.num_vertices()).map(|v| affine(m1.vertex(v))).collect();
            let uc = p.spmv(&u).unwrap();
            for f in 0..m1.num_facets() {
                assert!((uc[f] - affine(m1.facet_barycenter(f))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn composed_chain_is_exact_on_affines() {
        let field = CoefficientField::two_squares(1.0).unwrap();
        let m0 = build_initial_mesh(Domain::Square2d, 0.5, &field).unwrap();
        let m1 = refine_uniform(&m0);
        let m2 = refine_uniform(&m1);
        let u0: Vec<f64> = (0..m0.num_vertices()).map(|v| affine(m0.vertex(v))).collect();
        let u1 = p1_prolongation_full(&m0, &m1).unwrap().spmv(&u0).unwrap();
        let u2 = p1_prolongation_full(&m1, &m2).unwrap().spmv(&u1).unwrap();
        let uc = cr_inclusion_full(&m2).unwrap().spmv(&u2).unwrap();
        for f in 0..m2.num_facets() {
            assert!((uc[f] - affine(m2.facet_barycenter(f))).abs() < 1e-14);
        }
    }

    #[test]
    fn cr_inclusion_rejects_foreign_dof_maps() {
        let (m0, m1) = meshes(Domain::Square2d);
        let p1 = DofMap::new(&m0, SpaceKind::ConformingP1);
        let cr = DofMap::new(&m1, SpaceKind::CrouzeixRaviart);
        assert!(matches!(cr_inclusion(&m1, &p1, &cr), Err(Error::MeshMismatch(_))));
    }
}
