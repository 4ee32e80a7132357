//! Stiffness and load assembly for conforming P1 and Crouzeix-Raviart
//! elements, with homogeneous Dirichlet conditions imposed by eliminating
//! boundary degrees of freedom.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::par;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous P1, one unknown per vertex.
    ConformingP1,
    /// Crouzeix-Raviart, one unknown per facet barycenter.
    CrouzeixRaviart,
}

/// Numbering of the free (non-Dirichlet) entities of one space on one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    kind: SpaceKind,
    level: usize,
    num_entities: usize,
    free: Vec<usize>,
    global_to_free: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &SimplicialMesh, kind: SpaceKind) -> Self {
        let (num_entities, is_free): (usize, Box<dyn Fn(usize) -> bool>) = match kind {
            SpaceKind::ConformingP1 => (mesh.num_vertices(), Box::new(|v| !mesh.is_boundary_vertex(v))),
            SpaceKind::CrouzeixRaviart => (mesh.num_facets(), Box::new(|f| !mesh.facet_is_boundary(f))),
        };
        let mut free = Vec::new();
        let mut global_to_free = vec![None; num_entities];
        for e in 0..num_entities {
            if is_free(e) {
                global_to_free[e] = Some(free.len());
                free.push(e);
            }
        }
        Self { kind, level: mesh.level(), num_entities, free, global_to_free }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Vertices (P1) or facets (CR) of the mesh, free or not.
    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    /// Mesh entity of each free unknown, ascending.
    pub fn free_entities(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, entity: usize) -> Option<usize> {
        self.global_to_free[entity]
    }

    /// Checks that this map was built for `kind` on `mesh`.
    pub fn check_mesh(&self, mesh: &SimplicialMesh, kind: SpaceKind) -> Result<()> {
        let expected = match kind {
            SpaceKind::ConformingP1 => mesh.num_vertices(),
            SpaceKind::CrouzeixRaviart => mesh.num_facets(),
        };
        if self.kind != kind || self.level != mesh.level() || self.num_entities != expected {
            return Err(Error::MeshMismatch(format!(
                "{:?} dof map on level {} with {} entities does not belong to this level-{} mesh ({:?}, {} entities)",
                self.kind,
                self.level,
                self.num_entities,
                mesh.level(),
                kind,
                expected
            )));
        }
        Ok(())
    }
}

/// Dense element matrix of size `(d + 1) × (d + 1)`, `d ≤ 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrix {
    size: usize,
    entries: [[f64; 4]; 4],
}

impl ElementMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    fn scaled(mut self, alpha: f64) -> Self {
        self.entries.iter_mut().flatten().for_each(|v| *v *= alpha);
        self
    }
}

impl Index<(usize, usize)> for ElementMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.size && j < self.size);
        &self.entries[i][j]
    }
}

/// Gradients of the barycentric coordinates and the volume of a simplex.
fn barycentric_gradients(coords: &[&[f64]]) -> Result<([[f64; 3]; 4], f64)> {
    let d = coords.len() - 1;
    let p0 = coords[0];
    let e = |k: usize, c: usize| coords[k + 1][c] - p0[c];
    let mut grads = [[0.0; 3]; 4];
    let volume;
    match d {
        2 => {
            let det = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0);
            volume = 0.5 * det;
            if !(volume > 0.0) {
                return Err(Error::DegenerateElement { index: usize::MAX, volume });
            }
            // rows of J⁻¹ with J = [e0 e1] (edge vectors as columns)
            grads[1] = [e(1, 1) / det, -e(1, 0) / det, 0.0];
            grads[2] = [-e(0, 1) / det, e(0, 0) / det, 0.0];
        }
        3 => {
            let a = [[e(0, 0), e(1, 0), e(2, 0)], [e(0, 1), e(1, 1), e(2, 1)], [e(0, 2), e(1, 2), e(2, 2)]];
            let cof = |r: usize, c: usize| {
                let (r1, r2) = ((r + 1) % 3, (r + 2) % 3);
                let (c1, c2) = ((c + 1) % 3, (c + 2) % 3);
                a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]
            };
            let det = a[0][0] * cof(0, 0) + a[0][1] * cof(0, 1) + a[0][2] * cof(0, 2);
            volume = det / 6.0;
            if !(volume > 0.0) {
                return Err(Error::DegenerateElement { index: usize::MAX, volume });
            }
            // (J⁻¹)_{k,c} = cof(c, k) / det
            for k in 0..3 {
                grads[k + 1] = [cof(0, k) / det, cof(1, k) / det, cof(2, k) / det];
            }
        }
        _ => return Err(Error::InvalidMesh(format!("simplex with {} vertices", coords.len()))),
    }
    for c in 0..3 {
        grads[0][c] = -(grads[1][c] + grads[2][c] + grads[3][c]);
    }
    Ok((grads, volume))
}

/// P1 element stiffness `κ_T |T| ∇λ_i · ∇λ_j`.
pub fn local_stiffness_p1(coords: &[&[f64]], kappa: f64) -> Result<ElementMatrix> {
    let (grads, volume) = barycentric_gradients(coords)?;
    let n = coords.len();
    let mut entries = [[0.0; 4]; 4];
    for i in 0..n {
        for j in 0..=i {
            let g = grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1] + grads[i][2] * grads[j][2];
            entries[i][j] = kappa * volume * g;
            entries[j][i] = entries[i][j];
        }
    }
    Ok(ElementMatrix { size: n, entries })
}

/// CR element stiffness. Row `i` belongs to the facet opposite vertex `i`,
/// whose basis function is `1 − d λ_i`, so the matrix is `d²` times the P1 one.
pub fn local_stiffness_cr(coords: &[&[f64]], kappa: f64) -> Result<ElementMatrix> {
    let d = (coords.len() - 1) as f64;
    Ok(local_stiffness_p1(coords, kappa)?.scaled(d * d))
}

fn element_entities(mesh: &SimplicialMesh, t: usize, kind: SpaceKind) -> &[usize] {
    match kind {
        SpaceKind::ConformingP1 => mesh.simplex(t),
        SpaceKind::CrouzeixRaviart => mesh.simplex_facets(t),
    }
}

fn element_matrices(mesh: &SimplicialMesh, kappa: &[f64], kind: SpaceKind) -> Result<Vec<ElementMatrix>> {
    if kappa.len() != mesh.num_simplices() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficient values for {} elements",
            kappa.len(),
            mesh.num_simplices()
        )));
    }
    let local = match kind {
        SpaceKind::ConformingP1 => local_stiffness_p1,
        SpaceKind::CrouzeixRaviart => local_stiffness_cr,
    };
    par::map_range(mesh.num_simplices(), |t| {
        let coords: Vec<&[f64]> = mesh.simplex(t).iter().map(|&v| mesh.vertex(v)).collect();
        local(&coords, kappa[t]).map_err(|e| match e {
            Error::DegenerateElement { volume, .. } => Error::DegenerateElement { index: t, volume },
            other => other,
        })
    })
    .into_iter()
    .collect()
}

/// Element contributions are scattered in element order, so the summation
/// order, and therefore every bit of the result, is independent of threading.
fn scatter(
    mesh: &SimplicialMesh,
    locals: &[ElementMatrix],
    kind: SpaceKind,
    index: impl Fn(usize) -> Option<usize>,
    n: usize,
) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(locals.len() * (mesh.dim() + 1).pow(2));
    for (t, k) in locals.iter().enumerate() {
        let ents = element_entities(mesh, t, kind);
        for (i, &ei) in ents.iter().enumerate() {
            let Some(r) = index(ei) else { continue };
            for (j, &ej) in ents.iter().enumerate() {
                if let Some(c) = index(ej) {
                    triplets.push((r, c, k.entries[i][j]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(n, n, &triplets)
}

/// Stiffness matrix over the free unknowns of `kind` on `mesh`.
pub fn assemble_operator(mesh: &SimplicialMesh, kappa: &[f64], kind: SpaceKind) -> Result<(CsrMatrix, DofMap)> {
    let dofs = DofMap::new(mesh, kind);
    if dofs.num_free() == 0 {
        return Err(Error::EmptyDofSet);
    }
    let locals = element_matrices(mesh, kappa, kind)?;
    let a = scatter(mesh, &locals, kind, |e| dofs.free_index(e), dofs.num_free())?;
    Ok((a, dofs))
}

/// Stiffness matrix over all vertices/facets, before boundary elimination.
pub fn assemble_operator_full(mesh: &SimplicialMesh, kappa: &[f64], kind: SpaceKind) -> Result<CsrMatrix> {
    let n = DofMap::new(mesh, kind).num_entities();
    let locals = element_matrices(mesh, kappa, kind)?;
    scatter(mesh, &locals, kind, Some, n)
}

/// Load vector for a constant source over all entities, before elimination.
/// Both bases integrate to `|T| / (d + 1)` on each element they touch.
pub fn assemble_load_full(mesh: &SimplicialMesh, f: f64, kind: SpaceKind) -> Vec<f64> {
    let n = DofMap::new(mesh, kind).num_entities();
    let share = 1.0 / (mesh.dim() + 1) as f64;
    let mut b = vec![0.0; n];
    for t in 0..mesh.num_simplices() {
        let w = f * mesh.simplex_volume(t) * share;
        for &e in element_entities(mesh, t, kind) {
            b[e] += w;
        }
    }
    b
}

/// Load vector over the free unknowns for a constant source `f`.
pub fn assemble_load(mesh: &SimplicialMesh, f: f64, kind: SpaceKind) -> Vec<f64> {
    let dofs = DofMap::new(mesh, kind);
    let full = assemble_load_full(mesh, f, kind);
    dofs.free_entities().iter().map(|&e| full[e]).collect()
}
