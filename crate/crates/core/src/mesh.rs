//! Structured simplicial meshes of the square and cube model domains and
//! their uniform refinement.
//!
//! The initial meshes are built on an `h0` grid: in 2D each square cell is
//! split by its `/` diagonal, in 3D each cube is split into the six Kuhn
//! tetrahedra around its main diagonal. Refinement is red refinement in 2D
//! and Bey's eight-child rule in 3D. Vertices are renumbered
//! lexicographically by `(x, y[, z])` on every level, and facets are ordered
//! lexicographically by their sorted vertex indices, so all numbering is
//! reproducible.

use std::io::Write;

use crate::error::{Error, Result};

/// Tolerance for deciding whether a coordinate sits on a grid line or on ∂Ω.
const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// `(-1, 1)²`
    Square2d,
    /// `(0, 1)³`
    Cube3d,
}

impl Domain {
    pub fn dim(self) -> usize {
        match self {
            Domain::Square2d => 2,
            Domain::Cube3d => 3,
        }
    }

    /// Lower and upper corners; unused trailing coordinates are zero.
    pub fn bounds(self) -> ([f64; 3], [f64; 3]) {
        match self {
            Domain::Square2d => ([-1.0, -1.0, 0.0], [1.0, 1.0, 0.0]),
            Domain::Cube3d => ([0.0; 3], [1.0; 3]),
        }
    }

    pub fn volume(self) -> f64 {
        let (lo, hi) = self.bounds();
        (0..self.dim()).map(|k| hi[k] - lo[k]).product()
    }
}

/// An open axis-aligned box with a constant coefficient value.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: [f64; 3],
    pub upper: [f64; 3],
    pub value: f64,
}

impl Region {
    fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(k, &c)| self.lower[k] < c && c < self.upper[k])
    }
}

/// Piecewise-constant coefficient: disjoint boxes over a background value.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    dim: usize,
    regions: Vec<Region>,
    background: f64,
}

impl CoefficientField {
    pub fn new(dim: usize, regions: Vec<Region>, background: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidCoefficient(format!("dimension {dim} not supported")));
        }
        if !(background > 0.0 && background.is_finite()) {
            return Err(Error::InvalidCoefficient(format!("background value {background} must be positive")));
        }
        for (i, r) in regions.iter().enumerate() {
            if !(r.value > 0.0 && r.value.is_finite()) {
                return Err(Error::InvalidCoefficient(format!("region {i} value {} must be positive", r.value)));
            }
            if (0..dim).any(|k| r.lower[k] >= r.upper[k]) {
                return Err(Error::InvalidCoefficient(format!("region {i} is empty")));
            }
            for (j, s) in regions.iter().enumerate().take(i) {
                let overlap = (0..dim).all(|k| r.lower[k] < s.upper[k] && s.lower[k] < r.upper[k]);
                if overlap {
                    return Err(Error::InvalidCoefficient(format!("regions {j} and {i} overlap")));
                }
            }
        }
        Ok(Self { dim, regions, background })
    }

    pub fn uniform(dim: usize, value: f64) -> Result<Self> {
        Self::new(dim, Vec::new(), value)
    }

    /// κ = 1 on `(-0.5, 0)² ∪ (0, 0.5)²`, `epsilon` elsewhere in `(-1, 1)²`.
    pub fn two_squares(epsilon: f64) -> Result<Self> {
        Self::new(
            2,
            vec![
                Region { lower: [-0.5, -0.5, 0.0], upper: [0.0, 0.0, 0.0], value: 1.0 },
                Region { lower: [0.0, 0.0, 0.0], upper: [0.5, 0.5, 0.0], value: 1.0 },
            ],
            epsilon,
        )
    }

    /// κ = 1 on `(0.25, 0.5)³ ∪ (0.5, 0.75)³`, `epsilon` elsewhere in `(0, 1)³`.
    pub fn two_cubes(epsilon: f64) -> Result<Self> {
        Self::new(
            3,
            vec![
                Region { lower: [0.25; 3], upper: [0.5; 3], value: 1.0 },
                Region { lower: [0.5; 3], upper: [0.75; 3], value: 1.0 },
            ],
            epsilon,
        )
    }

    /// The standard jump-coefficient configuration for `domain`.
    pub fn model_problem(domain: Domain, epsilon: f64) -> Result<Self> {
        match domain {
            Domain::Square2d => Self::two_squares(epsilon),
            Domain::Cube3d => Self::two_cubes(epsilon),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.regions
            .iter()
            .find(|r| r.contains(x))
            .map_or(self.background, |r| r.value)
    }
}

#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    level: usize,
    lower: [f64; 3],
    upper: [f64; 3],
    vertices: Vec<[f64; 3]>,
    /// Stride `dim + 1`, positively oriented.
    simplices: Vec<usize>,
    /// Stride `dim + 1`, the vertex order Bey's rule is applied in.
    refinement_order: Vec<usize>,
    /// Stride `dim`, sorted vertex indices.
    facets: Vec<usize>,
    facet_boundary: Vec<bool>,
    facet_barycenters: Vec<[f64; 3]>,
    /// Stride `dim + 1`; entry `i` is the facet opposite local vertex `i`.
    simplex_to_facet: Vec<usize>,
    vertex_parents: Option<Vec<[usize; 2]>>,
    simplex_parents: Option<Vec<usize>>,
    parent_vertex_count: usize,
}

fn on_grid(c: f64, origin: f64, h: f64) -> bool {
    let t = (c - origin) / h;
    (t - t.round()).abs() <= 1e-9
}

/// Builds the level-0 mesh of `domain` with grid spacing `h0`, checking that
/// the grid resolves every region of `field`.
pub fn build_initial_mesh(domain: Domain, h0: f64, field: &CoefficientField) -> Result<SimplicialMesh> {
    let dim = domain.dim();
    if field.dim() != dim {
        return Err(Error::InvalidMesh(format!(
            "coefficient field is {}D, domain is {dim}D",
            field.dim()
        )));
    }
    let (lo, hi) = domain.bounds();
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(Error::InvalidMesh(format!("mesh size {h0} must be positive")));
    }
    let cells_f = (hi[0] - lo[0]) / h0;
    let n = cells_f.round() as usize;
    if n == 0 || (cells_f - n as f64).abs() > 1e-9 {
        return Err(Error::InvalidMesh(format!(
            "h0 = {h0} does not divide the domain edge length {}",
            hi[0] - lo[0]
        )));
    }
    for (i, r) in field.regions().iter().enumerate() {
        for k in 0..dim {
            for c in [r.lower[k], r.upper[k]] {
                if !on_grid(c, lo[k], h0) {
                    return Err(Error::InvalidMesh(format!(
                        "corner coordinate {c} of coefficient region {i} is not on the h0 = {h0} grid"
                    )));
                }
            }
        }
    }

    let np = n + 1;
    let coord = |i: usize, k: usize| if i == n { hi[k] } else { lo[k] + i as f64 * h0 };
    let mut vertices = Vec::new();
    let mut simplices = Vec::new();
    let mut order = Vec::new();
    match dim {
        2 => {
            for i in 0..np {
                for j in 0..np {
                    vertices.push([coord(i, 0), coord(j, 1), 0.0]);
                }
            }
            let idx = |i: usize, j: usize| i * np + j;
            for i in 0..n {
                for j in 0..n {
                    let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                    order.extend_from_slice(&[v00, v10, v11, v00, v11, v01]);
                }
            }
        }
        _ => {
            for i in 0..np {
                for j in 0..np {
                    for k in 0..np {
                        vertices.push([coord(i, 0), coord(j, 1), coord(k, 2)]);
                    }
                }
            }
            let idx = |c: [usize; 3]| (c[0] * np + c[1]) * np + c[2];
            const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for perm in PERMS {
                            let mut c = [i, j, k];
                            order.push(idx(c));
                            for axis in perm {
                                c[axis] += 1;
                                order.push(idx(c));
                            }
                        }
                    }
                }
            }
        }
    }
    for t in order.chunks(dim + 1) {
        simplices.extend_from_slice(&oriented(&vertices, t));
    }

    let mut mesh = SimplicialMesh {
        dim,
        level: 0,
        lower: lo,
        upper: hi,
        vertices,
        simplices,
        refinement_order: order,
        facets: Vec::new(),
        facet_boundary: Vec::new(),
        facet_barycenters: Vec::new(),
        simplex_to_facet: Vec::new(),
        vertex_parents: None,
        simplex_parents: None,
        parent_vertex_count: 0,
    };
    mesh.build_facets()?;
    Ok(mesh)
}

fn signed_measure(vertices: &[[f64; 3]], t: &[usize]) -> f64 {
    let p0 = vertices[t[0]];
    let d = |a: usize, k: usize| vertices[t[a]][k] - p0[k];
    match t.len() {
        3 => 0.5 * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0)),
        4 => {
            let det = d(1, 0) * (d(2, 1) * d(3, 2) - d(2, 2) * d(3, 1)) - d(1, 1) * (d(2, 0) * d(3, 2) - d(2, 2) * d(3, 0))
                + d(1, 2) * (d(2, 0) * d(3, 1) - d(2, 1) * d(3, 0));
            det / 6.0
        }
        _ => unreachable!("only triangles and tetrahedra"),
    }
}

/// The vertex tuple `t` with its last two entries swapped if needed for a
/// positive signed measure.
fn oriented(vertices: &[[f64; 3]], t: &[usize]) -> Vec<usize> {
    let mut s = t.to_vec();
    if signed_measure(vertices, t) < 0.0 {
        let n = s.len();
        s.swap(n - 2, n - 1);
    }
    s
}

/// Uniformly refines `m`: red refinement of triangles, Bey's rule for
/// tetrahedra. The result records each fine vertex's coarse parents and each
/// child's parent simplex.
pub fn refine_uniform(m: &SimplicialMesh) -> SimplicialMesh {
    let dim = m.dim;
    let nv = m.vertices.len();
    // edge midpoints, numbered after the old vertices in first-seen order
    let mut edge_id = std::collections::HashMap::new();
    let mut parents: Vec<[usize; 2]> = (0..nv).map(|v| [v, v]).collect();
    let mut mid = |a: usize, b: usize, parents: &mut Vec<[usize; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *edge_id.entry(key).or_insert_with(|| {
            parents.push([key.0, key.1]);
            parents.len() - 1
        })
    };

    let nodes = dim + 1;
    let mut order = Vec::with_capacity(m.refinement_order.len() << dim);
    let mut child_parent = Vec::with_capacity(m.num_simplices() << dim);
    for (t, x) in m.refinement_order.chunks(nodes).enumerate() {
        if dim == 2 {
            let (a, b, c) = (x[0], x[1], x[2]);
            let (ab, bc, ca) = (mid(a, b, &mut parents), mid(b, c, &mut parents), mid(c, a, &mut parents));
            order.extend_from_slice(&[a, ab, ca, ab, b, bc, ca, bc, c, ab, bc, ca]);
            child_parent.extend_from_slice(&[t; 4]);
        } else {
            let mut xm = [[0usize; 4]; 4];
            for i in 0..4 {
                xm[i][i] = x[i];
                for j in i + 1..4 {
                    let v = mid(x[i], x[j], &mut parents);
                    xm[i][j] = v;
                    xm[j][i] = v;
                }
            }
            let children = [
                [xm[0][0], xm[0][1], xm[0][2], xm[0][3]],
                [xm[0][1], xm[1][1], xm[1][2], xm[1][3]],
                [xm[0][2], xm[1][2], xm[2][2], xm[2][3]],
                [xm[0][3], xm[1][3], xm[2][3], xm[3][3]],
                [xm[0][1], xm[0][2], xm[0][3], xm[1][3]],
                [xm[0][1], xm[0][2], xm[1][2], xm[1][3]],
                [xm[0][2], xm[0][3], xm[1][3], xm[2][3]],
                [xm[0][2], xm[1][2], xm[1][3], xm[2][3]],
            ];
            for c in children {
                order.extend_from_slice(&c);
            }
            child_parent.extend_from_slice(&[t; 8]);
        }
    }

    let position = |p: [usize; 2]| -> [f64; 3] {
        let (a, b) = (m.vertices[p[0]], m.vertices[p[1]]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
    };
    let raw: Vec<[f64; 3]> = parents.iter().map(|&p| if p[0] == p[1] { m.vertices[p[0]] } else { position(p) }).collect();

    // lexicographic renumbering
    let mut perm: Vec<usize> = (0..raw.len()).collect();
    perm.sort_by(|&i, &j| {
        let (a, b) = (raw[i], raw[j]);
        a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2]))
    });
    let mut new_index = vec![0; raw.len()];
    for (new, &old) in perm.iter().enumerate() {
        new_index[old] = new;
    }
    let vertices: Vec<[f64; 3]> = perm.iter().map(|&old| raw[old]).collect();
    let vertex_parents: Vec<[usize; 2]> = perm.iter().map(|&old| parents[old]).collect();
    let order: Vec<usize> = order.iter().map(|&v| new_index[v]).collect();
    let simplices: Vec<usize> = order.chunks(nodes).flat_map(|t| oriented(&vertices, t)).collect();

    let mut fine = SimplicialMesh {
        dim,
        level: m.level + 1,
        lower: m.lower,
        upper: m.upper,
        vertices,
        simplices,
        refinement_order: order,
        facets: Vec::new(),
        facet_boundary: Vec::new(),
        facet_barycenters: Vec::new(),
        simplex_to_facet: Vec::new(),
        vertex_parents: Some(vertex_parents),
        simplex_parents: Some(child_parent),
        parent_vertex_count: nv,
    };
    fine.build_facets().expect("refinement of a valid mesh is valid");
    fine
}

/// Per-element coefficient values, looked up at element barycenters.
pub fn evaluate_coefficient(field: &CoefficientField, m: &SimplicialMesh) -> Vec<f64> {
    (0..m.num_simplices())
        .map(|t| field.value_at(&m.simplex_barycenter(t)[..m.dim]))
        .collect()
}

impl SimplicialMesh {
    fn build_facets(&mut self) -> Result<()> {
        let dim = self.dim;
        let nodes = dim + 1;
        let nt = self.num_simplices();
        let mut incidences: Vec<([usize; 3], usize, usize)> = Vec::with_capacity(nt * nodes);
        for t in 0..nt {
            let s = &self.simplices[t * nodes..(t + 1) * nodes];
            for local in 0..nodes {
                let mut key = [usize::MAX; 3];
                let mut n = 0;
                for (k, &v) in s.iter().enumerate() {
                    if k != local {
                        key[n] = v;
                        n += 1;
                    }
                }
                key[..dim].sort_unstable();
                incidences.push((key, t, local));
            }
        }
        incidences.sort_unstable();

        self.facets.clear();
        self.facet_boundary.clear();
        self.facet_barycenters.clear();
        self.simplex_to_facet = vec![usize::MAX; nt * nodes];
        let mut i = 0;
        while i < incidences.len() {
            let key = incidences[i].0;
            let mut j = i;
            while j < incidences.len() && incidences[j].0 == key {
                j += 1;
            }
            let f = self.facets.len() / dim;
            let shared = j - i;
            if shared > 2 {
                return Err(Error::InvalidMesh(format!("facet {:?} shared by {shared} simplices", &key[..dim])));
            }
            for &(_, t, local) in &incidences[i..j] {
                self.simplex_to_facet[t * nodes + local] = f;
            }
            let verts = &key[..dim];
            let all_on_boundary = verts.iter().all(|&v| self.is_boundary_vertex(v));
            // an interior facet can have all its vertices on ∂Ω only if it cuts a corner
            let boundary = shared == 1;
            if boundary && !all_on_boundary {
                return Err(Error::InvalidMesh(format!("facet {verts:?} has one neighbour but is not on the boundary")));
            }
            let mut bc = [0.0; 3];
            for &v in verts {
                for k in 0..3 {
                    bc[k] += self.vertices[v][k];
                }
            }
            bc.iter_mut().for_each(|c| *c /= dim as f64);
            if !boundary && all_on_boundary && self.on_boundary(&bc) {
                return Err(Error::InvalidMesh(format!("facet {verts:?} lies on ∂Ω but has two neighbours")));
            }
            self.facets.extend_from_slice(verts);
            self.facet_boundary.push(boundary);
            self.facet_barycenters.push(bc);
            i = j;
        }
        Ok(())
    }

    /// Checks every structural invariant: orientation, facet sharing, the
    /// boundary flags, and (in 2D) the Euler characteristic.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.num_simplices() {
            let v = signed_measure(&self.vertices, self.simplex(t));
            if v <= 0.0 {
                return Err(Error::DegenerateElement { index: t, volume: v });
            }
        }
        let mut count = vec![0usize; self.num_facets()];
        self.simplex_to_facet.iter().for_each(|&f| count[f] += 1);
        for (f, &c) in count.iter().enumerate() {
            let boundary = self.facet_is_boundary(f);
            if (boundary && c != 1) || (!boundary && c != 2) {
                return Err(Error::InvalidMesh(format!("facet {f}: boundary = {boundary} but {c} neighbours")));
            }
            if boundary != self.on_boundary(&self.facet_barycenters[f]) {
                return Err(Error::InvalidMesh(format!("facet {f}: boundary flag disagrees with geometry")));
            }
        }
        if self.dim == 2 {
            let euler = self.num_vertices() as i64 - self.num_facets() as i64 + self.num_simplices() as i64 + 1;
            if euler != 2 {
                return Err(Error::InvalidMesh(format!("Euler characteristic {euler} != 2")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len() / (self.dim + 1)
    }

    pub fn num_facets(&self) -> usize {
        self.facet_boundary.len()
    }

    pub fn num_boundary_facets(&self) -> usize {
        self.facet_boundary.iter().filter(|&&b| b).count()
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.vertices[v][..self.dim]
    }

    pub fn simplex(&self, t: usize) -> &[usize] {
        &self.simplices[t * (self.dim + 1)..(t + 1) * (self.dim + 1)]
    }

    pub fn facet(&self, f: usize) -> &[usize] {
        &self.facets[f * self.dim..(f + 1) * self.dim]
    }

    pub fn facet_is_boundary(&self, f: usize) -> bool {
        self.facet_boundary[f]
    }

    pub fn facet_barycenter(&self, f: usize) -> &[f64] {
        &self.facet_barycenters[f][..self.dim]
    }

    /// Facets of simplex `t`; entry `i` is opposite `simplex(t)[i]`.
    pub fn simplex_facets(&self, t: usize) -> &[usize] {
        &self.simplex_to_facet[t * (self.dim + 1)..(t + 1) * (self.dim + 1)]
    }

    pub fn on_boundary(&self, x: &[f64]) -> bool {
        (0..self.dim).any(|k| (x[k] - self.lower[k]).abs() <= GEOM_TOL || (x[k] - self.upper[k]).abs() <= GEOM_TOL)
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.on_boundary(&self.vertices[v])
    }

    pub fn simplex_volume(&self, t: usize) -> f64 {
        signed_measure(&self.vertices, self.simplex(t))
    }

    pub fn simplex_barycenter(&self, t: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &v in self.simplex(t) {
            for k in 0..3 {
                c[k] += self.vertices[v][k];
            }
        }
        c.map(|x| x / (self.dim + 1) as f64)
    }

    pub fn simplex_diameter(&self, t: usize) -> f64 {
        let s = self.simplex(t);
        let mut d: f64 = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let (a, b) = (self.vertices[s[i]], self.vertices[s[j]]);
                let len = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                d = d.max(len);
            }
        }
        d
    }

    pub fn max_diameter(&self) -> f64 {
        (0..self.num_simplices()).map(|t| self.simplex_diameter(t)).fold(0.0, f64::max)
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.num_simplices()).map(|t| self.simplex_volume(t)).sum()
    }

    /// For a refined mesh: the coarse endpoints of each vertex's parent edge,
    /// or `[v, v]` for a vertex inherited from coarse vertex `v`.
    pub fn vertex_parents(&self) -> Option<&[[usize; 2]]> {
        self.vertex_parents.as_deref()
    }

    /// For a refined mesh: the coarse simplex each element was cut from.
    pub fn simplex_parents(&self) -> Option<&[usize]> {
        self.simplex_parents.as_deref()
    }

    /// Vertex count of the mesh this one was refined from (0 on level 0).
    pub fn parent_vertex_count(&self) -> usize {
        self.parent_vertex_count
    }

    /// Plain-text dump: vertex, simplex and facet lists with a count header
    /// before each section.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# simplicial mesh dim={} level={}", self.dim, self.level)?;
        writeln!(w, "vertices {}", self.num_vertices())?;
        for v in 0..self.num_vertices() {
            let c: Vec<String> = self.vertex(v).iter().map(|x| format!("{x}")).collect();
            writeln!(w, "{}", c.join(" "))?;
        }
        writeln!(w, "simplices {}", self.num_simplices())?;
        for t in 0..self.num_simplices() {
            let c: Vec<String> = self.simplex(t).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", c.join(" "))?;
        }
        writeln!(w, "facets {}", self.num_facets())?;
        for f in 0..self.num_facets() {
            let c: Vec<String> = self.facet(f).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{} {}", c.join(" "), u8::from(self.facet_is_boundary(f)))?;
        }
        Ok(())
    }
}
