//! Sweeps over `(ε, level)` for the two jump-coefficient model problems: one
//! PCG solve and one spectrum estimate per cell, plus the table, spectrum
//! and matrix exports built on top.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{dense_ba_spectrum, lanczos_spectrum, pcg, LanczosOptions, SpectrumReport, DEFAULT_DENSE_LIMIT};
use crate::mesh::{CoefficientField, Domain, SimplicialMesh};
use crate::mgcycle::{build_mesh_chain, Hierarchy, MgConfig, MgPreconditioner};
use crate::par;
use crate::sparse::{write_matrix_market, write_vector};

/// Exact CSV header of [`write_table`].
pub const CSV_HEADER: &str =
    "dim,epsilon,level,cr_dofs,pcg_iterations,cond,eff_cond_1,lambda_min,lambda_2,lambda_max,wall_time_s";

/// Cells whose CR space would exceed this many unknowns are skipped.
pub const DEFAULT_MAX_DOFS: usize = 500_000;

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub dim: usize,
    pub epsilons: Vec<f64>,
    /// Finest level `J` of each cell; rows come out in `epsilons × levels` order.
    pub levels: Vec<usize>,
    pub mg: MgConfig,
    pub tol: f64,
    pub maxit: usize,
    pub seed: u64,
    /// Spectrum dumps use the dense oracle up to this size, Ritz values above.
    pub dense_limit: usize,
    pub max_dofs: usize,
    /// When false, `wall_time_s` is written as 0 so runs are byte-identical.
    pub record_timing: bool,
    pub lanczos: LanczosOptions,
    /// Directory for per-cell eigenvalue files.
    pub dump_eigs: Option<PathBuf>,
    /// Directory for per-cell Matrix Market exports.
    pub export_matrix: Option<PathBuf>,
}

impl ExperimentSpec {
    /// The reference sweeps: 2D with ν = 1, tol 1e-7, levels
    /// 0–4; 3D with ν = 5, tol 1e-12, levels 0–2.
    pub fn table_defaults(dim: usize) -> Result<Self> {
        let (epsilons, max_level, sweeps, tol) = match dim {
            2 => (vec![1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5], 4, 1, 1e-7),
            3 => (vec![1.0, 1e-1, 1e-3, 1e-5, 1e-7], 2, 5, 1e-12),
            _ => return Err(Error::InvalidConfig(format!("dimension {dim} is not 2 or 3"))),
        };
        Ok(Self {
            dim,
            epsilons,
            levels: (0..=max_level).collect(),
            mg: MgConfig::gauss_seidel(sweeps)?,
            tol,
            maxit: 1000,
            seed: 20240611,
            dense_limit: DEFAULT_DENSE_LIMIT,
            max_dofs: DEFAULT_MAX_DOFS,
            record_timing: true,
            lanczos: LanczosOptions::default(),
            dump_eigs: None,
            export_matrix: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidConfig(format!("dimension {} is not 2 or 3", self.dim)));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidConfig(format!("epsilon {e} is not positive")));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidConfig(format!("tol {} is not in (0, 1)", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::InvalidConfig("maxit must be at least 1".into()));
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        if self.dim == 2 {
            Domain::Square2d
        } else {
            Domain::Cube3d
        }
    }

    /// Coarsest mesh size: 1/2 on `(-1,1)²`, 1/4 on `(0,1)³`. Both resolve
    /// the coefficient interfaces.
    pub fn h0(&self) -> f64 {
        if self.dim == 2 {
            0.5
        } else {
            0.25
        }
    }

    /// CR unknowns on level `level`. Uniform refinement multiplies simplices
    /// by `2^d` and boundary facets by `2^(d−1)`, and every interior facet is
    /// shared by two simplices.
    pub fn cr_dofs(&self, level: usize) -> usize {
        let d = self.dim;
        let (simplices, boundary) = if d == 2 { (32usize, 16usize) } else { (384, 192) };
        ((d + 1) * (simplices << (d * level)) - (boundary << ((d - 1) * level))) / 2
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum CellStatus {
    #[default]
    Ok,
    /// PCG hit `maxit` before reaching `tol`.
    NotConverged,
    Skipped(String),
    Failed(String),
}

/// One `(ε, level)` cell. Field names are the CSV column names; missing
/// numbers are written as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dim: usize,
    pub epsilon: f64,
    pub level: usize,
    pub cr_dofs: usize,
    pub pcg_iterations: Option<usize>,
    pub cond: Option<f64>,
    pub eff_cond_1: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_2: Option<f64>,
    pub lambda_max: Option<f64>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub status: CellStatus,
}

impl ResultRow {
    fn empty(spec: &ExperimentSpec, epsilon: f64, level: usize, status: CellStatus) -> Self {
        Self {
            dim: spec.dim,
            epsilon,
            level,
            cr_dofs: spec.cr_dofs(level),
            pcg_iterations: None,
            cond: None,
            eff_cond_1: None,
            lambda_min: None,
            lambda_2: None,
            lambda_max: None,
            wall_time_s: 0.0,
            status,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

/// Distinct, reproducible Lanczos seed per cell.
fn cell_seed(seed: u64, eps_index: usize, level: usize) -> u64 {
    seed ^ ((eps_index as u64) << 32 | level as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Runs every cell of `spec`. Meshes are built once and shared; cells run in
/// parallel but rows come back in `epsilons × levels` order. A failing cell
/// becomes a row with status `Failed` and the sweep continues.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let feasible = |l: usize| spec.cr_dofs(l) <= spec.max_dofs;
    let top = spec.levels.iter().copied().filter(|&l| feasible(l)).max();
    let meshes = match (top, spec.epsilons.first()) {
        (Some(top), Some(&eps)) => {
            let field = CoefficientField::model_problem(spec.domain(), eps)?;
            Some(Arc::new(build_mesh_chain(spec.domain(), spec.h0(), &field, top)?))
        }
        _ => None,
    };
    let cells: Vec<(usize, usize)> =
        (0..spec.epsilons.len()).flat_map(|e| spec.levels.iter().map(move |&l| (e, l))).collect();
    let rows = par::map_slice(&cells, |&(e, level)| {
        let eps = spec.epsilons[e];
        if !feasible(level) {
            let why = format!("{} CR unknowns exceed the limit of {}", spec.cr_dofs(level), spec.max_dofs);
            return ResultRow::empty(spec, eps, level, CellStatus::Skipped(why));
        }
        let meshes = meshes.as_ref().expect("a feasible level implies a mesh chain");
        match run_cell(spec, meshes, e, level) {
            Ok(row) => row,
            Err(err) => ResultRow::empty(spec, eps, level, CellStatus::Failed(err.to_string())),
        }
    });
    Ok(rows)
}

fn run_cell(spec: &ExperimentSpec, meshes: &Arc<Vec<SimplicialMesh>>, eps_index: usize, level: usize) -> Result<ResultRow> {
    let start = Instant::now();
    let eps = spec.epsilons[eps_index];
    let field = CoefficientField::model_problem(spec.domain(), eps)?;
    let h = Hierarchy::assemble(Arc::clone(meshes), level, &field)?;
    let b = MgPreconditioner::build(&h, spec.mg)?;
    let a = h.finest_operator();
    let rhs = h.finest_load(1.0).expect("hierarchy assembled from meshes");
    let solve = pcg(a, &b, &rhs, spec.tol, spec.maxit)?;
    let opts = LanczosOptions { seed: cell_seed(spec.seed, eps_index, level), ..spec.lanczos.clone() };
    let spectrum = lanczos_spectrum(a, &b, &opts)?;

    if let Some(dir) = &spec.dump_eigs {
        let report = if a.n_rows() <= spec.dense_limit {
            dense_ba_spectrum(a, &b, spec.dense_limit, &[1])?
        } else {
            spectrum.clone()
        };
        fs::create_dir_all(dir)?;
        write_spectrum(&report, dir.join(format!("{}.eigs", cell_name(spec.dim, eps, level))))?;
    }
    if let Some(dir) = &spec.export_matrix {
        export_hierarchy(&h, &rhs, &dir.join(cell_name(spec.dim, eps, level)))?;
    }

    let wall = start.elapsed().as_secs_f64();
    Ok(ResultRow {
        dim: spec.dim,
        epsilon: eps,
        level,
        cr_dofs: a.n_rows(),
        pcg_iterations: Some(solve.iterations),
        cond: Some(spectrum.condition),
        eff_cond_1: spectrum.effective_condition(1),
        lambda_min: Some(spectrum.lambda_min()),
        lambda_2: Some(spectrum.lambda_2()),
        lambda_max: Some(spectrum.lambda_max()),
        wall_time_s: if spec.record_timing { wall } else { 0.0 },
        status: if solve.converged { CellStatus::Ok } else { CellStatus::NotConverged },
    })
}

/// `d2_eps1e-3_l2` and the like.
pub fn cell_name(dim: usize, epsilon: f64, level: usize) -> String {
    format!("d{dim}_eps{epsilon:e}_l{level}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    /// `K (iterations)` and `K_1` lines per ε, one column per level.
    Text,
}

pub fn write_table<W: Write>(rows: &[ResultRow], format: TableFormat, w: W) -> Result<()> {
    match format {
        TableFormat::Csv => write_csv(rows, w),
        TableFormat::Text => write_text_table(rows, w),
    }
}

pub fn emit_table(rows: &[ResultRow], format: TableFormat, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_table(rows, format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        wr.serialize(row)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidConfig(format!("unexpected CSV header {:?}", header.join(","))));
    }
    rd.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// `printf("%.3g")`: three significant digits, exponent form below 1e-4 and
/// from 1e3 on, trailing zeros dropped.
pub fn format_sig3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.2e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..3).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (2 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_text_table<W: Write>(rows: &[ResultRow], mut w: W) -> Result<()> {
    let mut levels: Vec<usize> = rows.iter().map(|r| r.level).collect();
    levels.sort_unstable();
    levels.dedup();
    let mut epsilons: Vec<f64> = Vec::new();
    for r in rows {
        if !epsilons.contains(&r.epsilon) {
            epsilons.push(r.epsilon);
        }
    }
    const W0: usize = 8;
    const W1: usize = 6;
    const WC: usize = 16;
    write!(w, "{:<W0$}{:<W1$}", "eps", "level")?;
    for l in &levels {
        write!(w, "{l:>WC$}")?;
    }
    writeln!(w)?;
    for &eps in &epsilons {
        let cell = |l: usize| rows.iter().find(|r| r.epsilon == eps && r.level == l);
        write!(w, "{:<W0$}{:<W1$}", format_sig3(eps), "K")?;
        for &l in &levels {
            let s = match cell(l) {
                Some(ResultRow { cond: Some(k), pcg_iterations: Some(it), .. }) => format!("{} ({it})", format_sig3(*k)),
                Some(r) if matches!(r.status, CellStatus::Skipped(_)) => "skipped".into(),
                Some(_) => "failed".into(),
                None => "-".into(),
            };
            write!(w, "{s:>WC$}")?;
        }
        writeln!(w)?;
        write!(w, "{:<W0$}{:<W1$}", "", "K_1")?;
        for &l in &levels {
            let s = cell(l).and_then(|r| r.eff_cond_1).map_or_else(|| "-".into(), format_sig3);
            write!(w, "{s:>WC$}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Eigenvalues, ascending, one per line.
pub fn write_spectrum(report: &SpectrumReport, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(&mut w, &report.eigenvalues)?;
    w.flush()?;
    Ok(())
}

/// Spectrum of `BA` for one cell: the dense oracle when the CR space has at
/// most `spec.dense_limit` unknowns, Lanczos Ritz values otherwise.
pub fn cell_spectrum(spec: &ExperimentSpec, epsilon: f64, level: usize) -> Result<SpectrumReport> {
    spec.validate()?;
    let field = CoefficientField::model_problem(spec.domain(), epsilon)?;
    let h = Hierarchy::build(spec.domain(), spec.h0(), &field, level)?;
    let b = MgPreconditioner::build(&h, spec.mg)?;
    let a = h.finest_operator();
    if a.n_rows() <= spec.dense_limit {
        dense_ba_spectrum(a, &b, spec.dense_limit, &[1])
    } else {
        lanczos_spectrum(a, &b, &LanczosOptions { seed: spec.seed, ..spec.lanczos.clone() })
    }
}

pub fn dump_spectrum(spec: &ExperimentSpec, epsilon: f64, level: usize, path: impl AsRef<Path>) -> Result<()> {
    write_spectrum(&cell_spectrum(spec, epsilon, level)?, path)
}

/// Writes every operator and prolongation of `h`, the right-hand side and
/// the meshes into `dir`:
/// `A_<j>.mtx` (P1 level `j`, symmetric), `A_cr.mtx`, `P_<j>.mtx` (level
/// `j−1` into `j`), `P_cr.mtx` (the inclusion), `rhs.txt`, `mesh_<j>.txt`.
pub fn export_hierarchy(h: &Hierarchy, rhs: &[f64], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let top = h.num_levels() - 1;
    let name = |j: usize| if j == top { "cr".to_string() } else { j.to_string() };
    let create = |file: String| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(dir.join(file))?)) };
    for j in 0..h.num_levels() {
        let mut w = create(format!("A_{}.mtx", name(j)))?;
        write_matrix_market(&mut w, h.operator(j), true)?;
        w.flush()?;
        if j > 0 {
            let mut w = create(format!("P_{}.mtx", name(j)))?;
            write_matrix_market(&mut w, h.prolongation(j), false)?;
            w.flush()?;
        }
    }
    let mut w = create("rhs.txt".into())?;
    write_vector(&mut w, rhs)?;
    w.flush()?;
    for (j, m) in h.meshes().unwrap_or(&[]).iter().enumerate() {
        let mut w = create(format!("mesh_{j}.txt"))?;
        m.write_text(&mut w)?;
        w.flush()?;
    }
    Ok(())
}
