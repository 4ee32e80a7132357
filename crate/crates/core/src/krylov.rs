//! Preconditioned conjugate gradients and spectral estimates of the
//! preconditioned operator `BA`.
//!
//! `BA` is self-adjoint in the `B⁻¹` inner product, so its spectrum is that
//! of the symmetric matrix `B^{1/2} A B^{1/2}`. [`lanczos_spectrum`] runs
//! Lanczos on that matrix implicitly, keeping a `B`-orthonormal basis `v_k`
//! together with `z_k = B v_k`. [`dense_ba_spectrum`] is the exact oracle: with
//! `A = L Lᵀ` it diagonalizes `Lᵀ B L`, which is similar to `BA`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{cholesky_factor, dense_sym_eig, sym_eigenvalues_householder, tridiagonal_eigenvalues, DenseMatrix};
use crate::error::{Error, Result};
use crate::operator::LinearOperator;
use crate::par::{self, axpy, dot, norm2};
use crate::sparse::CsrMatrix;

/// Dense oracle size above which [`dense_ba_spectrum`] refuses to run.
pub const DEFAULT_DENSE_LIMIT: usize = 3000;
/// Up to this size the dense oracle uses cyclic Jacobi; above it, Householder + QL.
pub const JACOBI_MAX_DIM: usize = 400;
/// `λ_i` counts as an outlier when `λ_i < SMALL_EIGENVALUE_GAP · λ_{i+1}`.
pub const SMALL_EIGENVALUE_GAP: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct PcgResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `‖r_k‖ / ‖r_0‖` after each iteration.
    pub residual_history: Vec<f64>,
    /// CG step lengths.
    pub alphas: Vec<f64>,
    /// CG direction-update coefficients.
    pub betas: Vec<f64>,
}

impl PcgResult {
    /// The Lanczos tridiagonal implied by the CG coefficients, as
    /// `(diagonal, off_diagonal)` of size `iterations`.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.alphas.len();
        let mut diag = Vec::with_capacity(m);
        let mut off = Vec::with_capacity(m.saturating_sub(1));
        for k in 0..m {
            let mut d = 1.0 / self.alphas[k];
            if k > 0 {
                d += self.betas[k - 1] / self.alphas[k - 1];
            }
            diag.push(d);
            if k + 1 < m {
                off.push(self.betas[k].sqrt() / self.alphas[k]);
            }
        }
        (diag, off)
    }

    /// Eigenvalues of [`PcgResult::tridiagonal`], ascending.
    pub fn ritz_values(&self) -> Vec<f64> {
        let (d, e) = self.tridiagonal();
        tridiagonal_eigenvalues(&d, &e)
    }
}

/// PCG from a zero initial guess, stopping when `‖r_k‖ / ‖r_0‖ < tol`.
pub fn pcg(a: &dyn LinearOperator, b: &dyn LinearOperator, rhs: &[f64], tol: f64, maxit: usize) -> Result<PcgResult> {
    pcg_from(a, b, rhs, &vec![0.0; rhs.len()], tol, maxit)
}

pub fn pcg_from(
    a: &dyn LinearOperator,
    b: &dyn LinearOperator,
    rhs: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<PcgResult> {
    let n = a.dim();
    if b.dim() != n || rhs.len() != n || x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "pcg: A is {n}, B is {}, rhs {}, x0 {}",
            b.dim(),
            rhs.len(),
            x0.len()
        )));
    }
    let mut x = x0.to_vec();
    let mut r = a.apply(&x)?;
    r.iter_mut().zip(rhs).for_each(|(ri, bi)| *ri = bi - *ri);
    let r0 = norm2(&r);
    let mut out = PcgResult {
        solution: Vec::new(),
        iterations: 0,
        converged: r0 == 0.0,
        residual_history: Vec::new(),
        alphas: Vec::new(),
        betas: Vec::new(),
    };
    if r0 == 0.0 {
        out.solution = x;
        return Ok(out);
    }
    let mut z = b.apply(&r)?;
    let mut rz = dot(&r, &z);
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    for k in 0..maxit {
        if !(rz > 0.0) {
            return Err(Error::IndefinitePreconditioner(rz));
        }
        a.apply_into(&p, &mut q)?;
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotSpd { pivot: k, value: pq });
        }
        let alpha = rz / pq;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        out.alphas.push(alpha);
        out.iterations = k + 1;
        let rel = norm2(&r) / r0;
        out.residual_history.push(rel);
        if rel < tol {
            out.converged = true;
            break;
        }
        b.apply_into(&r, &mut z)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        out.betas.push(beta);
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        rz = rz_new;
    }
    out.solution = x;
    Ok(out)
}

/// `λ_N / λ_{m+1}` for an ascending, positive spectrum; `m = 0` gives the
/// ordinary condition number.
pub fn effective_condition(eigs: &[f64], m: usize) -> Result<f64> {
    if m + 1 > eigs.len() {
        return Err(Error::InvalidConfig(format!(
            "effective condition K_{m} needs at least {} eigenvalues, have {}",
            m + 1,
            eigs.len()
        )));
    }
    if eigs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("eigenvalues must be ascending".into()));
    }
    if !(eigs[0] > 0.0) {
        return Err(Error::InvalidConfig(format!("eigenvalue {} is not positive", eigs[0])));
    }
    Ok(eigs[eigs.len() - 1] / eigs[m])
}

/// Number of outlying small eigenvalues: the largest `i` in the lower half
/// of the spectrum with `λ_i < 0.1 λ_{i+1}` (0 if there is none).
pub fn count_small_eigenvalues(eigs: &[f64]) -> usize {
    let half = eigs.len() / 2;
    (0..half)
        .rev()
        .find(|&i| eigs[i] < SMALL_EIGENVALUE_GAP * eigs[i + 1])
        .map_or(0, |i| i + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Ascending. The full spectrum for the dense oracle, Ritz values for Lanczos.
    pub eigenvalues: Vec<f64>,
    /// `K = λ_max / λ_min`.
    pub condition: f64,
    /// `(m, K_m)` for each requested `m`.
    pub effective: Vec<(usize, f64)>,
    pub m0_detected: usize,
    /// `true` for the dense oracle.
    pub exact: bool,
    /// Lanczos steps taken (matrix size for the oracle).
    pub steps: usize,
    /// Whether `λ_min`, `λ_2`, `λ_max` stabilized (always true for the oracle).
    pub converged: bool,
}

impl SpectrumReport {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, ms: &[usize], exact: bool) -> Result<Self> {
        eigenvalues.sort_by(f64::total_cmp);
        if eigenvalues.is_empty() {
            return Err(Error::EmptyDofSet);
        }
        if !(eigenvalues[0] > 0.0) {
            return Err(Error::IndefinitePreconditioner(eigenvalues[0]));
        }
        let condition = effective_condition(&eigenvalues, 0)?;
        let effective = ms
            .iter()
            .filter(|&&m| m < eigenvalues.len())
            .map(|&m| Ok((m, effective_condition(&eigenvalues, m)?)))
            .collect::<Result<Vec<_>>>()?;
        let steps = eigenvalues.len();
        Ok(Self {
            m0_detected: count_small_eigenvalues(&eigenvalues),
            eigenvalues,
            condition,
            effective,
            exact,
            steps,
            converged: true,
        })
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Second smallest, or the smallest for a one-point spectrum.
    pub fn lambda_2(&self) -> f64 {
        self.eigenvalues[1.min(self.eigenvalues.len() - 1)]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn effective_condition(&self, m: usize) -> Option<f64> {
        self.effective.iter().find(|(k, _)| *k == m).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Maximum Lanczos steps in total, over all probes.
    pub steps: usize,
    /// Random start vectors tried, counting restarts after breakdown.
    pub probes: usize,
    /// Relative-change threshold for `λ_min`, `λ_2`, `λ_max`.
    pub tol: f64,
    /// Consecutive steps the change must stay below `tol`.
    pub patience: usize,
    pub seed: u64,
    /// Effective condition numbers to report.
    pub effective: Vec<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { steps: 300, probes: 4, tol: 1e-5, patience: 5, seed: 0x5eed, effective: vec![1] }
    }
}

/// Ritz-value estimate of the spectrum of `BA` by Lanczos with full
/// reorthogonalization. Once `λ_min`, `λ_2` and `λ_max` have changed by less
/// than `tol` for `patience` consecutive steps, the next probe is started and
/// the basis keeps growing; Ritz values come from the full projected matrix.
pub fn lanczos_spectrum(a: &dyn LinearOperator, b: &dyn LinearOperator, opts: &LanczosOptions) -> Result<SpectrumReport> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch(format!("A is {n}, B is {}", b.dim())));
    }
    if n == 0 {
        return Err(Error::EmptyDofSet);
    }
    let max_steps = opts.steps.min(n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // v_i: B-orthonormal basis of the residual space, z_i = B v_i
    let mut vs: Vec<Vec<f64>> = Vec::new();
    let mut zs: Vec<Vec<f64>> = Vec::new();
    // projected matrix h_ij = z_i · A z_j, i.e. the Rayleigh quotient matrix of B^{1/2} A B^{1/2}
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut probes_used = 0;

    let orthogonalize = |w: &mut [f64], vs: &[Vec<f64>], zs: &[Vec<f64>]| {
        for (v, z) in vs.iter().zip(zs) {
            let c = dot(w, z);
            axpy(-c, v, w);
        }
    };

    // appends a fresh random probe B-orthogonal to the basis; false when none is usable
    let mut new_probe = |vs: &mut Vec<Vec<f64>>, zs: &mut Vec<Vec<f64>>, probes_used: &mut usize| -> Result<bool> {
        while *probes_used < opts.probes.max(1) {
            *probes_used += 1;
            let mut r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rn = norm2(&r);
            orthogonalize(&mut r, vs, zs);
            orthogonalize(&mut r, vs, zs);
            if norm2(&r) <= 1e-10 * rn {
                continue;
            }
            let z = b.apply(&r)?;
            let rz = dot(&r, &z);
            if !(rz > 0.0) {
                return Err(Error::IndefinitePreconditioner(rz));
            }
            let s = rz.sqrt();
            vs.push(r.iter().map(|x| x / s).collect());
            zs.push(z.iter().map(|x| x / s).collect());
            return Ok(true);
        }
        Ok(false)
    };

    if !new_probe(&mut vs, &mut zs, &mut probes_used)? {
        return Err(Error::InvalidConfig("no usable Lanczos probe".into()));
    }
    let mut prev: Option<[f64; 3]> = None;
    let mut stable = 0;
    let mut converged = false;
    let mut ritz = Vec::new();
    let mut w = vec![0.0; n];
    while h.len() < max_steps {
        let k = vs.len() - 1;
        a.apply_into(&zs[k], &mut w)?;
        let col: Vec<f64> = zs.iter().map(|z| dot(&w, z)).collect();
        for (i, &c) in col.iter().enumerate().take(k) {
            h[i].push(c);
        }
        h.push(col);

        let mut proj = DenseMatrix::from_fn(h.len(), h.len(), |i, j| h[i][j]);
        proj.symmetrize();
        ritz = sym_eigenvalues_householder(&proj)?;
        let probe = [ritz[0], ritz[1.min(ritz.len() - 1)], ritz[ritz.len() - 1]];
        if let Some(p) = prev {
            let change = (0..3).map(|i| ((probe[i] - p[i]) / probe[i]).abs()).fold(0.0, f64::max);
            stable = if change < opts.tol && ritz.len() >= 3 { stable + 1 } else { 0 };
        }
        prev = Some(probe);
        if h.len() == n {
            converged = true;
            break;
        }
        if stable >= opts.patience {
            // a single Krylov sequence cannot see a second copy of a repeated
            // eigenvalue; a fresh probe can
            if !new_probe(&mut vs, &mut zs, &mut probes_used)? {
                converged = true;
                break;
            }
            stable = 0;
            continue;
        }
        if h.len() == max_steps {
            break;
        }

        for (i, &c) in h[k].iter().enumerate() {
            axpy(-c, &vs[i], &mut w);
        }
        orthogonalize(&mut w, &vs, &zs);
        let z = b.apply(&w)?;
        let wz = dot(&w, &z);
        let scale = h[k][k].abs().max(f64::MIN_POSITIVE);
        // breakdown: the basis spans an invariant subspace
        if !(wz > (1e-12 * scale).powi(2)) {
            if !new_probe(&mut vs, &mut zs, &mut probes_used)? {
                converged = true;
                break;
            }
            stable = 0;
            continue;
        }
        let beta = wz.sqrt();
        vs.push(w.iter().map(|x| x / beta).collect());
        zs.push(z.iter().map(|x| x / beta).collect());
    }

    let mut report = SpectrumReport::from_eigenvalues(ritz, &opts.effective, false)?;
    report.steps = h.len();
    report.converged = converged;
    Ok(report)
}

/// Full spectrum of `BA` from the symmetric matrix `Lᵀ B L`, `A = L Lᵀ`.
/// `B L` is formed column by column by applying `B` to the columns of `L`,
/// which equals `mat(B) L` for the matrix of `B` in the unit basis.
///
/// Up to [`JACOBI_MAX_DIM`] the in-crate Cholesky and Jacobi solvers are
/// used; larger problems go through faer's blocked kernels.
pub fn dense_ba_spectrum(a: &CsrMatrix, b: &dyn LinearOperator, limit: usize, ms: &[usize]) -> Result<SpectrumReport> {
    let n = a.n_rows();
    if n > limit {
        return Err(Error::TooLarge { size: n, limit });
    }
    if b.dim() != n || a.n_cols() != n {
        return Err(Error::DimensionMismatch(format!("A is {}x{}, B is {}", n, a.n_cols(), b.dim())));
    }
    let eigs = if n <= JACOBI_MAX_DIM { small_ba_eigenvalues(a, b)? } else { large_ba_eigenvalues(a, b)? };
    SpectrumReport::from_eigenvalues(eigs, ms, true)
}

fn check_projected_symmetry(asym: f64, scale: f64) -> Result<()> {
    if asym > 1e-8 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

fn small_ba_eigenvalues(a: &CsrMatrix, b: &dyn LinearOperator) -> Result<Vec<f64>> {
    let n = a.n_rows();
    let lt = cholesky_factor(&a.to_dense())?.lower().transpose();
    // rows of `lt` are the columns of L; rows of `blt` are B applied to them
    let blt = par::map_range(n, |j| b.apply(lt.row(j)));
    let blt = blt.into_iter().collect::<Result<Vec<_>>>()?;
    // S_ij = Σ_k L_ki (B L)_kj, with L_ki = 0 for k < i
    let mut s = DenseMatrix::from_fn(n, n, |i, j| dot(&lt.row(i)[i..], &blt[j][i..]));
    check_projected_symmetry(s.max_asymmetry(), s.max_abs())?;
    s.symmetrize();
    Ok(dense_sym_eig(&s, false)?.values)
}

fn large_ba_eigenvalues(a: &CsrMatrix, b: &dyn LinearOperator) -> Result<Vec<f64>> {
    use faer::{Mat, Side};
    let n = a.n_rows();
    let mut am = Mat::<f64>::zeros(n, n);
    for r in 0..n {
        let (cols, vals) = a.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            am.write(r, c, v);
        }
    }
    let l = am
        .cholesky(Side::Lower)
        .map_err(|e| Error::NotSpd { pivot: e.non_positive_definite_minor, value: f64::NAN })?
        .compute_l();
    drop(am);
    let bl = par::map_range(n, |j| {
        let col: Vec<f64> = (0..n).map(|i| l.read(i, j)).collect();
        b.apply(&col)
    });
    let bl = bl.into_iter().collect::<Result<Vec<_>>>()?;
    let blm = Mat::<f64>::from_fn(n, n, |i, j| bl[j][i]);
    drop(bl);
    let mut s = l.transpose() * &blm;
    drop(blm);
    drop(l);
    let (mut asym, mut scale) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(s.read(i, j).abs());
            if i > j {
                asym = asym.max((s.read(i, j) - s.read(j, i)).abs());
            }
        }
    }
    check_projected_symmetry(asym, scale)?;
    for j in 0..n {
        for i in j + 1..n {
            let m = 0.5 * (s.read(i, j) + s.read(j, i));
            s.write(i, j, m);
            s.write(j, i, m);
        }
    }
    let mut eigs = s.selfadjoint_eigenvalues(Side::Lower);
    eigs.sort_by(f64::total_cmp);
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{cholesky_factor, DenseMatrix};
    use crate::operator::IdentityOperator;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn pcg_trivial_systems() {
        let id = CsrMatrix::identity(5);
        let r = pcg(&id, &IdentityOperator(5), &[1.0, 2.0, 3.0, 4.0, 5.0], 1e-12, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);

        let d = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let r = pcg(&d, &IdentityOperator(2), &[1.0, 1.0], 1e-12, 10).unwrap();
        assert!(r.iterations <= 2 && r.converged);
        assert!((r.solution[0] - 1.0).abs() < 1e-14 && (r.solution[1] - 0.5).abs() < 1e-14);
        assert_eq!(r.ritz_values().len(), r.iterations);
    }

    #[test]
    fn pcg_maxit_is_flagged_not_fatal() {
        let a = laplace_1d(50);
        let r = pcg(&a, &IdentityOperator(50), &vec![1.0; 50], 1e-12, 3).unwrap();
        assert_eq!(r.iterations, 3);
        assert!(!r.converged);
        assert!(*r.residual_history.last().unwrap() >= 1e-12);
    }

    #[test]
    fn pcg_rejects_indefinite_preconditioner() {
        let a = laplace_1d(4);
        let neg = DenseMatrix::from_diagonal(&[-1.0; 4]);
        assert!(matches!(
            pcg(&a, &neg, &[1.0; 4], 1e-8, 10),
            Err(Error::IndefinitePreconditioner(_))
        ));
    }

    #[test]
    fn pcg_energy_error_is_monotone() {
        let n = 30;
        let a = laplace_1d(n);
        let dense = a.to_dense();
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let exact = cholesky_factor(&dense).unwrap().solve(&rhs).unwrap();
        let jac = DenseMatrix::from_diagonal(&[0.5; 30]);
        let mut prev = f64::INFINITY;
        for it in 1..=n {
            let r = pcg(&a, &jac, &rhs, 0.0, it).unwrap();
            let e: Vec<f64> = r.solution.iter().zip(&exact).map(|(x, y)| x - y).collect();
            let en = dot(&e, &dense.matvec(&e)).sqrt();
            assert!(en <= prev * (1.0 + 1e-10) + 1e-14);
            prev = en;
        }
    }

    #[test]
    fn effective_condition_examples() {
        assert_eq!(effective_condition(&[1e-5, 0.5, 0.7, 1.0], 1).unwrap(), 2.0);
        assert_eq!(effective_condition(&[0.25, 0.5, 1.0], 0).unwrap(), 4.0);
        assert_eq!(effective_condition(&[3.0, 3.0, 3.0], 2).unwrap(), 1.0);
        assert!(effective_condition(&[1.0, 2.0], 2).is_err());
        assert!(effective_condition(&[2.0, 1.0], 0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn effective_condition_is_ordered(mut eigs in proptest::collection::vec(1e-8f64..10.0, 2..40), m in 0usize..5) {
            eigs.sort_by(f64::total_cmp);
            let r = SpectrumReport::from_eigenvalues(eigs.clone(), &[1, 2, 3, 4], true).unwrap();
            let mut prev = r.condition;
            for &(_, k) in &r.effective {
                proptest::prop_assert!(k <= prev && k >= 1.0);
                prev = k;
            }
            if m < eigs.len() {
                proptest::prop_assert_eq!(effective_condition(&eigs, m).unwrap(), eigs[eigs.len() - 1] / eigs[m]);
            }
        }
    }

    #[test]
    fn small_eigenvalue_detection() {
        assert_eq!(count_small_eigenvalues(&[1e-5, 0.5, 0.7, 1.0]), 1);
        assert_eq!(count_small_eigenvalues(&[1e-5, 1e-3, 0.5, 0.7, 0.8, 1.0]), 2);
        assert_eq!(count_small_eigenvalues(&[0.4, 0.5, 0.7, 1.0]), 0);
    }

    #[test]
    fn exact_preconditioner_gives_unit_spectrum() {
        let a = laplace_1d(20);
        let inv = cholesky_factor(&a.to_dense()).unwrap();
        let lz = lanczos_spectrum(&a, &inv, &LanczosOptions::default()).unwrap();
        assert!(lz.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
        assert!((lz.condition - 1.0).abs() < 1e-12);
        assert!((lz.effective_condition(1).unwrap_or(1.0) - 1.0).abs() < 1e-12);
        let dn = dense_ba_spectrum(&a, &inv, 100, &[1]).unwrap();
        assert!(dn.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn dense_oracle_with_identity_is_spectrum_of_a() {
        let n = 12;
        let a = laplace_1d(n);
        let r = dense_ba_spectrum(&a, &IdentityOperator(n), 100, &[1]).unwrap();
        for (k, l) in r.eigenvalues.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((l - exact).abs() < 1e-13);
        }
        assert!(matches!(
            dense_ba_spectrum(&a, &IdentityOperator(n), 5, &[]),
            Err(Error::TooLarge { size: 12, limit: 5 })
        ));
    }

    #[test]
    fn lanczos_extremes_match_dense_on_a_model_problem() {
        let n = 200;
        let a = laplace_1d(n);
        let jac = DenseMatrix::from_diagonal(&[0.5; 200]);
        let lz = lanczos_spectrum(&a, &jac, &LanczosOptions { tol: 1e-8, ..Default::default() }).unwrap();
        let dn = dense_ba_spectrum(&a, &jac, 1000, &[1]).unwrap();
        assert!((lz.lambda_max() - dn.lambda_max()).abs() < 1e-6 * dn.lambda_max());
        assert!((lz.lambda_min() - dn.lambda_min()).abs() < 1e-2 * dn.lambda_min());
    }

    #[test]
    fn pcg_tridiagonal_ritz_values_lie_in_spectrum() {
        let a = laplace_1d(40);
        let r = pcg(&a, &IdentityOperator(40), &vec![1.0; 40], 1e-10, 100).unwrap();
        let ritz = r.ritz_values();
        assert_eq!(ritz.len(), r.iterations);
        assert!(ritz.iter().all(|&t| t > 0.0 && t < 4.0));
    }
}
