//! Small dense linear algebra: row-major matrices, Cholesky for the coarsest
//! solve, and symmetric eigensolvers used as oracles for the preconditioned
//! spectrum.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::par::{axpy, dot};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        (0..n).for_each(|i| m[(i, i)] = 1.0);
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                data.push(f(i, j));
            }
        }
        Self { n_rows, n_cols, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self { n_rows: rows.len(), n_cols, data: rows.concat() }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        d.iter().enumerate().for_each(|(i, &v)| m[(i, i)] = v);
        m
    }

    /// Column-major input, e.g. a list of images of basis vectors.
    pub fn from_columns(n_rows: usize, columns: &[Vec<f64>]) -> Self {
        let mut m = Self::zeros(n_rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n_rows);
            col.iter().enumerate().for_each(|(i, &v)| m[(i, j)] = v);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self[(j, i)])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).fold(0.0, |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                out.row_mut(i).iter_mut().zip(orow).for_each(|(o, b)| *o += a * b);
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        if self.n_rows != self.n_cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Replaces the matrix with `(S + Sᵀ)/2`.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        DenseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n_cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n_cols + j]
    }
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct DenseFactor {
    l: DenseMatrix,
}

pub fn cholesky_factor(a: &DenseMatrix) -> Result<DenseFactor> {
    let n = a.n_rows();
    if a.n_cols() != n {
        return Err(Error::DimensionMismatch(format!("cholesky of {}x{} matrix", n, a.n_cols())));
    }
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let (lj_head, _) = l.row(j).split_at(j);
        let mut d = a[(j, j)] - lj_head.iter().map(|v| v * v).sum::<f64>();
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotSpd { pivot: j, value: d });
        }
        d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = (a[(i, j)] - s) / d;
        }
    }
    Ok(DenseFactor { l })
}

impl DenseFactor {
    pub fn dim(&self) -> usize {
        self.l.n_rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solves `A x = b` by forward and backward substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch(format!("cholesky solve: n = {n}, rhs {}", x.len())));
        }
        let l = &self.l;
        for i in 0..n {
            let s = dot(&l.row(i)[..i], &x[..i]);
            x[i] = (x[i] - s) / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= l[(k, i)] * x[k];
            }
            x[i] = s / l[(i, i)];
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: Option<DenseMatrix>,
}

fn check_symmetric(s: &DenseMatrix) -> Result<()> {
    if s.n_rows() != s.n_cols() {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", s.n_rows(), s.n_cols())));
    }
    let asym = s.max_asymmetry();
    if asym > 1e-12 * s.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Sweeps over all off-diagonal pairs, annihilating each with a plane
/// rotation, until the off-diagonal mass is negligible relative to the
/// Frobenius norm. Slow (`O(n³)` per sweep) but accurate to working precision
/// for every symmetric input, including tightly clustered spectra.
pub fn dense_sym_eig(s: &DenseMatrix, want_vectors: bool) -> Result<SymmetricEigen> {
    const MAX_SWEEPS: usize = 60;
    check_symmetric(s)?;
    let n = s.n_rows();
    let mut a = s.clone();
    a.symmetrize();
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));
    let scale = a.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                // tiny entries relative to both diagonals are zeroed directly
                if apq.abs() < 1e-18 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - sn * vkq;
                        v[(k, q)] = sn * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = v.map(|v| DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]));
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`), by implicit QL with
/// Wilkinson shifts. Returned ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(off.len() + 1 >= n, "off-diagonal too short");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Eigenvalues of a symmetric matrix via Householder reduction to tridiagonal
/// form followed by implicit QL. `O(n³)` with a far smaller constant than
/// [`dense_sym_eig`], so it is the route taken for large oracle problems.
pub fn sym_eigenvalues_householder(s: &DenseMatrix) -> Result<Vec<f64>> {
    check_symmetric(s)?;
    let n = s.n_rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // only the lower triangle of `a` is referenced
    let mut a = s.clone();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        let m = k + 1;
        // Householder vector annihilating a[k+2.., k]
        let alpha = a[(m, k)];
        let sigma: f64 = (m + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        diag[k] = a[(k, k)];
        if sigma == 0.0 {
            off[k] = alpha;
            continue;
        }
        let norm = (alpha * alpha + sigma).sqrt();
        let beta = if alpha <= 0.0 { norm } else { -norm };
        off[k] = beta;
        let v0 = alpha - beta;
        v[m] = 1.0;
        for i in m + 1..n {
            v[i] = a[(i, k)] / v0;
        }
        let tau = (beta - alpha) / beta;

        // p = tau * A22 v using the lower triangle
        p[m..n].iter_mut().for_each(|x| *x = 0.0);
        for i in m..n {
            let row = &a.row(i)[m..i];
            let vi = v[i];
            let acc = dot(row, &v[m..i]);
            axpy(vi, row, &mut p[m..i]);
            p[i] += acc + a[(i, i)] * vi;
        }
        p[m..n].iter_mut().for_each(|x| *x *= tau);
        let pv: f64 = (m..n).map(|i| p[i] * v[i]).sum();
        let half = 0.5 * tau * pv;
        for i in m..n {
            p[i] -= half * v[i];
        }
        // A22 -= v wᵀ + w vᵀ, lower triangle
        for i in m..n {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(i)[m..=i];
            for ((aij, &pj), &vj) in row.iter_mut().zip(&p[m..=i]).zip(&v[m..=i]) {
                *aij -= vi * pj + wi * vj;
            }
        }
    }
    diag[n - 1] = a[(n - 1, n - 1)];
    Ok(tridiagonal_eigenvalues(&diag, &off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut impl Rng) -> DenseMatrix {
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut a = g.transpose().matmul(&g);
        (0..n).for_each(|i| a[(i, i)] += 0.5);
        a
    }

    #[test]
    fn cholesky_of_identity_is_identity() {
        let f = cholesky_factor(&DenseMatrix::identity(4)).unwrap();
        assert_eq!(f.lower(), &DenseMatrix::identity(4));
    }

    #[test]
    fn cholesky_hand_example() {
        let f = cholesky_factor(&DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]])).unwrap();
        let l = f.lower();
        assert_eq!(l[(0, 0)], 2.0);
        assert_eq!(l[(0, 1)], 0.0);
        assert_eq!(l[(1, 0)], 1.0);
        assert_relative_eq!(l[(1, 1)], 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(f.solve(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(cholesky_factor(&a), Err(Error::NotSpd { pivot: 1, .. })));
    }

    #[test]
    fn cholesky_reconstruction_and_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 5, 30] {
            let a = random_spd(n, &mut rng);
            let f = cholesky_factor(&a).unwrap();
            let l = f.lower();
            let rel = l.matmul(&l.transpose()).sub(&a).frobenius_norm() / a.frobenius_norm();
            assert!(rel <= 1e-12, "reconstruction {rel}");
            assert!((0..n).all(|i| l[(i, i)] > 0.0));
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = f.solve(&b).unwrap();
            let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
            let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(rn <= 1e-12 * bn);
        }
    }

    #[test]
    fn jacobi_small_known_spectra() {
        let e = dense_sym_eig(&DenseMatrix::from_diagonal(&[3.0, 1.0, 2.0]), false).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        let e = dense_sym_eig(&DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), true).unwrap();
        assert_relative_eq!(e.values[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(e.values[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn jacobi_rejects_asymmetric() {
        let s = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.1, 1.0]]);
        assert!(matches!(dense_sym_eig(&s, false), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn jacobi_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_spd(10, &mut rng);
        let e = dense_sym_eig(&a, true).unwrap();
        assert!(e.values.iter().all(|&l| l > 0.0));
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let v = e.vectors.unwrap();
        let recon = v.matmul(&DenseMatrix::from_diagonal(&e.values)).matmul(&v.transpose());
        assert!(recon.sub(&a).frobenius_norm() <= 1e-10 * a.frobenius_norm());

        let g = DenseMatrix::from_fn(25, 25, |_, _| rng.gen_range(-1.0..1.0));
        let mut sym = g.clone();
        for i in 0..25 {
            for j in 0..25 {
                sym[(i, j)] = g[(i, j)] + g[(j, i)];
            }
        }
        let e = dense_sym_eig(&sym, true).unwrap();
        let v = e.vectors.unwrap();
        let recon = v.matmul(&DenseMatrix::from_diagonal(&e.values)).matmul(&v.transpose());
        assert!(recon.sub(&sym).frobenius_norm() <= 1e-10 * sym.frobenius_norm());
    }

    #[test]
    fn tridiagonal_ql_matches_known_spectrum() {
        // 1D Laplacian: eigenvalues 2 - 2 cos(k pi / (n + 1))
        let n = 40;
        let vals = tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_relative_eq!(*v, exact, epsilon = 1e-13);
        }
        assert_eq!(tridiagonal_eigenvalues(&[5.0], &[]), vec![5.0]);
        assert_eq!(tridiagonal_eigenvalues(&[2.0, 1.0], &[0.0]), vec![1.0, 2.0]);
    }

    #[test]
    fn householder_agrees_with_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 3, 17, 60] {
            let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let mut sym = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    sym[(i, j)] = g[(i, j)] + g[(j, i)];
                }
            }
            let a = dense_sym_eig(&sym, false).unwrap().values;
            let b = sym_eigenvalues_householder(&sym).unwrap();
            let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * scale, "n={n}: {x} vs {y}");
            }
        }
    }
}
