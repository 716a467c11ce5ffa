//! Dense row-major complex matrices plus the decompositions the rest of the
//! crate leans on: hermitian eigensystems, PSD square roots, orthonormal
//! completion.

use crate::error::{Error, Result};
use crate::tol::TOL;
use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

/// Dense complex matrix. Entries are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from explicit rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            entries: rows.concat(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn scaled(&self, factor: impl Into<Complex64>) -> Self {
        let f = factor.into();
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * f).collect(),
        }
    }

    /// Kronecker product; `self` owns the slower-varying index.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self[(ar, ac)];
                for br in 0..other.rows {
                    for bc in 0..other.cols {
                        out[(ar * other.rows + br, ac * other.cols + bc)] = a * other[(br, bc)];
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product. Panics on length mismatch.
    pub fn apply_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .map(|(m, x)| m * x)
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from the adjoint; zero for hermitian input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest entrywise deviation of `m† m` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn require_unitary(&self, tol: f64) -> Result<()> {
        let defect = self.unitarity_defect();
        if defect > tol {
            return Err(Error::NotUnitary(defect));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.re.is_finite() && e.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &mut self.entries[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..rhs.cols {
                    out[(r, c)] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a hermitian matrix. Eigenvalues come back ascending,
/// eigenvectors as the matching columns of the returned matrix.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > TOL.hermiticity {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    if n == 1 {
        return Ok((vec![m[(0, 0)].re], ComplexMatrix::identity(1)));
    }

    // Symmetrize before handing off so roundoff in the upper triangle cannot
    // leak into the decomposition.
    let h = nalgebra::DMatrix::from_fn(n, n, |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let eig = nalgebra::linalg::SymmetricEigen::new(h);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Hermitian PSD square root via eigendecomposition. Eigenvalues in
/// `[-TOL.psd_clamp, 0)` are clamped to zero; anything lower is rejected.
pub fn psd_sqrt(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eig(m)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -TOL.psd_clamp {
        return Err(Error::NotPositiveSemidefinite(min));
    }
    let roots: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let scaled = ComplexMatrix::from_fn(vectors.rows(), vectors.cols(), |r, c| {
        vectors[(r, c)] * roots[c]
    });
    Ok(&scaled * &vectors.dagger())
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Extends orthonormal `rows` (each of length `dim`) to a `dim x dim` unitary
/// whose leading rows are the inputs, via modified Gram-Schmidt over the
/// computational basis candidates.
pub fn complete_to_unitary(rows: &[Vec<Complex64>], dim: usize) -> Result<ComplexMatrix> {
    if rows.len() > dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "cannot complete {} rows of mixed length to a {dim}x{dim} unitary",
            rows.len()
        )));
    }
    let mut basis: Vec<Vec<Complex64>> = rows.to_vec();
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        // Two projection passes keep the result orthogonal at working precision.
        for _ in 0..2 {
            for b in &basis {
                let p = inner(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        let n = norm(&v);
        if n > 1e-6 {
            for vi in &mut v {
                *vi /= n;
            }
            basis.push(v);
        }
    }
    if basis.len() != dim {
        return Err(Error::DimensionMismatch(
            "orthonormal completion failed: input rows were not independent".into(),
        ));
    }
    let u = ComplexMatrix::from_rows(&basis);
    u.require_unitary(TOL.reconstruction)?;
    Ok(u)
}

/// Orthonormalizes the columns of `m` in order (modified Gram-Schmidt, two
/// passes). Requires full column rank.
pub fn orthonormalize_columns(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mut cols: Vec<Vec<Complex64>> = (0..m.cols()).map(|c| m.column(c)).collect();
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let p = inner(&cols[i], &cols[j]);
                for k in 0..cols[j].len() {
                    let b = cols[i][k];
                    cols[j][k] -= p * b;
                }
            }
        }
        let n = norm(&cols[j]);
        if n < 1e-10 {
            return Err(Error::DimensionMismatch(
                "column set is rank deficient; cannot orthonormalize".into(),
            ));
        }
        for x in &mut cols[j] {
            *x /= n;
        }
    }
    Ok(ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| cols[c][r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::pauli_basis;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.tensor(&i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn tensor_sz_sx_has_block_sign_structure() {
        let paulis = pauli_basis(1).unwrap();
        let (sx, sz) = (&paulis[1], &paulis[3]);
        let t = sz.tensor(sx);
        // [sx, 0; 0, -sx]
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 1)] = re(1.0);
        expected[(1, 0)] = re(1.0);
        expected[(2, 3)] = re(-1.0);
        expected[(3, 2)] = re(-1.0);
        assert!(t.max_abs_diff(&expected) < 1e-15, "got {t:?}");
    }

    #[test]
    fn eig_of_diagonal_matrix_is_sorted_ascending() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 0.5625]);
        let (values, vectors) = hermitian_eig(&m).unwrap();
        assert!((values[0] - 0.5625).abs() < 1e-12);
        assert!((values[1] - 1.0).abs() < 1e-12);
        assert!(vectors.unitarity_defect() < 1e-12);
    }

    #[test]
    fn eig_of_sigma_x() {
        let sx = pauli_basis(1).unwrap()[1].clone();
        let (values, vectors) = hermitian_eig(&sx).unwrap();
        assert!((values[0] + 1.0).abs() < 1e-12 && (values[1] - 1.0).abs() < 1e-12);
        // Columns are (|0> -/+ |1>)/sqrt(2) up to phase: check the reconstruction instead.
        let d = ComplexMatrix::from_real_diag(&values);
        let rebuilt = &(&vectors * &d) * &vectors.dagger();
        assert!(rebuilt.max_abs_diff(&sx) < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = re(1.0);
        match hermitian_eig(&m) {
            Err(Error::NotHermitian(defect)) => assert!(defect > 0.9),
            other => panic!("expected NotHermitian, got {other:?}"),
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for dim in [2usize, 3, 4, 8] {
            let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
            });
            let h = &g + &g.dagger();
            let (values, vectors) = hermitian_eig(&h).unwrap();
            assert!(values.windows(2).all(|w| w[0] <= w[1]), "ascending order");
            let d = ComplexMatrix::from_real_diag(&values);
            let rebuilt = &(&vectors * &d) * &vectors.dagger();
            assert!(
                rebuilt.max_abs_diff(&h) < 1e-9,
                "dim {dim}: residual {}",
                rebuilt.max_abs_diff(&h)
            );
            assert!(vectors.unitarity_defect() < 1e-9);
        }
    }

    #[test]
    fn psd_sqrt_of_diagonal() {
        let m = ComplexMatrix::from_real_diag(&[1.0, 0.5625]);
        let root = psd_sqrt(&m).unwrap();
        assert!(root.max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.75])) < 1e-12);
        assert!((&root * &root).max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn psd_sqrt_of_projector_is_projector() {
        let paulis = pauli_basis(1).unwrap();
        let p = (&paulis[0] + &paulis[1]).scaled(0.5); // (I + sx)/2
        let root = psd_sqrt(&p).unwrap();
        assert!(root.max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_negative_eigenvalue() {
        let m = ComplexMatrix::from_real_diag(&[1.0, -0.25]);
        match psd_sqrt(&m) {
            Err(Error::NotPositiveSemidefinite(min)) => assert!(min < -0.2),
            other => panic!("expected NotPositiveSemidefinite, got {other:?}"),
        }
    }

    #[test]
    fn completion_extends_partial_rows_to_unitary() {
        let s = 0.5f64.sqrt();
        let row = vec![re(s), re(s), re(0.0), re(0.0)];
        let u = complete_to_unitary(&[row.clone()], 4).unwrap();
        assert_eq!(u.rows(), 4);
        assert!(u.unitarity_defect() < 1e-12);
        for (k, e) in row.iter().enumerate() {
            assert!((u[(0, k)] - e).norm() < 1e-15, "input row preserved");
        }
    }

    #[test]
    fn orthonormalize_columns_yields_isometry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = ComplexMatrix::from_fn(6, 3, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let q = orthonormalize_columns(&g).unwrap();
        let gram = &q.dagger() * &q;
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }
}
