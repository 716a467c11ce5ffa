//! Classification of Kraus sets by orthogonality under the normalized
//! Hilbert-Schmidt inner product, and the orthogonal-equivalent decomposition
//! of a POVM: weights alpha over an orthonormal frame of hermitian unitaries
//! plus the correcting unitary that maps the frame back onto the hermitian
//! roots.

use crate::error::{Error, Result};
use crate::linalg::{complete_to_unitary, entropy_base2, hermitian_eig, ComplexMatrix};
use crate::povm::kraus::{KrausSet, Povm};
use crate::povm::pauli::{hs_inner, pauli_basis};
use crate::tol::TOL;
use num_complex::Complex64;

/// Expansion coefficients of a Kraus set over the Pauli strings:
/// `entries[mu][eta] = (sigma_eta, M_mu)`, one row per outcome.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    n_qubits: usize,
    entries: ComplexMatrix,
}

impl CoefficientMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// K x 4^n matrix of expansion coefficients.
    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    /// `sum |c|^2`; equals 1 for any complete Kraus set.
    pub fn total_weight(&self) -> f64 {
        self.entries.entries().iter().map(|c| c.norm_sqr()).sum()
    }

    /// The 4^n x 4^n cross-product matrix `c^dag c` whose diagonality decides
    /// orthogonal equivalence in the fixed Pauli frame.
    pub fn cross_products(&self) -> ComplexMatrix {
        &self.entries.dagger() * &self.entries
    }

    /// Largest off-diagonal modulus of `c^dag c`.
    pub fn max_offdiag_cross(&self) -> f64 {
        let g = self.cross_products();
        let mut worst = 0.0f64;
        for r in 0..g.rows() {
            for c in 0..g.cols() {
                if r != c {
                    worst = worst.max(g[(r, c)].norm());
                }
            }
        }
        worst
    }

    /// Largest imaginary part across all entries; ~0 for hermitian sets.
    pub fn max_imag(&self) -> f64 {
        self.entries
            .entries()
            .iter()
            .map(|c| c.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Verdict of the pairwise orthogonality test together with the diagonal
/// inner products `c_mu = (M_mu, M_mu)`.
#[derive(Debug, Clone)]
pub struct OrthogonalityCheck {
    pub orthogonal: bool,
    pub diagonal: Vec<f64>,
    pub max_offdiag: f64,
}

impl KrausSet {
    /// Expands every operator over the Pauli strings.
    pub fn pauli_expand(&self) -> Result<CoefficientMatrix> {
        let basis = pauli_basis(self.n_qubits())?;
        let mut entries = ComplexMatrix::zeros(self.len(), basis.len());
        for (mu, m) in self.operators().iter().enumerate() {
            for (eta, sigma) in basis.iter().enumerate() {
                entries[(mu, eta)] = hs_inner(sigma, m)?;
            }
        }
        Ok(CoefficientMatrix {
            n_qubits: self.n_qubits(),
            entries,
        })
    }

    /// Pairwise test: the set is orthogonal when `(M_mu, M_eta) = c_mu
    /// delta_mu_eta` within tolerance.
    pub fn is_orthogonal(&self) -> Result<OrthogonalityCheck> {
        let k = self.len();
        let mut diagonal = Vec::with_capacity(k);
        let mut max_offdiag = 0.0f64;
        for mu in 0..k {
            for eta in 0..k {
                let v = hs_inner(&self.operators()[mu], &self.operators()[eta])?;
                if mu == eta {
                    diagonal.push(v.re);
                } else {
                    max_offdiag = max_offdiag.max(v.norm());
                }
            }
        }
        Ok(OrthogonalityCheck {
            orthogonal: max_offdiag < TOL.orthogonality,
            diagonal,
            max_offdiag,
        })
    }

    /// Orthogonal-equivalence test in the fixed Pauli frame: true when some
    /// ancilla-basis unitary maps the set onto scaled Pauli strings, which
    /// holds exactly when `c^dag c` is diagonal. A false verdict does not
    /// rule out a decomposition in a rotated frame; see
    /// [`Povm::oe_decompose`].
    pub fn is_oe(&self) -> Result<bool> {
        Ok(self.pauli_expand()?.max_offdiag_cross() < TOL.oe_diagonality)
    }
}

/// Orthogonal-equivalent decomposition of a POVM built on its hermitian
/// roots: weights `alphas` (the Schmidt coefficients of the entangled
/// resource a remote implementation needs), the retained frame indices, the
/// orthonormal frame of hermitian unitaries carrying the weights, and the
/// correcting unitary.
#[derive(Debug, Clone)]
pub struct OEDecomposition {
    n_qubits: usize,
    alphas: Vec<f64>,
    unitary: ComplexMatrix,
    retained: Vec<usize>,
    frame: Vec<ComplexMatrix>,
    frame_rotated: bool,
    source_roots: KrausSet,
}

impl OEDecomposition {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// All 4^n weights. Without a frame rotation the index is the Pauli
    /// string index; with one, slot 0 is the identity direction (n = 1) or
    /// the leading eigendirection, followed by descending weights.
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Frame indices with weight above the cutoff, ascending.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// The completed K' x K' unitary. Row `i` belongs to `retained[i]`;
    /// column `nu` to outcome `nu`. Rows past the retained list are the
    /// orthonormal completion.
    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    /// Frame operator for each retained index: `frame()[i]` carries weight
    /// `alphas()[retained()[i]]`. Each is hermitian, unitary, and the family
    /// is orthonormal under the normalized Hilbert-Schmidt inner product.
    /// Equal to the Pauli strings at the retained indices when no rotation
    /// was needed.
    pub fn frame(&self) -> &[ComplexMatrix] {
        &self.frame
    }

    /// True when the hermitian roots required an orthogonal recombination of
    /// the Pauli strings to obtain orthogonal coefficient columns.
    pub fn frame_rotated(&self) -> bool {
        self.frame_rotated
    }

    /// The hermitian roots the decomposition was built from.
    pub fn source_roots(&self) -> &KrausSet {
        &self.source_roots
    }

    /// Number of measurement outcomes K.
    pub fn outcome_count(&self) -> usize {
        self.source_roots.len()
    }

    /// K' = max(K, retained count): the ancilla dimension of the remote
    /// protocol.
    pub fn completed_size(&self) -> usize {
        self.unitary.rows()
    }

    /// Entanglement cost in ebits: base-2 entropy of the weights.
    pub fn entanglement_cost(&self) -> f64 {
        entropy_base2(&self.alphas).expect("decomposition weights are normalized by construction")
    }

    /// Largest entrywise deviation of
    /// `sum_i U[i][nu] alpha_retained[i] frame[i]` from `sqrt(F_nu)`.
    pub fn reconstruction_residual(&self) -> f64 {
        let dim = 1usize << self.n_qubits;
        let mut worst = 0.0f64;
        for (nu, root) in self.source_roots.operators().iter().enumerate() {
            let mut rebuilt = ComplexMatrix::zeros(dim, dim);
            for (i, &lambda) in self.retained.iter().enumerate() {
                let w = self.unitary[(i, nu)] * self.alphas[lambda];
                rebuilt = &rebuilt + &self.frame[i].scaled(w);
            }
            worst = worst.max(rebuilt.max_abs_diff(root));
        }
        worst
    }
}

/// Real symmetric Gram of the coefficient columns, `g[a][b] = sum_mu
/// c[mu][a] c[mu][b]`. Valid for hermitian sets only (real c).
fn column_gram(entries: &ComplexMatrix) -> Vec<Vec<f64>> {
    let cols = entries.cols();
    let rows = entries.rows();
    let mut g = vec![vec![0.0f64; cols]; cols];
    for a in 0..cols {
        for b in a..cols {
            let mut s = 0.0;
            for mu in 0..rows {
                s += entries[(mu, a)].re * entries[(mu, b)].re;
            }
            g[a][b] = s;
            g[b][a] = s;
        }
    }
    g
}

fn gram_max_offdiag(g: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, row) in g.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            if a != b {
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// Eigen-pairs of a real symmetric matrix, descending, with real
/// eigenvector columns `w[row][col]` under a deterministic sign convention
/// (largest-magnitude entry positive).
fn real_symmetric_eig_desc(g: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = g.len();
    let m = ComplexMatrix::from_fn(n, n, |r, c| Complex64::new(g[r][c], 0.0));
    let (vals, vecs) = hermitian_eig(&m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap().then(a.cmp(&b)));

    let mut w = vec![vec![0.0f64; n]; n];
    let mut out_vals = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        out_vals.push(vals[src]);
        let mut pivot = 0usize;
        let mut best = 0.0f64;
        for r in 0..n {
            let mag = vecs[(r, src)].norm();
            if mag > best {
                best = mag;
                pivot = r;
            }
        }
        // strip the arbitrary unit phase; a symmetric input keeps the
        // rephased column real
        let phase = vecs[(pivot, src)] / best;
        for r in 0..n {
            let v = vecs[(r, src)] / phase;
            if v.im.abs() > TOL.oe_diagonality {
                return Err(Error::NotHermitian(v.im.abs()));
            }
            w[r][col] = v.re;
        }
    }
    Ok((out_vals, w))
}

impl Povm {
    /// Builds the orthogonal-equivalent decomposition from the hermitian
    /// roots. Completeness forces the identity column of the coefficient
    /// Gram to be orthogonal to the rest; the traceless block is generally
    /// not diagonal, so the construction diagonalizes it with a real
    /// orthogonal recombination of the Pauli strings (the measurement
    /// frame). For one qubit every such recombination is again a hermitian
    /// unitary, so the decomposition always exists. For n >= 2 a
    /// recombination mixing commuting Pauli strings fails unitarity; a POVM
    /// whose retained frame operators are not unitary within tolerance has
    /// no decomposition of this form and is rejected.
    pub fn oe_decompose(&self) -> Result<OEDecomposition> {
        let roots = self.hermitian_roots()?;
        let coeff = roots.pauli_expand()?;
        let imag = coeff.max_imag();
        if imag > TOL.oe_diagonality {
            return Err(Error::NotHermitian(imag));
        }

        let strings = 4usize.pow(self.n_qubits() as u32);
        let k = roots.len();
        let entries = coeff.entries();
        let basis = pauli_basis(self.n_qubits())?;
        let g = column_gram(entries);

        // rotation[eta][lambda]: frame_lambda = sum_eta rotation[eta][lambda] sigma_eta
        let (alpha_sq, rotation): (Vec<f64>, Option<Vec<Vec<f64>>>) =
            if gram_max_offdiag(&g) <= TOL.oe_diagonality {
                ((0..strings).map(|l| g[l][l]).collect(), None)
            } else if self.n_qubits() == 1 {
                let pinned = (1..4).map(|x| g[0][x].abs()).fold(0.0, f64::max);
                if pinned > TOL.oe_diagonality {
                    // completeness pins the identity column; a violation
                    // means the input was not a valid POVM
                    return Err(Error::NotOrthogonalEquivalent(pinned));
                }
                let space: Vec<Vec<f64>> =
                    (1..4).map(|a| (1..4).map(|b| g[a][b]).collect()).collect();
                let (vals, q) = real_symmetric_eig_desc(&space)?;
                let mut w = vec![vec![0.0f64; 4]; 4];
                w[0][0] = 1.0;
                for r in 0..3 {
                    for c in 0..3 {
                        w[r + 1][c + 1] = q[r][c];
                    }
                }
                let mut sq = vec![g[0][0]];
                sq.extend(vals);
                (sq, Some(w))
            } else {
                let (vals, w) = real_symmetric_eig_desc(&g)?;
                (vals, Some(w))
            };

        let alphas: Vec<f64> = alpha_sq.iter().map(|&v| v.max(0.0).sqrt()).collect();
        let retained: Vec<usize> = (0..strings)
            .filter(|&lambda| alphas[lambda] > TOL.alpha_cutoff)
            .collect();

        // rotated coefficients c~[nu][lambda] = sum_eta c[nu][eta] w[eta][lambda]
        let coeff_at = |nu: usize, lambda: usize| -> f64 {
            match &rotation {
                None => entries[(nu, lambda)].re,
                Some(w) => (0..strings).map(|eta| entries[(nu, eta)].re * w[eta][lambda]).sum(),
            }
        };

        let dim = 1usize << self.n_qubits();
        let mut frame = Vec::with_capacity(retained.len());
        for &lambda in &retained {
            let op = match &rotation {
                None => basis[lambda].clone(),
                Some(w) => {
                    let mut acc = ComplexMatrix::zeros(dim, dim);
                    for eta in 0..strings {
                        if w[eta][lambda] != 0.0 {
                            acc = &acc + &basis[eta].scaled(w[eta][lambda]);
                        }
                    }
                    acc
                }
            };
            let defect = (&op * &op).max_abs_diff(&ComplexMatrix::identity(dim));
            if defect > TOL.frame_involution {
                return Err(Error::NotOrthogonalEquivalent(defect));
            }
            frame.push(op);
        }

        let completed_size = k.max(retained.len());
        let rows: Vec<Vec<Complex64>> = retained
            .iter()
            .map(|&lambda| {
                let mut row = vec![Complex64::new(0.0, 0.0); completed_size];
                for (nu, slot) in row.iter_mut().enumerate().take(k) {
                    *slot = Complex64::new(coeff_at(nu, lambda) / alphas[lambda], 0.0);
                }
                row
            })
            .collect();
        let unitary = complete_to_unitary(&rows, completed_size)?;

        Ok(OEDecomposition {
            n_qubits: self.n_qubits(),
            alphas,
            unitary,
            retained,
            frame,
            frame_rotated: rotation.is_some(),
            source_roots: roots,
        })
    }
}
