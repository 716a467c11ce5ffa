//! Measurements as Kraus operator sets and as POVM element sets.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_sqrt, ComplexMatrix, StateVector};
use crate::povm::pauli::pauli_basis;
use crate::tol::TOL;
use num_complex::Complex64;

/// A measurement as Kraus operators {M_mu} with `sum M^dag M = I`.
#[derive(Debug, Clone)]
pub struct KrausSet {
    n_qubits: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(n_qubits: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::InvalidArgument(
                "a kraus set needs at least one operator".into(),
            ));
        }
        let dim = 1usize << n_qubits;
        for m in &operators {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "operator is {}x{}, expected {dim}x{dim} for {n_qubits} qubit(s)",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.all_finite() {
                return Err(Error::InvalidArgument("operator entries must be finite".into()));
            }
        }
        let mut total = ComplexMatrix::zeros(dim, dim);
        for m in &operators {
            total = &total + &(&m.dagger() * m);
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > TOL.completeness {
            return Err(Error::IncompleteKrausSet(defect));
        }
        Ok(Self { n_qubits, operators })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one operator
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// Mixes the set through a unitary on the outcome index:
    /// `N_mu = sum_rho u[mu][rho] M_rho`. The two sets realize the same
    /// channel; only the outcome bookkeeping changes.
    pub fn apply_ancilla_unitary(&self, u: &ComplexMatrix) -> Result<KrausSet> {
        let k = self.len();
        if u.rows() != k || u.cols() != k {
            return Err(Error::DimensionMismatch(format!(
                "mixing unitary is {}x{}, expected {k}x{k}",
                u.rows(),
                u.cols()
            )));
        }
        u.require_unitary(TOL.reconstruction)?;
        let dim = self.dim();
        let mut mixed = Vec::with_capacity(k);
        for mu in 0..k {
            let mut n = ComplexMatrix::zeros(dim, dim);
            for (rho, m) in self.operators.iter().enumerate() {
                n = &n + &m.scaled(u[(mu, rho)]);
            }
            mixed.push(n);
        }
        KrausSet::new(self.n_qubits, mixed)
    }
}

/// A measurement as POVM elements {F_mu}: hermitian, PSD, summing to I.
#[derive(Debug, Clone)]
pub struct Povm {
    n_qubits: usize,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(n_qubits: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let dim = 1usize << n_qubits;
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (mu, f) in elements.iter().enumerate() {
            if f.rows() != dim || f.cols() != dim {
                return Err(Error::InvalidPovm(format!(
                    "element {mu} is {}x{}, expected {dim}x{dim}",
                    f.rows(),
                    f.cols()
                )));
            }
            let herm = f.hermiticity_defect();
            if herm > TOL.hermiticity {
                return Err(Error::InvalidPovm(format!(
                    "element {mu} is not hermitian (defect {herm:.3e})"
                )));
            }
            let (values, _) = hermitian_eig(f).map_err(|e| {
                Error::InvalidPovm(format!("element {mu} failed eigendecomposition: {e}"))
            })?;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -TOL.psd_clamp {
                return Err(Error::InvalidPovm(format!(
                    "element {mu} has negative eigenvalue {min:.3e}"
                )));
            }
            total = &total + f;
        }
        let defect = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > TOL.completeness {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity with defect {defect:.3e}"
            )));
        }
        Ok(Self { n_qubits, elements })
    }

    /// POVM induced by a Kraus set: `F_mu = M_mu^dag M_mu`.
    pub fn from_kraus(ks: &KrausSet) -> Result<Povm> {
        let elements = ks.operators().iter().map(|m| &m.dagger() * m).collect();
        Povm::new(ks.n_qubits(), elements)
    }

    /// Projective measurement in the computational basis.
    pub fn computational_projectors(n_qubits: usize) -> Result<Povm> {
        let dim = 1usize << n_qubits;
        let elements = (0..dim)
            .map(|i| {
                let mut p = ComplexMatrix::zeros(dim, dim);
                p[(i, i)] = Complex64::new(1.0, 0.0);
                p
            })
            .collect();
        Povm::new(n_qubits, elements)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one element
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// The canonical hermitian Kraus realization `M_mu = sqrt(F_mu)`.
    pub fn hermitian_roots(&self) -> Result<KrausSet> {
        let roots = self
            .elements
            .iter()
            .map(psd_sqrt)
            .collect::<Result<Vec<_>>>()?;
        KrausSet::new(self.n_qubits, roots)
    }

    /// Born probabilities `<psi|F_mu|psi>` of a local measurement.
    pub fn distribution(&self, psi: &StateVector) -> Result<Vec<f64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} vs povm dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        Ok(self
            .elements
            .iter()
            .map(|f| {
                let fv = f.apply_vec(psi.amplitudes());
                let p: Complex64 = psi
                    .amplitudes()
                    .iter()
                    .zip(&fv)
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                p.re.max(0.0)
            })
            .collect())
    }
}

/// Two-outcome Kraus pair that either maps both `alpha|0> +/- beta|1>` inputs
/// onto the distinguishable pair `(|0> +/- |1>)/sqrt(2)` (outcome 0) or
/// declares failure by collapsing both onto |1> (outcome 1):
/// `M_0 = (1+alpha/beta)/2 + (1-alpha/beta)/2 sigma_z`,
/// `M_1 = -(sqrt(beta^2-alpha^2)/(2 beta)) (1 - sigma_z)`.
pub fn fig1_povm(alpha: f64, beta: f64) -> Result<KrausSet> {
    if !alpha.is_finite() || !beta.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(
            "amplitudes must be finite with alpha > 0".into(),
        ));
    }
    if (alpha * alpha + beta * beta - 1.0).abs() > TOL.normalization {
        return Err(Error::InvalidArgument(format!(
            "alpha^2 + beta^2 = {} but the input pair must be normalized",
            alpha * alpha + beta * beta
        )));
    }
    if alpha > beta {
        return Err(Error::InvalidArgument(
            "alpha exceeds beta; relabel the basis so the smaller amplitude comes first".into(),
        ));
    }
    let paulis = pauli_basis(1)?;
    let (id, sz) = (&paulis[0], &paulis[3]);
    let ratio = alpha / beta;
    let m0 = &id.scaled(0.5 * (1.0 + ratio)) + &sz.scaled(0.5 * (1.0 - ratio));
    let fail = (beta * beta - alpha * alpha).max(0.0).sqrt() / (2.0 * beta);
    let m1 = (&id.scaled(fail) - &sz.scaled(fail)).scaled(-1.0);
    KrausSet::new(1, vec![m0, m1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SubsystemId;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn fixture_a_povm() -> Povm {
        Povm::from_kraus(&fig1_povm(0.6, 0.8).unwrap()).unwrap()
    }

    #[test]
    fn fig1_operators_at_06_08() {
        let ks = fig1_povm(0.6, 0.8).unwrap();
        let m0 = ComplexMatrix::from_real_diag(&[1.0, 0.75]);
        let m1 = ComplexMatrix::from_real_diag(&[0.0, -0.661_437_827_766_147_6]);
        assert!(ks.operators()[0].max_abs_diff(&m0) < 1e-12);
        assert!(ks.operators()[1].max_abs_diff(&m1) < 1e-12);
    }

    #[test]
    fn fig1_equal_amplitudes_degenerates() {
        let h = 0.5f64.sqrt();
        let ks = fig1_povm(h, h).unwrap();
        assert!(ks.operators()[0].max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        assert!(ks.operators()[1].max_abs() < 1e-12);
    }

    #[test]
    fn fig1_rejects_swapped_amplitudes() {
        match fig1_povm(0.8, 0.6) {
            Err(Error::InvalidArgument(msg)) => assert!(msg.contains("relabel")),
            other => panic!("expected InvalidArgument, got {other:?}"),
        }
    }

    #[test]
    fn fig1_rejects_unnormalized_pair() {
        assert!(matches!(fig1_povm(0.6, 0.9), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn kraus_set_rejects_incomplete_operators() {
        let half = ComplexMatrix::identity(2).scaled(0.5);
        match KrausSet::new(1, vec![half]) {
            Err(Error::IncompleteKrausSet(defect)) => assert!(defect > 0.7),
            other => panic!("expected IncompleteKrausSet, got {other:?}"),
        }
    }

    #[test]
    fn povm_from_kraus_matches_squares() {
        let p = fixture_a_povm();
        assert!(p.elements()[0].max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.5625])) < 1e-12);
        assert!(p.elements()[1].max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 0.4375])) < 1e-12);
    }

    #[test]
    fn povm_rejects_non_hermitian_element() {
        let mut f = ComplexMatrix::zeros(2, 2);
        f[(0, 1)] = re(1.0);
        f[(0, 0)] = re(1.0);
        f[(1, 1)] = re(1.0);
        let g = &ComplexMatrix::identity(2) - &f;
        assert!(matches!(Povm::new(1, vec![f, g]), Err(Error::InvalidPovm(_))));
    }

    #[test]
    fn povm_rejects_negative_element() {
        let f = ComplexMatrix::from_real_diag(&[1.5, 1.0]);
        let g = ComplexMatrix::from_real_diag(&[-0.5, 0.0]);
        match Povm::new(1, vec![f, g]) {
            Err(Error::InvalidPovm(msg)) => assert!(msg.contains("negative eigenvalue")),
            other => panic!("expected InvalidPovm, got {other:?}"),
        }
    }

    #[test]
    fn povm_rejects_incomplete_elements() {
        let f = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        match Povm::new(1, vec![f.clone(), f.scaled(0.5)]) {
            Err(Error::InvalidPovm(msg)) => assert!(msg.contains("sum to identity")),
            other => panic!("expected InvalidPovm, got {other:?}"),
        }
    }

    #[test]
    fn hermitian_roots_of_fixture_a() {
        let roots = fixture_a_povm().hermitian_roots().unwrap();
        assert!(roots.operators()[0].max_abs_diff(&ComplexMatrix::from_real_diag(&[1.0, 0.75])) < 1e-12);
        assert!(
            roots.operators()[1]
                .max_abs_diff(&ComplexMatrix::from_real_diag(&[0.0, 0.661_437_827_766_147_6]))
                < 1e-12
        );
    }

    #[test]
    fn hermitian_roots_of_projectors_are_projectors() {
        let p = Povm::computational_projectors(1).unwrap();
        let roots = p.hermitian_roots().unwrap();
        for (root, f) in roots.operators().iter().zip(p.elements()) {
            assert!(root.max_abs_diff(f) < 1e-12);
        }
    }

    #[test]
    fn distribution_of_fixture_a_on_psi_plus() {
        let psi = StateVector::single("B", vec![re(0.6), re(0.8)]).unwrap();
        let d = fixture_a_povm().distribution(&psi).unwrap();
        assert!((d[0] - 0.72).abs() < 1e-12 && (d[1] - 0.28).abs() < 1e-12);
    }

    #[test]
    fn distribution_of_projectors_on_basis_state() {
        let p = Povm::computational_projectors(1).unwrap();
        let zero = StateVector::single("B", vec![re(1.0), re(0.0)]).unwrap();
        assert_eq!(p.distribution(&zero).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn distribution_of_trivial_povm() {
        let p = Povm::new(1, vec![ComplexMatrix::identity(2)]).unwrap();
        let psi = StateVector::single("B", vec![re(0.6), re(0.8)]).unwrap();
        assert_eq!(p.distribution(&psi).unwrap(), vec![1.0]);
    }

    #[test]
    fn distribution_rejects_dimension_mismatch() {
        let p = Povm::computational_projectors(2).unwrap();
        let psi = StateVector::new(
            vec![re(1.0), re(0.0)],
            vec![(SubsystemId::from("B"), 2)],
        )
        .unwrap();
        assert!(matches!(p.distribution(&psi), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn ancilla_unitary_identity_and_swap() {
        let p = Povm::computational_projectors(1).unwrap();
        let roots = p.hermitian_roots().unwrap();
        let same = roots.apply_ancilla_unitary(&ComplexMatrix::identity(2)).unwrap();
        assert!(same.operators()[0].max_abs_diff(&roots.operators()[0]) < 1e-15);

        let swap = crate::povm::pauli_basis(1).unwrap()[1].clone();
        let swapped = roots.apply_ancilla_unitary(&swap).unwrap();
        assert!(swapped.operators()[0].max_abs_diff(&roots.operators()[1]) < 1e-15);
        assert!(swapped.operators()[1].max_abs_diff(&roots.operators()[0]) < 1e-15);
    }

    #[test]
    fn ancilla_hadamard_on_projectors() {
        let p = Povm::computational_projectors(1).unwrap();
        let roots = p.hermitian_roots().unwrap();
        let h = 0.5f64.sqrt();
        let had = ComplexMatrix::from_rows(&[vec![re(h), re(h)], vec![re(h), re(-h)]]);
        let mixed = roots.apply_ancilla_unitary(&had).unwrap();
        let paulis = crate::povm::pauli_basis(1).unwrap();
        assert!(mixed.operators()[0].max_abs_diff(&paulis[0].scaled(h)) < 1e-12);
        assert!(mixed.operators()[1].max_abs_diff(&paulis[3].scaled(h)) < 1e-12);
    }

    #[test]
    fn ancilla_unitary_rejects_non_unitary() {
        let roots = Povm::computational_projectors(1).unwrap().hermitian_roots().unwrap();
        let bad = ComplexMatrix::from_real_diag(&[1.0, 0.5]);
        assert!(matches!(
            roots.apply_ancilla_unitary(&bad),
            Err(Error::NotUnitary(_))
        ));
    }
}
