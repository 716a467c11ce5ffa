//! Multi-subsystem state vectors.
//!
//! A state carries a layout: an ordered list of `(subsystem id, local dim)`.
//! The first subsystem in the layout owns the slowest-varying index, so for a
//! two-qubit layout `[a, b]` the basis order is |a b> = |00>, |01>, |10>, |11>.

use crate::error::{Error, Result};
use crate::linalg::matrix::{hermitian_eig, ComplexMatrix};
use crate::tol::TOL;
use num_complex::Complex64;
use std::fmt;

/// Name of one tensor factor in a joint state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsystemId(String);

impl SubsystemId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for SubsystemId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl From<String> for SubsystemId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

impl fmt::Display for SubsystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Pure state over an ordered collection of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    layout: Vec<(SubsystemId, usize)>,
}

fn layout_dim(layout: &[(SubsystemId, usize)]) -> usize {
    layout.iter().map(|(_, d)| d).product()
}

fn strides(layout: &[(SubsystemId, usize)]) -> Vec<usize> {
    let mut s = vec![1usize; layout.len()];
    for i in (0..layout.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * layout[i + 1].1;
    }
    s
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>, layout: Vec<(SubsystemId, usize)>) -> Result<Self> {
        if layout.is_empty() || layout.iter().any(|(_, d)| *d == 0) {
            return Err(Error::InvalidArgument(
                "layout must list at least one subsystem of nonzero dimension".into(),
            ));
        }
        for (i, (id, _)) in layout.iter().enumerate() {
            if layout[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::DuplicateSubsystem(id.to_string()));
            }
        }
        let dim = layout_dim(&layout);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a layout of total dimension {dim}",
                amplitudes.len()
            )));
        }
        if !amplitudes
            .iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "amplitudes must be finite".into(),
            ));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Computational basis state |index> over the given layout.
    pub fn basis_state(layout: Vec<(SubsystemId, usize)>, index: usize) -> Result<Self> {
        let dim = layout_dim(&layout);
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes, layout)
    }

    /// Single-subsystem state from raw amplitudes.
    pub fn single(id: impl Into<SubsystemId>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        Self::new(amplitudes, vec![(id.into(), dim)])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &[(SubsystemId, usize)] {
        &self.layout
    }

    pub fn position_of(&self, id: &SubsystemId) -> Option<usize> {
        self.layout.iter().position(|(s, _)| s == id)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::ZeroState);
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// <self|other>. Requires identical layouts.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(
                "inner product of states with different layouts".into(),
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |<self|other>|, insensitive to global phase.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Joint state of two disjoint registers; `self` owns the slower index.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        for (id, _) in &other.layout {
            if self.position_of(id).is_some() {
                return Err(Error::DuplicateSubsystem(id.to_string()));
            }
        }
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut layout = self.layout.clone();
        layout.extend(other.layout.iter().cloned());
        Self::new(amplitudes, layout)
    }

    /// Reorders the layout; amplitudes are remapped to preserve the physical
    /// state. `order` must mention every subsystem exactly once.
    pub fn permuted(&self, order: &[SubsystemId]) -> Result<Self> {
        if order.len() != self.layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "permutation lists {} of {} subsystems",
                order.len(),
                self.layout.len()
            )));
        }
        let mut positions = Vec::with_capacity(order.len());
        for id in order {
            let p = self
                .position_of(id)
                .ok_or_else(|| Error::UnknownSubsystem(id.to_string()))?;
            if positions.contains(&p) {
                return Err(Error::DuplicateSubsystem(id.to_string()));
            }
            positions.push(p);
        }
        let old_strides = strides(&self.layout);
        let new_layout: Vec<(SubsystemId, usize)> =
            positions.iter().map(|&p| self.layout[p].clone()).collect();
        let new_strides = strides(&new_layout);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); self.dim()];
        for g in 0..self.dim() {
            let mut ng = 0;
            for (k, &p) in positions.iter().enumerate() {
                let digit = (g / old_strides[p]) % self.layout[p].1;
                ng += digit * new_strides[k];
            }
            amplitudes[ng] = self.amplitudes[g];
        }
        Self::new(amplitudes, new_layout)
    }
}

/// Applies `op` to the listed target subsystems (first target owns the
/// slowest-varying index of `op`) and the identity everywhere else. The norm
/// is not adjusted, so non-unitary operators yield unnormalized output.
pub fn apply_on_subsystems(
    op: &ComplexMatrix,
    state: &StateVector,
    targets: &[SubsystemId],
) -> Result<StateVector> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("no target subsystems".into()));
    }
    let mut positions = Vec::with_capacity(targets.len());
    for id in targets {
        let p = state
            .position_of(id)
            .ok_or_else(|| Error::UnknownSubsystem(id.to_string()))?;
        if positions.contains(&p) {
            return Err(Error::DuplicateSubsystem(id.to_string()));
        }
        positions.push(p);
    }
    let layout = state.layout();
    let all_strides = strides(layout);
    let tdims: Vec<usize> = positions.iter().map(|&p| layout[p].1).collect();
    let tdim: usize = tdims.iter().product();
    if op.rows() != tdim || op.cols() != tdim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but targets span dimension {tdim}",
            op.rows(),
            op.cols()
        )));
    }

    // Offsets of each op-basis index into the global index.
    let mut toffsets = vec![0usize; tdim];
    for (a, off) in toffsets.iter_mut().enumerate() {
        let mut rem = a;
        for (j, &d) in tdims.iter().enumerate().rev() {
            *off += (rem % d) * all_strides[positions[j]];
            rem /= d;
        }
    }

    let rest: Vec<usize> = (0..layout.len()).filter(|p| !positions.contains(p)).collect();
    let rest_total: usize = rest.iter().map(|&p| layout[p].1).product();

    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    let amps = state.amplitudes();
    let mut gathered = vec![Complex64::new(0.0, 0.0); tdim];
    for r in 0..rest_total {
        let mut base = 0usize;
        let mut rem = r;
        for &p in rest.iter().rev() {
            base += (rem % layout[p].1) * all_strides[p];
            rem /= layout[p].1;
        }
        for (a, &off) in toffsets.iter().enumerate() {
            gathered[a] = amps[base + off];
        }
        let transformed = op.apply_vec(&gathered);
        for (a, &off) in toffsets.iter().enumerate() {
            out[base + off] = transformed[a];
        }
    }
    StateVector::new(out, layout.to_vec())
}

/// Result of a bipartite Schmidt decomposition: the state equals
/// `sum_i coefficients[i] |left_basis[i]> (x) |right_basis[i]>` with the left
/// factor spanning the chosen subsystems in layout order.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending, strictly positive after cutoff.
    pub coefficients: Vec<f64>,
    pub left_basis: Vec<Vec<Complex64>>,
    pub right_basis: Vec<Vec<Complex64>>,
}

/// Schmidt decomposition across the bipartition (`left` subsystems | rest).
/// Both sides keep the layout's internal ordering. Built from the reduced
/// density operator of the left side, not a general SVD.
pub fn schmidt(state: &StateVector, left: &[SubsystemId]) -> Result<SchmidtDecomposition> {
    let layout = state.layout();
    let mut left_set = Vec::with_capacity(left.len());
    for id in left {
        let p = state
            .position_of(id)
            .ok_or_else(|| Error::UnknownSubsystem(id.to_string()))?;
        if left_set.contains(&p) {
            return Err(Error::DuplicateSubsystem(id.to_string()));
        }
        left_set.push(p);
    }
    let left_pos: Vec<usize> = (0..layout.len()).filter(|p| left_set.contains(p)).collect();
    let right_pos: Vec<usize> = (0..layout.len()).filter(|p| !left_set.contains(p)).collect();
    if left_pos.is_empty() || right_pos.is_empty() {
        return Err(Error::InvalidArgument(
            "schmidt bipartition needs a nonempty subsystem list on each side".into(),
        ));
    }

    let side_strides = |pos: &[usize]| -> Vec<usize> {
        let mut s = vec![1usize; pos.len()];
        for i in (0..pos.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * layout[pos[i + 1]].1;
        }
        s
    };
    let all_strides = strides(layout);
    let (lstr, rstr) = (side_strides(&left_pos), side_strides(&right_pos));
    let dl: usize = left_pos.iter().map(|&p| layout[p].1).product();
    let dr: usize = right_pos.iter().map(|&p| layout[p].1).product();

    let mut m = ComplexMatrix::zeros(dl, dr);
    for (g, amp) in state.amplitudes().iter().enumerate() {
        let mut a = 0usize;
        for (k, &p) in left_pos.iter().enumerate() {
            a += ((g / all_strides[p]) % layout[p].1) * lstr[k];
        }
        let mut b = 0usize;
        for (k, &p) in right_pos.iter().enumerate() {
            b += ((g / all_strides[p]) % layout[p].1) * rstr[k];
        }
        m[(a, b)] = *amp;
    }

    // Reduced density operator of the left side; its eigenvectors give the
    // left basis, and projecting the state onto each recovers the right side.
    let rho = &m * &m.dagger();
    let (values, vectors) = hermitian_eig(&rho)?;

    let mut triples: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = Vec::new();
    for i in (0..values.len()).rev() {
        let l = vectors.column(i);
        let mut proj = vec![Complex64::new(0.0, 0.0); dr];
        for (a, la) in l.iter().enumerate() {
            let conj = la.conj();
            for (b, p) in proj.iter_mut().enumerate() {
                *p += conj * m[(a, b)];
            }
        }
        let c = proj.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if c > TOL.schmidt_cutoff {
            for x in &mut proj {
                *x /= c;
            }
            triples.push((c, l, proj));
        }
    }
    triples.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut out = SchmidtDecomposition {
        coefficients: Vec::with_capacity(triples.len()),
        left_basis: Vec::with_capacity(triples.len()),
        right_basis: Vec::with_capacity(triples.len()),
    };
    for (c, l, r) in triples {
        out.coefficients.push(c);
        out.left_basis.push(l);
        out.right_basis.push(r);
    }
    Ok(out)
}

/// Entanglement entropy in bits of a normalized Schmidt coefficient vector.
/// Terms with squared weight below `TOL.entropy_floor` contribute zero.
pub fn entropy_base2(coefficients: &[f64]) -> Result<f64> {
    let total: f64 = coefficients.iter().map(|c| c * c).sum();
    if (total - 1.0).abs() > TOL.coefficient_norm {
        return Err(Error::NotNormalized(total));
    }
    let entropy: f64 = coefficients
        .iter()
        .map(|c| c * c)
        .filter(|&p| p > TOL.entropy_floor)
        .map(|p| -p * p.log2())
        .sum();
    // p = 1 contributes -0.0; keep the zero unsigned.
    Ok(entropy + 0.0)
}
