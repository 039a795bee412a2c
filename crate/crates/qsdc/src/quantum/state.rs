//! State vectors and the operations that act on them.

use num_complex::Complex64;
use rand::{Rng, RngCore};

use super::layout::{SubsystemId, SubsystemLayout, TargetSplit};
use super::unitary::UnitaryOp;
use super::{QuantumError, ALGEBRAIC_TOL, GLOBAL_PHASE_TOL};

/// Dense complex state vector over a named-subsystem layout.
///
/// Amplitudes are stored exactly as given; in particular a global phase is
/// kept, never normalized away.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SubsystemLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(layout: SubsystemLayout, amps: Vec<Complex64>) -> Result<Self, QuantumError> {
        if amps.len() != layout.total_dim() {
            return Err(QuantumError::WrongAmplitudeCount {
                expected: layout.total_dim(),
                got: amps.len(),
            });
        }
        if let Some(index) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QuantumError::AmplitudeNotFinite { index });
        }
        Ok(StateVector { layout, amps })
    }

    /// Computational basis state |index> of the layout's joint space.
    pub fn basis_state(layout: SubsystemLayout, index: usize) -> Result<Self, QuantumError> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(QuantumError::BasisIndexOutOfRange { index, dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { layout, amps })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Inner product <self|other>. The operands must have the same
    /// per-subsystem dimensions; ids are bookkeeping and not compared.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, QuantumError> {
        if self.layout.dims() != other.layout.dims() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.layout.dims(),
                got: other.layout.dims(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn normalized(&self) -> Result<StateVector, QuantumError> {
        let n = self.norm();
        if n < 1e-12 {
            return Err(QuantumError::ZeroNorm);
        }
        let amps = self.amps.iter().map(|a| a / n).collect();
        Ok(StateVector {
            layout: self.layout.clone(),
            amps,
        })
    }
}

/// Tensor product; subsystem ids of the factors must be disjoint.
/// The first factor's subsystems are most significant in the result.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector, QuantumError> {
    let layout = a.layout.joined(&b.layout)?;
    let bn = b.amps.len();
    let mut amps = Vec::with_capacity(a.amps.len() * bn);
    for x in &a.amps {
        for y in &b.amps {
            amps.push(x * y);
        }
    }
    StateVector::new(layout, amps)
}

/// Applies `u` to the listed target subsystems of `s`, identity elsewhere.
/// The unitary's per-subsystem dimensions must match the targets in order.
pub fn apply_unitary(
    s: &StateVector,
    u: &UnitaryOp,
    targets: &[SubsystemId],
) -> Result<StateVector, QuantumError> {
    let split = s.layout.split(targets)?;
    if u.layout().dims() != split.target_dims() {
        return Err(QuantumError::DimensionMismatch {
            expected: split.target_dims().to_vec(),
            got: u.layout().dims(),
        });
    }
    let dim = split.target_dim;
    let mut amps = s.amps.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for r in 0..split.rest_dim {
        for (t, slot) in scratch.iter_mut().enumerate() {
            *slot = s.amps[split.global_index(t, r)];
        }
        for row in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for (col, amp) in scratch.iter().enumerate() {
                acc += u.entry(row, col) * amp;
            }
            amps[split.global_index(row, r)] = acc;
        }
    }
    StateVector::new(s.layout.clone(), amps)
}

/// Validates a projective measurement basis for the given targets and
/// returns, per outcome, the Born probability and the unnormalized
/// projection of `s` onto that outcome.
///
/// The basis must contain exactly one element per dimension of the targets'
/// joint space and be pairwise orthonormal within [`ALGEBRAIC_TOL`].
pub(crate) fn branch_decomposition(
    s: &StateVector,
    targets: &[SubsystemId],
    basis: &[StateVector],
) -> Result<Vec<(f64, StateVector)>, QuantumError> {
    let split = s.layout.split(targets)?;
    if basis.len() != split.target_dim {
        return Err(QuantumError::IncompleteBasis {
            expected: split.target_dim,
            got: basis.len(),
        });
    }
    for b in basis {
        if b.layout.dims() != split.target_dims() {
            return Err(QuantumError::DimensionMismatch {
                expected: split.target_dims().to_vec(),
                got: b.layout.dims(),
            });
        }
    }
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let expect = if i == j { 1.0 } else { 0.0 };
            let overlap = basis[i].inner(&basis[j])?.norm();
            let deviation = (overlap - expect).abs();
            if deviation > ALGEBRAIC_TOL {
                return Err(QuantumError::NonOrthonormalBasis { i, j, deviation });
            }
        }
    }
    let branches = basis
        .iter()
        .map(|b| {
            let (p, amps) = project_onto_basis_element(s, &split, b.amplitudes());
            (p, StateVector {
                layout: s.layout.clone(),
                amps,
            })
        })
        .collect();
    Ok(branches)
}

/// Projection of `s` onto one basis element of the target subspace:
/// returns the Born probability and the unnormalized projected amplitudes.
/// The projection keeps the phase of the overlap, so collapse never
/// renormalizes the global phase.
pub(crate) fn project_onto_basis_element(
    s: &StateVector,
    split: &TargetSplit,
    element: &[Complex64],
) -> (f64, Vec<Complex64>) {
    let mut out = vec![Complex64::new(0.0, 0.0); s.amps.len()];
    let mut probability = 0.0;
    for r in 0..split.rest_dim {
        let mut overlap = Complex64::new(0.0, 0.0);
        for (t, e) in element.iter().enumerate() {
            overlap += e.conj() * s.amps[split.global_index(t, r)];
        }
        probability += overlap.norm_sqr();
        if overlap != Complex64::new(0.0, 0.0) {
            for (t, e) in element.iter().enumerate() {
                out[split.global_index(t, r)] = e * overlap;
            }
        }
    }
    (probability, out)
}

/// Projective measurement of the target subsystems in the given basis.
///
/// The outcome is sampled by inverse CDF over the basis order from a single
/// uniform draw; the returned state is the normalized collapse. The state
/// must be normalized: outcome probabilities must sum to 1 within
/// [`ALGEBRAIC_TOL`].
pub fn measure_in_basis(
    s: &StateVector,
    targets: &[SubsystemId],
    basis: &[StateVector],
    rng: &mut dyn RngCore,
) -> Result<(usize, StateVector), QuantumError> {
    let branches = branch_decomposition(s, targets, basis)?;
    let total: f64 = branches.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > ALGEBRAIC_TOL {
        return Err(QuantumError::NotNormalized { norm_sq: total });
    }
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (k, (p, _)) in branches.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            chosen = Some(k);
            break;
        }
    }
    // A cumulative shortfall from rounding lands on the last real outcome.
    let k = chosen.unwrap_or_else(|| {
        branches
            .iter()
            .rposition(|(p, _)| *p > 0.0)
            .expect("probabilities sum to 1")
    });
    let (p, projected) = &branches[k];
    let scale = 1.0 / p.sqrt();
    let amps = projected.amps.iter().map(|a| a * scale).collect();
    Ok((
        k,
        StateVector {
            layout: s.layout.clone(),
            amps,
        },
    ))
}

/// True when two unit vectors are equal up to a global phase:
/// |<a|b>| within [`GLOBAL_PHASE_TOL`] of 1.
pub fn global_phase_equiv(a: &StateVector, b: &StateVector) -> Result<bool, QuantumError> {
    for s in [a, b] {
        let n2 = s.norm_sq();
        if (n2 - 1.0).abs() > GLOBAL_PHASE_TOL {
            return Err(QuantumError::NotNormalized { norm_sq: n2 });
        }
    }
    Ok((a.inner(b)?.norm() - 1.0).abs() <= GLOBAL_PHASE_TOL)
}
