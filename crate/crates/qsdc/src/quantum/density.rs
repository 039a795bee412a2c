//! Density matrices: mixed-state bookkeeping for reduced subsystems.

use num_complex::Complex64;

use super::layout::{SubsystemId, SubsystemLayout};
use super::state::StateVector;
use super::{QuantumError, ALGEBRAIC_TOL};

/// Dense density matrix over a named-subsystem layout, row-major.
///
/// Construction checks hermiticity and unit trace; positive
/// semidefiniteness is not checked, it holds for every value produced by
/// [`density_of`] and [`partial_trace`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    layout: SubsystemLayout,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn new(layout: SubsystemLayout, entries: Vec<Complex64>) -> Result<Self, QuantumError> {
        let dim = layout.total_dim();
        if entries.len() != dim * dim {
            return Err(QuantumError::WrongEntryCount {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for (k, e) in entries.iter().enumerate() {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(QuantumError::EntryNotFinite {
                    row: k / dim,
                    col: k % dim,
                });
            }
        }
        let mut max_deviation = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_deviation = max_deviation.max(d);
            }
        }
        if max_deviation > ALGEBRAIC_TOL {
            return Err(QuantumError::NotHermitian { max_deviation });
        }
        let trace: f64 = (0..dim).map(|i| entries[i * dim + i].re).sum();
        if (trace - 1.0).abs() > ALGEBRAIC_TOL {
            return Err(QuantumError::TraceNotOne { trace });
        }
        Ok(DensityMatrix { layout, entries })
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }
}

/// |s><s| for a normalized pure state.
pub fn density_of(s: &StateVector) -> Result<DensityMatrix, QuantumError> {
    let norm_sq = s.norm_sq();
    if (norm_sq - 1.0).abs() > ALGEBRAIC_TOL {
        return Err(QuantumError::NotNormalized { norm_sq });
    }
    let amps = s.amplitudes();
    let dim = amps.len();
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            entries[i * dim + j] = amps[i] * amps[j].conj();
        }
    }
    DensityMatrix::new(s.layout().clone(), entries)
}

/// Traces out every subsystem not listed in `kept`. The result's subsystems
/// keep their order from the original layout, regardless of the order of
/// `kept`.
pub fn partial_trace(
    rho: &DensityMatrix,
    kept: &[SubsystemId],
) -> Result<DensityMatrix, QuantumError> {
    let kept_layout = rho.layout.keep(kept)?;
    let targets = kept_layout.ids();
    let split = rho.layout.split(&targets)?;
    let dim = rho.dim();
    let td = split.target_dim;
    let mut entries = vec![Complex64::new(0.0, 0.0); td * td];
    for t1 in 0..td {
        for t2 in 0..td {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..split.rest_dim {
                acc += rho.entries[split.global_index(t1, r) * dim + split.global_index(t2, r)];
            }
            entries[t1 * td + t2] = acc;
        }
    }
    DensityMatrix::new(kept_layout, entries)
}

/// Born probabilities of a projective measurement of the whole space of
/// `rho` in the given complete orthonormal basis: p_k = <b_k| rho |b_k>,
/// clamped to [0, 1] against rounding at the edges.
pub fn born_probabilities(
    rho: &DensityMatrix,
    basis: &[StateVector],
) -> Result<Vec<f64>, QuantumError> {
    let dim = rho.dim();
    if basis.len() != dim {
        return Err(QuantumError::IncompleteBasis {
            expected: dim,
            got: basis.len(),
        });
    }
    for b in basis {
        if b.layout().dims() != rho.layout.dims() {
            return Err(QuantumError::DimensionMismatch {
                expected: rho.layout.dims(),
                got: b.layout().dims(),
            });
        }
    }
    for i in 0..basis.len() {
        for j in i..basis.len() {
            let expect = if i == j { 1.0 } else { 0.0 };
            let deviation = (basis[i].inner(&basis[j])?.norm() - expect).abs();
            if deviation > ALGEBRAIC_TOL {
                return Err(QuantumError::NonOrthonormalBasis { i, j, deviation });
            }
        }
    }
    let probabilities = basis
        .iter()
        .map(|b| {
            let amps = b.amplitudes();
            let mut p = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    p += amps[i].conj() * rho.entries[i * dim + j] * amps[j];
                }
            }
            p.re.clamp(0.0, 1.0)
        })
        .collect();
    Ok(probabilities)
}
