//! Unitary operators on small composite spaces.

use num_complex::Complex64;

use super::layout::{SubsystemId, SubsystemLayout};
use super::{QuantumError, ALGEBRAIC_TOL};

/// Residual norm below which a Gram-Schmidt candidate is considered
/// linearly dependent and skipped.
const COMPLETION_RESIDUAL_MIN: f64 = 1e-6;

/// Dense unitary matrix over a named-subsystem layout, row-major.
/// Unitarity is checked at construction, so a value of this type is
/// always safe to apply.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    layout: SubsystemLayout,
    entries: Vec<Complex64>,
}

impl UnitaryOp {
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
        // require U U^dagger = I
        let mut max_deviation = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += entries[i * dim + k] * entries[j * dim + k].conj();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                max_deviation = max_deviation.max((acc - expect).norm());
            }
        }
        if max_deviation > ALGEBRAIC_TOL {
            return Err(QuantumError::NotUnitary { max_deviation });
        }
        Ok(UnitaryOp { layout, entries })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let dim = layout.total_dim();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        UnitaryOp { layout, entries }
    }

    /// Pauli Z on a single named qubit: |0> fixed, |1> negated.
    pub fn sigma_z(id: SubsystemId) -> Self {
        let layout = SubsystemLayout::single(id, 2).expect("single qubit layout");
        let entries = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        UnitaryOp { layout, entries }
    }

    /// Builds a unitary from a partial set of (column index, column vector)
    /// constraints; the unspecified columns are filled, in ascending index
    /// order, by a deterministic orthonormal completion of the given ones.
    pub fn from_partial_columns(
        layout: SubsystemLayout,
        specified: &[(usize, Vec<Complex64>)],
    ) -> Result<Self, QuantumError> {
        let dim = layout.total_dim();
        let mut columns: Vec<Option<&[Complex64]>> = vec![None; dim];
        for (index, column) in specified {
            if *index >= dim {
                return Err(QuantumError::BasisIndexOutOfRange { index: *index, dim });
            }
            if columns[*index].is_some() {
                return Err(QuantumError::DuplicateColumn { index: *index });
            }
            columns[*index] = Some(column.as_slice());
        }
        let fixed: Vec<Vec<Complex64>> = specified.iter().map(|(_, c)| c.clone()).collect();
        let mut completion = orthonormal_completion(dim, &fixed)?.into_iter();
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        let mut owned_columns: Vec<Vec<Complex64>> = Vec::new();
        for slot in columns.iter() {
            match slot {
                Some(column) => owned_columns.push(column.to_vec()),
                None => owned_columns.push(completion.next().ok_or(QuantumError::NoOrthonormalCompletion)?),
            }
        }
        for (col, column) in owned_columns.iter().enumerate() {
            for (row, e) in column.iter().enumerate() {
                entries[row * dim + col] = *e;
            }
        }
        UnitaryOp::new(layout, entries)
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
}

/// Extends `fixed` (pairwise orthonormal vectors of length `dim`) to a full
/// orthonormal basis and returns only the added vectors, in a deterministic
/// order: canonical basis vectors are tried in index order and kept whenever
/// their Gram-Schmidt residual is non-negligible.
pub(crate) fn orthonormal_completion(
    dim: usize,
    fixed: &[Vec<Complex64>],
) -> Result<Vec<Vec<Complex64>>, QuantumError> {
    if fixed.len() > dim {
        return Err(QuantumError::NoOrthonormalCompletion);
    }
    for (i, v) in fixed.iter().enumerate() {
        if v.len() != dim {
            return Err(QuantumError::WrongAmplitudeCount {
                expected: dim,
                got: v.len(),
            });
        }
        for (j, w) in fixed.iter().enumerate().skip(i) {
            let overlap: Complex64 = v.iter().zip(w).map(|(a, b)| a.conj() * b).sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            let deviation = (overlap.norm() - expect).abs();
            if deviation > ALGEBRAIC_TOL {
                return Err(QuantumError::NonOrthonormalBasis { i, j, deviation });
            }
        }
    }
    let mut have: Vec<Vec<Complex64>> = fixed.to_vec();
    let mut added = Vec::with_capacity(dim - fixed.len());
    for k in 0..dim {
        if have.len() == dim {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        // two orthogonalization passes keep rounding error near machine eps
        for _ in 0..2 {
            for u in &have {
                let overlap: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (slot, uu) in v.iter_mut().zip(u) {
                    *slot -= overlap * uu;
                }
            }
        }
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < COMPLETION_RESIDUAL_MIN {
            continue;
        }
        for slot in v.iter_mut() {
            *slot /= norm;
        }
        have.push(v.clone());
        added.push(v);
    }
    if have.len() != dim {
        return Err(QuantumError::NoOrthonormalCompletion);
    }
    Ok(added)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sigma_z_matrix_is_diag_one_minus_one() {
        let z = UnitaryOp::sigma_z("q".into());
        assert_eq!(z.entry(0, 0), c(1.0, 0.0));
        assert_eq!(z.entry(0, 1), c(0.0, 0.0));
        assert_eq!(z.entry(1, 0), c(0.0, 0.0));
        assert_eq!(z.entry(1, 1), c(-1.0, 0.0));
    }

    #[test]
    fn identity_has_unit_diagonal() {
        let layout = SubsystemLayout::new(vec![("a".into(), 2), ("b".into(), 4)]).unwrap();
        let eye = UnitaryOp::identity(layout);
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(eye.entry(i, j), c(expect, 0.0));
            }
        }
    }

    #[test]
    fn rejects_non_unitary_matrices() {
        let layout = SubsystemLayout::single("q", 2).unwrap();
        let shear = vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert!(matches!(
            UnitaryOp::new(layout.clone(), shear),
            Err(QuantumError::NotUnitary { .. })
        ));
        assert!(matches!(
            UnitaryOp::new(layout.clone(), vec![c(1.0, 0.0); 3]),
            Err(QuantumError::WrongEntryCount { expected: 4, got: 3 })
        ));
        let nan = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(f64::NAN, 0.0)];
        assert!(matches!(
            UnitaryOp::new(layout, nan),
            Err(QuantumError::EntryNotFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn accepts_a_rotation() {
        let layout = SubsystemLayout::single("q", 2).unwrap();
        let (s, t) = (0.6, 0.8);
        let rot = vec![c(s, 0.0), c(-t, 0.0), c(t, 0.0), c(s, 0.0)];
        assert!(UnitaryOp::new(layout, rot).is_ok());
    }

    #[test]
    fn completion_of_nothing_is_the_canonical_basis() {
        let added = orthonormal_completion(3, &[]).unwrap();
        assert_eq!(added.len(), 3);
        for (k, v) in added.iter().enumerate() {
            for (i, e) in v.iter().enumerate() {
                let expect = if i == k { 1.0 } else { 0.0 };
                assert_eq!(*e, c(expect, 0.0));
            }
        }
    }

    #[test]
    fn completion_is_orthonormal_and_deterministic() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let fixed = vec![vec![c(h, 0.0), c(0.0, h), c(0.0, 0.0)]];
        let added = orthonormal_completion(3, &fixed).unwrap();
        assert_eq!(added.len(), 2);
        let mut all = fixed.clone();
        all.extend(added.iter().cloned());
        for i in 0..all.len() {
            for j in 0..all.len() {
                let overlap: Complex64 =
                    all[i].iter().zip(&all[j]).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (overlap.norm() - expect).abs() < 1e-10,
                    "({i}, {j}) overlap {overlap}"
                );
            }
        }
        let again = orthonormal_completion(3, &fixed).unwrap();
        assert_eq!(added, again);
    }

    #[test]
    fn completion_rejects_bad_input() {
        let fixed = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ];
        assert!(matches!(
            orthonormal_completion(2, &fixed),
            Err(QuantumError::NonOrthonormalBasis { .. })
        ));
        assert!(matches!(
            orthonormal_completion(2, &[vec![c(1.0, 0.0)]]),
            Err(QuantumError::WrongAmplitudeCount { expected: 2, got: 1 })
        ));
        assert!(matches!(
            orthonormal_completion(1, &[vec![c(1.0, 0.0)], vec![c(0.0, 1.0)]]),
            Err(QuantumError::NoOrthonormalCompletion)
        ));
    }

    #[test]
    fn partial_columns_preserve_the_specified_ones() {
        let layout = SubsystemLayout::new(vec![("a".into(), 2), ("b".into(), 2)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let col0 = vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0)];
        let col2 = vec![c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-h, 0.0)];
        let u = UnitaryOp::from_partial_columns(
            layout.clone(),
            &[(0, col0.clone()), (2, col2.clone())],
        )
        .unwrap();
        for row in 0..4 {
            assert_eq!(u.entry(row, 0), col0[row]);
            assert_eq!(u.entry(row, 2), col2[row]);
        }
        let again =
            UnitaryOp::from_partial_columns(layout, &[(0, col0), (2, col2)]).unwrap();
        assert_eq!(u, again);
    }

    #[test]
    fn partial_columns_reject_conflicts() {
        let layout = SubsystemLayout::single("q", 2).unwrap();
        let e0 = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!(UnitaryOp::from_partial_columns(
            layout.clone(),
            &[(0, e0.clone()), (0, e0.clone())]
        )
        .is_err());
        assert!(matches!(
            UnitaryOp::from_partial_columns(layout, &[(5, e0)]),
            Err(QuantumError::BasisIndexOutOfRange { index: 5, dim: 2 })
        ));
    }
}
