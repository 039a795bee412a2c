//! Named subsystems and the index arithmetic for composite state spaces.
//!
//! Basis order is row-major over the subsystem list: the first-listed
//! subsystem is the most significant digit of a basis index.

use std::fmt;

use thiserror::Error;

/// Largest joint dimension the dense representation accepts.
pub const MAX_TOTAL_DIM: usize = 16;

/// Symbolic name of one tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsystemId(String);

impl SubsystemId {
    pub fn new(name: impl Into<String>) -> Self {
        SubsystemId(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for SubsystemId {
    fn from(name: &str) -> Self {
        SubsystemId(name.to_owned())
    }
}

impl fmt::Display for SubsystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("layout has no subsystems")]
    Empty,
    #[error("duplicate subsystem id \"{0}\"")]
    DuplicateId(SubsystemId),
    #[error("subsystem \"{id}\" has dimension {dim}, minimum is 2")]
    DimensionTooSmall { id: SubsystemId, dim: usize },
    #[error("total dimension {0} exceeds the supported maximum {MAX_TOTAL_DIM}")]
    TotalDimensionTooLarge(usize),
    #[error("unknown subsystem id \"{0}\"")]
    UnknownId(SubsystemId),
    #[error("subsystem \"{0}\" listed more than once in a target list")]
    RepeatedTarget(SubsystemId),
    #[error("target list is empty")]
    NoTargets,
}

/// Ordered list of (id, dimension) pairs describing a joint space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemLayout {
    parts: Vec<(SubsystemId, usize)>,
}

impl SubsystemLayout {
    pub fn new(parts: Vec<(SubsystemId, usize)>) -> Result<Self, LayoutError> {
        if parts.is_empty() {
            return Err(LayoutError::Empty);
        }
        for (i, (id, dim)) in parts.iter().enumerate() {
            if *dim < 2 {
                return Err(LayoutError::DimensionTooSmall {
                    id: id.clone(),
                    dim: *dim,
                });
            }
            if parts[..i].iter().any(|(other, _)| other == id) {
                return Err(LayoutError::DuplicateId(id.clone()));
            }
        }
        let total: usize = parts.iter().map(|(_, d)| d).product();
        if total > MAX_TOTAL_DIM {
            return Err(LayoutError::TotalDimensionTooLarge(total));
        }
        Ok(SubsystemLayout { parts })
    }

    pub fn single(id: impl Into<SubsystemId>, dim: usize) -> Result<Self, LayoutError> {
        SubsystemLayout::new(vec![(id.into(), dim)])
    }

    pub fn parts(&self) -> &[(SubsystemId, usize)] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.parts.iter().map(|(_, d)| d).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.parts.iter().map(|(_, d)| *d).collect()
    }

    pub fn ids(&self) -> Vec<SubsystemId> {
        self.parts.iter().map(|(id, _)| id.clone()).collect()
    }

    pub fn position(&self, id: &SubsystemId) -> Option<usize> {
        self.parts.iter().position(|(other, _)| other == id)
    }

    pub fn contains(&self, id: &SubsystemId) -> bool {
        self.position(id).is_some()
    }

    pub fn dim_of(&self, id: &SubsystemId) -> Option<usize> {
        self.position(id).map(|p| self.parts[p].1)
    }

    /// Concatenation of two layouts with disjoint ids.
    pub fn joined(&self, other: &SubsystemLayout) -> Result<Self, LayoutError> {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        SubsystemLayout::new(parts)
    }

    /// Sub-layout of the kept ids, preserving this layout's order.
    pub fn keep(&self, kept: &[SubsystemId]) -> Result<Self, LayoutError> {
        if kept.is_empty() {
            return Err(LayoutError::NoTargets);
        }
        for (i, id) in kept.iter().enumerate() {
            if !self.contains(id) {
                return Err(LayoutError::UnknownId(id.clone()));
            }
            if kept[..i].contains(id) {
                return Err(LayoutError::RepeatedTarget(id.clone()));
            }
        }
        let parts = self
            .parts
            .iter()
            .filter(|(id, _)| kept.contains(id))
            .cloned()
            .collect();
        SubsystemLayout::new(parts)
    }

    /// Row-major strides: stride of the last subsystem is 1.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.parts.len()];
        for i in (0..self.parts.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.parts[i + 1].1;
        }
        strides
    }

    /// Splits this layout into a target part (in the order given) and the
    /// rest (in layout order), for partial operations on the joint space.
    pub(crate) fn split(&self, targets: &[SubsystemId]) -> Result<TargetSplit, LayoutError> {
        if targets.is_empty() {
            return Err(LayoutError::NoTargets);
        }
        let mut target_positions = Vec::with_capacity(targets.len());
        for (i, id) in targets.iter().enumerate() {
            if targets[..i].contains(id) {
                return Err(LayoutError::RepeatedTarget(id.clone()));
            }
            match self.position(id) {
                Some(p) => target_positions.push(p),
                None => return Err(LayoutError::UnknownId(id.clone())),
            }
        }
        let strides = self.strides();
        let target_dims: Vec<usize> = target_positions.iter().map(|&p| self.parts[p].1).collect();
        let rest_positions: Vec<usize> = (0..self.parts.len())
            .filter(|p| !target_positions.contains(p))
            .collect();
        let rest_dims: Vec<usize> = rest_positions.iter().map(|&p| self.parts[p].1).collect();
        Ok(TargetSplit {
            target_strides: mixed_radix_strides(&target_dims),
            rest_strides: mixed_radix_strides(&rest_dims),
            target_global_strides: target_positions.iter().map(|&p| strides[p]).collect(),
            rest_global_strides: rest_positions.iter().map(|&p| strides[p]).collect(),
            target_dim: target_dims.iter().product(),
            rest_dim: rest_dims.iter().product::<usize>().max(1),
            target_dims,
            rest_dims,
        })
    }
}

fn mixed_radix_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    strides
}

/// Precomputed index maps for operations that act on a subset of subsystems.
#[derive(Clone, Debug)]
pub(crate) struct TargetSplit {
    target_dims: Vec<usize>,
    rest_dims: Vec<usize>,
    target_strides: Vec<usize>,
    rest_strides: Vec<usize>,
    target_global_strides: Vec<usize>,
    rest_global_strides: Vec<usize>,
    pub target_dim: usize,
    pub rest_dim: usize,
}

impl TargetSplit {
    pub fn target_dims(&self) -> &[usize] {
        &self.target_dims
    }

    /// Global amplitude index for target index `t` and rest index `r`,
    /// both in the row-major order of their respective dimension lists.
    pub fn global_index(&self, t: usize, r: usize) -> usize {
        let mut idx = 0usize;
        for (k, &stride) in self.target_strides.iter().enumerate() {
            let digit = (t / stride) % self.target_dims[k];
            idx += digit * self.target_global_strides[k];
        }
        for (k, &stride) in self.rest_strides.iter().enumerate() {
            let digit = (r / stride) % self.rest_dims[k];
            idx += digit * self.rest_global_strides[k];
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> SubsystemId {
        SubsystemId::from(s)
    }

    #[test]
    fn rejects_empty_duplicate_and_tiny() {
        assert_eq!(SubsystemLayout::new(vec![]), Err(LayoutError::Empty));
        assert_eq!(
            SubsystemLayout::new(vec![(id("a"), 2), (id("a"), 2)]),
            Err(LayoutError::DuplicateId(id("a")))
        );
        assert_eq!(
            SubsystemLayout::new(vec![(id("a"), 1)]),
            Err(LayoutError::DimensionTooSmall { id: id("a"), dim: 1 })
        );
    }

    #[test]
    fn rejects_oversized_total() {
        let r = SubsystemLayout::new(vec![(id("a"), 4), (id("b"), 4), (id("c"), 2)]);
        assert_eq!(r, Err(LayoutError::TotalDimensionTooLarge(32)));
    }

    #[test]
    fn strides_are_row_major() {
        let l = SubsystemLayout::new(vec![(id("a"), 2), (id("b"), 4), (id("c"), 2)]).unwrap();
        assert_eq!(l.total_dim(), 16);
        assert_eq!(l.strides(), vec![8, 2, 1]);
    }

    #[test]
    fn keep_preserves_layout_order() {
        let l = SubsystemLayout::new(vec![(id("a"), 2), (id("b"), 4), (id("c"), 2)]).unwrap();
        let kept = l.keep(&[id("c"), id("a")]).unwrap();
        assert_eq!(kept.ids(), vec![id("a"), id("c")]);
        assert!(l.keep(&[id("x")]).is_err());
        assert!(l.keep(&[id("a"), id("a")]).is_err());
    }

    // Brute-force oracle: the global index of (t, r) must equal the index
    // reached by writing out all subsystem digits explicitly.
    #[test]
    fn split_matches_digit_enumeration() {
        let l = SubsystemLayout::new(vec![(id("a"), 2), (id("b"), 4), (id("c"), 2)]).unwrap();
        let split = l.split(&[id("c"), id("a")]).unwrap();
        assert_eq!(split.target_dim, 4);
        assert_eq!(split.rest_dim, 4);
        let mut seen = [false; 16];
        for t in 0..split.target_dim {
            // target digits in target order (c, a)
            let c = t / 2;
            let a = t % 2;
            for r in 0..split.rest_dim {
                let b = r; // rest is just (b) with dim 4
                let expect = a * 8 + b * 2 + c;
                let got = split.global_index(t, r);
                assert_eq!(got, expect, "t={t} r={r}");
                assert!(!seen[got], "index {got} hit twice");
                seen[got] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn split_of_all_subsystems_has_unit_rest() {
        let l = SubsystemLayout::new(vec![(id("a"), 2), (id("b"), 2)]).unwrap();
        let split = l.split(&[id("a"), id("b")]).unwrap();
        assert_eq!(split.target_dim, 4);
        assert_eq!(split.rest_dim, 1);
        for t in 0..4 {
            assert_eq!(split.global_index(t, 0), t);
        }
    }
}
