//! Dense d-dimensional vectors and the norm/sign primitives used by the
//! optimizer, the problem suite, and the metrics pipeline.
//!
//! All arithmetic is in `f64`. Vectors are plain values with no shared
//! state, so they can be moved freely across threads.

use crate::error::{LionError, Result};

/// A flat d-dimensional parameter or gradient vector.
///
/// Invariants: `dim() >= 1`, and every entry produced by a checked
/// constructor is finite. Arithmetic on finite inputs can still overflow
/// to infinity (for example in a divergent optimizer run); callers that
/// care check with [`ParamVector::is_finite`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    data: Vec<f64>,
}

impl ParamVector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(LionError::InvalidInput(
                "vector must have at least one entry".into(),
            ));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(LionError::NonFinite(format!("vector entry {i}")));
        }
        Ok(Self { data })
    }

    /// Builds a vector without validating entries. Used on hot paths where
    /// the caller has just produced the values and checks finiteness itself.
    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        debug_assert!(!data.is_empty());
        Self { data }
    }

    /// The zero vector of dimension `d`.
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        Self { data: vec![0.0; d] }
    }

    /// A vector with every entry equal to `value`.
    pub fn constant(d: usize, value: f64) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        Self {
            data: vec![value; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn check_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LionError::NonFinite(what.into()))
        }
    }

    /// Sum of absolute entries.
    pub fn norm_l1(&self) -> Result<f64> {
        self.check_finite("norm_l1 input")?;
        Ok(self.data.iter().map(|x| x.abs()).sum())
    }

    /// Euclidean norm.
    pub fn norm_l2(&self) -> Result<f64> {
        self.check_finite("norm_l2 input")?;
        Ok(self.data.iter().map(|x| x * x).sum::<f64>().sqrt())
    }

    /// Largest absolute entry.
    pub fn norm_linf(&self) -> Result<f64> {
        self.check_finite("norm_linf input")?;
        Ok(self.data.iter().fold(0.0f64, |m, x| m.max(x.abs())))
    }

    /// Entrywise sign with the convention `sign(0) = 0`, so every output
    /// entry lies in {-1, 0, +1} and the infinity norm never exceeds 1.
    pub fn sign(&self) -> Result<ParamVector> {
        self.check_finite("sign input")?;
        Ok(ParamVector::from_raw(
            self.data
                .iter()
                .map(|&x| {
                    if x > 0.0 {
                        1.0
                    } else if x < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        ))
    }

    /// Inner product with `other`.
    pub fn dot(&self, other: &ParamVector) -> Result<f64> {
        check_dims(self, other)?;
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum())
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &ParamVector) -> Result<ParamVector> {
        check_dims(self, other)?;
        Ok(ParamVector::from_raw(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }
}

fn check_dims(x: &ParamVector, y: &ParamVector) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(LionError::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// Returns `a * x + y`.
pub fn axpy(a: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector> {
    check_dims(x, y)?;
    Ok(ParamVector::from_raw(
        x.data
            .iter()
            .zip(y.data.iter())
            .map(|(xi, yi)| a * xi + yi)
            .collect(),
    ))
}
