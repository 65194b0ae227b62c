use std::ops::{AddAssign, Index};

use serde::{Deserialize, Serialize};

/// A per-weight accumulator shaped like the owning policy's weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientEstimate(Vec<f64>);

impl GradientEstimate {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `self += scale * other`
    pub fn add_scaled(&mut self, scale: f64, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += scale * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl AddAssign<&GradientEstimate> for GradientEstimate {
    fn add_assign(&mut self, rhs: &GradientEstimate) {
        assert_eq!(self.len(), rhs.len(), "gradient shapes differ");
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
    }
}

impl Index<usize> for GradientEstimate {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}
