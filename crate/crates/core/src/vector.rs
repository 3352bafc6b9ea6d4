//! Dense Euclidean vectors used for decisions, gradients and comparators.

use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in `R^d`.
///
/// Construction through [`DecisionVector::new`] rejects non-finite
/// coordinates; the arithmetic helpers assume equal dimensions and are only
/// called after the dimension has been validated at an API boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecisionVector(Vec<f64>);

impl DecisionVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("decision vector"));
        }
        Ok(Self(coords))
    }

    /// Wraps coordinates without the finiteness check. Internal arithmetic
    /// on finite inputs stays finite, so this is used on hot paths.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }

    /// Weighted sum `Σ w_i v_i`. The first term seeds the accumulator so a
    /// single unit weight reproduces its vector exactly.
    pub fn combine<'a, I>(terms: I) -> Option<Self>
    where
        I: IntoIterator<Item = (f64, &'a DecisionVector)>,
    {
        let mut iter = terms.into_iter();
        let (w0, v0) = iter.next()?;
        let mut acc = v0.scale(w0);
        for (w, v) in iter {
            for (a, b) in acc.0.iter_mut().zip(&v.0) {
                *a += w * b;
            }
        }
        Some(acc)
    }
}

impl Deref for DecisionVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for DecisionVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for DecisionVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Radial rescale onto the origin-centred ball of the given radius. This is
/// the closed-form projection shared by every learner that works on the
/// surrogate ball.
pub fn rescale_to_ball(p: DecisionVector, radius: f64) -> DecisionVector {
    let n = p.norm();
    if n <= radius {
        p
    } else {
        p.scale(radius / n)
    }
}
