use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Sparse term -> weight vector with a cached Euclidean norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenVector<F> {
    entries: BTreeMap<String, F>,
    norm: F,
}

impl<F: Real> Default for TokenVector<F> {
    fn default() -> Self {
        TokenVector { entries: BTreeMap::new(), norm: F::zero() }
    }
}

impl<F: Real> TokenVector<F> {
    /// Drops non-positive weights and computes the norm.
    pub fn from_entries(entries: BTreeMap<String, F>) -> Self {
        let entries: BTreeMap<String, F> =
            entries.into_iter().filter(|(_, w)| *w > F::zero()).collect();
        let norm = entries.values().map(|&w| w * w).sum::<F>().sqrt();
        TokenVector { entries, norm }
    }

    pub fn entries(&self) -> &BTreeMap<String, F> {
        &self.entries
    }

    pub fn norm(&self) -> F {
        self.norm
    }

    pub fn get(&self, term: &str) -> F {
        self.entries.get(term).copied().unwrap_or_else(F::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn scaled(&self, alpha: F) -> Self {
        TokenVector::from_entries(self.entries.iter().map(|(t, &w)| (t.clone(), w * alpha)).collect())
    }

    pub fn dot(&self, other: &TokenVector<F>) -> F {
        // merge-join over the two sorted term lists
        let mut a = self.entries.iter().peekable();
        let mut b = other.entries.iter().peekable();
        let mut acc = F::zero();
        while let (Some((ta, wa)), Some((tb, wb))) = (a.peek(), b.peek()) {
            match ta.cmp(tb) {
                Ordering::Less => {
                    a.next();
                }
                Ordering::Greater => {
                    b.next();
                }
                Ordering::Equal => {
                    acc = acc + **wa * **wb;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    /// Cosine similarity; 0 when either vector is empty.
    pub fn cosine(&self, other: &TokenVector<F>) -> F {
        if self.norm == F::zero() || other.norm == F::zero() {
            return F::zero();
        }
        clamp_unit(self.dot(other) / (self.norm * other.norm))
    }
}

/// Dense embedding vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector<F> {
    values: Vec<F>,
}

impl<F: Real> EmbeddingVector<F> {
    pub fn new(values: Vec<F>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("embedding contains a non-finite value".into()));
        }
        Ok(EmbeddingVector { values })
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> F {
        self.values.iter().map(|&v| v * v).sum::<F>().sqrt()
    }

    pub fn cast<G: Real>(&self) -> EmbeddingVector<G> {
        EmbeddingVector { values: self.values.iter().map(|v| G::of(v.as_f64())).collect() }
    }

    /// Unit-length copy; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == F::zero() {
            return self.clone();
        }
        EmbeddingVector { values: self.values.iter().map(|&v| v / n).collect() }
    }

    pub fn cosine(&self, other: &EmbeddingVector<F>) -> Result<F> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        let (na, nb) = (self.norm(), other.norm());
        if na == F::zero() || nb == F::zero() {
            return Ok(F::zero());
        }
        let dot: F = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).sum();
        Ok(clamp_unit(dot / (na * nb)))
    }
}

fn clamp_unit<F: Real>(x: F) -> F {
    x.max(-F::one()).min(F::one())
}

/// A text representation of either kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Vector<F> {
    Sparse(TokenVector<F>),
    Dense(EmbeddingVector<F>),
}

impl<F: Real> Vector<F> {
    pub fn kind(&self) -> &'static str {
        match self {
            Vector::Sparse(_) => "sparse",
            Vector::Dense(_) => "dense",
        }
    }
}

/// `dot(u, v) / (|u| |v|)`, or 0 when either norm is 0.
pub fn cosine<F: Real>(u: &Vector<F>, v: &Vector<F>) -> Result<F> {
    match (u, v) {
        (Vector::Sparse(a), Vector::Sparse(b)) => Ok(a.cosine(b)),
        (Vector::Dense(a), Vector::Dense(b)) => a.cosine(b),
        _ => Err(Error::RepresentationMismatch(format!(
            "cannot compare {} with {}",
            u.kind(),
            v.kind()
        ))),
    }
}
