use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense or sparse real vector. Sparse entries are sorted by index and never
/// hold explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Vector {
    Dense(Vec<f64>),
    Sparse { dim: usize, entries: Vec<(u32, f64)> },
}

impl Vector {
    pub fn sparse(dim: usize, mut entries: Vec<(u32, f64)>) -> Self {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_unstable_by_key(|&(i, _)| i);
        Vector::Sparse { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Vector::Dense(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        match self {
            Vector::Dense(v) => v.len(),
            Vector::Sparse { dim, .. } => *dim,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            Vector::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Vector::Sparse { entries, .. } => entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt(),
        }
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(match (self, other) {
            (Vector::Dense(a), Vector::Dense(b)) => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            (Vector::Dense(d), Vector::Sparse { entries, .. })
            | (Vector::Sparse { entries, .. }, Vector::Dense(d)) => {
                entries.iter().map(|&(i, x)| x * d[i as usize]).sum()
            }
            (Vector::Sparse { entries: a, .. }, Vector::Sparse { entries: b, .. }) => {
                let (mut i, mut j, mut acc) = (0, 0, 0.0);
                while i < a.len() && j < b.len() {
                    match a[i].0.cmp(&b[j].0) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            acc += a[i].1 * b[j].1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                acc
            }
        })
    }

    pub fn scaled(&self, c: f64) -> Vector {
        match self {
            Vector::Dense(v) => Vector::Dense(v.iter().map(|x| x * c).collect()),
            Vector::Sparse { dim, entries } => {
                Vector::sparse(*dim, entries.iter().map(|&(i, x)| (i, x * c)).collect())
            }
        }
    }

    /// Component-wise mean. All inputs must share one dimension; the result is
    /// sparse only if every input is sparse.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a Vector>) -> Result<Vector> {
        let vectors: Vec<&Vector> = vectors.into_iter().collect();
        let first = vectors.first().ok_or(Error::EmptyInput)?;
        let dim = first.dim();
        let n = vectors.len() as f64;
        if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        if vectors.iter().all(|v| matches!(v, Vector::Sparse { .. })) {
            let mut acc: HashMap<u32, f64> = HashMap::new();
            for v in &vectors {
                if let Vector::Sparse { entries, .. } = v {
                    for &(i, x) in entries {
                        *acc.entry(i).or_default() += x;
                    }
                }
            }
            return Ok(Vector::sparse(dim, acc.into_iter().map(|(i, x)| (i, x / n)).collect()));
        }
        let mut acc = vec![0.0; dim];
        for v in &vectors {
            match v {
                Vector::Dense(d) => acc.iter_mut().zip(d).for_each(|(a, x)| *a += x),
                Vector::Sparse { entries, .. } => {
                    entries.iter().for_each(|&(i, x)| acc[i as usize] += x)
                }
            }
        }
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(Vector::Dense(acc))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Vector::Dense(v) => v.clone(),
            Vector::Sparse { dim, entries } => {
                let mut out = vec![0.0; *dim];
                entries.iter().for_each(|&(i, x)| out[i as usize] = x);
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArticleVector {
    pub article_id: String,
    pub vector: Vector,
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &Vector, b: &Vector) -> Result<f64> {
    let dot = a.dot(b)?;
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / denom).clamp(-1.0, 1.0))
}

/// Vectors for every article of a corpus, all of one dimension.
#[derive(Debug, Clone, Default)]
pub struct VectorTable {
    dim: usize,
    vectors: HashMap<String, Vector>,
}

impl VectorTable {
    pub fn new(dim: usize) -> Self {
        VectorTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, article_id: impl Into<String>, vector: Vector) -> Result<()> {
        if vector.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.dim(),
            });
        }
        self.vectors.insert(article_id.into(), vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, article_id: &str) -> Option<&Vector> {
        self.vectors.get(article_id)
    }

    pub fn require(&self, article_id: &str) -> Result<&Vector> {
        self.get(article_id)
            .ok_or_else(|| Error::UnknownArticle(article_id.to_string()))
    }

    pub fn article_vector(&self, article_id: &str) -> Option<ArticleVector> {
        self.get(article_id).map(|v| ArticleVector {
            article_id: article_id.to_string(),
            vector: v.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> Vector {
        Vector::Dense(v.to_vec())
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 0.0);
        assert!((cosine(&d(&[1.0, 2.0]), &d(&[2.0, 4.0])).unwrap() - 1.0).abs() < 1e-12);
        let c = cosine(&d(&[1.0, 1.0]), &d(&[1.0, 0.0])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert_eq!(cosine(&d(&[0.0, 0.0]), &d(&[1.0, 0.0])).unwrap(), 0.0);
        assert!(matches!(
            cosine(&d(&[1.0]), &d(&[1.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sparse_and_dense_agree() {
        let s1 = Vector::sparse(5, vec![(4, 2.0), (0, 1.0), (2, 0.0)]);
        let s2 = Vector::sparse(5, vec![(0, 3.0), (3, 1.0), (4, -1.0)]);
        assert_eq!(s1, Vector::Sparse { dim: 5, entries: vec![(0, 1.0), (4, 2.0)] });
        let d1 = d(&s1.to_dense());
        let d2 = d(&s2.to_dense());
        let want = d1.dot(&d2).unwrap();
        assert_eq!(s1.dot(&s2).unwrap(), want);
        assert_eq!(s1.dot(&d2).unwrap(), want);
        assert_eq!(d1.dot(&s2).unwrap(), want);
        let mean_sparse = Vector::mean([&s1, &s2]).unwrap();
        let mean_dense = Vector::mean([&d1, &d2]).unwrap();
        assert_eq!(mean_sparse.to_dense(), mean_dense.to_dense());
    }

    #[test]
    fn mean_rejects_mixed_dims() {
        assert!(Vector::mean([&d(&[1.0]), &d(&[1.0, 2.0])]).is_err());
        assert!(matches!(Vector::mean(std::iter::empty()), Err(Error::EmptyInput)));
    }
}
