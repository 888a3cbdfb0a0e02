use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::tokenize::{ngrams, tokenize};
use super::vector::{Vector, VectorTable};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfConfig {
    pub ngram_min: usize,
    pub ngram_max: usize,
    pub min_token_len: usize,
    /// L2-normalize every document vector.
    pub l2_norm: bool,
}

impl Default for TfidfConfig {
    fn default() -> Self {
        TfidfConfig {
            ngram_min: 1,
            ngram_max: 2,
            min_token_len: 2,
            l2_norm: true,
        }
    }
}

/// Smoothed inverse document frequency `ln((1 + n_docs) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fitted vocabulary and idf weights plus the document vectors they produced.
#[derive(Debug, Clone)]
pub struct TfidfModel {
    pub config: TfidfConfig,
    /// N-grams in lexicographic order; the position is the feature index.
    pub vocabulary: Vec<String>,
    pub idf: Vec<f64>,
    pub vectors: VectorTable,
}

impl TfidfModel {
    pub fn feature_index(&self, term: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|t| t.as_str().cmp(term))
            .ok()
    }
}

/// Term counts over `title + body`, idf-weighted, then L2-normalized.
pub fn tfidf_vectorize(corpus: &Corpus, config: TfidfConfig) -> Result<TfidfModel> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if config.ngram_min == 0 || config.ngram_min > config.ngram_max {
        return Err(Error::InvalidConfig(format!(
            "bad n-gram range ({}, {})",
            config.ngram_min, config.ngram_max
        )));
    }
    let counts: Vec<HashMap<String, usize>> = corpus
        .articles()
        .iter()
        .map(|a| {
            let tokens = tokenize(&a.text(), config.min_token_len);
            let mut tf = HashMap::new();
            for g in ngrams(&tokens, config.ngram_min, config.ngram_max) {
                *tf.entry(g).or_insert(0) += 1;
            }
            tf
        })
        .collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tf in &counts {
        for term in tf.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let vocabulary: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    let index: HashMap<&str, u32> = df
        .keys()
        .enumerate()
        .map(|(i, t)| (*t, i as u32))
        .collect();
    let n_docs = corpus.len();
    let idf: Vec<f64> = df.values().map(|&d| smoothed_idf(n_docs, d)).collect();

    let mut vectors = VectorTable::new(vocabulary.len());
    for (article, tf) in corpus.articles().iter().zip(&counts) {
        let mut entries: Vec<(u32, f64)> = tf
            .iter()
            .map(|(term, &c)| {
                let i = index[term.as_str()];
                (i, c as f64 * idf[i as usize])
            })
            .collect();
        if config.l2_norm {
            let norm = entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                entries.iter_mut().for_each(|(_, x)| *x /= norm);
            }
        }
        vectors.insert(article.id.clone(), Vector::sparse(vocabulary.len(), entries))?;
    }
    Ok(TfidfModel {
        config,
        vocabulary,
        idf,
        vectors,
    })
}
