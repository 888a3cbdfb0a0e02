//! Content-based recommenders.
//!
//! The three text recommenders share one scoring path: every article gets a
//! vector, the user profile is the mean of the history vectors, and candidates
//! are ranked by cosine similarity to that profile. They differ only in how
//! the vectors are built ([`tfidf_vectorize`], [`embed_average_words`],
//! [`embed_average_sentences`]).

mod embeddings;
mod tfidf;
mod tokenize;
mod vector;

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::util::stable_hash;

pub use embeddings::{
    embed_average_sentences, embed_average_words, SentenceVectors, WordVectors, SENTENCE_DIM,
    WORD_DIM,
};
pub use tfidf::{smoothed_idf, tfidf_vectorize, TfidfConfig, TfidfModel};
pub use tokenize::{ngrams, tokenize};
pub use vector::{cosine, ArticleVector, Vector, VectorTable};

/// Number of recommendations per user used throughout the bias analysis.
pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserHistory {
    pub user_id: String,
    pub article_ids: Vec<String>,
}

impl UserHistory {
    pub fn new(user_id: impl Into<String>, article_ids: Vec<String>) -> Self {
        UserHistory {
            user_id: user_id.into(),
            article_ids,
        }
    }

    pub fn contains(&self, article_id: &str) -> bool {
        self.article_ids.iter().any(|a| a == article_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub article_id: String,
    pub raw_similarity: f64,
    pub click_score: f64,
    pub rank: usize,
}

/// Descending by score, ties by ascending id.
pub(crate) fn rank_order(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// `(x - min) / (max - min)`; every output is 0.5 when all inputs are equal.
///
/// ```
/// use newsbias::recommend::minmax_scale;
/// assert_eq!(minmax_scale(&[2.0, 4.0, 6.0]).unwrap(), vec![0.0, 0.5, 1.0]);
/// assert_eq!(minmax_scale(&[3.0, 3.0]).unwrap(), vec![0.5, 0.5]);
/// ```
pub fn minmax_scale(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if range == 0.0 || !range.is_finite() {
        return Ok(vec![0.5; scores.len()]);
    }
    Ok(scores
        .iter()
        .map(|x| ((x - min) / range).clamp(0.0, 1.0))
        .collect())
}

/// How a history is collapsed into one similarity per candidate.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    /// Cosine against the mean history vector.
    #[default]
    Mean,
    /// Highest cosine against any single history article.
    MaxSimilarity,
}

fn raw_similarities(
    history: &UserHistory,
    candidates: &[&str],
    vectors: &VectorTable,
    mode: ProfileMode,
) -> Result<Vec<f64>> {
    if history.article_ids.is_empty() {
        return Err(Error::EmptyHistory(history.user_id.clone()));
    }
    let hist: Vec<&Vector> = history
        .article_ids
        .iter()
        .map(|id| vectors.require(id))
        .collect::<Result<_>>()?;
    match mode {
        ProfileMode::Mean => {
            let profile = Vector::mean(hist)?;
            candidates
                .iter()
                .map(|c| cosine(&profile, vectors.require(c)?))
                .collect()
        }
        ProfileMode::MaxSimilarity => candidates
            .iter()
            .map(|c| {
                let cv = vectors.require(c)?;
                hist.iter()
                    .map(|h| cosine(h, cv))
                    .try_fold(f64::NEG_INFINITY, |m, s| s.map(|s| m.max(s)))
            })
            .collect(),
    }
}

/// Similarity of each candidate to the user's history, best first.
pub fn score_candidates(
    history: &UserHistory,
    candidates: &[&str],
    vectors: &VectorTable,
) -> Result<Vec<(String, f64)>> {
    let scores = raw_similarities(history, candidates, vectors, ProfileMode::Mean)?;
    let mut out: Vec<(String, f64)> = candidates
        .iter()
        .map(|c| c.to_string())
        .zip(scores)
        .collect();
    out.sort_by(rank_order);
    Ok(out)
}

/// Top-k articles outside the history, ranked by similarity. Click scores are
/// min-max scaled over the whole candidate list before the cut.
pub fn recommend_top_k(
    history: &UserHistory,
    corpus: &Corpus,
    vectors: &VectorTable,
    k: usize,
) -> Result<Vec<Recommendation>> {
    TextRecommender::new("text", vectors.clone()).recommend(history, corpus, k)
}

/// Common contract for everything that can score and recommend articles.
pub trait Recommender: Send + Sync {
    fn name(&self) -> &str;

    /// Preference scores for `candidates`, in input order. Higher is better.
    fn raw_scores(&self, history: &UserHistory, candidates: &[&str]) -> Result<Vec<f64>>;

    /// Maps one call's raw scores to click probabilities in `[0, 1]`.
    fn to_click_scores(&self, raw: &[f64]) -> Result<Vec<f64>> {
        minmax_scale(raw)
    }

    fn click_scores(&self, history: &UserHistory, candidates: &[&str]) -> Result<Vec<f64>> {
        let raw = self.raw_scores(history, candidates)?;
        self.to_click_scores(&raw)
    }

    /// Top-k articles of `corpus` that are not in the history.
    fn recommend(&self, history: &UserHistory, corpus: &Corpus, k: usize) -> Result<Vec<Recommendation>> {
        let seen: HashSet<&str> = history.article_ids.iter().map(String::as_str).collect();
        let candidates: Vec<&str> = corpus.ids().filter(|id| !seen.contains(id)).collect();
        self.recommend_from(history, &candidates, k)
    }

    /// Top-k among an explicit candidate list (history articles are dropped).
    fn recommend_from(&self, history: &UserHistory, candidates: &[&str], k: usize) -> Result<Vec<Recommendation>> {
        let candidates: Vec<&str> = candidates
            .iter()
            .copied()
            .filter(|c| !history.contains(c))
            .collect();
        if candidates.len() < k || candidates.is_empty() {
            return Err(Error::InsufficientCandidates {
                needed: k.max(1),
                available: candidates.len(),
            });
        }
        let raw = self.raw_scores(history, &candidates)?;
        let click = self.to_click_scores(&raw)?;
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| {
            raw[b]
                .total_cmp(&raw[a])
                .then_with(|| candidates[a].cmp(candidates[b]))
        });
        Ok(order
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(rank, i)| Recommendation {
                article_id: candidates[i].to_string(),
                raw_similarity: raw[i],
                click_score: click[i],
                rank: rank + 1,
            })
            .collect())
    }
}

/// Cosine-similarity recommender over a fixed vector table.
#[derive(Debug, Clone)]
pub struct TextRecommender {
    name: String,
    vectors: VectorTable,
    mode: ProfileMode,
}

impl TextRecommender {
    pub fn new(name: impl Into<String>, vectors: VectorTable) -> Self {
        TextRecommender {
            name: name.into(),
            vectors,
            mode: ProfileMode::Mean,
        }
    }

    pub fn with_mode(mut self, mode: ProfileMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn vectors(&self) -> &VectorTable {
        &self.vectors
    }

    pub fn tfidf(corpus: &Corpus, config: TfidfConfig) -> Result<Self> {
        Ok(Self::new("tfidf", tfidf_vectorize(corpus, config)?.vectors))
    }

    pub fn word2vec(corpus: &Corpus, words: &WordVectors) -> Result<Self> {
        Ok(Self::new("word2vec", embed_average_words(corpus, words, words.dim())?))
    }

    pub fn docembed(corpus: &Corpus, sentences: &SentenceVectors) -> Result<Self> {
        Ok(Self::new(
            "docembed",
            embed_average_sentences(corpus, sentences, sentences.dim())?,
        ))
    }
}

impl Recommender for TextRecommender {
    fn name(&self) -> &str {
        &self.name
    }

    fn raw_scores(&self, history: &UserHistory, candidates: &[&str]) -> Result<Vec<f64>> {
        raw_similarities(history, candidates, &self.vectors, self.mode)
    }
}

/// Uniformly random scores, fixed per `(seed, user, article)`.
#[derive(Debug, Clone)]
pub struct RandomRecommender {
    seed: u64,
}

impl RandomRecommender {
    pub fn new(seed: u64) -> Self {
        RandomRecommender { seed }
    }
}

impl Recommender for RandomRecommender {
    fn name(&self) -> &str {
        "random"
    }

    fn raw_scores(&self, history: &UserHistory, candidates: &[&str]) -> Result<Vec<f64>> {
        let user = stable_hash(history.user_id.as_bytes()) ^ self.seed;
        Ok(candidates
            .iter()
            .map(|c| {
                let h = crate::util::mix64(user ^ stable_hash(c.as_bytes()).rotate_left(17));
                (h >> 11) as f64 / (1u64 << 53) as f64
            })
            .collect())
    }

    fn to_click_scores(&self, raw: &[f64]) -> Result<Vec<f64>> {
        Ok(raw.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::corpus_from_texts;

    fn table(rows: &[(&str, &[f64])]) -> VectorTable {
        let mut t = VectorTable::new(rows[0].1.len());
        for (id, v) in rows {
            t.insert(*id, Vector::Dense(v.to_vec())).unwrap();
        }
        t
    }

    fn hist(ids: &[&str]) -> UserHistory {
        UserHistory::new("u", ids.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn minmax_examples() {
        assert_eq!(minmax_scale(&[-1.0, 1.0]).unwrap(), vec![0.0, 1.0]);
        assert!(matches!(minmax_scale(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn self_similarity_and_orthogonality() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[1.0, 1.0])]);
        let scored = score_candidates(&hist(&["a"]), &["b", "a", "c"], &t).unwrap();
        assert_eq!(scored[0].0, "a");
        assert!((scored[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(scored[2], ("b".to_string(), 0.0));
        assert!(scored.windows(2).all(|w| w[0].1 > w[1].1));
    }

    #[test]
    fn scoring_errors() {
        let t = table(&[("a", &[1.0, 0.0])]);
        assert!(matches!(
            score_candidates(&hist(&[]), &["a"], &t),
            Err(Error::EmptyHistory(_))
        ));
        assert!(matches!(
            score_candidates(&hist(&["a"]), &["zz"], &t),
            Err(Error::UnknownArticle(id)) if id == "zz"
        ));
    }

    #[test]
    fn top_k_excludes_history_and_breaks_ties_by_id() {
        let corpus = corpus_from_texts(&["", "", "", "", "", "", ""]);
        let t = table(&[
            ("d0", &[1.0, 0.0]),
            ("d1", &[0.9, 0.1]),
            ("d2", &[0.0, 1.0]),
            ("d3", &[0.5, 0.5]),
            ("d4", &[0.5, 0.5]),
            ("d5", &[0.2, 0.8]),
            ("d6", &[0.7, 0.3]),
        ]);
        let recs = recommend_top_k(&hist(&["d0"]), &corpus, &t, 5).unwrap();
        assert_eq!(recs.len(), 5);
        assert!(recs.iter().all(|r| r.article_id != "d0"));
        assert_eq!(recs.iter().map(|r| r.rank).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        let ids: Vec<&str> = recs.iter().map(|r| r.article_id.as_str()).collect();
        assert_eq!(ids, vec!["d1", "d6", "d3", "d4", "d5"]);
        assert_eq!(recs[0].click_score, 1.0);

        // d3 and d4 tie; with k=3 only the smaller id is admitted
        let recs = recommend_top_k(&hist(&["d0"]), &corpus, &t, 3).unwrap();
        assert_eq!(recs[2].article_id, "d3");

        let recs = recommend_top_k(&hist(&["d2"]), &corpus, &t, 1).unwrap();
        assert_eq!(recs[0].article_id, "d5");

        assert!(matches!(
            recommend_top_k(&hist(&["d0", "d1"]), &corpus, &t, 6),
            Err(Error::InsufficientCandidates { needed: 6, available: 5 })
        ));
    }

    #[test]
    fn max_similarity_profile() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0]), ("c", &[1.0, 0.1]), ("d", &[1.0, 1.0])]);
        let rec = TextRecommender::new("t", t).with_mode(ProfileMode::MaxSimilarity);
        let s = rec.raw_scores(&hist(&["a", "b"]), &["c", "d"]).unwrap();
        assert!(s[0] > 0.99);
        assert!((s[1] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn random_recommender_is_deterministic() {
        let r = RandomRecommender::new(7);
        let a = r.raw_scores(&hist(&["x"]), &["a", "b", "c"]).unwrap();
        let b = r.raw_scores(&hist(&["x"]), &["c", "b", "a"]).unwrap();
        assert_eq!(a, b.into_iter().rev().collect::<Vec<_>>());
        assert!(a.iter().all(|s| (0.0..1.0).contains(s)));
        assert_ne!(a, RandomRecommender::new(8).raw_scores(&hist(&["x"]), &["a", "b", "c"]).unwrap());
    }
}
