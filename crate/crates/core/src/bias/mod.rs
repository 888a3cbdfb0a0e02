//! Sentiment and stance bias of users and recommenders.
//!
//! A user's bias for a kind (sentiment, or stance on one question) is the mean
//! score of the articles they read; a recommender's bias for that user is the
//! mean score of the `k` articles it recommends. Pairs of the two values are
//! sorted into five cases:
//!
//! | case | user | recommender |
//! |------|------|-------------|
//! | C1 | biased | biased, same sign |
//! | C2 | biased | biased, opposite sign |
//! | C3 | biased | neutral |
//! | C4 | neutral | biased |
//! | C5 | neutral | neutral |
//!
//! where *neutral* means `|bias| <= ε`.

mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, NewsArticle, QuestionId, StanceLabel};
use crate::error::{Error, Result};
use crate::recommend::{Recommendation, UserHistory};

pub use report::{audit, render_markdown, AuditConfig, BiasReport, KindSummary, StatOutcome, UserBias, UserKindBias};

pub const DEFAULT_EPSILON: f64 = 0.05;

/// `+1` for favor, `-1` for against.
pub fn stance_score(label: StanceLabel) -> f64 {
    label.score()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BiasKind {
    Sentiment,
    Stance(QuestionId),
}

impl BiasKind {
    pub fn article_score(&self, article: &NewsArticle) -> Result<f64> {
        match self {
            BiasKind::Sentiment => Ok(article.sentiment_score),
            BiasKind::Stance(q) => article
                .stance(q)
                .map(stance_score)
                .ok_or_else(|| Error::UnknownQuestion(q.to_string())),
        }
    }

    /// Sentiment plus one stance kind per question.
    pub fn all(questions: &[QuestionId]) -> Vec<BiasKind> {
        std::iter::once(BiasKind::Sentiment)
            .chain(questions.iter().cloned().map(BiasKind::Stance))
            .collect()
    }
}

impl fmt::Display for BiasKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasKind::Sentiment => f.write_str("sentiment"),
            BiasKind::Stance(q) => write!(f, "stance:{q}"),
        }
    }
}

impl FromStr for BiasKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sentiment" => Ok(BiasKind::Sentiment),
            other => match other.strip_prefix("stance:") {
                Some(q) => Ok(BiasKind::Stance(q.parse()?)),
                None => Err(Error::InvalidConfig(format!(
                    "bias kind {other:?} is neither `sentiment` nor `stance:<question>`"
                ))),
            },
        }
    }
}

impl Serialize for BiasKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BiasKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn mean_score<'a>(ids: impl ExactSizeIterator<Item = &'a str>, corpus: &Corpus, kind: &BiasKind) -> Result<f64> {
    let n = ids.len();
    let mut sum = 0.0;
    for id in ids {
        sum += kind.article_score(corpus.require(id)?)?;
    }
    Ok((sum / n as f64).clamp(-1.0, 1.0))
}

/// Mean article score over the user's reading history.
pub fn user_bias(history: &UserHistory, corpus: &Corpus, kind: &BiasKind) -> Result<f64> {
    if history.article_ids.is_empty() {
        return Err(Error::EmptyHistory(history.user_id.clone()));
    }
    mean_score(history.article_ids.iter().map(String::as_str), corpus, kind)
}

/// Mean article score over one user's recommendations.
pub fn recommender_bias_per_user(recs: &[Recommendation], corpus: &Corpus, kind: &BiasKind) -> Result<f64> {
    if recs.is_empty() {
        return Err(Error::EmptyRecommendations);
    }
    mean_score(recs.iter().map(|r| r.article_id.as_str()), corpus, kind)
}

/// Mean of the per-user recommender bias values.
pub fn average_recommender_bias(per_user: &[f64]) -> Result<f64> {
    crate::util::mean(per_user).ok_or(Error::EmptyInput)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BiasCase {
    /// Same direction.
    C1,
    /// Opposite directions.
    C2,
    /// Skewed towards the user: recommender neutral.
    C3,
    /// Skewed towards the recommender: user neutral.
    C4,
    /// No bias on either side.
    C5,
}

impl BiasCase {
    pub const ALL: [BiasCase; 5] = [BiasCase::C1, BiasCase::C2, BiasCase::C3, BiasCase::C4, BiasCase::C5];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BiasCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Sorts a (user, recommender) bias pair into one of the five cases, treating
/// values with `|x| <= epsilon` as neutral.
///
/// ```
/// use newsbias::bias::{classify_bias_case, BiasCase};
///
/// assert_eq!(classify_bias_case(-0.2, 0.3, 0.05), BiasCase::C2);
/// assert_eq!(classify_bias_case(0.01, -0.01, 0.05), BiasCase::C5);
/// ```
pub fn classify_bias_case(user_b: f64, rec_b: f64, epsilon: f64) -> BiasCase {
    let user_neutral = user_b.abs() <= epsilon;
    let rec_neutral = rec_b.abs() <= epsilon;
    match (user_neutral, rec_neutral) {
        (true, true) => BiasCase::C5,
        (false, true) => BiasCase::C3,
        (true, false) => BiasCase::C4,
        (false, false) if (user_b > 0.0) == (rec_b > 0.0) => BiasCase::C1,
        (false, false) => BiasCase::C2,
    }
}
