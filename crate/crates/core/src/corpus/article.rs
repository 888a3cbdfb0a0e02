use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a stance question, e.g. `Q1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct QuestionId(String);

impl QuestionId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        let valid = !id.is_empty()
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if valid {
            Ok(QuestionId(id))
        } else {
            Err(Error::UnknownQuestion(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// `Q1` through `Q5`.
    pub fn default_set() -> Vec<QuestionId> {
        (1..=5).map(|i| QuestionId(format!("Q{i}"))).collect()
    }
}

impl TryFrom<String> for QuestionId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        QuestionId::new(value)
    }
}

impl From<QuestionId> for String {
    fn from(q: QuestionId) -> String {
        q.0
    }
}

impl FromStr for QuestionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        QuestionId::new(s.trim())
    }
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Binary stance of an article towards a question. There is no neutral label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel {
    Favor,
    Against,
}

impl StanceLabel {
    /// Numeric encoding used for all stance averages: `+1` for favor, `-1` for against.
    pub fn score(self) -> f64 {
        match self {
            StanceLabel::Favor => 1.0,
            StanceLabel::Against => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StanceLabel::Favor => "favor",
            StanceLabel::Against => "against",
        }
    }
}

impl FromStr for StanceLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "favor" => Ok(StanceLabel::Favor),
            "against" => Ok(StanceLabel::Against),
            other => Err(format!("unknown stance label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewsArticle {
    pub id: String,
    pub title: String,
    pub body: String,
    pub outlet: String,
    pub published_at: String,
    pub sentiment_score: f64,
    pub stances: BTreeMap<QuestionId, StanceLabel>,
    pub entity_ids: Vec<String>,
    pub word_count: usize,
}

impl NewsArticle {
    /// Title and body joined by a newline; the text every text recommender sees.
    pub fn text(&self) -> String {
        format!("{}\n{}", self.title, self.body)
    }

    pub fn stance(&self, q: &QuestionId) -> Option<StanceLabel> {
        self.stances.get(q).copied()
    }
}

/// Converts classifier probabilities into a sentiment score `p_pos - p_neg`.
///
/// The neutral probability is whatever remains (`1 - p_pos - p_neg`) and does
/// not enter the score.
///
/// ```
/// use newsbias::corpus::sentiment_score_from_probs;
///
/// let s = sentiment_score_from_probs(0.7, 0.2).unwrap();
/// assert!((s - 0.5).abs() < 1e-12);
/// assert!(sentiment_score_from_probs(0.8, 0.4).is_err());
/// ```
pub fn sentiment_score_from_probs(p_pos: f64, p_neg: f64) -> Result<f64> {
    // Small slack on the sum for probabilities that were rounded on export.
    const SUM_SLACK: f64 = 1e-9;
    let valid = p_pos.is_finite()
        && p_neg.is_finite()
        && p_pos >= 0.0
        && p_neg >= 0.0
        && p_pos + p_neg <= 1.0 + SUM_SLACK;
    if !valid {
        return Err(Error::InvalidProbability { p_pos, p_neg });
    }
    Ok((p_pos - p_neg).clamp(-1.0, 1.0))
}
