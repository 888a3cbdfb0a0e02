//! Annotated news corpus, knowledge graph and interaction log.
//!
//! Everything here is immutable once loaded. The loaders validate each record
//! and report the offending line on failure.

mod article;
mod interactions;
mod kg;

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use article::{sentiment_score_from_probs, NewsArticle, QuestionId, StanceLabel};
pub use interactions::{
    load_interactions, write_interactions, InteractionLog, InteractionRecord, Origin, Split,
};
pub use kg::{load_kg, KnowledgeGraph, Vocab};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// Word-count cap used when long articles are filtered at load time.
pub const DEFAULT_MAX_WORDS: usize = 1500;

pub const REL_IN_FAVOR: &str = "geneg:in_favor";
pub const REL_AGAINST: &str = "geneg:against";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: QuestionId,
    pub text: String,
}

/// Corpus manifest: schema version and the question set every record must cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub questions: Vec<Question>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Json {
            context: path.display().to_string(),
            source: e,
        })?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != MANIFEST_SCHEMA_VERSION {
            return Err(Error::InvalidManifest(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        if self.questions.is_empty() {
            return Err(Error::InvalidManifest("no questions declared".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for q in &self.questions {
            if !seen.insert(&q.id) {
                return Err(Error::InvalidManifest(format!("question {} declared twice", q.id)));
            }
        }
        Ok(())
    }

    pub fn question_ids(&self) -> Vec<QuestionId> {
        self.questions.iter().map(|q| q.id.clone()).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }
}

/// On-disk article record. Either `sentiment_score` or both of
/// `p_pos`/`p_neg` must be present.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArticle {
    id: String,
    title: String,
    body: String,
    #[serde(default)]
    outlet: String,
    published_at: String,
    sentiment_score: Option<f64>,
    p_pos: Option<f64>,
    p_neg: Option<f64>,
    stances: BTreeMap<String, String>,
    #[serde(default)]
    entity_ids: Vec<String>,
    word_count: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Drop articles whose word count exceeds this cap.
    pub max_words: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    articles: Vec<NewsArticle>,
    index: HashMap<String, usize>,
    questions: Vec<QuestionId>,
}

impl Corpus {
    /// Builds a corpus from already-parsed articles, checking every invariant
    /// the file loader checks.
    pub fn new(articles: Vec<NewsArticle>, questions: Vec<QuestionId>) -> Result<Self> {
        let mut index = HashMap::with_capacity(articles.len());
        for (i, a) in articles.iter().enumerate() {
            validate_article(a, &questions).map_err(|reason| Error::MalformedRecord {
                line: i + 1,
                reason,
            })?;
            if index.insert(a.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(a.id.clone()));
            }
        }
        Ok(Corpus {
            articles,
            index,
            questions,
        })
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn articles(&self) -> &[NewsArticle] {
        &self.articles
    }

    pub fn questions(&self) -> &[QuestionId] {
        &self.questions
    }

    pub fn get(&self, id: &str) -> Option<&NewsArticle> {
        self.index.get(id).map(|&i| &self.articles[i])
    }

    pub fn require(&self, id: &str) -> Result<&NewsArticle> {
        self.get(id).ok_or_else(|| Error::UnknownArticle(id.to_string()))
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.articles.iter().map(|a| a.id.as_str())
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for a in &self.articles {
            let line = serde_json::to_string(a).expect("article serializes");
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn validate_article(a: &NewsArticle, questions: &[QuestionId]) -> std::result::Result<(), String> {
    if a.id.trim().is_empty() {
        return Err("empty id".into());
    }
    if !a.sentiment_score.is_finite() || !(-1.0..=1.0).contains(&a.sentiment_score) {
        return Err(format!("sentiment_score {} outside [-1, 1]", a.sentiment_score));
    }
    validate_date(&a.published_at)?;
    if a.stances.len() != questions.len() || questions.iter().any(|q| !a.stances.contains_key(q)) {
        return Err(format!(
            "stances {:?} do not match the question set",
            a.stances.keys().map(QuestionId::as_str).collect::<Vec<_>>()
        ));
    }
    Ok(())
}

fn validate_date(s: &str) -> std::result::Result<(), String> {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};
    let ok = NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok()
        || DateTime::parse_from_rfc3339(s).is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").is_ok();
    if ok {
        Ok(())
    } else {
        Err(format!("published_at {s:?} is not an ISO-8601 date"))
    }
}

fn parse_record(line: &str, questions: &[QuestionId]) -> Result<NewsArticle> {
    // Line numbers are filled in by the caller.
    let malformed = |reason: String| Error::MalformedRecord { line: 0, reason };
    let raw: RawArticle = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    let sentiment_score = match (raw.sentiment_score, raw.p_pos, raw.p_neg) {
        (Some(s), _, _) => s,
        (None, Some(p), Some(n)) => {
            sentiment_score_from_probs(p, n).map_err(|e| malformed(e.to_string()))?
        }
        _ => return Err(malformed("missing sentiment_score (or p_pos/p_neg)".into())),
    };
    let mut stances = BTreeMap::new();
    for (k, v) in raw.stances {
        let q = QuestionId::new(k.clone())?;
        if !questions.contains(&q) {
            return Err(Error::UnknownQuestion(k));
        }
        let label: StanceLabel = v.parse().map_err(malformed)?;
        stances.insert(q, label);
    }
    let word_count = raw
        .word_count
        .unwrap_or_else(|| raw.body.split_whitespace().count());
    let article = NewsArticle {
        id: raw.id,
        title: raw.title,
        body: raw.body,
        outlet: raw.outlet,
        published_at: raw.published_at,
        sentiment_score,
        stances,
        entity_ids: raw.entity_ids,
        word_count,
    };
    validate_article(&article, questions).map_err(malformed)?;
    Ok(article)
}

/// Loads a JSONL corpus and validates it against the manifest.
pub fn load_corpus(path: impl AsRef<Path>, manifest: impl AsRef<Path>) -> Result<Corpus> {
    load_corpus_with(path, manifest, LoadOptions::default())
}

pub fn load_corpus_with(
    path: impl AsRef<Path>,
    manifest: impl AsRef<Path>,
    options: LoadOptions,
) -> Result<Corpus> {
    let manifest = Manifest::load(manifest)?;
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), &manifest, options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Reads a corpus from any line-oriented reader.
pub fn read_corpus(reader: impl BufRead, manifest: &Manifest, options: LoadOptions) -> Result<Corpus> {
    let questions = manifest.question_ids();
    let mut articles = Vec::new();
    let mut seen = HashMap::new();
    let mut skipped = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let article = parse_record(&line, &questions).map_err(|e| match e {
            Error::MalformedRecord { reason, .. } => Error::MalformedRecord { line: lineno, reason },
            other => other,
        })?;
        if seen.insert(article.id.clone(), lineno).is_some() {
            return Err(Error::DuplicateId(article.id));
        }
        if options.max_words.is_some_and(|cap| article.word_count > cap) {
            skipped += 1;
            continue;
        }
        articles.push(article);
    }
    if skipped > 0 {
        log::info!("dropped {skipped} articles above the word-count cap");
    }
    Corpus::new(articles, questions)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentimentStats {
    pub mean: f64,
    pub median: f64,
}

/// Mean and median sentiment score. Even-length medians take the midpoint.
pub fn corpus_sentiment_stats(corpus: &Corpus) -> Result<SentimentStats> {
    let mut scores: Vec<f64> = corpus.articles.iter().map(|a| a.sentiment_score).collect();
    if scores.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mean = crate::util::mean(&scores).expect("non-empty");
    scores.sort_by(f64::total_cmp);
    let n = scores.len();
    let median = if n % 2 == 1 {
        scores[n / 2]
    } else {
        (scores[n / 2 - 1] + scores[n / 2]) / 2.0
    };
    Ok(SentimentStats { mean, median })
}

/// `(favor - against) / (favor + against)`.
pub fn stance_average(favor: usize, against: usize) -> Result<f64> {
    let total = favor + against;
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok((favor as f64 - against as f64) / total as f64)
}

pub fn stance_counts(corpus: &Corpus, q: &QuestionId) -> Result<(usize, usize)> {
    if !corpus.questions.contains(q) {
        return Err(Error::UnknownQuestion(q.to_string()));
    }
    let favor = corpus
        .articles
        .iter()
        .filter(|a| a.stance(q) == Some(StanceLabel::Favor))
        .count();
    Ok((favor, corpus.len() - favor))
}

/// Average stance score of the whole corpus for one question.
pub fn corpus_stance_average(corpus: &Corpus, q: &QuestionId) -> Result<f64> {
    let (favor, against) = stance_counts(corpus, q)?;
    stance_average(favor, against)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StanceTriple {
    pub article_id: String,
    pub label: StanceLabel,
    pub question: QuestionId,
}

impl StanceTriple {
    pub fn relation(&self) -> &'static str {
        match self.label {
            StanceLabel::Favor => REL_IN_FAVOR,
            StanceLabel::Against => REL_AGAINST,
        }
    }
}

/// One `(article, stance relation, question)` triple per article and question,
/// in corpus order. These are never merged into the recommendation graph.
pub fn emit_stance_triples(corpus: &Corpus) -> Vec<StanceTriple> {
    corpus
        .articles
        .iter()
        .flat_map(|a| {
            corpus.questions.iter().map(move |q| StanceTriple {
                article_id: a.id.clone(),
                label: a.stances[q],
                question: q.clone(),
            })
        })
        .collect()
}

pub fn write_stance_triples(path: impl AsRef<Path>, triples: &[StanceTriple]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for t in triples {
        writeln!(w, "{}\t{}\t{}", t.article_id, t.relation(), t.question)
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads stance triples back from a graph-format file.
pub fn load_stance_triples(path: impl AsRef<Path>) -> Result<Vec<StanceTriple>> {
    let kg = load_kg(path)?;
    kg.triples()
        .iter()
        .enumerate()
        .map(|(i, &(h, r, t))| {
            let label = match kg.relations().name(r) {
                REL_IN_FAVOR => StanceLabel::Favor,
                REL_AGAINST => StanceLabel::Against,
                other => {
                    return Err(Error::MalformedTriple {
                        line: i + 1,
                        reason: format!("unexpected stance relation {other:?}"),
                    })
                }
            };
            Ok(StanceTriple {
                article_id: kg.entities().name(h).to_string(),
                label,
                question: QuestionId::new(kg.entities().name(t))?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn manifest() -> Manifest {
        Manifest {
            schema_version: 1,
            questions: QuestionId::default_set()
                .into_iter()
                .map(|id| Question {
                    text: format!("question {id}"),
                    id,
                })
                .collect(),
        }
    }

    fn record(id: &str, sentiment: &str, q4: &str) -> String {
        format!(
            r#"{{"id":"{id}","title":"t","body":"one two three","outlet":"o","published_at":"2020-01-02",{sentiment},"stances":{{"Q1":"favor","Q2":"favor","Q3":"against","Q4":"{q4}","Q5":"favor"}},"entity_ids":["Q42"]}}"#
        )
    }

    fn read(lines: &[String]) -> Result<Corpus> {
        read_corpus(Cursor::new(lines.join("\n")), &manifest(), LoadOptions::default())
    }

    #[test]
    fn loads_valid_records() {
        let lines = vec![
            record("a1", r#""sentiment_score":0.1"#, "favor"),
            record("a2", r#""sentiment_score":-0.4"#, "against"),
            record("a3", r#""p_pos":0.7,"p_neg":0.2"#, "favor"),
        ];
        let corpus = read(&lines).unwrap();
        assert_eq!(corpus.len(), 3);
        assert!((corpus.get("a3").unwrap().sentiment_score - 0.5).abs() < 1e-12);
        assert_eq!(corpus.get("a1").unwrap().word_count, 3);
    }

    #[test]
    fn rejects_out_of_range_sentiment() {
        let lines = vec![
            record("a1", r#""sentiment_score":0.1"#, "favor"),
            record("a2", r#""sentiment_score":1.5"#, "favor"),
        ];
        match read(&lines) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicate_ids() {
        let lines = vec![
            record("a1", r#""sentiment_score":0.1"#, "favor"),
            record("a1", r#""sentiment_score":0.2"#, "favor"),
        ];
        assert!(matches!(read(&lines), Err(Error::DuplicateId(id)) if id == "a1"));
    }

    #[test]
    fn rejects_unknown_and_missing_questions() {
        let unknown = record("a1", r#""sentiment_score":0.1"#, "favor").replace("Q5", "Q9");
        assert!(matches!(read(&[unknown]), Err(Error::UnknownQuestion(q)) if q == "Q9"));
        let missing = record("a1", r#""sentiment_score":0.1"#, "favor")
            .replace(r#","Q5":"favor""#, "");
        assert!(matches!(read(&[missing]), Err(Error::MalformedRecord { .. })));
    }

    #[test]
    fn rejects_bad_dates_and_labels() {
        let bad_date = record("a1", r#""sentiment_score":0.1"#, "favor").replace("2020-01-02", "yesterday");
        assert!(matches!(read(&[bad_date]), Err(Error::MalformedRecord { .. })));
        let neutral = record("a1", r#""sentiment_score":0.1"#, "neutral");
        assert!(matches!(read(&[neutral]), Err(Error::MalformedRecord { .. })));
    }

    #[test]
    fn word_cap_filters_long_articles() {
        let mut long = record("a2", r#""sentiment_score":0.1"#, "favor");
        long = long.replace(r#""entity_ids""#, r#""word_count":2000,"entity_ids""#);
        let lines = vec![record("a1", r#""sentiment_score":0.1"#, "favor"), long];
        let opts = LoadOptions {
            max_words: Some(DEFAULT_MAX_WORDS),
        };
        let corpus = read_corpus(Cursor::new(lines.join("\n")), &manifest(), opts).unwrap();
        assert_eq!(corpus.len(), 1);
        assert!(corpus.get("a2").is_none());
    }

    fn corpus_with_scores(scores: &[f64]) -> Corpus {
        let lines: Vec<String> = scores
            .iter()
            .enumerate()
            .map(|(i, s)| record(&format!("a{i}"), &format!(r#""sentiment_score":{s}"#), "favor"))
            .collect();
        read(&lines).unwrap()
    }

    #[test]
    fn sentiment_stats() {
        let s = corpus_sentiment_stats(&corpus_with_scores(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!((s.mean, s.median), (0.0, 0.0));
        let s = corpus_sentiment_stats(&corpus_with_scores(&[0.2, 0.4])).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-12 && (s.median - 0.3).abs() < 1e-12);
        let empty = Corpus::new(vec![], QuestionId::default_set()).unwrap();
        assert!(matches!(corpus_sentiment_stats(&empty), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn stance_average_counts() {
        assert!((stance_average(2165, 2392).unwrap() - -0.050).abs() < 5e-4);
        assert!((stance_average(2120, 2437).unwrap() - -0.070).abs() < 5e-4);
        assert_eq!(stance_average(5, 5).unwrap(), 0.0);
        assert!(stance_average(0, 0).is_err());
    }

    #[test]
    fn corpus_stance_average_per_question() {
        let lines = vec![
            record("a1", r#""sentiment_score":0.1"#, "favor"),
            record("a2", r#""sentiment_score":0.1"#, "against"),
            record("a3", r#""sentiment_score":0.1"#, "against"),
        ];
        let corpus = read(&lines).unwrap();
        let q4 = QuestionId::new("Q4").unwrap();
        assert!((corpus_stance_average(&corpus, &q4).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        let q1 = QuestionId::new("Q1").unwrap();
        assert_eq!(corpus_stance_average(&corpus, &q1).unwrap(), 1.0);
        let q9 = QuestionId::new("Q9").unwrap();
        assert!(matches!(corpus_stance_average(&corpus, &q9), Err(Error::UnknownQuestion(_))));
    }

    #[test]
    fn stance_triples_follow_labels() {
        let lines = vec![
            record("a1", r#""sentiment_score":0.1"#, "against"),
            record("a2", r#""sentiment_score":0.1"#, "favor"),
        ];
        let corpus = read(&lines).unwrap();
        let triples = emit_stance_triples(&corpus);
        assert_eq!(triples.len(), 10);
        assert_eq!(triples[0].relation(), REL_IN_FAVOR);
        assert_eq!(triples[0].question.as_str(), "Q1");
        assert_eq!(triples[3].relation(), REL_AGAINST);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("stance_triples.tsv");
        write_stance_triples(&path, &triples).unwrap();
        assert_eq!(load_stance_triples(&path).unwrap(), triples);
    }
}
