#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use newsbias::corpus::{
    load_corpus, load_interactions, load_kg, Corpus, InteractionLog, KnowledgeGraph, NewsArticle, QuestionId,
    StanceLabel,
};
use newsbias::layout::DataDir;
use newsbias::recommend::{SentenceVectors, WordVectors};
use newsbias::sim::synthetic::SyntheticConfig;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn synthetic_dir() -> DataDir {
    DataDir::new(fixtures().join("synthetic"))
}

/// Generator settings the shipped `fixtures/synthetic` directory was made with.
pub fn shipped_config() -> SyntheticConfig {
    SyntheticConfig {
        n_articles: 240,
        word_dim: 24,
        sentence_dim: 32,
        seed: 0,
        ..SyntheticConfig::default()
    }
}

pub struct Shipped {
    pub corpus: Corpus,
    pub kg: KnowledgeGraph,
    pub words: WordVectors,
    pub sentences: SentenceVectors,
    pub log: InteractionLog,
}

pub fn shipped() -> Shipped {
    let dir = synthetic_dir();
    let corpus = load_corpus(dir.corpus(), dir.corpus_manifest()).unwrap();
    let log = load_interactions(dir.interactions(), &corpus).unwrap();
    Shipped {
        kg: load_kg(dir.graph()).unwrap(),
        words: WordVectors::load(dir.word_vectors()).unwrap(),
        sentences: SentenceVectors::load(dir.sentence_vectors()).unwrap(),
        corpus,
        log,
    }
}

pub fn article(id: &str, text: &str, sentiment: f64, stance: StanceLabel) -> NewsArticle {
    NewsArticle {
        id: id.to_string(),
        title: String::new(),
        body: text.to_string(),
        outlet: "fixture".into(),
        published_at: "2021-03-01".into(),
        sentiment_score: sentiment,
        stances: QuestionId::default_set()
            .into_iter()
            .map(|q| (q, stance))
            .collect::<BTreeMap<_, _>>(),
        entity_ids: vec![],
        word_count: text.split_whitespace().count(),
    }
}

pub fn corpus_of(articles: Vec<NewsArticle>) -> Corpus {
    Corpus::new(articles, QuestionId::default_set()).unwrap()
}

pub fn q1() -> QuestionId {
    QuestionId::default_set().remove(0)
}

/// All pairs (positive, negative): 1 for a correctly ordered pair, 1/2 for a tie.
pub fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            num += if si > sj {
                1.0
            } else if si == sj {
                0.5
            } else {
                0.0
            };
        }
    }
    num / pairs
}

/// Straight-line Pearson r.
pub fn pearson_r(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}
