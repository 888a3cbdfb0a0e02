//! Seeded synthetic fixtures: a stance-annotated corpus whose wording, word
//! vectors, sentence vectors and entity graph all carry the articles' stance
//! and sentiment, so every recommender has a signal to pick up.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    Corpus, KnowledgeGraph, Manifest, NewsArticle, Question, QuestionId, StanceLabel, MANIFEST_SCHEMA_VERSION,
};
use crate::error::{Error, Result};
use crate::layout::DataDir;
use crate::recommend::{SentenceVectors, WordVectors};
use crate::util::derive_seed;


const QUESTION_TEXTS: [&str; 5] = [
    "Should the national minimum wage be raised?",
    "Should public transport be free of charge?",
    "Should the retirement age be increased?",
    "Should speed limits be introduced on motorways?",
    "Should the country expand wind power?",
];

const OUTLETS: [&str; 6] = ["tagblatt", "rundschau", "kurier", "morgenpost", "anzeiger", "bote"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub n_articles: usize,
    pub n_topics: usize,
    pub word_dim: usize,
    pub sentence_dim: usize,
    /// Probability that one question's label disagrees with the article's camp.
    pub stance_flip: f64,
    /// Share of articles in the favor camp.
    pub favor_share: f64,
    pub sentences_per_article: usize,
    pub words_per_sentence: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_articles: 400,
            n_topics: 8,
            word_dim: 300,
            sentence_dim: 768,
            stance_flip: 0.1,
            favor_share: 0.47,
            sentences_per_article: 6,
            words_per_sentence: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub manifest: Manifest,
    pub corpus: Corpus,
    pub kg: KnowledgeGraph,
    pub word_vectors: WordVectors,
    pub sentence_vectors: SentenceVectors,
}

impl SyntheticData {
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let layout = DataDir::new(dir);
        self.manifest.save(layout.corpus_manifest())?;
        self.corpus.save_jsonl(layout.corpus())?;
        self.word_vectors.save(layout.word_vectors())?;
        self.sentence_vectors.save(layout.sentence_vectors())?;
        let path = layout.graph();
        let mut out = String::new();
        let ents = self.kg.entities();
        let rels = self.kg.relations();
        for &(h, r, t) in self.kg.triples() {
            out.push_str(&format!("{}\t{}\t{}\n", ents.name(h), rels.name(r), ents.name(t)));
        }
        std::fs::write(&path, out).map_err(|e| Error::io(&path, e))
    }
}

const STANCE_WORDS: usize = 30;
const SENTIMENT_WORDS: usize = 20;
const TOPIC_WORDS: usize = 15;
const GENERIC_WORDS: usize = 60;
const CAMP_ENTITIES: usize = 10;
const TOPIC_ENTITIES: usize = 5;

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn unit<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| gaussian(rng)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Six decimals, so written fixtures reload to the same values.
fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

struct Lexicon {
    favor: Vec<String>,
    against: Vec<String>,
    positive: Vec<String>,
    negative: Vec<String>,
    topics: Vec<Vec<String>>,
    generic: Vec<String>,
}

impl Lexicon {
    fn new(n_topics: usize) -> Self {
        let list = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i:02}")).collect::<Vec<_>>();
        Lexicon {
            favor: list("pro", STANCE_WORDS),
            against: list("contra", STANCE_WORDS),
            positive: list("good", SENTIMENT_WORDS),
            negative: list("bad", SENTIMENT_WORDS),
            topics: (0..n_topics).map(|t| list(&format!("topic{t}w"), TOPIC_WORDS)).collect(),
            generic: list("word", GENERIC_WORDS),
        }
    }
}

fn word_vectors<R: Rng>(lex: &Lexicon, dim: usize, rng: &mut R) -> WordVectors {
    let stance_axis = unit(dim, rng);
    let sentiment_axis = unit(dim, rng);
    let centroids: Vec<Vec<f64>> = lex.topics.iter().map(|_| unit(dim, rng)).collect();
    let mut table = WordVectors::new(dim);
    let mut add = |word: &str, shifts: &[(f64, &[f64])], rng: &mut R| {
        let mut v: Vec<f64> = unit(dim, rng).into_iter().map(|x| 0.6 * x).collect();
        for (a, axis) in shifts {
            axpy(*a, axis, &mut v);
        }
        let v: Vec<f64> = v.into_iter().map(round6).collect();
        table.insert(word, &v).expect("dimension matches");
    };
    for w in &lex.favor {
        add(w, &[(1.0, &stance_axis)], rng);
    }
    for w in &lex.against {
        add(w, &[(-1.0, &stance_axis)], rng);
    }
    for w in &lex.positive {
        add(w, &[(1.0, &sentiment_axis)], rng);
    }
    for w in &lex.negative {
        add(w, &[(-1.0, &sentiment_axis)], rng);
    }
    for (words, c) in lex.topics.iter().zip(&centroids) {
        for w in words {
            add(w, &[(0.8, c)], rng);
        }
    }
    for w in &lex.generic {
        add(w, &[], rng);
    }
    table
}

struct Draft {
    stances: BTreeMap<QuestionId, StanceLabel>,
    sentiment: f64,
    sentences: Vec<Vec<String>>,
    entities: Vec<String>,
}

fn draft<R: Rng>(lex: &Lexicon, cfg: &SyntheticConfig, questions: &[QuestionId], rng: &mut R) -> Draft {
    let camp_favor = rng.random_bool(cfg.favor_share);
    let stances = questions
        .iter()
        .map(|q| {
            let agrees = !rng.random_bool(cfg.stance_flip);
            let label = if agrees == camp_favor {
                StanceLabel::Favor
            } else {
                StanceLabel::Against
            };
            (q.clone(), label)
        })
        .collect();
    let sentiment = ((0.5 * gaussian(rng) - 0.05).tanh() * 1e4).round() / 1e4;
    let topic = rng.random_range(0..cfg.n_topics);
    let camp = if camp_favor { &lex.favor } else { &lex.against };
    let tone_positive_share = (1.0 + sentiment) / 2.0;
    let mut sentences = Vec::with_capacity(cfg.sentences_per_article + 1);
    for s in 0..=cfg.sentences_per_article {
        let len = if s == 0 { 6 } else { cfg.words_per_sentence };
        let sentence = (0..len)
            .map(|_| {
                let u: f64 = rng.random();
                let pool = if u < 0.3 {
                    camp
                } else if u < 0.45 {
                    if rng.random_bool(tone_positive_share) {
                        &lex.positive
                    } else {
                        &lex.negative
                    }
                } else if u < 0.75 {
                    &lex.topics[topic]
                } else {
                    &lex.generic
                };
                pool.choose(rng).expect("non-empty pool").clone()
            })
            .collect();
        sentences.push(sentence);
    }
    let aligned = |rng: &mut R| {
        let favor = if rng.random_bool(0.85) { camp_favor } else { !camp_favor };
        let i = rng.random_range(0..CAMP_ENTITIES);
        if favor {
            format!("ent:pro{i}")
        } else {
            format!("ent:con{i}")
        }
    };
    let mut entities = vec![
        format!("ent:topic{topic}_{}", rng.random_range(0..TOPIC_ENTITIES)),
        aligned(rng),
    ];
    if rng.random_bool(0.5) {
        entities.push(aligned(rng));
    }
    entities.dedup();
    Draft {
        stances,
        sentiment,
        sentences,
        entities,
    }
}

fn graph(cfg: &SyntheticConfig, rng: &mut impl Rng) -> KnowledgeGraph {
    let mut triples: Vec<(String, &str, String)> = Vec::new();
    for t in 0..cfg.n_topics {
        for i in 0..TOPIC_ENTITIES {
            triples.push((format!("ent:topic{t}_{i}"), "part_of", format!("ent:topic{t}")));
        }
    }
    for (prefix, hub) in [("pro", "ent:hub_pro"), ("con", "ent:hub_con")] {
        for i in 0..CAMP_ENTITIES {
            let e = format!("ent:{prefix}{i}");
            triples.push((e.clone(), "aligned_with", hub.to_string()));
            for _ in 0..2 {
                let t = rng.random_range(0..cfg.n_topics);
                triples.push((e.clone(), "discusses", format!("ent:topic{t}")));
            }
        }
        for t in 0..cfg.n_topics {
            triples.push((hub.to_string(), "covers", format!("ent:topic{t}")));
        }
    }
    KnowledgeGraph::from_triples(triples.iter().map(|(h, r, t)| (h.as_str(), *r, t.as_str())))
}

/// Generates a deterministic fixture set from `cfg.seed`.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticData> {
    if cfg.n_articles == 0 || cfg.n_topics == 0 || cfg.word_dim == 0 || cfg.sentence_dim == 0 {
        return Err(Error::InvalidConfig("synthetic sizes must be positive".into()));
    }
    if !(0.0..=1.0).contains(&cfg.stance_flip) || !(0.0..=1.0).contains(&cfg.favor_share) {
        return Err(Error::InvalidConfig("synthetic probabilities must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "synthetic"));
    let questions = QuestionId::default_set();
    let manifest = Manifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        questions: questions
            .iter()
            .zip(QUESTION_TEXTS)
            .map(|(id, text)| Question {
                id: id.clone(),
                text: text.to_string(),
            })
            .collect(),
    };
    let lex = Lexicon::new(cfg.n_topics);
    let word_vectors = word_vectors(&lex, cfg.word_dim, &mut rng);
    let projection: Vec<Vec<f64>> = (0..cfg.sentence_dim)
        .map(|_| {
            (0..cfg.word_dim)
                .map(|_| gaussian(&mut rng) / (cfg.word_dim as f64).sqrt())
                .collect()
        })
        .collect();
    let kg = graph(cfg, &mut rng);
    let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date");
    let mut sentence_vectors = SentenceVectors::new(cfg.sentence_dim);
    let mut articles = Vec::with_capacity(cfg.n_articles);
    for i in 0..cfg.n_articles {
        let d = draft(&lex, cfg, &questions, &mut rng);
        let id = format!("a{i:04}");
        for (s, sentence) in d.sentences.iter().enumerate() {
            let mut mean = vec![0.0; cfg.word_dim];
            for w in sentence {
                axpy(1.0 / sentence.len() as f64, word_vectors.get(w).expect("lexicon word"), &mut mean);
            }
            let v: Vec<f64> = projection
                .iter()
                .map(|row| round6(row.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>() + 0.05 * gaussian(&mut rng)))
                .collect();
            sentence_vectors.insert(&id, s, v)?;
        }
        let title = d.sentences[0].join(" ");
        let body = d.sentences[1..]
            .iter()
            .map(|s| s.join(" ") + ".")
            .collect::<Vec<_>>()
            .join(" ");
        let word_count = body.split_whitespace().count();
        let date = start + chrono::Days::new((i as u64 * 7) % 1000);
        articles.push(NewsArticle {
            id,
            title,
            body,
            outlet: OUTLETS[i % OUTLETS.len()].to_string(),
            published_at: date.format("%Y-%m-%d").to_string(),
            sentiment_score: d.sentiment,
            stances: d.stances,
            entity_ids: d.entities,
            word_count,
        });
    }
    let corpus = Corpus::new(articles, questions)?;
    Ok(SyntheticData {
        manifest,
        corpus,
        kg,
        word_vectors,
        sentence_vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_corpus;

    fn small() -> SyntheticConfig {
        SyntheticConfig {
            n_articles: 30,
            word_dim: 8,
            sentence_dim: 6,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.corpus.articles(), b.corpus.articles());
        assert_eq!(a.kg.triples(), b.kg.triples());
    }

    #[test]
    fn files_round_trip() {
        let data = generate(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        data.write_to(dir.path()).unwrap();
        let layout = DataDir::new(dir.path());
        let corpus = load_corpus(layout.corpus(), layout.corpus_manifest()).unwrap();
        assert_eq!(corpus.articles(), data.corpus.articles());
        let wv = WordVectors::load(layout.word_vectors()).unwrap();
        assert_eq!(wv.len(), data.word_vectors.len());
        assert_eq!(wv.get("pro03"), data.word_vectors.get("pro03"));
        let sv = SentenceVectors::load(layout.sentence_vectors()).unwrap();
        assert_eq!(sv.dim(), 6);
        let a: Vec<&[f64]> = sv.sentences("a0007").unwrap().collect();
        let b: Vec<&[f64]> = data.sentence_vectors.sentences("a0007").unwrap().collect();
        assert_eq!(a, b);
        let kg = crate::corpus::load_kg(layout.graph()).unwrap();
        assert_eq!(kg.triples().len(), data.kg.triples().len());
    }

    #[test]
    fn stances_track_camp_vocabulary() {
        let data = generate(&SyntheticConfig { n_articles: 200, ..small() }).unwrap();
        let q1 = &data.corpus.questions()[0];
        let mut agree = 0;
        for a in data.corpus.articles() {
            let pro = a.body.matches("pro").count();
            let contra = a.body.matches("contra").count();
            let favor = a.stance(q1) == Some(StanceLabel::Favor);
            if (pro > contra) == favor {
                agree += 1;
            }
        }
        assert!(agree > 160, "{agree}");
    }
}
