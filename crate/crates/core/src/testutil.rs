use std::collections::BTreeMap;

use crate::corpus::{Corpus, NewsArticle, QuestionId, StanceLabel};

pub(crate) fn article(id: &str, body: &str, sentiment: f64, stance: StanceLabel) -> NewsArticle {
    NewsArticle {
        id: id.to_string(),
        title: String::new(),
        body: body.to_string(),
        outlet: "test".into(),
        published_at: "2020-01-01".into(),
        sentiment_score: sentiment,
        stances: QuestionId::default_set()
            .into_iter()
            .map(|q| (q, stance))
            .collect::<BTreeMap<_, _>>(),
        entity_ids: vec![],
        word_count: body.split_whitespace().count(),
    }
}

/// Articles `d0, d1, ...` with the given bodies.
pub(crate) fn corpus_from_texts(texts: &[&str]) -> Corpus {
    let articles = texts
        .iter()
        .enumerate()
        .map(|(i, t)| article(&format!("d{i}"), t, 0.0, StanceLabel::Favor))
        .collect();
    Corpus::new(articles, QuestionId::default_set()).unwrap()
}
