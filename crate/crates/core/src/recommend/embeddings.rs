//! Pre-computed word and sentence embeddings and the article averages built
//! from them.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::tokenize::words;
use super::vector::{Vector, VectorTable};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const WORD_DIM: usize = 300;
pub const SENTENCE_DIM: usize = 768;

/// Word-embedding table in the fastText `.vec` text layout.
#[derive(Debug, Clone)]
pub struct WordVectors {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl WordVectors {
    pub fn new(dim: usize) -> Self {
        WordVectors {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let word = word.into();
        match self.index.get(&word) {
            Some(&row) => self.data[row * self.dim..(row + 1) * self.dim].copy_from_slice(vector),
            None => {
                self.index.insert(word, self.index.len());
                self.data.extend_from_slice(vector);
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&row| &self.data[row * self.dim..(row + 1) * self.dim])
    }

    /// Exact-case lookup first, then lowercase.
    fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.get(token).or_else(|| self.get(&token.to_lowercase()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    /// Header line `count dim`, then `token v1 ... v_dim` per line.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or(Error::MalformedRecord {
                line: 1,
                reason: "missing header".into(),
            })?
            .map_err(|e| Error::io("<reader>", e))?;
        let bad_header = || Error::MalformedRecord {
            line: 1,
            reason: format!("header {header:?} is not `count dim`"),
        };
        let mut parts = header.split_whitespace().map(str::parse::<usize>);
        let (count, dim) = match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(c)), Some(Ok(d)), None) if d > 0 => (c, d),
            _ => return Err(bad_header()),
        };
        let mut table = WordVectors::new(dim);
        let mut buf = Vec::with_capacity(dim);
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line.map_err(|e| Error::io("<reader>", e))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let word = fields.next().unwrap_or_default();
            buf.clear();
            for f in fields {
                buf.push(f.parse::<f64>().map_err(|e| Error::MalformedRecord {
                    line: lineno,
                    reason: format!("bad component {f:?}: {e}"),
                })?);
            }
            table.insert(word, &buf)?;
        }
        if table.len() != count {
            log::warn!("word vector header declares {count} rows, found {}", table.len());
        }
        Ok(table)
    }

    /// Writes rows in insertion order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut rows: Vec<(&String, usize)> = self.index.iter().map(|(w, &r)| (w, r)).collect();
        rows.sort_by_key(|&(_, r)| r);
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{} {}", rows.len(), self.dim).map_err(io)?;
        for (word, row) in rows {
            write!(w, "{word}").map_err(io)?;
            for v in &self.data[row * self.dim..(row + 1) * self.dim] {
                write!(w, " {v}").map_err(io)?;
            }
            writeln!(w).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Article vector = unweighted mean of the embeddings of its in-vocabulary
/// tokens; the zero vector when no token is known.
pub fn embed_average_words(corpus: &Corpus, vectors: &WordVectors, dim: usize) -> Result<VectorTable> {
    if vectors.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: vectors.dim(),
        });
    }
    let mut table = VectorTable::new(dim);
    let mut uncovered = 0usize;
    for article in corpus.articles() {
        let text = article.text();
        let mut acc = vec![0.0; dim];
        let mut n = 0usize;
        for tok in words(&text, 2) {
            if let Some(v) = vectors.lookup(tok) {
                acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
                n += 1;
            }
        }
        if n > 0 {
            acc.iter_mut().for_each(|a| *a /= n as f64);
        } else {
            uncovered += 1;
        }
        table.insert(article.id.clone(), Vector::Dense(acc))?;
    }
    if uncovered > 0 {
        log::warn!("{uncovered} articles have no in-vocabulary tokens");
    }
    Ok(table)
}

/// Per-sentence embeddings keyed by article, in sentence-index order.
#[derive(Debug, Clone, Default)]
pub struct SentenceVectors {
    dim: usize,
    by_article: HashMap<String, BTreeMap<usize, Vec<f64>>>,
}

impl SentenceVectors {
    pub fn new(dim: usize) -> Self {
        SentenceVectors {
            dim,
            by_article: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, article_id: &str, sentence: usize, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: vector.len(),
            });
        }
        self.by_article
            .entry(article_id.to_string())
            .or_default()
            .insert(sentence, vector);
        Ok(())
    }

    pub fn sentences(&self, article_id: &str) -> Option<impl Iterator<Item = &[f64]>> {
        self.by_article
            .get(article_id)
            .map(|m| m.values().map(Vec::as_slice))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    /// `article_id<TAB>sentence_index<TAB>v1,...,v_dim` lines. The dimension is
    /// taken from the first row.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut out: Option<SentenceVectors> = None;
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<reader>", e))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: String| Error::MalformedRecord { line: i + 1, reason };
            let fields: Vec<&str> = line.split('\t').collect();
            let [article, idx, values] = fields.as_slice() else {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            let idx: usize = idx.parse().map_err(|e| bad(format!("sentence index: {e}")))?;
            let values = values
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(format!("vector component: {e}")))?;
            let table = out.get_or_insert_with(|| SentenceVectors::new(values.len()));
            table.insert(article, idx, values)?;
        }
        Ok(out.unwrap_or_default())
    }

    /// Writes rows sorted by article id, then sentence index.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let mut ids: Vec<&String> = self.by_article.keys().collect();
        ids.sort();
        for id in ids {
            for (idx, v) in &self.by_article[id] {
                let values: Vec<String> = v.iter().map(f64::to_string).collect();
                writeln!(w, "{id}\t{idx}\t{}", values.join(",")).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

/// Article vector = mean of its sentence vectors.
pub fn embed_average_sentences(corpus: &Corpus, sentences: &SentenceVectors, dim: usize) -> Result<VectorTable> {
    if !sentences.by_article.is_empty() && sentences.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: sentences.dim(),
        });
    }
    let mut table = VectorTable::new(dim);
    for article in corpus.articles() {
        let rows = sentences
            .by_article
            .get(&article.id)
            .filter(|m| !m.is_empty())
            .ok_or_else(|| Error::MissingEmbedding(article.id.clone()))?;
        let mut acc = vec![0.0; dim];
        for v in rows.values() {
            acc.iter_mut().zip(v).for_each(|(a, x)| *a += x);
        }
        acc.iter_mut().for_each(|a| *a /= rows.len() as f64);
        table.insert(article.id.clone(), Vector::Dense(acc))?;
    }
    Ok(table)
}
