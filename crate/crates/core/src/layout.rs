//! File names of a data directory, as written by the fixture generator and the
//! annotation exporter and read by the command-line tool.

use std::path::{Path, PathBuf};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const CORPUS_MANIFEST_FILE: &str = "corpus_manifest.json";
pub const GRAPH_FILE: &str = "graph.tsv";
pub const WORD_VECTORS_FILE: &str = "word_vectors.vec";
pub const SENTENCE_VECTORS_FILE: &str = "sentence_vectors.tsv";
pub const INTERACTIONS_FILE: &str = "interactions.tsv";
pub const USERS_FILE: &str = "users.json";

#[derive(Debug, Clone)]
pub struct DataDir(PathBuf);

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir(root.into())
    }

    pub fn root(&self) -> &Path {
        &self.0
    }

    pub fn corpus(&self) -> PathBuf {
        self.0.join(CORPUS_FILE)
    }

    pub fn corpus_manifest(&self) -> PathBuf {
        self.0.join(CORPUS_MANIFEST_FILE)
    }

    pub fn graph(&self) -> PathBuf {
        self.0.join(GRAPH_FILE)
    }

    pub fn word_vectors(&self) -> PathBuf {
        self.0.join(WORD_VECTORS_FILE)
    }

    pub fn sentence_vectors(&self) -> PathBuf {
        self.0.join(SENTENCE_VECTORS_FILE)
    }

    pub fn interactions(&self) -> PathBuf {
        self.0.join(INTERACTIONS_FILE)
    }

    pub fn users(&self) -> PathBuf {
        self.0.join(USERS_FILE)
    }
}
