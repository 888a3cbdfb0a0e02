use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

/// Where an interaction record came from.
///
/// `Synthetic` marks records produced from uniformly random previews (the
/// random-recommender arm); those records make up the random test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Chosen,
    NegativePreview,
    Synthetic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Chosen => "chosen",
            Origin::NegativePreview => "negative_preview",
            Origin::Synthetic => "synthetic",
        }
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "chosen" => Ok(Origin::Chosen),
            "negative_preview" => Ok(Origin::NegativePreview),
            "synthetic" => Ok(Origin::Synthetic),
            other => Err(format!("unknown origin {other:?}")),
        }
    }
}

/// Split assignment. `RandomTest` records belong to the complete test set
/// as well, so the subset relation holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
    RandomTest,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::RandomTest => "random_test",
        }
    }

    pub fn in_complete_test(self) -> bool {
        matches!(self, Split::Test | Split::RandomTest)
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "random_test" => Ok(Split::RandomTest),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub user_id: String,
    pub article_id: String,
    pub label: bool,
    pub origin: Origin,
    pub split: Option<Split>,
}

impl fmt::Display for InteractionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}",
            self.user_id,
            self.article_id,
            u8::from(self.label),
            self.origin.as_str(),
            self.split.map_or("-", Split::as_str)
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InteractionLog {
    pub records: Vec<InteractionRecord>,
}

impl InteractionLog {
    pub fn new(records: Vec<InteractionRecord>) -> Self {
        InteractionLog { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn train(&self) -> impl Iterator<Item = &InteractionRecord> {
        self.records.iter().filter(|r| r.split == Some(Split::Train))
    }

    pub fn complete_test(&self) -> impl Iterator<Item = &InteractionRecord> {
        self.records
            .iter()
            .filter(|r| r.split.is_some_and(Split::in_complete_test))
    }

    pub fn random_test(&self) -> impl Iterator<Item = &InteractionRecord> {
        self.records.iter().filter(|r| r.split == Some(Split::RandomTest))
    }

    /// Checks that every article resolves in `corpus`.
    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        for r in &self.records {
            corpus.require(&r.article_id)?;
        }
        Ok(())
    }
}

/// Reads `user_id<TAB>article_id<TAB>label<TAB>origin<TAB>split` lines.
/// A split of `-` means not yet assigned.
pub fn read_interactions(reader: impl BufRead) -> Result<InteractionLog> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| Error::MalformedRecord { line: i + 1, reason };
        let fields: Vec<&str> = line.split('\t').collect();
        let [user, article, label, origin, split] = fields.as_slice() else {
            return Err(bad(format!("expected 5 tab-separated fields, got {}", fields.len())));
        };
        let label = match *label {
            "0" => false,
            "1" => true,
            other => return Err(bad(format!("label {other:?} is not 0 or 1"))),
        };
        let split = match *split {
            "-" => None,
            s => Some(s.parse::<Split>().map_err(bad)?),
        };
        if user.is_empty() || article.is_empty() {
            return Err(bad("empty user or article id".into()));
        }
        records.push(InteractionRecord {
            user_id: user.to_string(),
            article_id: article.to_string(),
            label,
            origin: origin.parse().map_err(bad)?,
            split,
        });
    }
    Ok(InteractionLog { records })
}

/// Loads an interaction log and checks it against the corpus.
pub fn load_interactions(path: impl AsRef<Path>, corpus: &Corpus) -> Result<InteractionLog> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let log = read_interactions(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    log.validate(corpus)?;
    Ok(log)
}

pub fn write_interactions(path: impl AsRef<Path>, log: &InteractionLog) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in &log.records {
        writeln!(w, "{r}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn parses_and_formats_records() {
        let text = "u1\ta1\t1\tchosen\ttrain\nu1\ta2\t0\tnegative_preview\ttest\nu2\ta3\t0\tsynthetic\trandom_test\nu3\ta4\t1\tchosen\t-\n";
        let log = read_interactions(Cursor::new(text)).unwrap();
        assert_eq!(log.len(), 4);
        assert_eq!(log.train().count(), 1);
        assert_eq!(log.complete_test().count(), 2);
        assert_eq!(log.random_test().count(), 1);
        assert_eq!(log.records[3].split, None);
        let out: String = log.records.iter().map(|r| format!("{r}\n")).collect();
        assert_eq!(out, text);
    }

    #[test]
    fn rejects_bad_fields() {
        for text in [
            "u1\ta1\t2\tchosen\ttrain",
            "u1\ta1\t1\tclicked\ttrain",
            "u1\ta1\t1\tchosen\tvalidation",
            "u1\ta1\t1\tchosen",
        ] {
            assert!(matches!(
                read_interactions(Cursor::new(text)),
                Err(Error::MalformedRecord { line: 1, .. })
            ));
        }
    }
}
