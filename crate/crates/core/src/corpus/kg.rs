use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// String vocabulary with dense indices in first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocab {
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut v = Vocab::default();
        for n in names {
            v.intern(&n.into());
        }
        v
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = u32::try_from(self.names.len()).expect("vocabulary exceeds u32 range");
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, idx: u32) -> &str {
        &self.names[idx as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Indexed triple store with an out-edge adjacency list per head entity.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Vocab,
    relations: Vocab,
    triples: Vec<(u32, u32, u32)>,
    out_adjacency: Vec<Vec<(u32, u32)>>,
}

impl KnowledgeGraph {
    pub fn from_triples<'a, I>(triples: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut kg = KnowledgeGraph::default();
        for (h, r, t) in triples {
            kg.push(h, r, t);
        }
        kg
    }

    fn push(&mut self, head: &str, relation: &str, tail: &str) {
        let h = self.entities.intern(head);
        let r = self.relations.intern(relation);
        let t = self.entities.intern(tail);
        self.triples.push((h, r, t));
        if self.out_adjacency.len() < self.entities.len() {
            self.out_adjacency.resize(self.entities.len(), Vec::new());
        }
        self.out_adjacency[h as usize].push((r, t));
    }

    /// Builds a graph whose entity vocabulary starts with `entities`, so that
    /// entities without edges still get an index (and an embedding).
    pub fn with_entities<'a, I, T>(entities: I, triples: T) -> Self
    where
        I: IntoIterator<Item = &'a str>,
        T: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut kg = KnowledgeGraph::default();
        for e in entities {
            kg.entities.intern(e);
        }
        kg.out_adjacency.resize(kg.entities.len(), Vec::new());
        for (h, r, t) in triples {
            kg.push(h, r, t);
        }
        kg
    }

    pub fn entities(&self) -> &Vocab {
        &self.entities
    }

    pub fn relations(&self) -> &Vocab {
        &self.relations
    }

    pub fn triples(&self) -> &[(u32, u32, u32)] {
        &self.triples
    }

    /// Out-edges `(relation, tail)` of `head`.
    pub fn out_edges(&self, head: u32) -> &[(u32, u32)] {
        self.out_adjacency
            .get(head as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// Loads `head<TAB>relation<TAB>tail` lines. Blank lines are ignored.
pub fn load_kg(path: impl AsRef<Path>) -> Result<KnowledgeGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_kg(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_kg(reader: impl BufRead) -> Result<KnowledgeGraph> {
    let mut kg = KnowledgeGraph::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<reader>", e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [h, r, t] if !h.is_empty() && !r.is_empty() && !t.is_empty() => kg.push(h, r, t),
            _ => {
                return Err(Error::MalformedTriple {
                    line: i + 1,
                    reason: format!("expected 3 non-empty tab-separated fields, got {}", fields.len()),
                })
            }
        }
    }
    Ok(kg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn builds_vocabularies_and_adjacency() {
        let kg = read_kg(Cursor::new("e1\tr1\te2\ne1\tr2\te3\n")).unwrap();
        assert_eq!(kg.entities().len(), 3);
        assert_eq!(kg.relations().len(), 2);
        let e1 = kg.entities().get("e1").unwrap();
        assert_eq!(e1, 0);
        assert_eq!(kg.out_edges(e1).len(), 2);
        assert!(kg.out_edges(kg.entities().get("e3").unwrap()).is_empty());
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let kg = read_kg(Cursor::new("")).unwrap();
        assert!(kg.is_empty());
        assert!(kg.entities().is_empty());
    }

    #[test]
    fn two_fields_is_malformed() {
        let err = read_kg(Cursor::new("e1\tr1\te2\ne1\tr1\n")).unwrap_err();
        assert!(matches!(err, Error::MalformedTriple { line: 2, .. }));
    }

    #[test]
    fn adjacency_matches_triples() {
        let kg = read_kg(Cursor::new("a\tr\tb\nb\tr\tc\na\ts\tc\nc\tr\ta\na\tr\tb\n")).unwrap();
        let mut from_adj: Vec<_> = (0..kg.entities().len() as u32)
            .flat_map(|h| kg.out_edges(h).iter().map(move |&(r, t)| (h, r, t)))
            .collect();
        let mut from_triples = kg.triples().to_vec();
        from_adj.sort_unstable();
        from_triples.sort_unstable();
        assert_eq!(from_adj, from_triples);
    }

    #[test]
    fn loading_is_deterministic() {
        let text = "x\tr\ty\ny\tq\tz\nz\tr\tx\n";
        let a = read_kg(Cursor::new(text)).unwrap();
        let b = read_kg(Cursor::new(text)).unwrap();
        assert_eq!(a.entities(), b.entities());
        assert_eq!(a.relations(), b.relations());
        assert_eq!(a.triples(), b.triples());
    }
}
