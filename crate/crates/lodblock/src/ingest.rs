//! N-Triples parsing, description assembly and ground-truth loading.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use lodblock_core::engine::{Executor, JobError, PartitionedDataset};
use lodblock_core::{
    AttributeValue, EntityCollection, EntityDescription, GroundTruth, ModelError, Value,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Iri(String),
    Blank(String),
    Literal(String),
}

impl Node {
    pub fn is_blank(&self) -> bool {
        matches!(self, Node::Blank(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
}

impl Triple {
    pub fn has_blank(&self) -> bool {
        self.subject.is_blank() || self.object.is_blank()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ErrorPolicy {
    /// Skip and count malformed lines.
    #[default]
    Lenient,
    /// Abort on the first malformed line.
    Strict,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Job(#[from] JobError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("ground truth line {line}: expected two tab-separated ids")]
    GroundTruthLine { line: usize },
}

/// Opens a file, transparently decompressing gzip (detected by magic bytes).
pub fn open_input(path: &Path) -> io::Result<Box<dyn BufRead + Send>> {
    let mut file = BufReader::new(File::open(path)?);
    let gz = file.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    Ok(if gz {
        Box::new(BufReader::new(MultiGzDecoder::new(file)))
    } else {
        Box::new(file)
    })
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start_matches([' ', '\t']);
        self.pos = self.s.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn iri(&mut self) -> Result<String, String> {
        if !self.eat('<') {
            return Err("expected `<`".into());
        }
        let end = self.rest().find('>').ok_or("unterminated IRI")?;
        let raw = &self.rest()[..end];
        self.pos += end + 1;
        let iri = unescape(raw)?;
        if iri.is_empty()
            || iri
                .chars()
                .any(|c| c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"'))
        {
            return Err(format!("invalid IRI `{raw}`"));
        }
        Ok(iri)
    }

    fn blank(&mut self) -> Result<String, String> {
        if !self.rest().starts_with("_:") {
            return Err("expected blank node".into());
        }
        self.pos += 2;
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace())
            .unwrap_or(self.rest().len());
        let label = self.rest()[..len].trim_end_matches('.');
        if label.is_empty() {
            return Err("empty blank node label".into());
        }
        self.pos += label.len();
        Ok(label.to_string())
    }

    fn literal(&mut self) -> Result<String, String> {
        self.eat('"');
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        while i < bytes.len() && bytes[i] != b'"' {
            i += if bytes[i] == b'\\' { 2 } else { 1 };
        }
        if i >= bytes.len() {
            return Err("unterminated literal".into());
        }
        let lexical = unescape(&self.rest()[..i])?;
        self.pos += i + 1;
        if self.eat('@') {
            let len = self
                .rest()
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(self.rest().len());
            if len == 0 {
                return Err("empty language tag".into());
            }
            self.pos += len;
        } else if self.rest().starts_with("^^") {
            self.pos += 2;
            self.iri()?;
        }
        Ok(lexical)
    }

    fn node(&mut self) -> Result<Node, String> {
        match self.rest().chars().next() {
            Some('<') => self.iri().map(Node::Iri),
            Some('_') => self.blank().map(Node::Blank),
            Some('"') => self.literal().map(Node::Literal),
            _ => Err("expected IRI, blank node or literal".into()),
        }
    }
}

fn unescape(raw: &str) -> Result<String, String> {
    if !raw.contains('\\') {
        return Ok(raw.to_string());
    }
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let e = chars.next().ok_or("dangling escape")?;
        match e {
            't' => out.push('\t'),
            'b' => out.push('\u{8}'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            'f' => out.push('\u{c}'),
            '"' | '\'' | '\\' => out.push(e),
            'u' | 'U' => {
                let n = if e == 'u' { 4 } else { 8 };
                let hex: String = chars.by_ref().take(n).collect();
                let cp =
                    u32::from_str_radix(&hex, 16).map_err(|_| format!("bad escape \\{e}{hex}"))?;
                out.push(char::from_u32(cp).ok_or_else(|| format!("bad code point {cp:#x}"))?);
            }
            other => return Err(format!("unknown escape \\{other}")),
        }
    }
    Ok(out)
}

/// Parses one line. Blank lines and comments give `None`.
pub fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let mut c = Cursor { s: line, pos: 0 };
    let subject = c.node()?;
    if matches!(subject, Node::Literal(_)) {
        return Err("literal subject".into());
    }
    c.skip_ws();
    let predicate = c.iri()?;
    c.skip_ws();
    let object = c.node()?;
    c.skip_ws();
    if !c.eat('.') {
        return Err("expected `.`".into());
    }
    c.skip_ws();
    if !(c.rest().is_empty() || c.rest().starts_with('#')) {
        return Err("trailing content after `.`".into());
    }
    Ok(Some(Triple {
        subject,
        predicate,
        object,
    }))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedTriples {
    pub triples: Vec<Triple>,
    /// 1-based numbers of skipped malformed lines.
    pub malformed: Vec<usize>,
}

pub fn parse_ntriples<R: BufRead>(
    reader: R,
    policy: ErrorPolicy,
) -> Result<ParsedTriples, IngestError> {
    let mut out = ParsedTriples::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        match parse_line(&line) {
            Ok(Some(t)) => out.triples.push(t),
            Ok(None) => {}
            Err(message) => match policy {
                ErrorPolicy::Strict => {
                    return Err(IngestError::Malformed {
                        line: i + 1,
                        message,
                    })
                }
                ErrorPolicy::Lenient => {
                    log::debug!("skipping malformed line {}: {message}", i + 1);
                    out.malformed.push(i + 1);
                }
            },
        }
    }
    Ok(out)
}

/// Groups triples by subject into descriptions of `source`, dropping every
/// triple that involves a blank node. Sorted by id.
pub fn build_descriptions<E: Executor>(
    triples: &[Triple],
    source: &str,
    exec: &E,
) -> Result<Vec<EntityDescription>, IngestError> {
    let refs: Vec<&Triple> = triples.iter().filter(|t| !t.has_blank()).collect();
    let input = PartitionedDataset::split(refs, exec.config().partitions)?;
    let mut descs = exec.try_map_group_reduce(
        &input,
        |t| {
            let Node::Iri(s) = &t.subject else {
                return Ok(Vec::new());
            };
            let value = match &t.object {
                Node::Iri(o) => Value::resource(o.clone()),
                Node::Literal(l) => Value::literal(l.clone()),
                Node::Blank(_) => return Ok(Vec::new()),
            };
            Ok::<_, ModelError>(vec![(
                s.as_bytes().to_vec(),
                AttributeValue::new(t.predicate.clone(), value),
            )])
        },
        |subject, pairs| {
            let id = String::from_utf8_lossy(subject).into_owned();
            Ok(vec![EntityDescription::new(id, source, pairs)?])
        },
    )?;
    descs.sort_by(|a, b| a.id().cmp(b.id()));
    Ok(descs)
}

const PREFIXES: [(&str, &str); 6] = [
    ("owl:", "http://www.w3.org/2002/07/owl#"),
    ("rdf:", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
    ("rdfs:", "http://www.w3.org/2000/01/rdf-schema#"),
    ("skos:", "http://www.w3.org/2004/02/skos/core#"),
    ("umbel:", "http://umbel.org/umbel#"),
    ("foaf:", "http://xmlns.com/foaf/0.1/"),
];

/// Expands a well-known prefixed name such as `owl:sameAs`.
pub fn expand_predicate(name: &str) -> String {
    for (prefix, ns) in PREFIXES {
        if let Some(local) = name.strip_prefix(prefix) {
            return format!("{ns}{local}");
        }
    }
    name.to_string()
}

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Links with the given predicate, transitively closed. With `restrict_to`,
/// only pairs with both ends in one of the two id sets are kept.
pub fn load_ground_truth(
    triples: &[Triple],
    predicate: &str,
    restrict_to: Option<(&BTreeSet<String>, &BTreeSet<String>)>,
) -> GroundTruth {
    let predicate = expand_predicate(predicate);
    let links: Vec<(String, String)> = triples
        .iter()
        .filter(|t| t.predicate == predicate)
        .filter_map(|t| match (&t.subject, &t.object) {
            (Node::Iri(s), Node::Iri(o)) => Some((s.clone(), o.clone())),
            _ => None,
        })
        .collect();
    if links.is_empty() {
        log::warn!("no `{predicate}` links found, ground truth is empty");
    }
    let gt = GroundTruth::from_links(predicate, links);
    match restrict_to {
        Some((a, b)) => gt.restricted(|id| a.contains(id) || b.contains(id)),
        None => gt,
    }
}

/// Two tab-separated ids per line; blank lines and `#` comments skipped.
pub fn load_ground_truth_tsv<R: Read>(reader: R) -> Result<GroundTruth, IngestError> {
    let mut links = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                links.push((a.to_string(), b.to_string()))
            }
            _ => return Err(IngestError::GroundTruthLine { line: i + 1 }),
        }
    }
    Ok(GroundTruth::from_links("tsv", links))
}

/// Keeps descriptions that take part in some ground-truth pair and drops
/// the pairs that spell out a ground-truth link.
pub fn filter_to_ground_truth(collection: &EntityCollection, gt: &GroundTruth) -> EntityCollection {
    let ids = gt.ids();
    collection.filter_map(|d| {
        if !ids.contains(d.id()) {
            return None;
        }
        Some(d.retain_pairs(|p| !(p.value.is_resource() && gt.contains(d.id(), &p.value.text))))
    })
}
