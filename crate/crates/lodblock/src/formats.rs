//! On-disk formats: descriptions, blocks, attribute clusterings, resolved
//! entities, reports and N-Triples output.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use lodblock_core::{
    AttributeClustering, AttributeRef, AttributeValue, BlockKey, BlockingCollection, ClusterId,
    EntityCollection, EntityDescription, MergedEntity, ModelError, Namespace, Value, ValueKind,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct DescriptionRecord {
    id: String,
    source: String,
    pairs: Vec<(String, String, ValueKind)>,
}

/// One JSON object per line, in collection order.
pub fn write_descriptions<W: Write>(
    mut w: W,
    descriptions: &[EntityDescription],
) -> io::Result<()> {
    for d in descriptions {
        let record = DescriptionRecord {
            id: d.id().to_string(),
            source: d.source().to_string(),
            pairs: d
                .pairs()
                .iter()
                .map(|p| (p.attribute.clone(), p.value.text.clone(), p.value.kind))
                .collect(),
        };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_descriptions<R: BufRead>(r: R) -> Result<Vec<EntityDescription>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DescriptionRecord =
            serde_json::from_str(&line).map_err(|source| FormatError::Json {
                line: i + 1,
                source,
            })?;
        let pairs = rec
            .pairs
            .into_iter()
            .map(|(a, text, kind)| AttributeValue::new(a, Value { kind, text }));
        out.push(EntityDescription::new(rec.id, rec.source, pairs)?);
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct BlockRecord {
    namespace: Namespace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cluster_id: Option<ClusterId>,
    term: String,
    member_ids: Vec<String>,
}

/// One block per line, sorted by key, members sorted by id.
pub fn write_blocks<W: Write>(mut w: W, blocks: &BlockingCollection) -> io::Result<()> {
    let universe = blocks.universe();
    for b in blocks.blocks() {
        let record = BlockRecord {
            namespace: b.key().namespace(),
            cluster_id: b.key().cluster(),
            term: b.key().term().to_string(),
            member_ids: b
                .members()
                .iter()
                .map(|&m| universe.get(m).id().to_string())
                .collect(),
        };
        serde_json::to_writer(&mut w, &record)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_blocks<'a, R: BufRead>(
    r: R,
    universe: &'a EntityCollection,
) -> Result<BlockingCollection<'a>, FormatError> {
    let mut blocks = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: BlockRecord = serde_json::from_str(&line).map_err(|source| FormatError::Json {
            line: i + 1,
            source,
        })?;
        let key = BlockKey::new(rec.namespace, rec.cluster_id, rec.term)?;
        blocks.push((key, rec.member_ids));
    }
    Ok(BlockingCollection::from_ids(universe, blocks)?)
}

/// `cluster<TAB>source<TAB>attribute` per attribute, after a `#glue` line
/// naming the glue cluster.
pub fn write_clustering<W: Write>(
    mut w: W,
    clustering: &AttributeClustering,
    sources: &[String],
) -> io::Result<()> {
    writeln!(w, "#glue\t{}", clustering.glue_cluster())?;
    for (a, c) in clustering.assignment() {
        let tag = sources.get(a.source).map(String::as_str).unwrap_or("?");
        writeln!(w, "{c}\t{tag}\t{}", a.name)?;
    }
    w.flush()
}

pub fn read_clustering<R: BufRead>(
    r: R,
    sources: &[String],
) -> Result<AttributeClustering, FormatError> {
    let mut glue = None;
    let mut assignment = BTreeMap::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let syntax = |message: String| FormatError::Syntax {
            line: i + 1,
            message,
        };
        if let Some(rest) = line.strip_prefix("#glue\t") {
            glue = Some(
                rest.parse()
                    .map_err(|_| syntax(format!("bad glue id `{rest}`")))?,
            );
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let (Some(c), Some(tag), Some(name)) = (cols.next(), cols.next(), cols.next()) else {
            return Err(syntax("expected three tab-separated columns".into()));
        };
        let c: ClusterId = c
            .parse()
            .map_err(|_| syntax(format!("bad cluster id `{c}`")))?;
        let source = sources
            .iter()
            .position(|s| s == tag)
            .ok_or_else(|| syntax(format!("unknown source `{tag}`")))?;
        assignment.insert(AttributeRef::new(source, name), c);
    }
    let glue = glue.ok_or(FormatError::Syntax {
        line: 0,
        message: "missing #glue line".into(),
    })?;
    Ok(AttributeClustering::from_assignment(assignment, glue))
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct EntityRecord<'e> {
    id: &'e str,
    member_ids: &'e [String],
}

pub fn write_entities<W: Write>(mut w: W, entities: &[MergedEntity]) -> io::Result<()> {
    for e in entities {
        serde_json::to_writer(
            &mut w,
            &EntityRecord {
                id: &e.id,
                member_ids: &e.member_ids,
            },
        )?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}

pub fn write_histogram<W: Write>(mut w: W, histogram: &BTreeMap<u64, u64>) -> io::Result<()> {
    writeln!(w, "bucket,count")?;
    for (bucket, count) in histogram {
        writeln!(w, "{bucket},{count}")?;
    }
    w.flush()
}

fn escape_literal(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => out.push_str(&format!("\\u{:04X}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn escape_iri(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_control() || c.is_whitespace() || matches!(c, '<' | '>' | '"' | '\\') {
            out.push_str(&format!("\\u{:04X}", c as u32));
        } else {
            out.push(c);
        }
    }
    out
}

/// One triple per attribute-value pair. Attribute names and resource values
/// are written as IRIs.
pub fn write_ntriples<W: Write>(mut w: W, descriptions: &[EntityDescription]) -> io::Result<()> {
    for d in descriptions {
        for p in d.pairs() {
            let object = match p.value.kind {
                ValueKind::Resource => format!("<{}>", escape_iri(&p.value.text)),
                ValueKind::Literal => format!("\"{}\"", escape_literal(&p.value.text)),
            };
            writeln!(
                w,
                "<{}> <{}> {object} .",
                escape_iri(d.id()),
                escape_iri(&p.attribute)
            )?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{build_descriptions, parse_ntriples, ErrorPolicy};
    use lodblock_core::{Mode, SequentialExecutor};

    fn sample() -> Vec<EntityDescription> {
        vec![
            EntityDescription::new(
                "http://a.org/x",
                "A",
                [
                    AttributeValue::new("http://p/name", Value::literal("Tour \"Eiffel\"\n\té")),
                    AttributeValue::new("http://p/in", Value::resource("http://a.org/paris")),
                ],
            )
            .unwrap(),
            EntityDescription::new(
                "http://b.org/y",
                "B",
                [AttributeValue::new(
                    "http://p/name",
                    Value::literal("back\\slash"),
                )],
            )
            .unwrap(),
        ]
    }

    #[test]
    fn descriptions_round_trip() {
        let mut buf = Vec::new();
        write_descriptions(&mut buf, &sample()).unwrap();
        assert_eq!(read_descriptions(&buf[..]).unwrap(), sample());
    }

    #[test]
    fn ntriples_round_trip() {
        let mut buf = Vec::new();
        write_ntriples(&mut buf, &sample()).unwrap();
        let parsed = parse_ntriples(&buf[..], ErrorPolicy::Strict).unwrap();
        let exec = SequentialExecutor::default();
        let mut back = build_descriptions(&parsed.triples, "A", &exec).unwrap();
        back[1] = EntityDescription::new(back[1].id(), "B", back[1].pairs().to_vec()).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn blocks_and_clustering_round_trip() {
        let sources = vec!["A".to_string(), "B".to_string()];
        let c = EntityCollection::new(sample(), Mode::CleanClean, sources.clone()).unwrap();
        let blocks = BlockingCollection::from_ids(
            &c,
            [
                (
                    BlockKey::clustered(0, "name"),
                    vec!["http://a.org/x", "http://b.org/y"],
                ),
                (BlockKey::infix("/x"), vec!["http://a.org/x"]),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_blocks(&mut buf, &blocks).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"namespace":"clustered-token","clusterId":0,"term":"name","#));
        assert_eq!(read_blocks(&buf[..], &c).unwrap(), blocks);

        let clustering = AttributeClustering::from_assignment(
            [
                (AttributeRef::new(0, "http://p/name"), 0),
                (AttributeRef::new(1, "http://p/name"), 0),
                (AttributeRef::new(0, "http://p/in"), 1),
            ]
            .into(),
            1,
        );
        let mut buf = Vec::new();
        write_clustering(&mut buf, &clustering, &sources).unwrap();
        let back = read_clustering(&buf[..], &sources).unwrap();
        assert_eq!(back.assignment(), clustering.assignment());
        assert_eq!(back.glue_cluster(), 1);
    }

    #[test]
    fn histogram_csv() {
        let mut buf = Vec::new();
        write_histogram(&mut buf, &[(0, 3), (2, 1)].into()).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "bucket,count\n0,3\n2,1\n");
    }
}
