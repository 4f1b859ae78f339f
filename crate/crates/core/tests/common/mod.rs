#![allow(dead_code)]

use std::collections::BTreeSet;

use lodblock_core::{
    AttributeValue, EngineConfig, EntityCollection, EntityDescription, Mode, SequentialExecutor,
    Value,
};

pub fn lit(attribute: &str, value: &str) -> AttributeValue {
    AttributeValue::new(attribute, Value::literal(value))
}

pub fn desc(id: &str, source: &str, pairs: &[(&str, &str)]) -> EntityDescription {
    EntityDescription::new(id, source, pairs.iter().map(|(a, v)| lit(a, v))).unwrap()
}

fn running_example(with_e8: bool) -> Vec<(&'static str, Vec<(&'static str, &'static str)>)> {
    let mut v = vec![
        (
            "e1",
            vec![
                ("about", "Eiffel Tower"),
                ("architect", "Sauvestre"),
                ("year", "1889"),
                ("located", "Paris"),
            ],
        ),
        (
            "e2",
            vec![
                ("about", "Statue of Liberty"),
                ("architect", "Bartholdi Eiffel"),
                ("year", "1886"),
                ("located", "NY"),
            ],
        ),
        (
            "e3",
            vec![
                ("about", "Auguste Bartholdi"),
                ("born", "1834"),
                ("work", "Paris"),
            ],
        ),
        ("e4", vec![("about", "Joan Tower"), ("born", "1938")]),
        (
            "e5",
            vec![
                ("work", "Lady Liberty"),
                ("artist", "Bartholdi"),
                ("location", "NY"),
            ],
        ),
        (
            "e6",
            vec![
                ("work", "Eiffel Tower"),
                ("year-constructed", "1889"),
                ("location", "Paris"),
            ],
        ),
        (
            "e7",
            vec![
                ("work", "Bartholdi Fountain"),
                ("year-constructed", "1876"),
                ("location", "Washington"),
            ],
        ),
    ];
    if with_e8 {
        v.push((
            "e8",
            vec![
                ("work", "Statue of Lib."),
                ("architect", "Eiffel"),
                ("year-constructed", "1886"),
            ],
        ));
    }
    v
}

/// The seven running-example descriptions as one dirty collection.
pub fn example_dirty() -> EntityCollection {
    let descs = running_example(false)
        .into_iter()
        .map(|(id, pairs)| desc(id, "D", &pairs));
    EntityCollection::new(descs, Mode::Dirty, vec![]).unwrap()
}

/// The same descriptions split into D1 = {e1..e4} and D2 = {e5..e7}.
pub fn example_split() -> EntityCollection {
    let descs = running_example(false).into_iter().map(|(id, pairs)| {
        let source = if id <= "e4" { "D1" } else { "D2" };
        desc(id, source, &pairs)
    });
    EntityCollection::new(descs, Mode::CleanClean, vec!["D1".into(), "D2".into()]).unwrap()
}

/// The running example extended with e8, dirty.
pub fn extended_dirty() -> EntityCollection {
    let descs = running_example(true)
        .into_iter()
        .map(|(id, pairs)| desc(id, "D", &pairs));
    EntityCollection::new(descs, Mode::Dirty, vec![]).unwrap()
}

pub fn exec() -> SequentialExecutor {
    SequentialExecutor::new(EngineConfig {
        partitions: 3,
        reducers: 5,
        memory_ceiling: None,
    })
}

/// Brute-force token oracle: lower-cased alphanumeric runs of every value.
pub fn naive_tokens(d: &EntityDescription, resources: bool) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for p in d.pairs() {
        let mut text = p.value.text.as_str();
        if p.value.is_resource() {
            if !resources {
                continue;
            }
            for scheme in ["http://", "https://"] {
                if let Some(rest) = text.strip_prefix(scheme) {
                    text = rest;
                }
            }
        }
        let mut cur = String::new();
        for c in text.chars() {
            if c.is_alphanumeric() {
                cur.push(c);
            } else if !cur.is_empty() {
                out.insert(cur.to_lowercase());
                cur.clear();
            }
        }
        if !cur.is_empty() {
            out.insert(cur.to_lowercase());
        }
    }
    out
}

/// Id pairs, smaller first.
pub fn id_pair(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.into(), b.into())
    } else {
        (b.into(), a.into())
    }
}

/// Every comparable pair sharing a token, by brute force over all pairs.
pub fn naive_token_candidates(c: &EntityCollection, resources: bool) -> BTreeSet<(String, String)> {
    let ds = c.descriptions();
    let toks: Vec<_> = ds.iter().map(|d| naive_tokens(d, resources)).collect();
    let mut out = BTreeSet::new();
    for i in 0..ds.len() {
        for j in i + 1..ds.len() {
            let cross = c.mode() == Mode::Dirty || ds[i].source() != ds[j].source();
            if cross && !toks[i].is_disjoint(&toks[j]) {
                out.insert(id_pair(ds[i].id(), ds[j].id()));
            }
        }
    }
    out
}
