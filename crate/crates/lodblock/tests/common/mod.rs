#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use lodblock::config::{Algorithm, GroundTruthSpec, InputSpec, RunConfig};
use lodblock::run::{self, Session};
use lodblock_core::Mode;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NS: &str = "http://example.org/";

pub const RUNNING_EXAMPLE: [(&str, &[(&str, &str)]); 7] = [
    (
        "e1",
        &[
            ("about", "Eiffel Tower"),
            ("architect", "Sauvestre"),
            ("year", "1889"),
            ("located", "Paris"),
        ],
    ),
    (
        "e2",
        &[
            ("about", "Statue of Liberty"),
            ("architect", "Bartholdi Eiffel"),
            ("year", "1886"),
            ("located", "NY"),
        ],
    ),
    (
        "e3",
        &[
            ("about", "Auguste Bartholdi"),
            ("born", "1834"),
            ("work", "Paris"),
        ],
    ),
    ("e4", &[("about", "Joan Tower"), ("born", "1938")]),
    (
        "e5",
        &[
            ("work", "Lady Liberty"),
            ("artist", "Bartholdi"),
            ("location", "NY"),
        ],
    ),
    (
        "e6",
        &[
            ("work", "Eiffel Tower"),
            ("year-constructed", "1889"),
            ("location", "Paris"),
        ],
    ),
    (
        "e7",
        &[
            ("work", "Bartholdi Fountain"),
            ("year-constructed", "1876"),
            ("location", "Washington"),
        ],
    ),
];

pub fn triple_lines(ids: &[&str]) -> String {
    let mut out = String::new();
    for (id, pairs) in RUNNING_EXAMPLE.iter().filter(|(id, _)| ids.contains(id)) {
        for (a, v) in pairs.iter() {
            out.push_str(&format!("<{NS}{id}> <{NS}{a}> \"{v}\" .\n"));
        }
    }
    out
}

pub fn sameas(links: &[(&str, &str)]) -> String {
    links
        .iter()
        .map(|(a, b)| format!("<{NS}{a}> <http://www.w3.org/2002/07/owl#sameAs> <{NS}{b}> .\n"))
        .collect()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Dirty running-example run with ground truth {(e1,e6),(e2,e5)}.
pub fn running_example_config(dir: &Path) -> RunConfig {
    let data = write(
        dir,
        "example.nt",
        &triple_lines(&["e1", "e2", "e3", "e4", "e5", "e6", "e7"]),
    );
    let gt = write(dir, "gt.nt", &sameas(&[("e1", "e6"), ("e2", "e5")]));
    RunConfig {
        inputs: vec![InputSpec {
            path: data,
            source: "D".into(),
        }],
        mode: Mode::Dirty,
        ground_truth: Some(GroundTruthSpec {
            path: gt,
            format: Default::default(),
            predicate: "owl:sameAs".into(),
        }),
        output: dir.join("out"),
        ..RunConfig::default()
    }
}

const WORDS: [&str; 24] = [
    "paris", "tower", "eiffel", "liberty", "statue", "bridge", "london", "river", "museum",
    "louvre", "art", "city", "1889", "1886", "north", "south", "park", "hall", "opera", "house",
    "green", "blue", "old", "new",
];

/// A random clean-clean pair of N-Triples files plus a sameAs file.
pub fn random_fixture(dir: &Path, seed: u64) -> RunConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..16);
    let mut left = String::new();
    let mut right = String::new();
    let mut links = String::new();
    for i in 0..n {
        for (text, host, attrs) in [
            (&mut left, "a.org/resource", ["name", "city", "year"]),
            (&mut right, "b.net/id", ["label", "place", "built"]),
        ] {
            for a in attrs {
                if rng.random_bool(0.8) {
                    let k = rng.random_range(1..4);
                    let v: Vec<&str> = (0..k).map(|_| *WORDS.choose(&mut rng).unwrap()).collect();
                    text.push_str(&format!(
                        "<http://{host}/E{i}> <http://{host}/p/{a}> \"{}\" .\n",
                        v.join(" ")
                    ));
                }
            }
            if rng.random_bool(0.3) {
                let j = rng.random_range(0..n);
                text.push_str(&format!(
                    "<http://{host}/E{i}> <http://{host}/p/near> <http://{host}/E{j}> .\n"
                ));
            }
        }
        if rng.random_bool(0.6) {
            links.push_str(&format!(
                "<http://a.org/resource/E{i}> <http://www.w3.org/2002/07/owl#sameAs> <http://b.net/id/E{i}> .\n"
            ));
        }
    }
    let sub = dir.join(format!("fixture-{seed}"));
    fs::create_dir_all(&sub).unwrap();
    let algorithm = [
        Algorithm::Token,
        Algorithm::AttrCluster,
        Algorithm::Pis,
        Algorithm::Iterative,
    ][seed as usize % 4];
    let mut config = RunConfig {
        inputs: vec![
            InputSpec {
                path: write(&sub, "a.nt", &left),
                source: "A".into(),
            },
            InputSpec {
                path: write(&sub, "b.nt", &right),
                source: "B".into(),
            },
        ],
        mode: Mode::CleanClean,
        algorithm,
        ground_truth: Some(GroundTruthSpec {
            path: write(&sub, "links.nt", &links),
            format: Default::default(),
            predicate: "owl:sameAs".into(),
        }),
        output: sub.join("out"),
        seed,
        sample_size: 5,
        ..RunConfig::default()
    };
    config.engine.partitions = 3;
    config.engine.reducers = 4;
    config
}

/// Runs every stage and returns the output directory's files.
pub fn run_all(config: RunConfig) -> BTreeMap<String, Vec<u8>> {
    let out = config.output.clone();
    let _ = fs::remove_dir_all(&out);
    let session = Session::open(config).unwrap();
    run::cmd_ingest(&session).unwrap();
    run::cmd_block(&session).unwrap();
    let blocked = run::load_blocked(&session).unwrap();
    run::cmd_eval(&session, &blocked).unwrap();
    run::cmd_analyze(&session, &blocked).unwrap();
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(&out).unwrap() {
        let entry = entry.unwrap();
        files.insert(
            entry.file_name().to_string_lossy().into_owned(),
            fs::read(entry.path()).unwrap(),
        );
    }
    files
}

const E8: (&str, &[(&str, &str)]) = (
    "e8",
    &[
        ("work", "Statue of Lib."),
        ("architect", "Eiffel"),
        ("year-constructed", "1886"),
    ],
);

/// The running example with plain ids `e1`..`e7` (and `e8` when
/// `extended`). Split mode puts e1..e4 in `D1` and the rest in `D2`.
pub fn running_example(split: bool, extended: bool) -> lodblock_core::EntityCollection {
    use lodblock_core::{AttributeValue, EntityCollection, EntityDescription, Value};
    let mut rows: Vec<(&str, &[(&str, &str)])> = RUNNING_EXAMPLE.to_vec();
    if extended {
        rows.push(E8);
    }
    let descs = rows.into_iter().map(|(id, pairs)| {
        let source = match (split, id <= "e4") {
            (false, _) => "D",
            (true, true) => "D1",
            (true, false) => "D2",
        };
        let pairs = pairs
            .iter()
            .map(|(a, v)| AttributeValue::new(*a, Value::literal(*v)));
        EntityDescription::new(id, source, pairs).unwrap()
    });
    if split {
        EntityCollection::new(descs, Mode::CleanClean, vec!["D1".into(), "D2".into()]).unwrap()
    } else {
        EntityCollection::new(descs, Mode::Dirty, vec![]).unwrap()
    }
}
