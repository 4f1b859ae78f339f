//! Pipeline stages behind the command line: ingest, block, eval, analyze.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read};
use std::path::{Path, PathBuf};

use lodblock_core::eval::{FnReport, StructuralReport};
use lodblock_core::{
    attribute_clustering_blocking, common_token_distribution, fn_analysis, iterative_blocking,
    pis_blocking, sample_structural_analysis, score, score_partition, token_blocking,
    AttributeClustering, BlockingCollection, BlockingError, EntityCollection, EntityDescription,
    GroundTruth, JobError, MatchOracle, MergedEntity, MetricsReport, Mode, ModelError, Namespace,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{Algorithm, ConfigError, GroundTruthFormat, OracleKind, RunConfig};
use crate::formats::{self, FormatError};
use crate::ingest::{self, ErrorPolicy, IngestError, Node, RDF_TYPE};
use crate::RayonExecutor;

pub const DESCRIPTIONS_FILE: &str = "descriptions.jsonl";
pub const INGEST_SUMMARY_FILE: &str = "ingest-summary.json";
pub const BLOCKS_FILE: &str = "blocks.jsonl";
pub const CLUSTERING_FILE: &str = "clustering.tsv";
pub const ENTITIES_FILE: &str = "entities.jsonl";
pub const BLOCK_SUMMARY_FILE: &str = "block-summary.json";
pub const REPORT_FILE: &str = "report.json";
pub const METRICS_CSV_FILE: &str = "metrics.csv";
pub const HISTOGRAM_FILE: &str = "common-tokens.csv";
pub const ANALYSIS_FILE: &str = "analysis.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Ingest { path: PathBuf, source: IngestError },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Blocking(#[from] BlockingError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Job(#[from] JobError),
    #[error("{0}")]
    Data(String),
}

impl RunError {
    /// 1 for configuration errors, 2 for data errors, 3 when the memory
    /// ceiling was hit.
    pub fn exit_code(&self) -> u8 {
        let job = match self {
            RunError::Config(_) => return 1,
            RunError::Job(j) => Some(j),
            RunError::Blocking(BlockingError::Job(j)) => Some(j),
            RunError::Ingest {
                source: IngestError::Job(j),
                ..
            } => Some(j),
            _ => None,
        };
        match job {
            Some(JobError::MemoryCeiling { .. }) => 3,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn open(path: &Path) -> Result<BufReader<File>, RunError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InputSummary {
    pub source: String,
    pub path: String,
    pub triples: u64,
    pub malformed_lines: u64,
    pub blank_node_triples: u64,
    pub descriptions: u64,
    pub avg_pairs_per_description: Option<f64>,
    pub attributes: u64,
    pub entity_types: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestSummary {
    pub inputs: Vec<InputSummary>,
    pub ground_truth_pairs: Option<u64>,
    pub warnings: Vec<String>,
}

/// Everything the later stages need, loaded once.
#[derive(Debug)]
pub struct Session {
    pub config: RunConfig,
    pub exec: RayonExecutor,
    pub collection: EntityCollection,
    pub ground_truth: Option<GroundTruth>,
    pub summary: IngestSummary,
    pub inputs_sha256: String,
}

fn hash_file(hasher: &mut Sha256, path: &Path) -> Result<(), RunError> {
    let mut file = File::open(path).map_err(io_err(path))?;
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(io_err(path))?;
        if n == 0 {
            return Ok(());
        }
        hasher.update(&buf[..n]);
    }
}

/// SHA-256 over every input's source tag and bytes, then the ground truth.
pub fn inputs_sha256(config: &RunConfig) -> Result<String, RunError> {
    let mut hasher = Sha256::new();
    for input in &config.inputs {
        hasher.update(input.source.as_bytes());
        hasher.update([0]);
        hash_file(&mut hasher, &input.path)?;
    }
    if let Some(gt) = &config.ground_truth {
        hasher.update(b"ground-truth\0");
        hash_file(&mut hasher, &gt.path)?;
    }
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn read_triples(path: &Path, strict: bool) -> Result<ingest::ParsedTriples, RunError> {
    let wrap = |source| RunError::Ingest {
        path: path.to_path_buf(),
        source,
    };
    let reader = ingest::open_input(path).map_err(|e| wrap(e.into()))?;
    let policy = if strict {
        ErrorPolicy::Strict
    } else {
        ErrorPolicy::Lenient
    };
    ingest::parse_ntriples(reader, policy).map_err(wrap)
}

impl Session {
    pub fn open(config: RunConfig) -> Result<Self, RunError> {
        config.validate()?;
        let exec = RayonExecutor::new(config.engine.engine_config(), config.engine.workers)
            .map_err(|e| RunError::Data(format!("cannot start worker pool: {e}")))?;
        let inputs_sha256 = inputs_sha256(&config)?;
        let mut summary = IngestSummary::default();
        let mut descriptions: Vec<EntityDescription> = Vec::new();
        let mut id_sets: Vec<BTreeSet<String>> = Vec::new();
        for input in &config.inputs {
            let parsed = read_triples(&input.path, config.strict)?;
            let descs = ingest::build_descriptions(&parsed.triples, &input.source, &exec).map_err(
                |source| RunError::Ingest {
                    path: input.path.clone(),
                    source,
                },
            )?;
            let pairs: usize = descs.iter().map(|d| d.pairs().len()).sum();
            let attributes: BTreeSet<&str> = descs
                .iter()
                .flat_map(|d| d.pairs().iter().map(|p| p.attribute.as_str()))
                .collect();
            let types: BTreeSet<&Node> = parsed
                .triples
                .iter()
                .filter(|t| t.predicate == RDF_TYPE && !t.has_blank())
                .map(|t| &t.object)
                .collect();
            let path = input.path.display().to_string();
            if parsed.triples.is_empty() {
                summary
                    .warnings
                    .push(format!("input `{path}` has no triples"));
            }
            if !parsed.malformed.is_empty() {
                summary.warnings.push(format!(
                    "input `{path}`: skipped {} malformed lines, first at line {}",
                    parsed.malformed.len(),
                    parsed.malformed[0]
                ));
            }
            summary.inputs.push(InputSummary {
                source: input.source.clone(),
                path,
                triples: parsed.triples.len() as u64,
                malformed_lines: parsed.malformed.len() as u64,
                blank_node_triples: parsed.triples.iter().filter(|t| t.has_blank()).count() as u64,
                descriptions: descs.len() as u64,
                avg_pairs_per_description: (!descs.is_empty())
                    .then(|| pairs as f64 / descs.len() as f64),
                attributes: attributes.len() as u64,
                entity_types: types.len() as u64,
            });
            id_sets.push(descs.iter().map(|d| d.id().to_string()).collect());
            descriptions.extend(descs);
        }
        let sources = config.inputs.iter().map(|i| i.source.clone()).collect();
        let mut collection = EntityCollection::new(descriptions, config.mode, sources)?;

        let ground_truth = match &config.ground_truth {
            None => None,
            Some(spec) => {
                let gt = match spec.format {
                    GroundTruthFormat::Tsv => ingest::load_ground_truth_tsv(open(&spec.path)?)
                        .map_err(|source| RunError::Ingest {
                            path: spec.path.clone(),
                            source,
                        })?,
                    GroundTruthFormat::Ntriples => {
                        let parsed = read_triples(&spec.path, config.strict)?;
                        let all: BTreeSet<String> = id_sets.iter().flatten().cloned().collect();
                        let restrict = if config.mode == Mode::CleanClean {
                            (&id_sets[0], &id_sets[1])
                        } else {
                            (&all, &all)
                        };
                        ingest::load_ground_truth(&parsed.triples, &spec.predicate, Some(restrict))
                    }
                };
                if gt.is_empty() {
                    summary.warnings.push(format!(
                        "ground truth `{}` has no pairs for the loaded descriptions",
                        spec.path.display()
                    ));
                }
                summary.ground_truth_pairs = Some(gt.len() as u64);
                Some(gt)
            }
        };
        if config.filter_to_ground_truth {
            if let Some(gt) = &ground_truth {
                collection = ingest::filter_to_ground_truth(&collection, gt);
            }
        }
        if collection.is_empty() {
            summary
                .warnings
                .push("no entity descriptions were loaded".into());
        }
        for w in &summary.warnings {
            log::warn!("{w}");
        }
        Ok(Self {
            config,
            exec,
            collection,
            ground_truth,
            summary,
            inputs_sha256,
        })
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output.join(name)
    }

    fn ensure_output(&self) -> Result<(), RunError> {
        fs::create_dir_all(&self.config.output).map_err(io_err(&self.config.output))
    }

    fn ground_truth(&self) -> Result<&GroundTruth, RunError> {
        self.ground_truth
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("this stage needs a ground truth".into()).into())
    }
}

pub fn cmd_ingest(session: &Session) -> Result<&IngestSummary, RunError> {
    session.ensure_output()?;
    let path = session.out(DESCRIPTIONS_FILE);
    formats::write_descriptions(create(&path)?, session.collection.descriptions())
        .map_err(io_err(&path))?;
    let path = session.out(INGEST_SUMMARY_FILE);
    formats::write_json(create(&path)?, &session.summary).map_err(io_err(&path))?;
    Ok(&session.summary)
}

/// Blocks, plus what iterative blocking resolved when it ran.
#[derive(Debug)]
pub struct Blocked<'a> {
    pub blocks: BlockingCollection<'a>,
    pub clustering: Option<AttributeClustering>,
    pub resolution: Option<Resolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Resolution {
    pub entities: Vec<ResolvedEntity>,
    pub comparisons: u64,
    pub passes: u64,
    pub merges: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedEntity {
    pub id: String,
    pub member_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BlockSummary {
    pub algorithm: Algorithm,
    pub blocks: u64,
    pub comparable_blocks: u64,
    pub unblocked: u64,
    pub aggregate_comparisons: u64,
    pub distinct_comparisons: u64,
    pub cluster_count: Option<u64>,
    pub median_cluster_size: Option<f64>,
    pub iterative_comparisons: Option<u64>,
    pub iterative_passes: Option<u64>,
    pub merged_entities: Option<u64>,
    pub warnings: Vec<String>,
}

fn build_blocks(
    session: &Session,
    algorithm: Algorithm,
) -> Result<(BlockingCollection<'_>, Option<AttributeClustering>), RunError> {
    let c = &session.collection;
    let t = &session.config.tokenizer;
    let exec = &session.exec;
    Ok(match algorithm {
        Algorithm::Token => (token_blocking(c, t, exec)?, None),
        Algorithm::Pis => (pis_blocking(c, t, exec)?, None),
        Algorithm::AttrCluster => {
            let (b, cl) = attribute_clustering_blocking(c, t, exec)?;
            (b, Some(cl))
        }
        Algorithm::Iterative => unreachable!("rejected by config validation"),
    })
}

pub fn run_blocking(session: &Session) -> Result<Blocked<'_>, RunError> {
    let config = &session.config;
    if config.algorithm != Algorithm::Iterative {
        let (blocks, clustering) = build_blocks(session, config.algorithm)?;
        return Ok(Blocked {
            blocks,
            clustering,
            resolution: None,
        });
    }
    let (blocks, clustering) = build_blocks(session, config.iterative.blocks)?;
    let oracle = match config.iterative.oracle {
        OracleKind::GroundTruth => MatchOracle::GroundTruth(session.ground_truth()?),
        OracleKind::Similarity => MatchOracle::ValueSimilarity {
            threshold: config.iterative.threshold,
        },
    };
    let outcome = iterative_blocking(&blocks, &oracle, config.iterative.order.into())?;
    let resolution = Resolution {
        entities: outcome.entities.iter().map(resolved).collect(),
        comparisons: outcome.comparisons,
        passes: outcome.passes as u64,
        merges: outcome.merges as u64,
    };
    Ok(Blocked {
        blocks,
        clustering,
        resolution: Some(resolution),
    })
}

fn resolved(e: &MergedEntity) -> ResolvedEntity {
    ResolvedEntity {
        id: e.id.clone(),
        member_ids: e.member_ids.clone(),
    }
}

fn summarize(session: &Session, blocked: &Blocked) -> BlockSummary {
    let (aggregate, distinct) = lodblock_core::comparison_counts(&blocked.blocks);
    let mut warnings = Vec::new();
    let uses_pis = session.config.algorithm == Algorithm::Pis
        || (session.config.algorithm == Algorithm::Iterative
            && session.config.iterative.blocks == Algorithm::Pis);
    if uses_pis
        && !blocked
            .blocks
            .blocks()
            .iter()
            .any(|b| b.key().namespace() == Namespace::Infix)
    {
        warnings.push("infix blocks empty".to_string());
    }
    if !blocked.blocks.unblocked().is_empty() {
        warnings.push(format!(
            "{} descriptions are in no block",
            blocked.blocks.unblocked().len()
        ));
    }
    BlockSummary {
        algorithm: session.config.algorithm,
        blocks: blocked.blocks.blocks().len() as u64,
        comparable_blocks: blocked.blocks.comparable_block_count() as u64,
        unblocked: blocked.blocks.unblocked().len() as u64,
        aggregate_comparisons: aggregate,
        distinct_comparisons: distinct,
        cluster_count: blocked
            .clustering
            .as_ref()
            .map(|c| c.cluster_count() as u64),
        median_cluster_size: blocked
            .clustering
            .as_ref()
            .and_then(|c| c.median_cluster_size()),
        iterative_comparisons: blocked.resolution.as_ref().map(|r| r.comparisons),
        iterative_passes: blocked.resolution.as_ref().map(|r| r.passes),
        merged_entities: blocked
            .resolution
            .as_ref()
            .map(|r| r.entities.iter().filter(|e| e.member_ids.len() > 1).count() as u64),
        warnings,
    }
}

pub fn cmd_block(session: &Session) -> Result<BlockSummary, RunError> {
    session.ensure_output()?;
    let blocked = run_blocking(session)?;
    let path = session.out(BLOCKS_FILE);
    formats::write_blocks(create(&path)?, &blocked.blocks).map_err(io_err(&path))?;
    if let Some(cl) = &blocked.clustering {
        let path = session.out(CLUSTERING_FILE);
        formats::write_clustering(create(&path)?, cl, session.collection.sources())
            .map_err(io_err(&path))?;
    }
    if let Some(r) = &blocked.resolution {
        let path = session.out(ENTITIES_FILE);
        let mut w = create(&path)?;
        for e in &r.entities {
            serde_json::to_writer(&mut w, e).map_err(|e| io_err(&path)(e.into()))?;
            io::Write::write_all(&mut w, b"\n").map_err(io_err(&path))?;
        }
        io::Write::flush(&mut w).map_err(io_err(&path))?;
    }
    let summary = summarize(session, &blocked);
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    let path = session.out(BLOCK_SUMMARY_FILE);
    formats::write_json(create(&path)?, &summary).map_err(io_err(&path))?;
    Ok(summary)
}

/// Reads back what `cmd_block` wrote.
pub fn load_blocked(session: &Session) -> Result<Blocked<'_>, RunError> {
    let path = session.out(BLOCKS_FILE);
    let fmt = |source| RunError::Format {
        path: path.clone(),
        source,
    };
    let blocks = formats::read_blocks(open(&path)?, &session.collection).map_err(fmt)?;
    let clustering_path = session.out(CLUSTERING_FILE);
    let uses_atc = session.config.algorithm == Algorithm::AttrCluster
        || (session.config.algorithm == Algorithm::Iterative
            && session.config.iterative.blocks == Algorithm::AttrCluster);
    let clustering = if uses_atc {
        Some(
            formats::read_clustering(open(&clustering_path)?, session.collection.sources())
                .map_err(|source| RunError::Format {
                    path: clustering_path.clone(),
                    source,
                })?,
        )
    } else {
        None
    };
    let resolution = if session.config.algorithm == Algorithm::Iterative {
        let summary_path = session.out(BLOCK_SUMMARY_FILE);
        let summary: BlockSummary = serde_json::from_reader(open(&summary_path)?)
            .map_err(|e| io_err(&summary_path)(e.into()))?;
        let path = session.out(ENTITIES_FILE);
        let mut entities = Vec::new();
        for line in io::BufRead::lines(open(&path)?) {
            let line = line.map_err(io_err(&path))?;
            if !line.trim().is_empty() {
                entities.push(serde_json::from_str(&line).map_err(|e| io_err(&path)(e.into()))?);
            }
        }
        // Every merge joins two entities into one.
        let merges = (session.collection.len() - entities.len()) as u64;
        Some(Resolution {
            entities,
            comparisons: summary.iterative_comparisons.unwrap_or(0),
            passes: summary.iterative_passes.unwrap_or(0),
            merges,
        })
    } else {
        None
    };
    Ok(Blocked {
        blocks,
        clustering,
        resolution,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub config: serde_json::Value,
    pub inputs_sha256: String,
    pub algorithm: Algorithm,
    pub metrics: MetricsReport,
    pub warnings: Vec<String>,
}

fn as_merged(session: &Session, r: &Resolution) -> Result<Vec<MergedEntity>, RunError> {
    let c = &session.collection;
    r.entities
        .iter()
        .map(|e| {
            let members = e
                .member_ids
                .iter()
                .map(|id| {
                    c.index_of(id)
                        .ok_or_else(|| RunError::Data(format!("unknown entity member `{id}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(MergedEntity {
                id: e.id.clone(),
                member_ids: e.member_ids.clone(),
                members,
                pairs: Vec::new(),
            })
        })
        .collect()
}

pub fn evaluate(session: &Session, blocked: &Blocked) -> Result<Report, RunError> {
    let gt = session.ground_truth()?;
    let mut warnings = Vec::new();
    if gt.is_empty() {
        warnings.push("ground truth is empty, every measure is zero".to_string());
    }
    let mut metrics = match &blocked.resolution {
        Some(r) => score_partition(
            &session.collection,
            &as_merged(session, r)?,
            r.comparisons,
            gt,
        ),
        None => score(&blocked.blocks, gt, session.config.rr_basis),
    };
    if let Some(rr) = metrics.rr.filter(|&rr| rr <= 0.0) {
        warnings.push(format!(
            "reduction ratio {rr:.4} is not positive, H3R is N/A"
        ));
    }
    if session.collection.mode() == Mode::CleanClean && !session.collection.is_empty() {
        let dist = common_token_distribution(
            &session.collection,
            &session.config.tokenizer,
            blocked.clustering.as_ref(),
        )?;
        metrics.per_entity_common_token_median = dist.median;
        let path = session.out(HISTOGRAM_FILE);
        formats::write_histogram(create(&path)?, &dist.histogram).map_err(io_err(&path))?;
    }
    if let Some(cl) = &blocked.clustering {
        metrics.cluster_count = Some(cl.cluster_count() as u64);
        metrics.median_cluster_size = cl.median_cluster_size();
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Report {
        config: session.config.resolved(),
        inputs_sha256: session.inputs_sha256.clone(),
        algorithm: session.config.algorithm,
        metrics,
        warnings,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

pub fn cmd_eval(session: &Session, blocked: &Blocked) -> Result<Report, RunError> {
    session.ensure_output()?;
    let report = evaluate(session, blocked)?;
    let path = session.out(REPORT_FILE);
    formats::write_json(create(&path)?, &report).map_err(io_err(&path))?;
    let m = &report.metrics;
    let path = session.out(METRICS_CSV_FILE);
    let mut w = create(&path)?;
    let row = format!(
        "algorithm,tp,fp,fn,tn,recall,precision,fmeasure,rr,h3r,blocks,comparisons\n{},{},{},{},{},{},{},{},{},{},{},{}\n",
        report.algorithm.as_str(),
        m.counts.tp,
        m.counts.fp,
        m.counts.fn_,
        m.counts.tn,
        m.recall,
        m.precision,
        m.fmeasure,
        opt(m.rr),
        opt(m.h3r),
        m.block_count,
        m.comparisons_with_blocking.aggregate,
    );
    io::Write::write_all(&mut w, row.as_bytes()).map_err(io_err(&path))?;
    io::Write::flush(&mut w).map_err(io_err(&path))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Analysis {
    pub false_negatives: FnReport,
    pub structure: StructuralReport,
}

pub fn cmd_analyze(session: &Session, blocked: &Blocked) -> Result<Analysis, RunError> {
    session.ensure_output()?;
    let gt = session.ground_truth()?;
    let analysis = Analysis {
        false_negatives: fn_analysis(&blocked.blocks, gt, None),
        structure: sample_structural_analysis(
            gt,
            &session.collection,
            session.config.sample_size,
            session.config.seed,
        ),
    };
    for w in &analysis.structure.warnings {
        log::warn!("{w}");
    }
    let path = session.out(ANALYSIS_FILE);
    formats::write_json(create(&path)?, &analysis).map_err(io_err(&path))?;
    Ok(analysis)
}
