use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lodblock::config::{
    Algorithm, ConfigError, GroundTruthFormat, GroundTruthSpec, InputSpec, RunConfig,
};
use lodblock::run::{self, BlockSummary, Blocked, IngestSummary, Report, RunError, Session};
use lodblock_core::eval::Ratio;
use lodblock_core::{Mode, RrBasis};

/// Blocking benchmarks for entity resolution over RDF data.
#[derive(Debug, Parser)]
#[command(name = "lodblock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input N-Triples file (optionally gzipped) as SOURCE=PATH. Repeatable;
    /// replaces the configured inputs.
    #[arg(long = "input", value_name = "SOURCE=PATH", global = true)]
    inputs: Vec<String>,
    #[arg(long, value_enum, global = true)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum, global = true)]
    algorithm: Option<AlgorithmArg>,
    /// Ground-truth file: N-Triples, or two tab-separated ids per line when
    /// the name ends in `.tsv`.
    #[arg(long, global = true)]
    gt: Option<PathBuf>,
    /// Link predicate, full IRI or prefixed (owl:, skos:, umbel:, rdfs:).
    #[arg(long, global = true)]
    gt_predicate: Option<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    rr_basis: Option<RrBasisArg>,
    /// Abort on the first malformed N-Triples line.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse inputs into entity descriptions.
    Ingest,
    /// Build blocks with the configured algorithm.
    Block,
    /// Score the blocks written by `block` against the ground truth.
    Eval,
    /// False-negative and sampled structural diagnostics.
    Analyze,
    /// Ingest, block, eval and analyze in one go.
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    CleanClean,
    Dirty,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Token,
    AttrCluster,
    Pis,
    Iterative,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RrBasisArg {
    Aggregate,
    Distinct,
}

impl Cli {
    fn resolve(&self) -> Result<RunConfig, RunError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if !self.inputs.is_empty() {
            config.inputs = self
                .inputs
                .iter()
                .map(|s| match s.split_once('=') {
                    Some((source, path)) if !source.is_empty() && !path.is_empty() => {
                        Ok(InputSpec {
                            path: path.into(),
                            source: source.into(),
                        })
                    }
                    _ => Err(ConfigError::Invalid(format!(
                        "--input expects SOURCE=PATH, got `{s}`"
                    ))),
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(m) = self.mode {
            config.mode = match m {
                ModeArg::CleanClean => Mode::CleanClean,
                ModeArg::Dirty => Mode::Dirty,
            };
        }
        if let Some(a) = self.algorithm {
            config.algorithm = match a {
                AlgorithmArg::Token => Algorithm::Token,
                AlgorithmArg::AttrCluster => Algorithm::AttrCluster,
                AlgorithmArg::Pis => Algorithm::Pis,
                AlgorithmArg::Iterative => Algorithm::Iterative,
            };
        }
        if let Some(path) = &self.gt {
            let tsv = path.extension().is_some_and(|e| e == "tsv");
            let predicate = config
                .ground_truth
                .take()
                .map(|g| g.predicate)
                .unwrap_or_else(|| "owl:sameAs".into());
            config.ground_truth = Some(GroundTruthSpec {
                path: path.clone(),
                format: if tsv {
                    GroundTruthFormat::Tsv
                } else {
                    GroundTruthFormat::Ntriples
                },
                predicate,
            });
        }
        if let Some(p) = &self.gt_predicate {
            match &mut config.ground_truth {
                Some(gt) => gt.predicate = p.clone(),
                None => {
                    return Err(
                        ConfigError::Invalid("--gt-predicate needs a ground truth".into()).into(),
                    )
                }
            }
        }
        if let Some(w) = self.workers {
            config.engine.workers = w;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(o) = &self.out {
            config.output = o.clone();
        }
        if let Some(b) = self.rr_basis {
            config.rr_basis = match b {
                RrBasisArg::Aggregate => RrBasis::Aggregate,
                RrBasisArg::Distinct => RrBasis::Distinct,
            };
        }
        config.strict |= self.strict;
        Ok(config)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{x:.4}"))
}

fn fmt_ratio(r: &Ratio) -> String {
    format!("{}/{} ({})", r.count, r.total, fmt_opt(r.fraction))
}

fn table(title: &str, rows: &[(&str, String)]) {
    println!("{title}");
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("  {k:<width$}  {v}");
    }
}

fn print_ingest(s: &IngestSummary) {
    for i in &s.inputs {
        table(
            &format!("ingest [{}] {}", i.source, i.path),
            &[
                ("RDF triples", i.triples.to_string()),
                ("entity descriptions", i.descriptions.to_string()),
                (
                    "avg. pairs per description",
                    fmt_opt(i.avg_pairs_per_description),
                ),
                ("attributes", i.attributes.to_string()),
                ("entity types", i.entity_types.to_string()),
                ("malformed lines", i.malformed_lines.to_string()),
                (
                    "blank-node triples dropped",
                    i.blank_node_triples.to_string(),
                ),
            ],
        );
    }
    if let Some(n) = s.ground_truth_pairs {
        println!("ground-truth pairs: {n}");
    }
}

fn print_blocks(s: &BlockSummary) {
    let mut rows = vec![
        ("algorithm", s.algorithm.as_str().to_string()),
        ("blocks", s.blocks.to_string()),
        ("comparable blocks", s.comparable_blocks.to_string()),
        ("comparisons", s.aggregate_comparisons.to_string()),
        ("distinct comparisons", s.distinct_comparisons.to_string()),
        ("unblocked descriptions", s.unblocked.to_string()),
    ];
    if let Some(c) = s.cluster_count {
        rows.push(("attribute clusters", c.to_string()));
        rows.push(("median cluster size", fmt_opt(s.median_cluster_size)));
    }
    if let Some(c) = s.iterative_comparisons {
        rows.push(("match decisions", c.to_string()));
        rows.push(("passes", s.iterative_passes.unwrap_or(0).to_string()));
        rows.push((
            "merged entities",
            s.merged_entities.unwrap_or(0).to_string(),
        ));
    }
    table("block", &rows);
    for w in &s.warnings {
        println!("warning: {w}");
    }
}

fn print_report(r: &Report) {
    let m = &r.metrics;
    table(
        "eval",
        &[
            ("recall", format!("{:.4}", m.recall)),
            ("precision", format!("{:.6}", m.precision)),
            ("F-measure", format!("{:.6}", m.fmeasure)),
            ("RR", fmt_opt(m.rr)),
            ("H3R", fmt_opt(m.h3r)),
            (
                "tp / fp / fn / tn",
                format!(
                    "{} / {} / {} / {}",
                    m.counts.tp, m.counts.fp, m.counts.fn_, m.counts.tn
                ),
            ),
            ("blocks", m.block_count.to_string()),
            (
                "comparisons",
                m.comparisons_with_blocking.aggregate.to_string(),
            ),
            (
                "without blocking",
                m.comparisons_without_blocking.to_string(),
            ),
            (
                "common-token median",
                fmt_opt(m.per_entity_common_token_median),
            ),
        ],
    );
    for w in &r.warnings {
        println!("warning: {w}");
    }
}

fn print_analysis(a: &run::Analysis) {
    let f = &a.false_negatives;
    table(
        "false negatives",
        &[
            ("FN pairs", f.false_negatives.to_string()),
            ("descriptions in FNs", f.descriptions_in_fns.to_string()),
            ("with neighbors", fmt_ratio(&f.with_neighbors)),
            (
                "with neighbor in ground truth",
                fmt_ratio(&f.with_neighbor_in_ground_truth),
            ),
            (
                "with neighbor identified",
                fmt_ratio(&f.with_neighbor_identified),
            ),
            (
                "FNs with matching neighbors",
                fmt_ratio(&f.fns_with_matching_neighbors),
            ),
            (
                "FNs with common identified match",
                fmt_ratio(&f.fns_with_common_identified_match),
            ),
        ],
    );
    for (name, s) in [
        ("sampled matches", &a.structure.matches),
        ("sampled non-matches", &a.structure.non_matches),
    ] {
        table(
            name,
            &[
                ("pairs", s.pairs.to_string()),
                ("both with neighbors", s.both_with_neighbors.to_string()),
                ("median neighbor pairs", fmt_opt(s.median_neighbor_pairs)),
                (
                    "with matching neighbor pair",
                    s.with_matching_neighbor_pair.to_string(),
                ),
            ],
        );
    }
    for w in &a.structure.warnings {
        println!("warning: {w}");
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let session = Session::open(cli.resolve()?)?;
    let blocked_from_disk = |s: &Session| -> Result<(), RunError> {
        let b = run::load_blocked(s)?;
        match cli.command {
            Command::Eval => print_report(&run::cmd_eval(s, &b)?),
            _ => print_analysis(&run::cmd_analyze(s, &b)?),
        }
        Ok(())
    };
    match cli.command {
        Command::Ingest => {
            print_ingest(run::cmd_ingest(&session)?);
            for w in &session.summary.warnings {
                println!("warning: {w}");
            }
        }
        Command::Block => print_blocks(&run::cmd_block(&session)?),
        Command::Eval | Command::Analyze => blocked_from_disk(&session)?,
        Command::All => {
            print_ingest(run::cmd_ingest(&session)?);
            print_blocks(&run::cmd_block(&session)?);
            let blocked: Blocked = run::load_blocked(&session)?;
            print_report(&run::cmd_eval(&session, &blocked)?);
            print_analysis(&run::cmd_analyze(&session, &blocked)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
