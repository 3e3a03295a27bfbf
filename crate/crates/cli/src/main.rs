//! `provsum` command line: summarize PROV-JSON documents, check conformance
//! against summaries, and compute graph metrics, outliers, and per-node
//! provenance types.
//!
//! Exit codes: 0 success (or conformant), 1 parse/input error, 2 resource
//! limit exceeded, 3 non-conformant. JSON and DOT go to stdout (or `--out`);
//! diagnostics go to stderr.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use provsum::conformance::{ConformanceMode, check_conformance};
use provsum::dot::export_dot;
use provsum::metrics::{
    generate_chain, generate_pattern_graph, generate_pattern_graph_with_anomaly, generate_random,
    metrics_report, outlier_edges,
};
use provsum::model::{NodeId, ProvDocument, infer_core_types};
use provsum::ptype::{Direction, TypeLimits, compute_signatures};
use provsum::summary::{Summary, summarize};

#[derive(Parser)]
#[command(
    name = "provsum",
    version,
    about = "Summarize, check, and measure W3C PROV provenance graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Forward,
    Inverse,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Inverse => Direction::Inverse,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GeneratorKind {
    Chain,
    Pattern,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a PROV-JSON document by provenance types at level k
    Summarize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Json)]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check conformance of an instance graph against a summary
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        summary: PathBuf,
        /// Require instance roots to pair with summary roots
        #[arg(long)]
        rooted: bool,
        /// Restrict candidate pairs by level-0 base types
        #[arg(long = "strict-types")]
        strict_types: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report node/edge counts, MFD, type counts per level, plateau, and
    /// compression ratios
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "k-max", default_value_t = 6)]
        k_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flag summary edges that are thin relative to their neighborhood
    Outliers {
        /// Instance graph to summarize at --k before flagging
        #[arg(long, conflicts_with = "summary")]
        input: Option<PathBuf>,
        /// Precomputed summary JSON
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print per-node provenance-type signatures
    Types {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Restrict the listing to one node
        #[arg(long)]
        node: Option<String>,
        #[arg(long, value_enum, default_value_t = DirectionArg::Forward)]
        direction: DirectionArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic PROV-JSON document
    Generate {
        #[arg(long, value_enum)]
        kind: GeneratorKind,
        /// Node count (chain, random)
        #[arg(long)]
        n: Option<usize>,
        /// Motif copies (pattern)
        #[arg(long)]
        repeats: Option<usize>,
        /// Edges per node (random)
        #[arg(long, default_value_t = 1.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inject one cross-copy edge into the pattern graph
        #[arg(long)]
        anomaly: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn resource(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("provsum: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}

fn limits() -> TypeLimits {
    // The interned-term cap guards the exponential worst case on cyclic
    // graphs; override for testing or constrained environments.
    match std::env::var("PROVSUM_MAX_TERMS") {
        Ok(v) => match v.parse() {
            Ok(max_terms) => TypeLimits { max_terms },
            Err(_) => TypeLimits::default(),
        },
        Err(_) => TypeLimits::default(),
    }
}

fn load_document(path: &Path) -> Result<ProvDocument, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let doc = ProvDocument::from_json_bytes(&bytes)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let (doc, warnings) = infer_core_types(&doc);
    for w in warnings {
        eprintln!("provsum: warning: {w}");
    }
    Ok(doc)
}

fn load_summary(path: &Path) -> Result<Summary, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    Summary::from_json_bytes(&bytes)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut payload = text.to_string();
    if !payload.ends_with('\n') {
        payload.push('\n');
    }
    match out {
        Some(path) => fs::write(path, payload)
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Summarize {
            input,
            k,
            direction,
            format,
            out,
        } => {
            let doc = load_document(&input)?;
            let summary = summarize(&doc, k, direction.into(), &limits())
                .map_err(|e| CliError::resource(e.to_string()))?;
            let text = match format {
                FormatArg::Json => summary.to_json_string(),
                FormatArg::Dot => export_dot(&summary),
            };
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Check {
            graph,
            summary,
            rooted,
            strict_types,
            out,
        } => {
            let doc = load_document(&graph)?;
            let summary = load_summary(&summary)?;
            let mode = if rooted {
                ConformanceMode::Rooted
            } else {
                ConformanceMode::Structural
            };
            let verdict = check_conformance(&doc, &summary, mode, strict_types)
                .map_err(|e| CliError::input(e.to_string()))?;
            emit(out.as_deref(), &verdict.to_json_string())?;
            if verdict.conforms {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("provsum: graph does not conform to the summary");
                Ok(ExitCode::from(3))
            }
        }
        Command::Metrics { input, k_max, out } => {
            let doc = load_document(&input)?;
            let report = metrics_report(&doc, k_max, &limits())
                .map_err(|e| CliError::resource(e.to_string()))?;
            emit(out.as_deref(), &report.to_json_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Outliers {
            input,
            summary,
            k,
            threshold,
            out,
        } => {
            let summary = match (input, summary) {
                (_, Some(path)) => load_summary(&path)?,
                (Some(path), None) => {
                    let doc = load_document(&path)?;
                    summarize(&doc, k, Direction::Forward, &limits())
                        .map_err(|e| CliError::resource(e.to_string()))?
                }
                (None, None) => {
                    return Err(CliError::input("outliers needs --input or --summary"));
                }
            };
            let report = outlier_edges(&summary, threshold)
                .map_err(|e| CliError::input(e.to_string()))?;
            emit(out.as_deref(), &report.to_json_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Types {
            input,
            k,
            node,
            direction,
            out,
        } => {
            let doc = load_document(&input)?;
            let table = compute_signatures(&doc, k, direction.into(), &limits())
                .map_err(|e| CliError::resource(e.to_string()))?;
            let selected: Vec<&NodeId> = match &node {
                Some(id) => {
                    let id = NodeId::from(id.as_str());
                    if !doc.contains_node(&id) {
                        return Err(CliError::input(format!("unknown node `{id}`")));
                    }
                    vec![doc.node(&id).map(|n| &n.id).unwrap()]
                }
                None => doc.node_ids().collect(),
            };
            let signatures: BTreeMap<&str, BTreeMap<usize, Vec<String>>> = selected
                .into_iter()
                .map(|id| {
                    let sig = table.signature(id).expect("node listed");
                    (id.as_str(), sig.export(table.interner()))
                })
                .collect();
            let listing = TypeListing {
                k,
                direction: direction.into(),
                signatures,
            };
            emit(out.as_deref(), &listing.to_json_string())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Generate {
            kind,
            n,
            repeats,
            density,
            seed,
            anomaly,
            out,
        } => {
            let doc = match kind {
                GeneratorKind::Chain => {
                    let n = n.ok_or_else(|| CliError::input("chain needs --n"))?;
                    generate_chain(n).map_err(|e| CliError::input(e.to_string()))?
                }
                GeneratorKind::Pattern => {
                    let repeats =
                        repeats.ok_or_else(|| CliError::input("pattern needs --repeats"))?;
                    if anomaly {
                        let (doc, edge) = generate_pattern_graph_with_anomaly(repeats, seed)
                            .map_err(|e| CliError::input(e.to_string()))?;
                        eprintln!(
                            "provsum: injected anomalous edge {} -{}-> {}",
                            edge.src, edge.label, edge.dst
                        );
                        doc
                    } else {
                        generate_pattern_graph(repeats, seed)
                            .map_err(|e| CliError::input(e.to_string()))?
                    }
                }
                GeneratorKind::Random => {
                    let n = n.ok_or_else(|| CliError::input("random needs --n"))?;
                    generate_random(n, density, seed)
                        .map_err(|e| CliError::input(e.to_string()))?
                }
            };
            let text = doc
                .to_json_string()
                .map_err(|e| CliError::input(e.to_string()))?;
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

struct TypeListing<'a> {
    k: usize,
    direction: Direction,
    signatures: BTreeMap<&'a str, BTreeMap<usize, Vec<String>>>,
}

impl TypeListing<'_> {
    fn to_json_string(&self) -> String {
        #[derive(serde::Serialize)]
        struct Wire<'a> {
            k: usize,
            direction: Direction,
            signatures: &'a BTreeMap<&'a str, BTreeMap<usize, Vec<String>>>,
        }
        serde_json::to_string_pretty(&Wire {
            k: self.k,
            direction: self.direction,
            signatures: &self.signatures,
        })
        .expect("listing serializes")
    }
}
