//! `locan`: exact p-adic diagnostics with JSON in/out.
//!
//! Exit codes: 0 = pass/valid verdict, 1 = fail/invalid verdict,
//! 2 = usage, parse, or precondition errors.

use clap::{Parser, Subcommand, ValueEnum};
use padic_locan::fixtures::{
    make_group_trace, make_toy_admissible, random_nilres_operator, translation_operator,
    GroupTraceKind,
};
use padic_locan::iwasawa::polydisc_eval;
use padic_locan::json::{
    analyze_report, build_action, matrix_to_repr, ActionSpec, AnalyzeReport, ExtendReport,
    FunctionSpec, GroupSpec, ModelSpec, OperatorSpec, PseudorepReport, ReconstructionReport,
    SamplesSpec, ScalarSpec, TraceSpec,
};
use padic_locan::locan::analyze_operator;
use padic_locan::mahler::{amice_level, invariant_factoring_harness, mahler_transform, MahlerError};
use padic_locan::padic::DEFAULT_PRECISION;
use std::path::{Path, PathBuf};

mod render;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "locan", version, about = "Diagnostics for locally analytic operators on p-adic Banach spaces")]
struct Cli {
    /// Prime for subcommands that build objects from bare parameters.
    #[arg(long, global = true)]
    prime: Option<u64>,
    /// Relative precision in p-adic digits.
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// Seed for deterministic fixture generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze one operator: nilpotence, contraction degree, witness, closure rank.
    AnalyzeOperator {
        /// Operator JSON file.
        #[arg(long, conflicts_with = "batch", required_unless_present = "batch")]
        input: Option<PathBuf>,
        /// Directory of operator JSON files, processed in filename order.
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Evaluate a closed-polydisc function through a commuting action.
    IwasawaExtend {
        /// Action JSON: a list of operator specs.
        #[arg(long)]
        action: PathBuf,
        /// Polydisc function JSON.
        #[arg(long)]
        function: PathBuf,
        /// Substitution exponent, or AUTO for the minimal uniform exponent.
        #[arg(long, default_value = "AUTO")]
        n: String,
    },
    /// Mahler transform of sampled values, with the analyticity report.
    Mahler {
        /// Samples JSON.
        #[arg(long)]
        samples: PathBuf,
        /// Assert analyticity at this level; exit 1 if not certified.
        #[arg(long)]
        level: Option<u32>,
    },
    /// Invariant-factoring harness for a toy admissible model.
    Harness {
        /// Model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Modulus exponent n.
        #[arg(long)]
        n: u32,
    },
    /// Validate a candidate trace of a 2-dimensional determinant.
    Pseudorep {
        /// Group JSON (multiplication table).
        #[arg(long)]
        group: PathBuf,
        /// Trace JSON (values plus the distinguished involution).
        #[arg(long)]
        trace: PathBuf,
        /// Also reconstruct the representation when a pivot exists.
        #[arg(long)]
        reconstruct: bool,
    },
    /// Emit a deterministic fixture as module-standard JSON.
    Fixtures {
        /// translation | random-nilres | group-trace | toy-admissible
        #[arg(long)]
        kind: String,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dimension parameter (degree bound for translation, size for nilres).
        #[arg(short = 'd', long)]
        d: Option<usize>,
        /// s3-standard | char-sum | dihedral (for group-trace).
        #[arg(long)]
        trace_kind: Option<String>,
        /// Depth j of the finite model (for toy-admissible).
        #[arg(long)]
        j: Option<u32>,
        /// Level of the invariant subgroup (for toy-admissible).
        #[arg(long)]
        level: Option<u32>,
        /// Include the periodic diagonal character generator.
        #[arg(long)]
        with_character: bool,
    },
    /// Validate a JSON file against a schema without running diagnostics.
    SchemaValidate {
        /// Input JSON file.
        #[arg(long)]
        input: PathBuf,
        /// operator | action | function | samples | model | group | trace
        #[arg(long)]
        schema: String,
    },
}

/// CLI failure carrying the exit code: 2 for usage/parse/precondition
/// problems, 1 for negative verdicts reported through errors.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn verdict(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("cannot parse {}: {e}", path.display())))
}

/// Canonical JSON: serialize through `serde_json::Value` so keys are sorted;
/// parsing and re-serializing a report is then byte-identical.
fn canonical_json<T: serde::Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable report");
    serde_json::to_string_pretty(&v).expect("valid json")
}

fn emit<T: serde::Serialize>(format: ReportFormat, value: &T, text: String) {
    match format {
        ReportFormat::Json => println!("{}", canonical_json(value)),
        ReportFormat::Text => println!("{text}"),
    }
}

fn run(cli: Cli) -> Result<i32, Failure> {
    let format = cli.report;
    match cli.command {
        Command::AnalyzeOperator { input, batch } => {
            if let Some(dir) = batch {
                return run_batch(&dir, format);
            }
            let path = input.expect("clap enforces input xor batch");
            let spec: OperatorSpec = read_json(&path)?;
            let rep = analyze_one(&spec)?;
            emit(format, &rep, render::analyze_text(&rep));
            Ok(0)
        }
        Command::IwasawaExtend { action, function, n } => {
            let specs: ActionSpec = read_json(&action)?;
            let func_spec: FunctionSpec = read_json(&function)?;
            let action = build_action(&specs).map_err(|e| Failure::usage(e.to_string()))?;
            let func = func_spec.build().map_err(|e| Failure::usage(e.to_string()))?;
            let n_min = action
                .minimal_uniform_exponent()
                .map_err(|e| Failure::usage(e.to_string()))?;
            let Some(n_min) = n_min else {
                return Err(Failure::verdict(
                    "no uniform exponent: some difference operator never contracts on the truncation",
                ));
            };
            let n_used = if n.eq_ignore_ascii_case("auto") {
                n_min
            } else {
                n.parse::<u32>().map_err(|_| Failure::usage(format!("bad exponent: {n}")))?
            };
            let result = polydisc_eval(&func, &action, n_used)
                .map_err(|e| Failure::usage(e.to_string()))?;
            let rep = ExtendReport {
                prime: action.prime(),
                n_min,
                n_used,
                result_matrix: matrix_to_repr(&result),
                norm: result.norm_valuation(),
            };
            emit(format, &rep, render::extend_text(&rep));
            Ok(0)
        }
        Command::Mahler { samples, level } => {
            let spec: SamplesSpec = read_json(&samples)?;
            let (values, tail) = spec.build().map_err(|e| Failure::usage(e.to_string()))?;
            let mut series =
                mahler_transform(&values).map_err(|e| Failure::usage(e.to_string()))?;
            series.tail = tail;
            let analyticity = amice_level(&series);
            let rep = padic_locan::json::mahler_report(&series, analyticity);
            emit(format, &rep, render::mahler_text(&rep));
            match level {
                None => Ok(0),
                Some(h) => match rep.analyticity.level {
                    Some(detected) if detected <= h => Ok(0),
                    _ => Ok(1),
                },
            }
        }
        Command::Harness { model, n } => {
            let spec: ModelSpec = read_json(&model)?;
            let model = spec.build().map_err(|e| Failure::usage(e.to_string()))?;
            let rep = match invariant_factoring_harness(&model, n) {
                Ok(rep) => rep,
                Err(e @ MahlerError::NotAdmissible { .. }) => {
                    return Err(Failure::verdict(e.to_string()));
                }
                Err(e) => return Err(Failure::usage(e.to_string())),
            };
            let ok = rep.admissible && rep.preserves_invariants && rep.analytic_sublattice_contained;
            emit(format, &rep, render::harness_text(&rep));
            Ok(if ok { 0 } else { 1 })
        }
        Command::Pseudorep { group, trace, reconstruct } => {
            let group_spec: GroupSpec = read_json(&group)?;
            let trace_spec: TraceSpec = read_json(&trace)?;
            let table = group_spec.build().map_err(|e| Failure::usage(e.to_string()))?;
            let trace = trace_spec.build(table).map_err(|e| Failure::usage(e.to_string()))?;
            let validation = trace.validate();
            let valid = validation.is_valid();
            let (reducibility, reconstruction) = if valid {
                match trace.odd_split() {
                    Ok(split) => {
                        let red = Some(split.reducibility_report());
                        let rec = if reconstruct {
                            Some(match split.reconstruct_auto() {
                                Ok(r) => ReconstructionReport {
                                    pivot: Some(r.pivot),
                                    multiplicative: r.multiplicative,
                                    trace_matches: r.trace_matches,
                                    det_matches: r.det_matches,
                                    matrices: Some(
                                        r.matrices
                                            .iter()
                                            .map(|m| {
                                                m.iter()
                                                    .map(|row| {
                                                        row.iter().map(|s| s.to_repr()).collect()
                                                    })
                                                    .collect()
                                            })
                                            .collect(),
                                    ),
                                    failure: None,
                                },
                                Err(e) => ReconstructionReport {
                                    pivot: None,
                                    multiplicative: false,
                                    trace_matches: false,
                                    det_matches: false,
                                    matrices: None,
                                    failure: Some(e.to_string()),
                                },
                            })
                        } else {
                            None
                        };
                        (red, rec)
                    }
                    Err(e) => (
                        None,
                        Some(ReconstructionReport {
                            pivot: None,
                            multiplicative: false,
                            trace_matches: false,
                            det_matches: false,
                            matrices: None,
                            failure: Some(e.to_string()),
                        }),
                    ),
                }
            } else {
                (None, None)
            };
            let rep = PseudorepReport {
                prime: trace_spec.prime,
                validation,
                reducibility,
                reconstruction,
            };
            emit(format, &rep, render::pseudorep_text(&rep));
            Ok(if valid { 0 } else { 1 })
        }
        Command::Fixtures { kind, out, d, trace_kind, j, level, with_character } => {
            let prime = cli.prime.unwrap_or(2);
            let prec = cli.prec.unwrap_or(DEFAULT_PRECISION);
            let seed = cli.seed.unwrap_or(0);
            let json = match kind.as_str() {
                "translation" => {
                    let d = d.unwrap_or(2);
                    let op = translation_operator(prime, d, prec);
                    canonical_json(&OperatorSpec::from_operator(&op))
                }
                "random-nilres" => {
                    let d = d.unwrap_or(3);
                    let op = random_nilres_operator(prime, d, seed, prec);
                    canonical_json(&OperatorSpec::from_operator(&op))
                }
                "group-trace" => {
                    let tk = match trace_kind.as_deref() {
                        Some("s3-standard") | None => GroupTraceKind::S3Standard,
                        Some("char-sum") => GroupTraceKind::CharSum,
                        Some("dihedral") => GroupTraceKind::Dihedral,
                        Some(other) => {
                            return Err(Failure::usage(format!("unknown trace kind: {other}")))
                        }
                    };
                    let prime = cli.prime.unwrap_or(7);
                    let fx = make_group_trace(tk, prime, prec)
                        .map_err(|e| Failure::usage(e.to_string()))?;
                    let group = GroupSpec {
                        mul: fx.table.table().clone(),
                        identity: Some(fx.table.identity()),
                        inverse: Some((0..fx.table.order()).map(|i| fx.table.inv(i)).collect()),
                    };
                    let trace = TraceSpec {
                        prime,
                        prec,
                        values: fx.trace.values.iter().map(|v| ScalarSpec::Full(v.to_repr())).collect(),
                        sigma_star: fx.trace.sigma_star,
                    };
                    let bundle = serde_json::json!({ "group": group, "trace": trace });
                    serde_json::to_string_pretty(&bundle).expect("valid json")
                }
                "toy-admissible" => {
                    let j = j.unwrap_or(2);
                    let level = level.unwrap_or(1);
                    let model = make_toy_admissible(prime, j, level, with_character, prec);
                    let spec = ModelSpec {
                        prime,
                        j,
                        level,
                        prec,
                        generators: model
                            .a_generators
                            .iter()
                            .map(|g| {
                                g.matrix
                                    .iter()
                                    .map(|row| {
                                        row.iter().map(|s| ScalarSpec::Full(s.to_repr())).collect()
                                    })
                                    .collect()
                            })
                            .collect(),
                    };
                    canonical_json(&spec)
                }
                other => return Err(Failure::usage(format!("unknown fixture kind: {other}"))),
            };
            match out {
                Some(path) => std::fs::write(&path, json.as_bytes())
                    .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
                None => println!("{json}"),
            }
            Ok(0)
        }
        Command::SchemaValidate { input, schema } => {
            let verdict = validate_schema(&input, &schema)?;
            match verdict {
                Ok(()) => {
                    println!("ok: {} conforms to the {schema} schema", input.display());
                    Ok(0)
                }
                Err(findings) => {
                    println!("invalid: {findings}");
                    Ok(1)
                }
            }
        }
    }
}

fn analyze_one(spec: &OperatorSpec) -> Result<AnalyzeReport, Failure> {
    let op = spec.build().map_err(|e| Failure::usage(e.to_string()))?;
    if !op.norm_at_most_one() {
        return Err(Failure::usage(
            "precondition violated: operator norm exceeds 1 (an entry has negative valuation)",
        ));
    }
    let (analysis, witness) =
        analyze_operator(&op).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(analyze_report(&op, &analysis, &witness))
}

fn run_batch(dir: &Path, format: ReportFormat) -> Result<i32, Failure> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    entries.sort();
    let mut merged = Vec::new();
    for path in &entries {
        let spec: OperatorSpec = read_json(path)?;
        let rep = analyze_one(&spec)?;
        match format {
            ReportFormat::Text => {
                println!("== {}", path.file_name().unwrap_or_default().to_string_lossy());
                println!("{}", render::analyze_text(&rep));
            }
            ReportFormat::Json => {
                merged.push(serde_json::json!({
                    "file": path.file_name().unwrap_or_default().to_string_lossy(),
                    "report": rep,
                }));
            }
        }
    }
    if format == ReportFormat::Json {
        println!("{}", canonical_json(&merged));
    }
    Ok(0)
}

/// Parse and shape-check a file against one of the named schemas, without
/// running any diagnostic. Findings are report content, not process errors.
fn validate_schema(path: &Path, schema: &str) -> Result<Result<(), String>, Failure> {
    macro_rules! check {
        ($ty:ty, $extra:expr) => {{
            let parsed: Result<$ty, _> = read_json(path);
            match parsed {
                Ok(spec) => Ok($extra(spec)),
                Err(f) if f.code == 2 && f.message.contains("cannot read") => Err(f),
                Err(f) => Ok(Err(f.message)),
            }
        }};
    }
    match schema {
        "operator" => check!(OperatorSpec, |s: OperatorSpec| s
            .validate_shape()
            .map_err(|e| e.to_string())),
        "action" => check!(ActionSpec, |s: ActionSpec| {
            for (i, op) in s.iter().enumerate() {
                op.validate_shape().map_err(|e| format!("operator {i}: {e}"))?;
            }
            Ok(())
        }),
        "function" => check!(FunctionSpec, |s: FunctionSpec| s
            .build()
            .map(|_| ())
            .map_err(|e| e.to_string())),
        "samples" => check!(SamplesSpec, |s: SamplesSpec| s
            .build()
            .map(|_| ())
            .map_err(|e| e.to_string())),
        "model" => check!(ModelSpec, |s: ModelSpec| s
            .build()
            .map(|_| ())
            .map_err(|e| e.to_string())),
        "group" => check!(GroupSpec, |s: GroupSpec| s
            .build()
            .map(|_| ())
            .map_err(|e| e.to_string())),
        "trace" => check!(TraceSpec, |s: TraceSpec| {
            // Values must be well-formed scalars; group linkage is checked
            // by the pseudorep subcommand.
            for (i, v) in s.values.iter().enumerate() {
                v.to_scalar(s.prime, s.prec).map_err(|e| format!("value {i}: {e}"))?;
            }
            Ok(())
        }),
        other => Err(Failure::usage(format!("unknown schema: {other}"))),
    }
}
