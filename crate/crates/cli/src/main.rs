//! `okb` — compile obligation IR, compose profiles, validate evidence graphs.
//!
//! Exit codes: 0 success / conforms, 1 does not conform, 2 error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use okb_core::bench::{bench_case, hash_manifest, profile_median, render_table, RunRecord, MIN_SAMPLES};
use okb_core::compiler::compile_text;
use okb_core::corpus::{self, CAPABILITY_CASES, CAPABILITY_PROFILES};
use okb_core::governance::{compose, refinement_matrix, validate_profile, ComposedKb, Registry};
use okb_core::rdf::{parse_turtle, Graph};

#[derive(Parser)]
#[command(name = "okb", version, about = "Governance compiler and SHACL validation engine")]
struct Cli {
    /// TOML file naming block/profile/corpus directories and an optional audit log.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Turtle,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an IR file to a canonical Turtle block.
    Compile {
        ir: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Validate an evidence graph against a profile.
    Validate {
        /// Turtle file, or the id of a bundled case.
        case: String,
        #[arg(long)]
        profile: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Print the canonical composition of profiles and/or blocks.
    Compose {
        #[arg(long)]
        profile: Vec<String>,
        #[arg(long)]
        block: Vec<String>,
    },
    /// Print the refinement matrix over an evidence corpus.
    Refine {
        #[arg(long)]
        profile: Vec<String>,
        /// Directory of case_*.ttl files; defaults to the bundled capability cases.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Time validation per (profile, case).
    Bench {
        #[arg(long)]
        profile: Vec<String>,
        #[arg(long)]
        case: Vec<String>,
        #[arg(long, default_value_t = MIN_SAMPLES)]
        samples: usize,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Write sha256 entries for policy artefacts (files or directories).
    HashManifest {
        paths: Vec<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    block_dir: Option<PathBuf>,
    profile_dir: Option<PathBuf>,
    corpus_dir: Option<PathBuf>,
    audit_log: Option<PathBuf>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load_config(path: Option<&Path>) -> Result<Config, Failure> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let cfg: Config = toml::from_str(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    // Relative directories resolve against the config file's location.
    let base = path.parent().unwrap_or(Path::new("."));
    let fix = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
    Ok(Config {
        block_dir: fix(cfg.block_dir),
        profile_dir: fix(cfg.profile_dir),
        corpus_dir: fix(cfg.corpus_dir),
        audit_log: fix(cfg.audit_log),
    })
}

fn registry(cfg: &Config) -> Result<Registry, Failure> {
    match (&cfg.block_dir, &cfg.profile_dir) {
        (None, None) => Ok(Registry::bundled()),
        (Some(b), Some(p)) => Ok(Registry::from_dirs(b, p)?),
        _ => Err(Failure("config must set both block_dir and profile_dir".into())),
    }
}

/// `case_*.ttl` files in `dir`, keyed by the id between `case_` and `.ttl`.
fn corpus_from_dir(dir: &Path) -> Result<Vec<(String, Graph)>, Failure> {
    let mut cases = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        if let Some(id) = name.strip_prefix("case_").and_then(|n| n.strip_suffix(".ttl")) {
            let g = parse_turtle(&read(&path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            cases.push((id.to_string(), g));
        }
    }
    cases.sort_by(|a, b| a.0.cmp(&b.0));
    if cases.is_empty() {
        return Err(Failure(format!("{}: no case_*.ttl files", dir.display())));
    }
    Ok(cases)
}

fn load_case(spec: &str) -> Result<(String, Graph, Vec<u8>), Failure> {
    let path = Path::new(spec);
    if path.exists() {
        let text = read(path)?;
        let g = parse_turtle(&text).map_err(|e| Failure(format!("{spec}: {e}")))?;
        return Ok((spec.to_string(), g, text.into_bytes()));
    }
    let case = corpus::build_case(spec).map_err(|_| Failure(format!("{spec}: no such file or bundled case")))?;
    Ok((case.id, case.graph, case.source.as_bytes().to_vec()))
}

fn audit(cfg: &Config, command: &str, inputs: &[(String, Vec<u8>)], output: &[u8]) -> Result<(), Failure> {
    if let Some(log) = &cfg.audit_log {
        RunRecord::new(command, inputs, output).append_to(log)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Compile { ir, out } => {
            let text = read(&ir)?;
            let name = ir
                .file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.trim_end_matches(".yaml").trim_end_matches(".ir"))
                .unwrap_or("block")
                .to_string();
            let block = compile_text(&text, &name)?;
            let turtle = block.to_turtle();
            match &out {
                Some(path) => fs::write(path, &turtle).map_err(|e| Failure(format!("{}: {e}", path.display())))?,
                None => print!("{turtle}"),
            }
            eprintln!("compiled {} shapes into block '{}'", block.shapes.len(), block.name);
            audit(&cfg, "compile", &[(ir.display().to_string(), text.into_bytes())], turtle.as_bytes())?;
            Ok(0)
        }
        Command::Validate { case, profile, format } => {
            let reg = registry(&cfg)?;
            let kb = reg.compose_profile(&profile)?;
            let (id, graph, bytes) = load_case(&case)?;
            let report = validate_profile(&graph, &kb);
            let turtle = report.to_turtle();
            match format {
                Format::Text => {
                    let verdict = if report.conforms { "conforms" } else { "does not conform" };
                    println!("{id} under {profile}: {verdict} ({} violations)", report.violation_count());
                    print!("{}", report.to_text());
                }
                Format::Turtle => print!("{turtle}"),
            }
            for d in &report.diagnostics {
                eprintln!("diagnostic: {d}");
            }
            audit(&cfg, &format!("validate --profile {profile}"), &[(id, bytes)], turtle.as_bytes())?;
            Ok(if report.conforms { 0 } else { 1 })
        }
        Command::Compose { profile, block } => {
            let reg = registry(&cfg)?;
            if profile.is_empty() && block.is_empty() {
                return Err(Failure("compose needs at least one --profile or --block".into()));
            }
            let mut kb = ComposedKb::empty();
            for p in &profile {
                kb = kb.combine(&reg.compose_profile(p)?)?;
            }
            let blocks = block
                .iter()
                .map(|b| reg.block(b).ok_or_else(|| Failure(format!("unknown block '{b}'"))))
                .collect::<Result<Vec<_>, _>>()?;
            kb = kb.combine(&compose(blocks)?)?;
            print!("{}", kb.canonical_text());
            eprintln!("{} shapes", kb.shape_count());
            Ok(0)
        }
        Command::Refine { profile, corpus } => {
            let reg = registry(&cfg)?;
            let names: Vec<String> = if profile.is_empty() {
                CAPABILITY_PROFILES.iter().map(|s| s.to_string()).collect()
            } else {
                profile
            };
            let kbs = names
                .iter()
                .map(|n| reg.compose_profile(n))
                .collect::<Result<Vec<_>, _>>()?;
            let cases = match corpus.or(cfg.corpus_dir.clone()) {
                Some(dir) => corpus_from_dir(&dir)?,
                None => corpus::corpus(&CAPABILITY_CASES),
            };
            let pairs: Vec<(&str, &ComposedKb)> = names.iter().map(String::as_str).zip(kbs.iter()).collect();
            let matrix = refinement_matrix(&pairs, &cases);
            if !matrix.verdicts.is_empty() {
                print!("{}", matrix.render());
            }
            println!("{}", matrix.equivalence_summary());
            Ok(0)
        }
        Command::Bench {
            profile,
            case,
            samples,
            corpus,
        } => {
            if samples < MIN_SAMPLES {
                return Err(Failure(format!("--samples must be at least {MIN_SAMPLES}, got {samples}")));
            }
            let reg = registry(&cfg)?;
            let names: Vec<String> = if profile.is_empty() {
                CAPABILITY_PROFILES.iter().map(|s| s.to_string()).collect()
            } else {
                profile
            };
            let mut cases = match corpus.or(cfg.corpus_dir.clone()) {
                Some(dir) => corpus_from_dir(&dir)?,
                None => corpus::corpus(&CAPABILITY_CASES),
            };
            if !case.is_empty() {
                cases.retain(|(id, _)| case.contains(id));
                if cases.is_empty() {
                    return Err(Failure("no matching cases".into()));
                }
            }
            let mut results = Vec::new();
            for name in &names {
                let kb = reg.compose_profile(name)?;
                for (id, g) in &cases {
                    results.push(bench_case(name, &kb, id, g, samples)?);
                }
            }
            print!("{}", render_table(&results));
            for name in &names {
                if let Some(m) = profile_median(&results, name) {
                    println!("# median {name}: {m:.3} ms");
                }
            }
            Ok(0)
        }
        Command::HashManifest { paths, out } => {
            let mut files = Vec::new();
            for p in &paths {
                collect_files(p, &mut files)?;
            }
            let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
            let manifest = hash_manifest(&refs)?;
            match out {
                Some(path) => fs::write(&path, &manifest).map_err(|e| Failure(format!("{}: {e}", path.display())))?,
                None => print!("{manifest}"),
            }
            Ok(0)
        }
    }
}

fn collect_files(p: &Path, out: &mut Vec<PathBuf>) -> Result<(), Failure> {
    if p.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(p)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        entries.sort();
        for e in entries {
            collect_files(&e, out)?;
        }
    } else if p.is_file() {
        out.push(p.to_path_buf());
    } else {
        return Err(Failure(format!("{}: not found", p.display())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
