//! Batch front end: build models, run axiom/rule suites, hunt counterexamples,
//! check retraction tables.
//!
//! Reports are JSON lines on stdout (one object per check, each embedding the
//! run manifest), with a human summary on stderr. Exit codes: 0 all-pass,
//! 1 verified failure with witness, 2 usage/input error, 3 search exhausted.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use plausival::axioms::{
    check_axiom, verify_rule, AxiomId, Mutation, MutatedModel, RuleId, SuiteConfig, TestSuite,
};
use plausival::boolean::AtomSpace;
use plausival::cox::{search_counterexample, SearchConfig, SearchOutcome};
use plausival::rational::{format_rat, parse_rat, rat};
use plausival::report::{Report, Verdict};
use plausival::retraction::{run_check_spec, RetractionChecksFile};
use plausival::unknowns::World;
use plausival::{PVModel, PlausibleValue, Rat};

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;

#[derive(Parser)]
#[command(name = "plausival", version, about = "exact plausible-value verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Model file utilities.
    Model {
        #[command(subcommand)]
        cmd: ModelCmd,
    },
    /// Run axiom checks against a model file.
    Check {
        model: PathBuf,
        /// Comma-separated axiom ids, or "all".
        #[arg(long, default_value = "all")]
        axioms: String,
        /// Apply a model mutation before checking (square-pv, drop-weight, clamp-pl).
        #[arg(long)]
        mutate: Option<String>,
        #[arg(long, default_value_t = 32)]
        random_count: usize,
        #[arg(long, default_value_t = 2024)]
        suite_seed: u64,
    },
    /// Verify derived rules against a model file.
    Verify {
        model: PathBuf,
        /// Comma-separated rule ids, or "all".
        #[arg(long, default_value = "all")]
        rules: String,
        #[arg(long)]
        mutate: Option<String>,
        #[arg(long, default_value_t = 32)]
        random_count: usize,
        #[arg(long, default_value_t = 2024)]
        suite_seed: u64,
    },
    /// Seeded counterexample search over glued distribution pairs.
    Hunt {
        #[arg(long, default_value_t = 12)]
        atoms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_trials: u64,
        #[arg(long, default_value_t = 24)]
        denominator_bound: i64,
        /// Witness JSON destination on success.
        #[arg(long)]
        out: PathBuf,
        /// Control run: force mu2 = mu1.
        #[arg(long, default_value_t = false)]
        force_identical: bool,
    },
    /// Run retraction checks from a JSON table file.
    Retract { tables: PathBuf },
}

#[derive(Subcommand)]
enum ModelCmd {
    /// Write a model file.
    Gen {
        #[arg(long)]
        atoms: usize,
        /// Comma-separated weights ("1,2,3/2") or "random".
        #[arg(long, default_value = "random")]
        weights: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Serialize)]
struct RunManifest {
    command: String,
    inputs: Vec<String>,
    seed: u64,
    timestamp: String,
    tool_version: String,
}

impl RunManifest {
    fn new(command: &str, inputs: Vec<String>, seed: u64) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            inputs,
            seed,
            timestamp: std::env::var("PLAUSIVAL_TIMESTAMP")
                .unwrap_or_else(|_| "1970-01-01T00:00:00Z".to_string()),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    atoms: Vec<String>,
    weights: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    world: Option<String>,
}

fn load_model(path: &Path) -> Result<PVModel, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read model file {}: {e}", path.display()))?;
    let file: ModelFile =
        serde_json::from_str(&text).map_err(|e| format!("malformed model file: {e}"))?;
    let space = AtomSpace::new(file.atoms.clone()).map_err(|e| e.to_string())?;
    let weights = space
        .labels()
        .iter()
        .map(|l| {
            let raw = file
                .weights
                .get(l)
                .ok_or_else(|| format!("missing weight for atom `{l}`"))?;
            parse_rat(raw).map_err(|e| format!("weight for `{l}`: {e}"))
        })
        .collect::<Result<Vec<Rat>, String>>()?;
    let world = file
        .world
        .map(|l| {
            let idx = space.index_of(&l).map_err(|e| e.to_string())?;
            World::new(&space, idx).map_err(|e| e.to_string())
        })
        .transpose()?;
    let state = plausival::WeightState::new(&space, weights).map_err(|e| e.to_string())?;
    PVModel::new(state, world).map_err(|e| e.to_string())
}

fn emit(manifest: &RunManifest, key: &str, payload: serde_json::Value) {
    let line = serde_json::json!({ "manifest": manifest, key: payload });
    println!("{}", serde_json::to_string(&line).expect("serializable"));
}

fn emit_report(manifest: &RunManifest, report: &Report) {
    emit(
        manifest,
        "report",
        serde_json::to_value(report).expect("serializable"),
    );
}

fn summarize(reports: &[Report]) -> u8 {
    let failed = reports.iter().filter(|r| r.verdict == Verdict::Fail).count();
    let unmet = reports.iter().filter(|r| r.verdict == Verdict::Unmet).count();
    eprintln!(
        "{} checks: {} passed, {} failed, {} unmet",
        reports.len(),
        reports.len() - failed - unmet,
        failed,
        unmet
    );
    if failed > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    }
}

fn cmd_model_gen(atoms: usize, weights: &str, seed: u64, out: &Path) -> Result<u8, String> {
    if atoms == 0 || atoms > 12 {
        return Err(format!("atom count must be in 1..=12, got {atoms}"));
    }
    let space = AtomSpace::with_count(atoms).map_err(|e| e.to_string())?;
    let values: Vec<Rat> = if weights == "random" {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..atoms)
            .map(|_| rat(rng.gen_range(1..=24), rng.gen_range(1..=4)))
            .collect()
    } else {
        let parts: Vec<&str> = weights.split(',').collect();
        if parts.len() != atoms {
            return Err(format!(
                "{} weights supplied for {atoms} atoms",
                parts.len()
            ));
        }
        parts
            .iter()
            .map(|p| parse_rat(p.trim()).map_err(|e| format!("weight `{p}`: {e}")))
            .collect::<Result<Vec<Rat>, String>>()?
    };
    // validates strict positivity
    let model = PVModel::from_weights(&space, values.clone()).map_err(|e| e.to_string())?;
    let file = ModelFile {
        atoms: space.labels().to_vec(),
        weights: space
            .labels()
            .iter()
            .zip(model.state().weights())
            .map(|(l, w)| (l.clone(), format_rat(w)))
            .collect(),
        world: None,
    };
    let text = serde_json::to_string_pretty(&file).expect("serializable");
    std::fs::write(out, text + "\n").map_err(|e| format!("cannot write {}: {e}", out.display()))?;
    let manifest = RunManifest::new("model gen", vec![out.display().to_string()], seed);
    emit(&manifest, "written", serde_json::json!(out.display().to_string()));
    eprintln!("wrote {} ({} atoms)", out.display(), atoms);
    Ok(EXIT_OK)
}

fn parse_ids<T: Copy>(
    raw: &str,
    all: &[T],
    parse: impl Fn(&str) -> Option<T>,
    names: impl Fn(T) -> &'static str,
) -> Result<Vec<T>, String> {
    if raw == "all" {
        return Ok(all.to_vec());
    }
    raw.split(',')
        .map(str::trim)
        .map(|s| {
            parse(s).ok_or_else(|| {
                format!(
                    "unknown id `{s}`; valid ids: {}",
                    all.iter().map(|&t| names(t)).collect::<Vec<_>>().join(", ")
                )
            })
        })
        .collect()
}

enum Oracle {
    Plain(PVModel),
    Mutated(MutatedModel),
}

impl Oracle {
    fn build(model: PVModel, mutate: &Option<String>) -> Result<Oracle, String> {
        match mutate {
            None => Ok(Oracle::Plain(model)),
            Some(name) => {
                let m = Mutation::parse(name).ok_or_else(|| {
                    format!(
                        "unknown mutation `{name}`; valid: {}",
                        Mutation::ALL
                            .iter()
                            .map(|m| m.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    )
                })?;
                Ok(Oracle::Mutated(MutatedModel::new(model, m)))
            }
        }
    }

    fn as_dyn(&self) -> &dyn PlausibleValue {
        match self {
            Oracle::Plain(m) => m,
            Oracle::Mutated(m) => m,
        }
    }
}

fn build_suite(model: &dyn PlausibleValue, random_count: usize, seed: u64) -> Result<TestSuite, String> {
    TestSuite::generate(
        model.space(),
        &SuiteConfig {
            random_count,
            seed,
        },
    )
    .map_err(|e| e.to_string())
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    model_path: &Path,
    axioms: &str,
    mutate: &Option<String>,
    random_count: usize,
    suite_seed: u64,
) -> Result<u8, String> {
    let oracle = Oracle::build(load_model(model_path)?, mutate)?;
    let ids = parse_ids(axioms, &AxiomId::ALL, AxiomId::parse, |id| id.as_str())?;
    let suite = build_suite(oracle.as_dyn(), random_count, suite_seed)?;
    let manifest = RunManifest::new("check", vec![model_path.display().to_string()], suite_seed);
    use rayon::prelude::*;
    let mut reports: Vec<Report> = ids
        .par_iter()
        .map(|&id| check_axiom(oracle.as_dyn(), id, &suite))
        .collect();
    if axioms == "all" {
        // the algebra axiom is enforced by the type system, not measured
        reports.push(
            Report::pass("A3_structural", 0, 0).with_note("structural: holds by construction"),
        );
    }
    for r in &reports {
        emit_report(&manifest, r);
    }
    Ok(summarize(&reports))
}

fn cmd_verify(
    model_path: &Path,
    rules: &str,
    mutate: &Option<String>,
    random_count: usize,
    suite_seed: u64,
) -> Result<u8, String> {
    let oracle = Oracle::build(load_model(model_path)?, mutate)?;
    let ids = parse_ids(rules, &RuleId::ALL, RuleId::parse, |id| id.as_str())?;
    let suite = build_suite(oracle.as_dyn(), random_count, suite_seed)?;
    let manifest = RunManifest::new("verify", vec![model_path.display().to_string()], suite_seed);
    use rayon::prelude::*;
    let reports: Vec<Report> = ids
        .par_iter()
        .map(|&id| verify_rule(oracle.as_dyn(), id, &suite))
        .collect();
    for r in &reports {
        emit_report(&manifest, r);
    }
    Ok(summarize(&reports))
}

fn cmd_hunt(
    atoms: usize,
    seed: u64,
    max_trials: u64,
    denominator_bound: i64,
    out: &Path,
    force_identical: bool,
) -> Result<u8, String> {
    if atoms > 12 {
        return Err(format!("table materialization capped at 12 atoms, got {atoms}"));
    }
    if denominator_bound < 2 {
        return Err("denominator bound must be at least 2".to_string());
    }
    let cfg = SearchConfig {
        atom_count: atoms,
        perturbation_denominator_bound: denominator_bound,
        seed,
        max_trials,
        force_identical,
        ..SearchConfig::default()
    };
    let manifest = RunManifest::new("hunt", vec![out.display().to_string()], seed);
    match search_counterexample(&cfg).map_err(|e| e.to_string())? {
        SearchOutcome::Found(w) => {
            let file = w.to_file(10_000);
            let body = serde_json::json!({ "manifest": manifest, "witness": file });
            std::fs::write(
                out,
                serde_json::to_string_pretty(&body).expect("serializable") + "\n",
            )
            .map_err(|e| format!("cannot write {}: {e}", out.display()))?;
            emit(
                &manifest,
                "outcome",
                serde_json::json!({
                    "found": true,
                    "trial_index": w.trial_index,
                    "witness_path": out.display().to_string(),
                    "homogeneity": w.homogeneity,
                }),
            );
            eprintln!(
                "counterexample at trial {} written to {}",
                w.trial_index,
                out.display()
            );
            Ok(EXIT_OK)
        }
        SearchOutcome::Exhausted(tally) => {
            emit(
                &manifest,
                "outcome",
                serde_json::json!({ "found": false, "tally": tally }),
            );
            eprintln!(
                "exhausted after {} trials ({} dependence violations, {} associative)",
                tally.trials, tally.dependence_violations, tally.well_defined_associative
            );
            Ok(EXIT_EXHAUSTED)
        }
    }
}

fn cmd_retract(tables: &Path) -> Result<u8, String> {
    let text = std::fs::read_to_string(tables)
        .map_err(|e| format!("cannot read table file {}: {e}", tables.display()))?;
    let file: RetractionChecksFile =
        serde_json::from_str(&text).map_err(|e| format!("malformed table file: {e}"))?;
    let manifest = RunManifest::new("retract", vec![tables.display().to_string()], 0);
    let mut reports = Vec::new();
    for (i, spec) in file.checks.iter().enumerate() {
        let rs = run_check_spec(spec).map_err(|e| format!("check {i}: {e}"))?;
        reports.extend(rs);
    }
    for r in &reports {
        emit_report(&manifest, r);
    }
    Ok(summarize(&reports))
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.cmd {
        Cmd::Model { cmd } => match cmd {
            ModelCmd::Gen {
                atoms,
                weights,
                seed,
                out,
            } => cmd_model_gen(atoms, &weights, seed, &out),
        },
        Cmd::Check {
            model,
            axioms,
            mutate,
            random_count,
            suite_seed,
        } => cmd_check(&model, &axioms, &mutate, random_count, suite_seed),
        Cmd::Verify {
            model,
            rules,
            mutate,
            random_count,
            suite_seed,
        } => cmd_verify(&model, &rules, &mutate, random_count, suite_seed),
        Cmd::Hunt {
            atoms,
            seed,
            max_trials,
            denominator_bound,
            out,
            force_identical,
        } => cmd_hunt(atoms, seed, max_trials, denominator_bound, &out, force_identical),
        Cmd::Retract { tables } => cmd_retract(&tables),
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PLAUSIVAL_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
