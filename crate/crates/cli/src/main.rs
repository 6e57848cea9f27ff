//! Command-line front end: reads relations, dependencies and proof scripts,
//! prints one JSON document per run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semiring_ci::chase::{chase_emvd, ChaseOutcome, DEFAULT_MAX_STEPS};
use semiring_ci::decompose::{is_lossless, normalize_4nf, Losslessness};
use semiring_ci::dependency::{satisfies, Dependency, Satisfaction};
use semiring_ci::implication::{derive_scifd, implies_scifd, Implication};
use semiring_ci::info::{entropic_vector, entropy};
use semiring_ci::proofs::{check_proof, copy_extend, ProofScript};
use semiring_ci::{check_semiring_laws, Equivalence, KRelation, Schema, Semiring};
use serde_json::{json, Value as Json};

const DERIVATION_BUDGET: usize = 100_000;

#[derive(Parser)]
#[command(name = "semiring-ci", version, about = "Dependencies and independence over semiring-annotated relations")]
struct Cli {
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check dependencies on a relation.
    Check {
        #[arg(long)]
        rel: PathBuf,
        #[arg(long)]
        semiring: Option<String>,
        /// A dependency as JSON.
        #[arg(long, required_unless_present = "deps")]
        dep: Option<String>,
        /// A file with one dependency per line.
        #[arg(long)]
        deps: Option<PathBuf>,
    },
    /// Plan a 4NF decomposition, or test one binary split of a relation.
    Decompose {
        #[arg(long)]
        schema: Option<String>,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        rel: Option<PathBuf>,
        #[arg(long)]
        semiring: Option<String>,
        #[arg(long, requires = "right")]
        left: Option<String>,
        #[arg(long, requires = "left")]
        right: Option<String>,
    },
    /// Print the 4NF schemas for a set of SCIs and FDs.
    Normalize {
        #[arg(long)]
        schema: String,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Decide whether SCIs and FDs imply a dependency.
    Implies {
        #[arg(long)]
        schema: String,
        #[arg(long)]
        sigma: PathBuf,
        /// JSON text or a path to a JSON file.
        #[arg(long)]
        tau: String,
    },
    /// Run the chase for an EMVD.
    Chase {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        tau: String,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Extend a relation with a conditionally independent copy of Y.
    CopyExtend {
        #[arg(long)]
        rel: PathBuf,
        #[arg(long)]
        semiring: Option<String>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Also write the extended relation as TSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a proof script.
    VerifyProof { script: PathBuf },
    /// Shannon entropies of a distribution over the non-negative rationals.
    Entropy {
        #[arg(long)]
        rel: PathBuf,
        #[arg(long)]
        semiring: Option<String>,
        #[arg(long, conflicts_with = "vector", required_unless_present = "vector")]
        subset: Option<String>,
        #[arg(long)]
        vector: bool,
    },
    /// Check the semiring axioms and capability flags on sample values.
    Laws {
        #[arg(long)]
        semiring: String,
        /// Comma-separated value literals; the built-in samples otherwise.
        #[arg(long)]
        samples: Option<String>,
    },
}

/// Failures that end the run with exit code 3.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Run = Result<(Json, u8), Usage>;

fn read(path: &Path) -> Result<String, Usage> {
    fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

/// Loads a TSV relation; `--semiring` supplies a missing header and must
/// agree with a present one.
fn load_relation(path: &Path, semiring: Option<&str>) -> Result<KRelation, Usage> {
    let text = read(path)?;
    let wanted = semiring.map(Semiring::from_tag).transpose()?;
    let header = text.lines().next().and_then(|l| l.strip_prefix("#semiring:"));
    let text = match (header, wanted) {
        (Some(tag), Some(k)) if Semiring::from_tag(tag)? != k => {
            return Err(Usage(format!(
                "{} declares {}, not {}",
                path.display(),
                tag.trim(),
                k.tag()
            )))
        }
        (None, Some(k)) => format!("#semiring: {}\n{text}", k.tag()),
        (None, None) => return Err(Usage(format!("{} has no #semiring header", path.display()))),
        _ => text,
    };
    Ok(KRelation::from_tsv(&text)?)
}

fn load_dep(text_or_path: &str) -> Result<Dependency, Usage> {
    let text = if text_or_path.trim_start().starts_with('{') {
        text_or_path.to_string()
    } else {
        read(Path::new(text_or_path))?
    };
    Ok(Dependency::from_json(&text)?)
}

fn load_deps(path: &Path) -> Result<Vec<Dependency>, Usage> {
    Ok(Dependency::parse_jsonl(&read(path)?)?)
}

fn relation_json(r: &KRelation) -> Json {
    let tuples: Vec<Json> = r
        .entries()
        .iter()
        .map(|(t, v)| json!({"tuple": t.values(), "value": v.to_string()}))
        .collect();
    json!({"schema": r.schema(), "semiring": r.semiring().tag(), "tuples": tuples})
}

fn tuples_json(tuples: &[semiring_ci::Tuple]) -> Vec<&[String]> {
    tuples.iter().map(|t| t.values()).collect()
}

fn check(rel: &Path, semiring: Option<&str>, dep: Option<&str>, deps: Option<&Path>) -> Run {
    let r = load_relation(rel, semiring)?;
    let mut sigma = Vec::new();
    if let Some(d) = dep {
        sigma.push(load_dep(d)?);
    }
    if let Some(path) = deps {
        sigma.extend(load_deps(path)?);
    }
    let mut results = Vec::new();
    let mut all = true;
    for d in &sigma {
        let entry = match satisfies(&r, d)? {
            Satisfaction::Holds => json!({"dependency": d, "holds": true}),
            Satisfaction::Violated(w) => {
                all = false;
                json!({"dependency": d, "holds": false, "witness": *w})
            }
        };
        results.push(entry);
    }
    Ok((json!({"holds": all, "results": results}), if all { 0 } else { 1 }))
}

fn decompose(
    schema: Option<&str>,
    sigma: Option<&Path>,
    rel: Option<&Path>,
    semiring: Option<&str>,
    split: Option<(&str, &str)>,
) -> Run {
    let r = rel.map(|p| load_relation(p, semiring)).transpose()?;
    if let Some((left, right)) = split {
        let r = r.ok_or_else(|| Usage("--left/--right need --rel".into()))?;
        let verdict = is_lossless(&r, &Schema::parse(left), &Schema::parse(right))?;
        return Ok(match verdict {
            Losslessness::Lossless { a, b } => (
                json!({"lossless": true, "a": a.to_string(), "b": b.to_string()}),
                0,
            ),
            Losslessness::NotLossless => (json!({"lossless": false}), 1),
            Losslessness::Unknown => (json!({"lossless": null}), 2),
        });
    }
    let sigma = load_deps(sigma.ok_or_else(|| Usage("--sigma or --left/--right is required".into()))?)?;
    let schema = match (schema, &r) {
        (Some(s), _) => Schema::parse(s),
        (None, Some(r)) => r.schema().clone(),
        (None, None) => return Err(Usage("--schema or --rel is required".into())),
    };
    let plan = normalize_4nf(&schema, &sigma)?;
    let mut out = serde_json::to_value(&plan)?;
    let mut code = 0;
    if let Some(r) = r {
        let rebuilt = plan.reconstruct(&r)?;
        let (value, c) = match r.equivalent(&rebuilt)? {
            Equivalence::Equivalent { a, b } => (json!({"a": a.to_string(), "b": b.to_string()}), 0),
            Equivalence::NotEquivalent => (json!(false), 1),
            Equivalence::Unknown => (Json::Null, 2),
        };
        out["lossless"] = value;
        code = c;
    }
    Ok((out, code))
}

fn implies(schema: &str, sigma: &Path, tau: &str) -> Run {
    let v = Schema::parse(schema);
    let sigma = load_deps(sigma)?;
    let tau = load_dep(tau)?;
    Ok(match implies_scifd(&v, &sigma, &tau)? {
        Implication::Implied => {
            let proof = derive_scifd(&v, &sigma, &tau, DERIVATION_BUDGET)?;
            (json!({"implied": true, "proof": proof}), 0)
        }
        Implication::NotImplied(agree) => (json!({"implied": false, "agreement": agree}), 1),
    })
}

fn chase(sigma: &Path, tau: &str, max_steps: Option<usize>) -> Run {
    let sigma = load_deps(sigma)?;
    let tau = load_dep(tau)?;
    let max_steps = match max_steps {
        Some(n) => n,
        None => match std::env::var("SEMIRING_CI_MAX_STEPS") {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| Usage(format!("SEMIRING_CI_MAX_STEPS={s} is not a step count")))?,
            Err(_) => DEFAULT_MAX_STEPS,
        },
    };
    let out = chase_emvd(&sigma, &tau, max_steps)?;
    let code = match out {
        ChaseOutcome::Implied(_) => 0,
        ChaseOutcome::NotImplied(_) => 1,
        ChaseOutcome::Unknown(_) => 2,
    };
    let state = out.state();
    Ok((
        json!({
            "verdict": out.verdict(),
            "schema": state.schema,
            "tuples": tuples_json(&state.tuples),
            "trace": state.trace,
        }),
        code,
    ))
}

fn copy(rel: &Path, semiring: Option<&str>, x: &str, y: &str, out: Option<&Path>) -> Run {
    let r = load_relation(rel, semiring)?;
    let ext = copy_extend(&r, &Schema::parse(x), &Schema::parse(y))?;
    if let Some(path) = out {
        fs::write(path, ext.relation.to_tsv()).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    }
    Ok((json!({"fresh": ext.fresh, "relation": relation_json(&ext.relation)}), 0))
}

fn verify(path: &Path) -> Run {
    let script = ProofScript::from_json(&read(path)?)?;
    Ok(match check_proof(&script) {
        Ok(v) => (
            json!({
                "valid": true,
                "steps": script.steps.len(),
                "conclusion": v.conclusion,
                "existential": v.existential,
            }),
            0,
        ),
        Err(e) => (json!({"valid": false, "step": e.step, "reason": e.reason}), 1),
    })
}

fn entropies(rel: &Path, semiring: Option<&str>, subset: Option<&str>) -> Run {
    let r = load_relation(rel, semiring)?;
    if let Some(s) = subset {
        return Ok((json!({"entropy": entropy(&r, &Schema::parse(s))?}), 0));
    }
    let h = entropic_vector(&r)?;
    let vars = h.schema().vars();
    let vector: serde_json::Map<String, Json> = h
        .values()
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let set: Vec<&str> = (0..vars.len())
                .filter(|i| m >> i & 1 == 1)
                .map(|i| vars[i].as_str())
                .collect();
            (set.join(","), json!(v))
        })
        .collect();
    Ok((json!({"schema": h.schema(), "vector": vector}), 0))
}

fn laws(tag: &str, samples: Option<&str>) -> Run {
    let k = Semiring::from_tag(tag)?;
    let samples = match samples {
        Some(list) => split_literals(list)
            .into_iter()
            .map(|s| k.parse_value(&s))
            .collect::<Result<Vec<_>, _>>()?,
        None => k.default_samples(),
    };
    let report = check_semiring_laws(&k, &samples);
    let code = if report.is_consistent() { 0 } else { 1 };
    Ok((serde_json::to_value(&report)?, code))
}

/// Splits on commas outside parentheses, so pair literals stay whole.
fn split_literals(list: &str) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut depth = 0;
    for c in list.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(String::new());
                continue;
            }
            _ => {}
        }
        out.last_mut().expect("non-empty").push(c);
    }
    out.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Check { rel, semiring, dep, deps } => {
            check(rel, semiring.as_deref(), dep.as_deref(), deps.as_deref())
        }
        Command::Decompose { schema, sigma, rel, semiring, left, right } => decompose(
            schema.as_deref(),
            sigma.as_deref(),
            rel.as_deref(),
            semiring.as_deref(),
            left.as_deref().zip(right.as_deref()),
        ),
        Command::Normalize { schema, sigma } => {
            let plan = normalize_4nf(&Schema::parse(schema), &load_deps(sigma)?)?;
            Ok((json!({"schemas": plan.schemas}), 0))
        }
        Command::Implies { schema, sigma, tau } => implies(schema, sigma, tau),
        Command::Chase { sigma, tau, max_steps } => chase(sigma, tau, *max_steps),
        Command::CopyExtend { rel, semiring, x, y, out } => copy(rel, semiring.as_deref(), x, y, out.as_deref()),
        Command::VerifyProof { script } => verify(script),
        Command::Entropy { rel, semiring, subset, vector: _ } => entropies(rel, semiring.as_deref(), subset.as_deref()),
        Command::Laws { semiring, samples } => laws(semiring, samples.as_deref()),
    }
}

fn emit(value: &Json, pretty: bool) {
    let text = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    };
    println!("{}", text.expect("JSON values serialize"));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((value, code)) => {
            emit(&value, cli.pretty);
            ExitCode::from(code)
        }
        Err(Usage(message)) => {
            emit(&json!({"error": message}), cli.pretty);
            ExitCode::from(3)
        }
    }
}
