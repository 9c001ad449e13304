use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hyperdec::convex;
use hyperdec::decoherence::{self, CheckOptions, DecoherenceCandidate};
use hyperdec::diagram::{self, MatrixExport};
use hyperdec::nogo;
use hyperdec::report::fmt12;
use hyperdec::tensor::{c, CMatrix, CVector};
use hyperdec::theory::{laws, purification, quantum, PolytopeTheory};
use hyperdec::{Error, ProcessRep, SystemType, Theory, VerificationReport};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hyperdec", version, about = "Checks for operational theories, decoherence maps and the hyperdecoherence no-go argument")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse, typecheck and evaluate a .gpt diagram file
    Eval {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check a theory or a decoherence candidate
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Information dimension of a theory's default system
    Infodim {
        #[arg(long)]
        theory: String,
        /// Random pure states added to the candidate set (quantum only)
        #[arg(long, default_value_t = 20)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the defining checks on a built-in counterexample candidate
    Counterexample {
        kind: CounterexampleKind,
        /// Classical outcome count (post-classical)
        #[arg(long)]
        n: Option<usize>,
        /// Hilbert dimension (post-quantum)
        #[arg(long)]
        d: Option<usize>,
        /// Replacement state: a probability vector, or the eigenvalues of a diagonal density matrix
        #[arg(long, value_delimiter = ',')]
        q: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
    /// Run verification suites
    Verify {
        #[command(subcommand)]
        what: VerifyCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Unit-effect, convexity and closure laws
    Theory {
        name: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Also test the purification principle
        #[arg(long)]
        purification: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Causality, idempotence, purity and dimension preservation
    Candidate {
        /// Candidate JSON file, or `dephasing:D`
        spec: String,
        #[arg(long)]
        theory: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// The no-go proof chain and lemma checks on quantum instances
    Nogo {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct Common {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Emit JSON lines instead of a table
    #[arg(long)]
    json: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum CounterexampleKind {
    Postclassical,
    Postquantum,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Numeric(_) | Error::Hermiticity { .. } | Error::NotCopurifying { .. } | Error::Composition(_) => EXIT_NUMERIC,
            _ => EXIT_USAGE,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Eval { file, json } => eval(&file, json),
        Command::Check { what: CheckCommand::Theory { name, samples, purification: pur, common } } => {
            let (theory, ty) = resolve_theory(&name)?;
            let mut r = laws::check_theory_laws(&theory, &ty, samples, common.seed)?;
            if pur {
                r.extend(purification::check_purification_principle(&theory, &ty, samples, common.seed)?);
            }
            emit(&r, common.json)
        }
        Command::Check { what: CheckCommand::Candidate { spec, theory, samples, common } } => {
            let (theory, _) = resolve_theory(&theory)?;
            let cand = load_candidate(&spec, &theory)?;
            let r = decoherence::check_candidate_with(&cand, CheckOptions { samples, seed: common.seed })?;
            emit(&r, common.json)
        }
        Command::Infodim { theory, budget, common } => infodim(&theory, budget, common),
        Command::Counterexample { kind, n, d, q, common } => {
            let cand = match kind {
                CounterexampleKind::Postclassical => {
                    let n = n.ok_or_else(|| usage("post-classical counterexample needs --n"))?;
                    let q = q.unwrap_or_else(|| vec![1.0 / n as f64; n]);
                    decoherence::postclassical_counterexample(n, &q)?
                }
                CounterexampleKind::Postquantum => {
                    let d = d.ok_or_else(|| usage("post-quantum counterexample needs --d"))?;
                    let q = q.unwrap_or_else(|| vec![1.0 / d as f64; d]);
                    if q.len() != d {
                        return Err(usage(format!("--q needs {d} entries")));
                    }
                    let rho = CMatrix::from_diagonal(&CVector::from_iterator(d, q.iter().map(|&x| c(x, 0.0))));
                    decoherence::postquantum_counterexample(d, &rho)?
                }
            };
            let r = decoherence::check_candidate_with(&cand, CheckOptions { samples: 20, seed: common.seed })?;
            let class = decoherence::classify(&cand);
            emit_with(&r, common.json, json!({ "candidate": cand.label, "classification": class }))
        }
        Command::Verify { what: VerifyCommand::Nogo { dims, common } } => {
            let r = nogo::run_nogo_suite(&dims, common.seed)?;
            emit(&r, common.json)
        }
    }
}

/// Built-in name (`quantum:d`, `classical:n`, `gbit`) or a theory JSON file;
/// files use their first system.
fn resolve_theory(name: &str) -> Result<(Theory, SystemType), Failure> {
    let path = Path::new(name);
    if name.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{name}: {e}")))?;
        let p = PolytopeTheory::from_json(&text).map_err(|e| usage(format!("{name}: {e}")))?;
        let theory = Theory::Polytope(Arc::new(p));
        let label = match &theory {
            Theory::Polytope(p) => p.systems.first().map(|s| s.label.clone()),
            _ => None,
        }
        .ok_or_else(|| usage(format!("{name}: theory has no systems")))?;
        let ty = theory.system(&label)?;
        return Ok((theory, ty));
    }
    Ok(Theory::builtin(name)?)
}

fn load_candidate(spec: &str, theory: &Theory) -> Result<DecoherenceCandidate, Failure> {
    if let Some(d) = spec.strip_prefix("dephasing:") {
        let d: usize = d.parse().map_err(|_| usage(format!("bad dimension in `{spec}`")))?;
        return Ok(decoherence::dephasing_map(d, None)?);
    }
    let text = std::fs::read_to_string(spec).map_err(|e| usage(format!("{spec}: {e}")))?;
    DecoherenceCandidate::from_json(&text, theory).map_err(|e| usage(format!("{spec}: {e}")))
}

fn emit(r: &VerificationReport, as_json: bool) -> Result<u8, Failure> {
    emit_with(r, as_json, json!({}))
}

/// Prints the report; `extra` fields join the JSON summary line and are
/// listed above the table.
fn emit_with(r: &VerificationReport, as_json: bool, extra: Value) -> Result<u8, Failure> {
    if as_json {
        print!("{}", r.to_json_lines());
        let passed = r.checks.iter().filter(|c| c.passed()).count();
        let mut summary = json!({ "passed": passed, "total": r.checks.len(), "seed": r.seed, "dims": r.dims });
        if let Value::Object(fields) = extra {
            for (k, v) in fields {
                summary[k] = v;
            }
        }
        println!("{}", json!({ "summary": summary }));
    } else {
        if let Value::Object(fields) = &extra {
            for (k, v) in fields {
                println!("{k}: {}", v.as_str().map_or_else(|| v.to_string(), str::to_string));
            }
        }
        print!("{}", r.to_table());
        for f in r.failures().filter(|f| f.witness.is_some()) {
            println!("witness for {}: {}", f.name, f.witness.as_ref().map_or_else(String::new, Value::to_string));
        }
    }
    Ok(if r.all_pass() { 0 } else { EXIT_FAIL })
}

fn eval(file: &Path, as_json: bool) -> Result<u8, Failure> {
    let shown = file.display();
    let src = std::fs::read_to_string(file).map_err(|e| usage(format!("{shown}: {e}")))?;
    let located = |e: diagram::DiagramError| usage(format!("{shown}:{e}"));
    let d = diagram::parse(&src).map_err(located)?;
    let summary = d.typecheck().map_err(located)?;
    if summary.inputs.is_empty() && summary.outputs.is_empty() {
        let p = d.probability().map_err(located)?;
        if as_json {
            println!("{}", json!({ "probability": hyperdec::report::round12(p) }));
        } else {
            println!("probability {}", fmt12(p));
        }
        return Ok(0);
    }
    let p = d.evaluate().map_err(located)?;
    let density = quantum_state_density(&p);
    if as_json {
        let mut out = serde_json::to_value(MatrixExport::from_process(&p)).map_err(|e| Failure::from(Error::from(e)))?;
        if let Some(rho) = &density {
            out["density_real"] = matrix_json(rho, |z| z.re);
            out["density_imag"] = matrix_json(rho, |z| z.im);
        }
        println!("{out}");
        return Ok(0);
    }
    let labels = |ts: &[SystemType]| ts.iter().map(|t| t.label.clone()).collect::<Vec<_>>().join(" * ");
    match density {
        Some(rho) => {
            println!("state on {} (density matrix, row-major)", labels(p.outputs()));
            let imag = rho.iter().any(|z| z.im.abs() > 1e-12);
            print_rows(rho.nrows(), rho.ncols(), |i, j| rho[(i, j)].re);
            if imag {
                println!("imaginary part");
                print_rows(rho.nrows(), rho.ncols(), |i, j| rho[(i, j)].im);
            }
        }
        None => {
            let kind = if p.inputs().is_empty() { "state" } else if p.outputs().is_empty() { "effect" } else { "process" };
            println!("{kind} [{}] -> [{}] (row-major)", labels(p.inputs()), labels(p.outputs()));
            let m = p.matrix();
            print_rows(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        }
    }
    Ok(0)
}

fn quantum_state_density(p: &ProcessRep) -> Option<CMatrix> {
    if p.inputs().is_empty() && !p.outputs().is_empty() && p.outputs().iter().all(SystemType::is_quantum) {
        quantum::density_of(p).ok()
    } else {
        None
    }
}

fn matrix_json(m: &CMatrix, part: impl Fn(&hyperdec::tensor::C64) -> f64) -> Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| hyperdec::report::round12(part(&m[(i, j)]))).collect())
        .collect();
    json!(rows)
}

fn print_rows(rows: usize, cols: usize, at: impl Fn(usize, usize) -> f64) {
    for i in 0..rows {
        let line: Vec<String> = (0..cols).map(|j| fmt12(at(i, j) + 0.0)).collect();
        println!("{}", line.join("  "));
    }
}

fn infodim(name: &str, budget: usize, common: Common) -> Result<u8, Failure> {
    let (theory, ty) = resolve_theory(name)?;
    let candidates = convex::default_candidates(&theory, &ty, budget, common.seed)?;
    let info = convex::info_dimension(&theory, &candidates)?;
    if common.json {
        let mut v = serde_json::to_value(&info).map_err(|e| Failure::from(Error::from(e)))?;
        v["theory"] = json!(theory.id());
        v["system"] = json!(ty.label);
        v["seed"] = json!(common.seed);
        println!("{v}");
    } else {
        println!("theory {} system {}", theory.id(), ty.label);
        println!("candidates                {}", info.candidates);
        println!("pairwise distinguishable  {}", info.pairwise);
        println!("jointly distinguishable   {}", info.joint);
    }
    Ok(0)
}
