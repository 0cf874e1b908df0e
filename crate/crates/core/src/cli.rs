//! Command-line surface: each command reads a problem or model file, runs one computation
//! and returns a JSON report, a one-line summary and an exit code.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{format_rational, Rational, RingDescriptor};
use crate::dynamics::{d2_evaluation, lemma6_check, rotation_cycle};
use crate::equivariant::{equivariant_cohomology, CartanComplex};
use crate::error::{Error, Result};
use crate::exact_sequence::theorem1_sequence;
use crate::flat::{exotic_homology, flat_subcomplex, invariant_subcomplex, lemma1_check};
use crate::fock::identities::run_identities;
use crate::fock::operator::{build_perturbed_d, PerturbedDifferential};
use crate::fock::{Form, FormMonomial};
use crate::model::{Model, ModelFile};
use crate::problem::{parse_samples, read_text, Problem};
use crate::spectral::{perturbed_homology_compare, spectral_sequence, PerturbedComplex};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MODEL: i32 = 3;
pub const EXIT_WINDOW: i32 = 4;
pub const EXIT_UNSUPPORTED: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "exotic", version, about = "Exact exotic de Rham homology on finite-dimensional models")]
pub struct Cli {
  #[command(subcommand)]
  pub command: Command,
  /// Nonzero sample values for the perturbed-homology comparison, e.g. "1,2,-3".
  #[arg(long, global = true)]
  pub samples: Option<String>,
  /// Polynomial degree cutoff of the Cartan model.
  #[arg(long, global = true)]
  pub cutoff: Option<usize>,
  /// Last spectral page to compute.
  #[arg(long, global = true)]
  pub max_page: Option<usize>,
  /// Suppress the summary on standard error.
  #[arg(long, global = true)]
  pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
  /// Check a model or problem file.
  Validate { path: PathBuf },
  /// Run the operator identity suite.
  Identities { path: PathBuf },
  /// Flat subcomplex and its homology.
  Exotic { path: PathBuf },
  /// The exact sequence of a closed form and its kernel field.
  ExactSeq { path: PathBuf },
  /// Spectral sequence of the perturbation.
  Ss { path: PathBuf },
  /// Rotation cycle and the special differential of a constant field.
  Dynamics { path: PathBuf },
  /// Cartan-model equivariant cohomology.
  Equivariant { path: PathBuf },
}

impl Command {
  pub fn name(&self) -> &'static str {
    match self {
      Command::Validate { .. } => "validate",
      Command::Identities { .. } => "identities",
      Command::Exotic { .. } => "exotic",
      Command::ExactSeq { .. } => "exact-seq",
      Command::Ss { .. } => "ss",
      Command::Dynamics { .. } => "dynamics",
      Command::Equivariant { .. } => "equivariant",
    }
  }

  pub fn path(&self) -> &Path {
    match self {
      Command::Validate { path }
      | Command::Identities { path }
      | Command::Exotic { path }
      | Command::ExactSeq { path }
      | Command::Ss { path }
      | Command::Dynamics { path }
      | Command::Equivariant { path } => path,
    }
  }
}

#[derive(Clone, Debug)]
pub struct Outcome {
  pub report:  Value,
  pub summary: String,
  pub exit:    i32,
}

impl Outcome {
  /// The report as pretty JSON with a trailing newline.
  pub fn render(&self) -> String {
    let mut s = serde_json::to_string_pretty(&self.report).expect("reports serialize");
    s.push('\n');
    s
  }
}

pub fn exit_code(e: &Error) -> i32 {
  match e {
    Error::Schema(_)
    | Error::InvalidModel(_)
    | Error::ParityViolation { .. }
    | Error::Io(_)
    | Error::UnsupportedCoefficient(_)
    | Error::DimensionMismatch(_) => EXIT_INPUT,
    Error::JacobiViolation { .. } => EXIT_MODEL,
    Error::WindowOverflow { .. } => EXIT_WINDOW,
    Error::Unsupported(_) => EXIT_UNSUPPORTED,
    Error::NotWellDefined { .. }
    | Error::NotHomogeneous(_)
    | Error::NotInvariant(_)
    | Error::FormNotClosed(_)
    | Error::ReebNotInKernel(_)
    | Error::Precondition(_)
    | Error::NonConstructible(_)
    | Error::NonCommuting(_)
    | Error::Structural(_)
    | Error::Contradiction(_) => EXIT_VERDICT,
  }
}

fn error_kind(e: &Error) -> &'static str {
  match e {
    Error::UnsupportedCoefficient(_) => "unsupported_coefficient",
    Error::DimensionMismatch(_) => "dimension_mismatch",
    Error::NotWellDefined { .. } => "not_well_defined",
    Error::Schema(_) => "schema",
    Error::InvalidModel(_) => "invalid_model",
    Error::JacobiViolation { .. } => "jacobi_violation",
    Error::WindowOverflow { .. } => "window_overflow",
    Error::ParityViolation { .. } => "parity_violation",
    Error::NotHomogeneous(_) => "not_homogeneous",
    Error::NotInvariant(_) => "not_invariant",
    Error::FormNotClosed(_) => "form_not_closed",
    Error::ReebNotInKernel(_) => "reeb_not_in_kernel",
    Error::Precondition(_) => "precondition",
    Error::NonConstructible(_) => "non_constructible",
    Error::NonCommuting(_) => "non_commuting",
    Error::Unsupported(_) => "unsupported",
    Error::Structural(_) => "structural",
    Error::Contradiction(_) => "contradiction",
    Error::Io(_) => "io",
  }
}

fn to_value<T: Serialize>(v: &T) -> Value { serde_json::to_value(v).expect("reports serialize") }

fn verdict(command: &str, report: Value, pass: bool, summary: String) -> Outcome {
  let mut full = json!({ "command": command, "pass": pass });
  if let (Value::Object(out), Value::Object(body)) = (&mut full, report) {
    out.extend(body);
  }
  Outcome { report: full, summary, exit: if pass { EXIT_OK } else { EXIT_VERDICT } }
}

/// Runs one command. Errors become a report with an `error` object and the matching exit code.
pub fn execute(cli: &Cli) -> Outcome {
  let command = cli.command.name();
  let result = match &cli.command {
    Command::Validate { path } => validate(path),
    Command::Identities { path } => Problem::load(path).and_then(|p| identities(&p)),
    Command::Exotic { path } => Problem::load(path).and_then(|p| exotic(&p)),
    Command::ExactSeq { path } => Problem::load(path).and_then(|p| exact_seq(&p)),
    Command::Ss { path } => Problem::load(path).and_then(|p| ss(&p, cli.samples.as_deref(), cli.max_page)),
    Command::Dynamics { path } => Problem::load(path).and_then(|p| dynamics(&p)),
    Command::Equivariant { path } => Problem::load(path).and_then(|p| equivariant(&p, cli.cutoff)),
  };
  match result {
    Ok(outcome) => outcome,
    Err(e) => Outcome {
      report:  json!({
        "command": command,
        "pass": false,
        "error": { "kind": error_kind(&e), "message": e.to_string() },
      }),
      summary: format!("{command}: error: {e}"),
      exit:    exit_code(&e),
    },
  }
}

fn model_summary(model: &Model) -> Value {
  json!({
    "kind": model.kind(),
    "dim": model.dim(),
    "form_space_dim": model.form_space_dim(),
    "homology": model.full_homology(),
  })
}

fn validate(path: &Path) -> Result<Outcome> {
  let text = read_text(path)?;
  let value: Value = serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))?;
  if value.get("kind").is_some() {
    let model = ModelFile::from_json(&text)?.build()?;
    let summary = format!("validate: model of dimension {} with {} basis forms", model.dim(), model.form_space_dim());
    return Ok(verdict("validate", json!({ "input": "model", "model": model_summary(&model) }), true, summary));
  }
  let problem = Problem::load(path)?;
  let dp = problem.perturbed_d()?;
  let report = json!({
    "input": "problem",
    "model": model_summary(&problem.model),
    "forms": problem.forms.keys().collect::<Vec<_>>(),
    "multivectors": problem.multivectors.keys().collect::<Vec<_>>(),
    "operator_terms": dp.as_ref().map_or(0, |d| d.terms().len()),
  });
  let summary = format!("validate: problem on a model of dimension {}", problem.model.dim());
  Ok(verdict("validate", report, true, summary))
}

fn operator_or_d(p: &Problem) -> Result<PerturbedDifferential> {
  match p.perturbed_d()? {
    Some(dp) => Ok(dp),
    None => build_perturbed_d(&p.model, RingDescriptor::scalars(), vec![]),
  }
}

fn identities(p: &Problem) -> Result<Outcome> {
  let dp = p.perturbed_d()?;
  let report = run_identities(&p.model, &p.forms, &p.multivectors, dp.as_ref())?;
  let failed = report.checks.iter().filter(|c| !c.pass).count();
  let summary = format!("identities: {} checks, {failed} failed", report.checks.len());
  Ok(verdict("identities", to_value(&report), report.all_pass, summary))
}

fn dims_vec(dims: &BTreeMap<i64, usize>) -> Value { to_value(dims) }

fn exotic(p: &Problem) -> Result<Outcome> {
  let dp = operator_or_d(p)?;
  let t = flat_subcomplex(&p.model, &dp)?;
  let spec = p.file.exotic.clone().unwrap_or_default();
  let values = p.even_assignment(&spec.assignment)?;
  let h = exotic_homology(&t, &values)?;
  let mut pass = true;
  let mut report = json!({
    "flat": {
      "grading": t.grading(),
      "dims": dims_vec(&t.dims()),
      "dim": t.dim(),
      "curvature_vanishes": t.curvature_vanishes(),
    },
    "assignment": values.iter().map(format_rational).collect::<Vec<_>>(),
    "homology": to_value(&h.report(&p.model)),
  });
  if let Some(l) = &spec.lemma1 {
    let r = lemma1_check(&p.model, p.form(&l.omega)?, p.multivector(&l.reeb)?)?;
    pass &= r.pass;
    report["lemma1"] = to_value(&r);
  }
  if let Some(name) = &spec.invariant {
    let inv = invariant_subcomplex(&p.model, p.multivector(name)?)?;
    let hi = exotic_homology(&inv, &[])?;
    report["invariant"] = json!({ "field": name, "dims": dims_vec(&inv.dims()), "homology": dims_vec(&hi.dims()) });
  }
  let summary = format!("exotic: flat subcomplex of dimension {}, homology {:?}", t.dim(), h.dims().values().collect::<Vec<_>>());
  Ok(verdict("exotic", report, pass, summary))
}

fn exact_seq(p: &Problem) -> Result<Outcome> {
  let spec = p.file.exact_seq.as_ref().ok_or_else(|| Error::Schema("missing `exact_seq` section".into()))?;
  let theta = spec.theta.as_deref().map(|n| p.form(n)).transpose()?;
  let r = theorem1_sequence(&p.model, p.form(&spec.omega)?, p.multivector(&spec.reeb)?, theta)?;
  let dims: Vec<usize> = r.nodes.iter().map(|n| n.dim).collect();
  let summary = format!("exact-seq: node dims {dims:?}, exact {}", r.exact);
  Ok(verdict("exact-seq", to_value(&r), r.exact, summary))
}

fn ss(p: &Problem, samples: Option<&str>, max_page: Option<usize>) -> Result<Outcome> {
  let spec = p.file.ss.clone().unwrap_or_default();
  let dp = p.perturbed_d()?.ok_or_else(|| Error::Schema("ss needs an `operator` section".into()))?;
  let t = flat_subcomplex(&p.model, &dp)?;
  let c = PerturbedComplex::from_flat(&p.model, &t, &dp.perturbation()?)?;
  let (report, _) = spectral_sequence(&c, max_page.or(spec.max_page))?;
  let samples: Vec<Rational> = match samples {
    Some(s) => parse_samples(s)?,
    None if spec.samples.is_empty() => parse_samples("1,2,-3")?,
    None => spec.samples.iter().map(|s| crate::algebra::parse_rational(s)).collect::<Result<_>>()?,
  };
  let comparison = perturbed_homology_compare(&c, &samples, report.e_infinity_total)?;
  let pass = report.certified
    && report.squares_vanish
    && report.recursion_holds
    && report.euler_constant
    && report.massey.mismatches.is_empty()
    && comparison.pass;
  let summary = format!(
    "ss: {} pages, E_inf total {}, comparison {}",
    report.pages.len(),
    report.e_infinity_total,
    if comparison.pass { "pass" } else { "fail" }
  );
  Ok(verdict("ss", json!({ "spectral": to_value(&report), "comparison": to_value(&comparison) }), pass, summary))
}

/// `Σ u_i a_i` over the frequency-zero coefficients of `u`.
fn pairing(u: &Form, a: &[Rational]) -> Rational {
  let n = u.dim();
  (0..n)
    .filter_map(|i| {
      let m = FormMonomial::new(vec![0; n], &[i + 1]).ok()?;
      u.coefficient(&m).map(|c| c * &a[i])
    })
    .fold(Rational::zero(), |acc, x| acc + x)
}

fn dynamics(p: &Problem) -> Result<Outcome> {
  let spec = p.file.dynamics.as_ref().ok_or_else(|| Error::Schema("missing `dynamics` section".into()))?;
  let x = p.multivector(&spec.field)?;
  let a = rotation_cycle(&p.model, x)?;
  let lemma6 = lemma6_check(&p.model, x)?;
  let mut pass = lemma6.pass;
  let mut pairings = Vec::new();
  for name in &spec.forms {
    let u = p.form(name)?;
    let value = d2_evaluation(&p.model, x, u)?;
    let expected = pairing(u, &a);
    pass &= value == expected;
    pairings.push(json!({
      "form": name,
      "d2": format_rational(&value),
      "pairing": format_rational(&expected),
      "agree": value == expected,
    }));
  }
  let summary = format!("dynamics: d2 rank {}, {}", lemma6.d2_rank, lemma6.lemma6);
  let mut report = to_value(&lemma6);
  report["pairings"] = Value::Array(pairings);
  Ok(verdict("dynamics", report, pass, summary))
}

fn equivariant(p: &Problem, cutoff: Option<usize>) -> Result<Outcome> {
  let spec = p.file.equivariant.as_ref().ok_or_else(|| Error::Schema("missing `equivariant` section".into()))?;
  let cutoff = cutoff
    .or(spec.cutoff)
    .ok_or_else(|| Error::Schema("the polynomial cutoff is required (`cutoff` or --cutoff)".into()))?;
  let fields = spec.fields.iter().map(|n| p.multivector(n).cloned()).collect::<Result<Vec<_>>>()?;
  let r = equivariant_cohomology(&CartanComplex::build(&p.model, &fields, cutoff)?)?;
  let next = equivariant_cohomology(&CartanComplex::build(&p.model, &fields, cutoff + 1)?)?;
  let stable = next.dims[..r.dims.len()] == r.dims[..];
  let summary = format!("equivariant: dims {:?} through degree {}", r.dims, r.truncation_safe_through);
  let mut report = to_value(&r);
  report["next_cutoff_dims"] = to_value(&next.dims);
  report["stable_under_cutoff_increase"] = Value::Bool(stable);
  Ok(verdict("equivariant", report, stable, summary))
}
