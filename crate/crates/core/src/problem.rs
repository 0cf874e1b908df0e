//! Problem files: a model plus named forms, fields, a perturbed differential and the
//! parameters of each command, read from JSON with unknown keys rejected.

use std::collections::BTreeMap;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{parse_rational, Rational, RingDescriptor};
use crate::error::{Error, Result};
use crate::fock::operator::{build_perturbed_d, Param, PerturbedDifferential, TermKind};
use crate::fock::{form_from_literals, multivector_from_literals, Form, MultiVector, TermLiteral};
use crate::model::{Model, ModelFile};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
  #[serde(default)]
  pub odd:    Vec<String>,
  #[serde(default)]
  pub even:   Vec<String>,
  #[serde(default = "default_ring_cutoff")]
  pub cutoff: u32,
}

fn default_ring_cutoff() -> u32 { 2 }

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
  Even,
  Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKindSpec {
  Wedge,
  Contract,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
  /// A rational literal or the name of a ring generator.
  pub param:  String,
  pub parity: Parity,
  pub kind:   TermKindSpec,
  /// Name of a form (wedge) or multivector (contract).
  #[serde(rename = "ref")]
  pub target: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
  #[serde(default)]
  pub terms: Vec<TermSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaReeb {
  pub omega: String,
  pub reeb:  String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExoticSpec {
  /// Values of the ring generators; generators left out are zero.
  #[serde(default)]
  pub assignment: BTreeMap<String, String>,
  #[serde(default)]
  pub lemma1:     Option<OmegaReeb>,
  /// A field whose invariant subcomplex is also reported.
  #[serde(default)]
  pub invariant:  Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactSeqSpec {
  pub omega: String,
  pub reeb:  String,
  #[serde(default)]
  pub theta: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsSpec {
  #[serde(default)]
  pub samples:  Vec<String>,
  #[serde(default)]
  pub max_page: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
  pub field: String,
  #[serde(default)]
  pub forms: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivariantSpec {
  pub fields: Vec<String>,
  #[serde(default)]
  pub cutoff: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
  #[serde(default)]
  pub model:        Option<ModelFile>,
  /// Path of a model file, relative to the problem file.
  #[serde(default)]
  pub model_file:   Option<String>,
  #[serde(default)]
  pub ring:         RingSpec,
  #[serde(default)]
  pub forms:        BTreeMap<String, Vec<TermLiteral>>,
  #[serde(default)]
  pub multivectors: BTreeMap<String, Vec<TermLiteral>>,
  #[serde(default)]
  pub operator:     Option<OperatorSpec>,
  #[serde(default)]
  pub exotic:       Option<ExoticSpec>,
  #[serde(default)]
  pub exact_seq:    Option<ExactSeqSpec>,
  #[serde(default)]
  pub ss:           Option<SsSpec>,
  #[serde(default)]
  pub dynamics:     Option<DynamicsSpec>,
  #[serde(default)]
  pub equivariant:  Option<EquivariantSpec>,
}

impl ProblemFile {
  pub fn from_json(text: &str) -> Result<Self> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("problem file: {e}")))
  }
}

/// A problem file with its model built and every name resolved.
#[derive(Clone, Debug)]
pub struct Problem {
  pub file:         ProblemFile,
  pub model:        Model,
  pub ring:         RingDescriptor,
  pub forms:        BTreeMap<String, Form>,
  pub multivectors: BTreeMap<String, MultiVector>,
}

pub fn read_text(path: &Path) -> Result<String> {
  std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

impl Problem {
  /// `base` resolves a relative `model_file`.
  pub fn from_file(file: ProblemFile, base: &Path) -> Result<Self> {
    let model_file = match (&file.model, &file.model_file) {
      (Some(m), None) => m.clone(),
      (None, Some(p)) => ModelFile::from_json(&read_text(&base.join(p))?)?,
      (Some(_), Some(_)) => return Err(Error::Schema("give either `model` or `model_file`, not both".into())),
      (None, None) => return Err(Error::Schema("missing `model` or `model_file`".into())),
    };
    let model = model_file.build()?;
    let n = model.dim();
    let mut names = std::collections::BTreeSet::new();
    for name in file.ring.odd.iter().chain(&file.ring.even) {
      if !names.insert(name) {
        return Err(Error::Schema(format!("ring generator `{name}` declared twice")));
      }
      if parse_rational(name).is_ok() {
        return Err(Error::Schema(format!("ring generator name `{name}` reads as a number")));
      }
    }
    let ring = RingDescriptor::new(file.ring.odd.len(), file.ring.even.len(), file.ring.cutoff)?;
    let forms = file
      .forms
      .iter()
      .map(|(name, lits)| {
        let f = form_from_literals(n, lits).map_err(|e| Error::Schema(format!("form `{name}`: {e}")))?;
        for (m, _) in f.terms() {
          model.check_monomial(m)?;
        }
        Ok((name.clone(), f))
      })
      .collect::<Result<BTreeMap<_, _>>>()?;
    let multivectors = file
      .multivectors
      .iter()
      .map(|(name, lits)| {
        let x = multivector_from_literals(n, lits).map_err(|e| Error::Schema(format!("multivector `{name}`: {e}")))?;
        for (m, _) in x.terms() {
          model.check_monomial(m)?;
        }
        Ok((name.clone(), x))
      })
      .collect::<Result<BTreeMap<_, _>>>()?;
    let problem = Self { file, model, ring, forms, multivectors };
    problem.check_references()?;
    Ok(problem)
  }

  pub fn load(path: &Path) -> Result<Self> {
    let file = ProblemFile::from_json(&read_text(path)?)?;
    Self::from_file(file, path.parent().unwrap_or(Path::new(".")))
  }

  fn check_references(&self) -> Result<()> {
    let f = &self.file;
    let mut forms: Vec<&String> = Vec::new();
    let mut fields: Vec<&String> = Vec::new();
    if let Some(op) = &f.operator {
      for t in &op.terms {
        match t.kind {
          TermKindSpec::Wedge => forms.push(&t.target),
          TermKindSpec::Contract => fields.push(&t.target),
        }
      }
    }
    if let Some(e) = &f.exotic {
      if let Some(l) = &e.lemma1 {
        forms.push(&l.omega);
        fields.push(&l.reeb);
      }
      fields.extend(&e.invariant);
    }
    if let Some(e) = &f.exact_seq {
      forms.push(&e.omega);
      fields.push(&e.reeb);
      forms.extend(&e.theta);
    }
    if let Some(dy) = &f.dynamics {
      fields.push(&dy.field);
      forms.extend(&dy.forms);
    }
    if let Some(eq) = &f.equivariant {
      fields.extend(&eq.fields);
    }
    if let Some(name) = forms.into_iter().find(|n| !self.forms.contains_key(*n)) {
      return Err(Error::Schema(format!("unknown form `{name}`")));
    }
    if let Some(name) = fields.into_iter().find(|n| !self.multivectors.contains_key(*n)) {
      return Err(Error::Schema(format!("unknown multivector `{name}`")));
    }
    Ok(())
  }

  pub fn form(&self, name: &str) -> Result<&Form> {
    self.forms.get(name).ok_or_else(|| Error::Schema(format!("unknown form `{name}`")))
  }

  pub fn multivector(&self, name: &str) -> Result<&MultiVector> {
    self.multivectors.get(name).ok_or_else(|| Error::Schema(format!("unknown multivector `{name}`")))
  }

  fn param(&self, term: &TermSpec) -> Result<Param> {
    if let Ok(r) = parse_rational(&term.param) {
      if term.parity == Parity::Odd {
        return Err(Error::ParityViolation {
          term:   term.target.clone(),
          reason: format!("numeric coefficient {r} is even but declared odd"),
        });
      }
      return Ok(Param::Numeric(r));
    }
    let lookup = |names: &[String], odd: bool| {
      names.iter().position(|n| *n == term.param).map(|index| Param::Generator { name: term.param.clone(), odd, index })
    };
    let param = lookup(&self.file.ring.odd, true)
      .or_else(|| lookup(&self.file.ring.even, false))
      .ok_or_else(|| Error::Schema(format!("unknown ring generator `{}`", term.param)))?;
    if param.is_odd() != (term.parity == Parity::Odd) {
      return Err(Error::Schema(format!("generator `{}` is declared with the other parity in the ring", term.param)));
    }
    Ok(param)
  }

  /// `d'` from the operator section, or `None` if the file has none.
  pub fn perturbed_d(&self) -> Result<Option<PerturbedDifferential>> {
    let Some(op) = &self.file.operator else { return Ok(None) };
    let terms = op
      .terms
      .iter()
      .map(|t| {
        let kind = match t.kind {
          TermKindSpec::Wedge => TermKind::Wedge(self.form(&t.target)?.clone()),
          TermKindSpec::Contract => TermKind::Contract(self.multivector(&t.target)?.clone()),
        };
        Ok((t.target.clone(), self.param(t)?, kind))
      })
      .collect::<Result<Vec<_>>>()?;
    build_perturbed_d(&self.model, self.ring, terms).map(Some)
  }

  /// Values of the even generators in ring order. Odd generators can only be set to zero.
  pub fn even_assignment(&self, assignment: &BTreeMap<String, String>) -> Result<Vec<Rational>> {
    let ring = &self.file.ring;
    for (name, value) in assignment {
      let v = parse_rational(value)?;
      if ring.odd.contains(name) {
        if !v.is_zero() {
          return Err(Error::Schema(format!("odd generator `{name}` can only be assigned 0")));
        }
      } else if !ring.even.contains(name) {
        return Err(Error::Schema(format!("assignment to unknown generator `{name}`")));
      }
    }
    ring
      .even
      .iter()
      .map(|name| assignment.get(name).map_or_else(|| Ok(Rational::zero()), |v| parse_rational(v)))
      .collect()
  }
}

/// Parses `"1,2,-3"` into rationals.
pub fn parse_samples(text: &str) -> Result<Vec<Rational>> {
  text.split(',').filter(|s| !s.trim().is_empty()).map(parse_rational).collect()
}
