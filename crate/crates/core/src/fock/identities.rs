//! Operator identities of the fermionic calculus checked as exact matrix equalities.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{Rational, RingMonomial};
use crate::error::{Error, Result};
use crate::fock::calculus::{apply_d, contract, wedge};
use crate::fock::form::{Form, MultiVector};
use crate::fock::operator::{
  anticommutator, commutator, FormOperator, Param, PerturbedDifferential, RingOperator, TermKind,
};
use crate::model::Model;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
  pub name:    String,
  pub pass:    bool,
  #[serde(skip_serializing_if = "Option::is_none")]
  pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
  pub checks:   Vec<IdentityCheck>,
  pub all_pass: bool,
}

fn check(name: impl Into<String>, witness: Option<String>) -> IdentityCheck {
  IdentityCheck { name: name.into(), pass: witness.is_none(), witness }
}

fn first_difference(model: &Model, a: &FormOperator, b: &FormOperator) -> Option<String> {
  let diff = a.matrix().minus(b.matrix()).ok()?;
  (0..diff.ncols()).find(|&j| !diff.column(j).is_zero()).map(|j| model.basis()[j].to_string())
}

fn one() -> Rational { Rational::from_integer(1.into()) }

/// `a^i a^+_j + a^+_j a^i = δ^i_j`, `a^i a^j = -a^j a^i`, `a^+_i a^+_j = -a^+_j a^+_i`.
pub fn fermionic_relations(model: &Model) -> Result<Vec<IdentityCheck>> {
  let n = model.dim();
  let id = FormOperator::identity(model.form_space_dim());
  let zero = FormOperator::zero(model.form_space_dim());
  let creation = (1..=n).map(|i| FormOperator::creation(model, i)).collect::<Result<Vec<_>>>()?;
  let annihilation = (1..=n).map(|i| FormOperator::annihilation(model, i)).collect::<Result<Vec<_>>>()?;
  let (mut mixed, mut cc, mut aa) = (None, None, None);
  for i in 0..n {
    for j in 0..n {
      let expected = if i == j { &id } else { &zero };
      if mixed.is_none() && anticommutator(&creation[i], &annihilation[j])?.matrix() != expected.matrix() {
        mixed = Some(format!("(i, j) = ({}, {})", i + 1, j + 1));
      }
      if cc.is_none() && !anticommutator(&creation[i], &creation[j])?.is_zero() {
        cc = Some(format!("(i, j) = ({}, {})", i + 1, j + 1));
      }
      if aa.is_none() && !anticommutator(&annihilation[i], &annihilation[j])?.is_zero() {
        aa = Some(format!("(i, j) = ({}, {})", i + 1, j + 1));
      }
    }
  }
  Ok(vec![
    check("a^i a^+_j + a^+_j a^i = delta^i_j", mixed),
    check("a^i a^j + a^j a^i = 0", cc),
    check("a^+_i a^+_j + a^+_j a^+_i = 0", aa),
  ])
}

fn wedge_or_skip(model: &Model, a: &Form, b: &Form) -> Result<Option<Form>> {
  match wedge(model, a, b) {
    Ok(f) => Ok(Some(f)),
    Err(Error::WindowOverflow { .. }) => Ok(None),
    Err(e) => Err(e),
  }
}

fn sign(k: usize) -> Rational { if k % 2 == 0 { one() } else { -one() } }

/// `d(a ∧ b) = da ∧ b + (-1)^{|a|} a ∧ db` for a homogeneous form against every basis monomial.
pub fn leibniz(model: &Model, a: &Form) -> Result<Option<String>> {
  let Some(k) = a.degree() else { return Ok(None) };
  let da = apply_d(model, a)?;
  for m in model.basis() {
    let b = Form::monomial(m.clone(), one());
    let (Some(ab), Some(dab), Some(adb)) =
      (wedge_or_skip(model, a, &b)?, wedge_or_skip(model, &da, &b)?, wedge_or_skip(model, a, &apply_d(model, &b)?)?)
    else {
      continue;
    };
    if apply_d(model, &ab)? != dab.plus(&adb.scaled(&sign(k))) {
      return Ok(Some(m.to_string()));
    }
  }
  Ok(None)
}

/// `ι_X(a ∧ b) = ι_X a ∧ b + (-1)^{|a|} a ∧ ι_X b` for an order-1 field.
pub fn antiderivation(model: &Model, x: &MultiVector, a: &Form) -> Result<Option<String>> {
  let Some(k) = a.degree() else { return Ok(None) };
  let xa = contract(model, x, a)?;
  for m in model.basis() {
    let b = Form::monomial(m.clone(), one());
    let (Some(ab), Some(left), Some(right)) = (
      wedge_or_skip(model, a, &b)?,
      wedge_or_skip(model, &xa, &b)?,
      wedge_or_skip(model, a, &contract(model, x, &b)?)?,
    ) else {
      continue;
    };
    if contract(model, x, &ab)? != left.plus(&right.scaled(&sign(k))) {
      return Ok(Some(m.to_string()));
    }
  }
  Ok(None)
}

/// The curvature predicted by `(d + Σλω^* + Σμ X̂)^2 = Σλ(dω) + Σμ∇_X + Σλμ ω(X)` when every
/// term is a 1-form wedge or an order-1 contraction with an even coefficient.
pub fn predicted_curvature(model: &Model, dp: &PerturbedDifferential) -> Result<Option<RingOperator>> {
  let ring = *dp.ring();
  let applicable = dp.terms().iter().all(|t| {
    !t.param.is_odd()
      && match &t.kind {
        TermKind::Wedge(omega) => omega.is_zero() || omega.degree() == Some(1),
        TermKind::Contract(x) => x.order() == 1,
      }
  });
  if !applicable {
    return Ok(None);
  }
  let mut out = RingOperator::zero(ring, model.form_space_dim());
  let monomial = |p: &Param| -> Result<(RingMonomial, Rational)> { p.monomial(&ring) };
  for t in dp.terms() {
    let (m, c) = monomial(&t.param)?;
    let op = match &t.kind {
      TermKind::Wedge(omega) => FormOperator::wedge_operator(model, &apply_d(model, omega)?)?,
      TermKind::Contract(x) => FormOperator::lie_derivative_operator(model, x)?,
    };
    out.add(m, op.scaled(&c))?;
  }
  for s in dp.terms() {
    for t in dp.terms() {
      let (TermKind::Wedge(omega), TermKind::Contract(x)) = (&s.kind, &t.kind) else { continue };
      let (ms, cs) = monomial(&s.param)?;
      let (mt, ct) = monomial(&t.param)?;
      let Some((neg, m)) = ms.mul(&mt, &ring) else { continue };
      let c = if neg { -(cs * ct) } else { cs * ct };
      out.add(m, FormOperator::wedge_operator(model, &contract(model, x, omega)?)?.scaled(&c))?;
    }
  }
  Ok(Some(out))
}

/// The full identity suite for a model, its named forms and fields, and an optional `d'`.
pub fn run_identities(
  model: &Model,
  forms: &BTreeMap<String, Form>,
  fields: &BTreeMap<String, MultiVector>,
  dp: Option<&PerturbedDifferential>,
) -> Result<IdentityReport> {
  let mut checks = fermionic_relations(model)?;
  let d = FormOperator::d(model);
  let dd = d.compose(&d)?;
  checks.push(check("d^2 = 0", (0..dd.dim()).find(|&j| !dd.matrix().column(j).is_zero()).map(|j| model.basis()[j].to_string())));
  for (name, x) in fields.iter().filter(|(_, x)| x.order() == 1) {
    let xh = FormOperator::contraction_operator(model, x)?;
    let lie = FormOperator::lie_derivative_operator(model, x)?;
    checks.push(check(format!("d {name} + {name} d = Lie({name})"), first_difference(model, &anticommutator(&d, &xh)?, &lie)));
    checks.push(check(format!("{name} {name} = 0"), first_difference(model, &xh.compose(&xh)?, &FormOperator::zero(xh.dim()))));
  }
  for (name, omega) in forms {
    let Some(odd) = omega.form_parity() else { continue };
    let op = FormOperator::wedge_operator(model, omega)?;
    let bracket = if odd { anticommutator(&d, &op)? } else { commutator(&d, &op)? };
    let expected = FormOperator::wedge_operator(model, &apply_d(model, omega)?)?;
    checks.push(check(format!("[d, {name}*] = (d{name})*"), first_difference(model, &bracket, &expected)));
    checks.push(check(format!("Leibniz rule for {name}"), leibniz(model, omega)?));
    for (xname, x) in fields.iter().filter(|(_, x)| x.order() == 1) {
      checks.push(check(format!("contraction by {xname} is an antiderivation on {name}"), antiderivation(model, x, omega)?));
      if omega.degree() == Some(1) {
        let xh = FormOperator::contraction_operator(model, x)?;
        let pairing = FormOperator::wedge_operator(model, &contract(model, x, omega)?)?;
        checks.push(check(
          format!("{name}* {xname} + {xname} {name}* = {name}({xname})"),
          first_difference(model, &anticommutator(&op, &xh)?, &pairing),
        ));
      }
    }
  }
  if let Some(dp) = dp {
    if let Some(expected) = predicted_curvature(model, dp)? {
      let diff = dp.curvature().minus(&expected)?;
      let witness = diff.components().iter().next().map(|(m, op)| {
        let j = (0..op.dim()).find(|&j| !op.matrix().column(j).is_zero()).unwrap_or(0);
        format!("coefficient {m} on {}", model.basis()[j])
      });
      checks.push(check("(d')^2 = lambda (d omega) + mu Lie(X) + lambda mu omega(X)", witness));
    }
  }
  let all_pass = checks.iter().all(|c| c.pass);
  Ok(IdentityReport { checks, all_pass })
}
