//! Rotation cycles of constant fields on tori and the special differential
//! `d_2 = ι_X : H¹_inv → H⁰_inv`.

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{Rational, SparseMatrix, SparseVector};
use crate::error::{Error, Result};
use crate::flat::{exotic_homology, invariant_subcomplex};
use crate::fock::operator::vector_form;
use crate::fock::{apply_d, contract, lie_derivative, Form, FormMonomial, MultiVector};
use crate::model::{Model, ModelKind};

/// Coordinates of the rotation cycle in the basis `[dx^1], …, [dx^n]` of `H_1`. For a
/// linear flow the trajectory average is the field's constant vector.
pub fn rotation_cycle(model: &Model, x: &MultiVector) -> Result<Vec<Rational>> {
  if model.kind() != ModelKind::Torus {
    return Err(Error::Unsupported("rotation cycles are computed on torus models only".into()));
  }
  if x.dim() != model.dim() {
    return Err(Error::DimensionMismatch(format!("field of dimension {} on a model of dimension {}", x.dim(), model.dim())));
  }
  x.constant_components()
    .ok_or_else(|| Error::Unsupported("rotation cycles need a constant order-1 field".into()))
}

/// The constant `ι_X u` for a closed `∇_X`-invariant 1-form `u`.
pub fn d2_evaluation(model: &Model, x: &MultiVector, u: &Form) -> Result<Rational> {
  if u.degree().is_some_and(|k| k != 1) {
    return Err(Error::Precondition(format!("{u} is not a 1-form")));
  }
  if !apply_d(model, u)?.is_zero() {
    return Err(Error::Precondition(format!("{u} is not closed")));
  }
  if !lie_derivative(model, x, u)?.is_zero() {
    return Err(Error::Precondition(format!("{u} is not invariant under the flow")));
  }
  let value = contract(model, x, u)?;
  let vacuum = FormMonomial::vacuum(model.dim());
  if value.terms().any(|(m, _)| *m != vacuum) {
    return Err(Error::Structural(format!("u(X) = {value} is not constant")));
  }
  Ok(value.coefficient(&vacuum).cloned().unwrap_or_else(Rational::zero))
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma6Report {
  pub rotation_cycle: Vec<String>,
  pub d2_rank:        usize,
  pub lemma6:         String,
  pub pass:           bool,
}

/// When the rotation cycle vanishes `d_2` must vanish on `H¹_inv`; otherwise its rank is
/// reported without a verdict.
pub fn lemma6_check(model: &Model, x: &MultiVector) -> Result<Lemma6Report> {
  let a = rotation_cycle(model, x)?;
  let t = invariant_subcomplex(model, x)?;
  let h = exotic_homology(&t, &[])?;
  let values = h
    .groups
    .get(&1)
    .map(|q| q.representatives().iter().map(|v| d2_evaluation(model, x, &vector_form(model, v))).collect::<Result<Vec<_>>>())
    .transpose()?
    .unwrap_or_default();
  let row = SparseMatrix::from_columns(1, values.iter().map(|v| SparseVector::from_dense(std::slice::from_ref(v))).collect())?;
  let d2_rank = row.rank();
  let cycle_zero = a.iter().all(Zero::is_zero);
  let (lemma6, pass) = match (cycle_zero, d2_rank) {
    (true, 0) => ("pass".to_string(), true),
    (true, _) => ("fail".to_string(), false),
    (false, _) => ("not-applicable(a≠0)".to_string(), true),
  };
  Ok(Lemma6Report { rotation_cycle: a.iter().map(ToString::to_string).collect(), d2_rank, lemma6, pass })
}
