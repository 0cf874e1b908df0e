//! Linear operators on a model's form space: `d`, wedge and contraction operators, Lie
//! derivatives, ring-valued operators and the perturbed differential `d'`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::algebra::ring::Coefficient;
use crate::algebra::{GradedRingElement, Rational, RingDescriptor, RingMonomial, SparseMatrix, SparseVector};
use crate::error::{Error, Result};
use crate::fock::calculus::{contract, lie_derivative, wedge};
use crate::fock::form::{Form, FormMonomial, MultiVector};
use crate::model::Model;

/// A parity-homogeneous endomorphism of the full form space, stored as one sparse matrix
/// in the model's basis order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormOperator {
  odd:    bool,
  shift:  Option<i64>,
  matrix: SparseMatrix,
}

fn form_to_vector(model: &Model, f: &Form) -> Result<SparseVector> {
  let mut v = SparseVector::new();
  for (m, c) in f.terms() {
    let i = model.index_of(m).ok_or_else(|| Error::WindowOverflow { freq: m.freq().to_vec() })?;
    v.add_entry(i, c.clone());
  }
  Ok(v)
}

/// Coordinates of a rational form in the model basis.
pub fn form_vector(model: &Model, f: &Form) -> Result<SparseVector> {
  if f.dim() != model.dim() {
    return Err(Error::DimensionMismatch(format!("form of dimension {} in a model of dimension {}", f.dim(), model.dim())));
  }
  form_to_vector(model, f)
}

/// The form with the given coordinates.
pub fn vector_form(model: &Model, v: &SparseVector) -> Form {
  let mut f = Form::zero(model.dim());
  for (i, c) in v.iter() {
    f.add_term(model.basis()[i].clone(), c.clone());
  }
  f
}

impl FormOperator {
  /// Builds an operator column by column from its action on basis monomials.
  pub fn from_action(
    model: &Model,
    odd: bool,
    shift: Option<i64>,
    action: impl Fn(&Form) -> Result<Form> + Sync,
  ) -> Result<FormOperator> {
    let cols = model
      .basis()
      .par_iter()
      .map(|m| action(&Form::monomial(m.clone(), Rational::from_integer(1.into()))).and_then(|f| form_to_vector(model, &f)))
      .collect::<Result<Vec<_>>>()?;
    let matrix = SparseMatrix::from_columns(model.form_space_dim(), cols)?;
    Ok(FormOperator { odd, shift, matrix })
  }

  pub fn from_matrix(odd: bool, shift: Option<i64>, matrix: SparseMatrix) -> Result<FormOperator> {
    if matrix.nrows() != matrix.ncols() {
      return Err(Error::DimensionMismatch(format!("operator matrix is {}x{}", matrix.nrows(), matrix.ncols())));
    }
    Ok(FormOperator { odd, shift, matrix })
  }

  pub fn zero(dim: usize) -> FormOperator { FormOperator { odd: false, shift: None, matrix: SparseMatrix::zeros(dim, dim) } }

  pub fn identity(dim: usize) -> FormOperator {
    FormOperator { odd: false, shift: Some(0), matrix: SparseMatrix::identity(dim) }
  }

  pub fn d(model: &Model) -> FormOperator {
    FormOperator { odd: true, shift: Some(1), matrix: model.d_matrix().clone() }
  }

  /// `u ↦ ω ∧ u`
  pub fn wedge_operator(model: &Model, omega: &Form) -> Result<FormOperator> {
    let odd = if omega.is_zero() {
      false
    } else {
      omega.form_parity().ok_or_else(|| Error::NotHomogeneous(format!("form {omega} mixes parities")))?
    };
    let shift = omega.degree().map(|k| k as i64);
    Self::from_action(model, odd, shift, |u| wedge(model, omega, u))
  }

  /// `u ↦ ι_X u`
  pub fn contraction_operator(model: &Model, x: &MultiVector) -> Result<FormOperator> {
    Self::from_action(model, x.order() % 2 == 1, Some(-(x.order() as i64)), |u| contract(model, x, u))
  }

  /// `u ↦ ∇_X u`, assembled form-wise through the Cartan formula.
  pub fn lie_derivative_operator(model: &Model, x: &MultiVector) -> Result<FormOperator> {
    Self::from_action(model, false, Some(0), |u| lie_derivative(model, x, u))
  }

  /// Creation operator `a^i` (wedge with `dx^i`), 1-based `i`.
  pub fn creation(model: &Model, i: usize) -> Result<FormOperator> {
    Self::wedge_operator(model, &Form::basic(model.dim(), &[i])?)
  }

  /// Annihilation operator `a^+_j` (contraction with `∂_j`), 1-based `j`.
  pub fn annihilation(model: &Model, j: usize) -> Result<FormOperator> {
    let x = MultiVector::from_terms(model.dim(), 1, [(FormMonomial::new(vec![0; model.dim()], &[j])?, Rational::from_integer(1.into()))])?;
    Self::contraction_operator(model, &x)
  }

  pub fn dim(&self) -> usize { self.matrix.ncols() }

  pub fn is_odd(&self) -> bool { self.odd }

  pub fn shift(&self) -> Option<i64> { self.shift }

  pub fn matrix(&self) -> &SparseMatrix { &self.matrix }

  pub fn is_zero(&self) -> bool { self.matrix.is_zero() }

  pub fn apply(&self, v: &SparseVector) -> SparseVector { self.matrix.apply(v) }

  pub fn apply_form(&self, model: &Model, f: &Form) -> Result<Form> {
    Ok(vector_form(model, &self.apply(&form_vector(model, f)?)))
  }

  /// The block from degree `from` to degree `to`.
  pub fn block(&self, model: &Model, from: usize, to: usize) -> SparseMatrix {
    let rows: Vec<usize> = model.degree_range(to).collect();
    let cols: Vec<usize> = model.degree_range(from).collect();
    self.matrix.submatrix(&rows, &cols)
  }

  fn combine_meta(&self, other: &FormOperator) -> Result<(bool, Option<i64>)> {
    if self.is_zero() {
      return Ok((other.odd, other.shift));
    }
    if other.is_zero() {
      return Ok((self.odd, self.shift));
    }
    if self.odd != other.odd {
      return Err(Error::NotHomogeneous("sum of an even and an odd operator".into()));
    }
    Ok((self.odd, if self.shift == other.shift { self.shift } else { None }))
  }

  pub fn plus(&self, other: &FormOperator) -> Result<FormOperator> {
    let (odd, shift) = self.combine_meta(other)?;
    Ok(FormOperator { odd, shift, matrix: self.matrix.plus(&other.matrix)? })
  }

  pub fn minus(&self, other: &FormOperator) -> Result<FormOperator> { self.plus(&other.scaled(&-Rational::from_integer(1.into()))) }

  pub fn scaled(&self, c: &Rational) -> FormOperator {
    FormOperator { odd: self.odd, shift: self.shift, matrix: self.matrix.scaled(c) }
  }

  /// `self ∘ other`
  pub fn compose(&self, other: &FormOperator) -> Result<FormOperator> {
    let shift = match (self.shift, other.shift) {
      (Some(a), Some(b)) => Some(a + b),
      _ => None,
    };
    Ok(FormOperator { odd: self.odd ^ other.odd, shift, matrix: self.matrix.compose(&other.matrix)? })
  }
}

/// `pq + qp`
pub fn anticommutator(p: &FormOperator, q: &FormOperator) -> Result<FormOperator> { p.compose(q)?.plus(&q.compose(p)?) }

/// `pq - qp`
pub fn commutator(p: &FormOperator, q: &FormOperator) -> Result<FormOperator> { p.compose(q)?.minus(&q.compose(p)?) }

pub fn operator_square(p: &FormOperator) -> Result<FormOperator> {
  if !p.is_odd() && !p.is_zero() {
    return Err(Error::Precondition("operator_square expects an odd operator".into()));
  }
  p.compose(p)
}

/// `Σ m ⊗ O_m` acting on R-valued forms by `(m ⊗ O)(p ⊗ v) = (-1)^{|O||p|} mp ⊗ Ov`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingOperator {
  ring:       RingDescriptor,
  dim:        usize,
  components: BTreeMap<RingMonomial, FormOperator>,
}

impl RingOperator {
  pub fn zero(ring: RingDescriptor, dim: usize) -> Self { Self { ring, dim, components: BTreeMap::new() } }

  pub fn from_operator(ring: RingDescriptor, op: FormOperator) -> Self {
    let mut out = Self::zero(ring, op.dim());
    out.add(RingMonomial::one(&ring), op).expect("single component");
    out
  }

  pub fn ring(&self) -> &RingDescriptor { &self.ring }

  pub fn dim(&self) -> usize { self.dim }

  pub fn components(&self) -> &BTreeMap<RingMonomial, FormOperator> { &self.components }

  pub fn component(&self, m: &RingMonomial) -> Option<&FormOperator> { self.components.get(m) }

  pub fn is_zero(&self) -> bool { self.components.is_empty() }

  pub fn add(&mut self, m: RingMonomial, op: FormOperator) -> Result<()> {
    if op.dim() != self.dim {
      return Err(Error::DimensionMismatch(format!("operator of size {} added to one of size {}", op.dim(), self.dim)));
    }
    let sum = match self.components.remove(&m) {
      Some(old) => old.plus(&op)?,
      None => op,
    };
    if !sum.is_zero() {
      self.components.insert(m, sum);
    }
    Ok(())
  }

  pub fn plus(&self, other: &RingOperator) -> Result<RingOperator> {
    let mut out = self.clone();
    for (m, op) in &other.components {
      out.add(m.clone(), op.clone())?;
    }
    Ok(out)
  }

  pub fn minus(&self, other: &RingOperator) -> Result<RingOperator> {
    let mut out = self.clone();
    for (m, op) in &other.components {
      out.add(m.clone(), op.scaled(&-Rational::from_integer(1.into())))?;
    }
    Ok(out)
  }

  /// `self ∘ other` with the Koszul sign `(-1)^{|O||n|}` for `(m ⊗ O)(n ⊗ Q)`.
  pub fn compose(&self, other: &RingOperator) -> Result<RingOperator> {
    let mut out = Self::zero(self.ring, self.dim);
    for (m, o) in &self.components {
      for (n, q) in &other.components {
        let Some((neg, mn)) = m.mul(n, &self.ring) else { continue };
        let neg = neg ^ (o.is_odd() && n.is_odd());
        let oq = o.compose(q)?;
        out.add(mn, if neg { oq.scaled(&-Rational::from_integer(1.into())) } else { oq })?;
      }
    }
    Ok(out)
  }

  pub fn square(&self) -> Result<RingOperator> { self.compose(self) }

  /// Substitutes values for the generators; monomials with an odd generator vanish.
  pub fn evaluate(&self, even_values: &[Rational]) -> Result<FormOperator> {
    if even_values.len() != self.ring.even {
      return Err(Error::DimensionMismatch(format!("{} values for {} even generators", even_values.len(), self.ring.even)));
    }
    let mut out = FormOperator::zero(self.dim);
    for (m, op) in &self.components {
      if !m.odd_indices().is_empty() {
        continue;
      }
      let mut v = Rational::from_integer(1.into());
      for (x, &e) in even_values.iter().zip(m.even_exponents()) {
        for _ in 0..e {
          v *= x;
        }
      }
      out = out.plus(&op.scaled(&v))?;
    }
    Ok(out)
  }
}

/// Coefficient of one term of `d'`: a number or a ring generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Param {
  Numeric(Rational),
  /// `index` is 0-based among generators of the same parity.
  Generator { name: String, odd: bool, index: usize },
}

impl Param {
  pub fn is_odd(&self) -> bool { matches!(self, Param::Generator { odd: true, .. }) }

  pub fn monomial(&self, ring: &RingDescriptor) -> Result<(RingMonomial, Rational)> {
    match self {
      Param::Numeric(r) => Ok((RingMonomial::one(ring), r.clone())),
      Param::Generator { odd: true, index, .. } => Ok((RingMonomial::odd_generator(ring, *index)?, Rational::from_integer(1.into()))),
      Param::Generator { odd: false, index, .. } => {
        Ok((RingMonomial::even_generator(ring, *index)?, Rational::from_integer(1.into())))
      },
    }
  }

  pub fn element(&self, ring: &RingDescriptor) -> Result<GradedRingElement> {
    let (m, c) = self.monomial(ring)?;
    Ok(GradedRingElement::monomial(*ring, m, c))
  }
}

impl fmt::Display for Param {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match self {
      Param::Numeric(r) => write!(f, "{r}"),
      Param::Generator { name, .. } => write!(f, "{name}"),
    }
  }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TermKind {
  Wedge(Form),
  Contract(MultiVector),
}

#[derive(Clone, Debug)]
pub struct PerturbationTerm {
  pub label: String,
  pub param: Param,
  pub kind:  TermKind,
  pub op:    FormOperator,
}

/// `d' = d + Σ param_i · op_i` together with its curvature `(d')^2`.
#[derive(Clone, Debug)]
pub struct PerturbedDifferential {
  ring:      RingDescriptor,
  d:         FormOperator,
  terms:     Vec<PerturbationTerm>,
  operator:  RingOperator,
  curvature: RingOperator,
}

pub fn build_perturbed_d(
  model: &Model,
  ring: RingDescriptor,
  terms: Vec<(String, Param, TermKind)>,
) -> Result<PerturbedDifferential> {
  let d = FormOperator::d(model);
  let mut operator = RingOperator::from_operator(ring, d.clone());
  let mut built = Vec::new();
  let mut wedge_sum: Form<GradedRingElement> = Form::zero(model.dim());
  for (label, param, kind) in terms {
    let op = match &kind {
      TermKind::Wedge(omega) => FormOperator::wedge_operator(model, omega).map_err(|e| match e {
        Error::NotHomogeneous(reason) => Error::ParityViolation { term: label.clone(), reason },
        other => other,
      })?,
      TermKind::Contract(x) => FormOperator::contraction_operator(model, x)?,
    };
    if param.is_odd() == op.is_odd() {
      return Err(Error::ParityViolation {
        term:   label,
        reason: format!(
          "coefficient {param} is {} and the operator is {}, so the term is even",
          if param.is_odd() { "odd" } else { "even" },
          if op.is_odd() { "odd" } else { "even" }
        ),
      });
    }
    let (m, c) = param.monomial(&ring)?;
    operator.add(m, op.scaled(&c))?;
    if let TermKind::Wedge(omega) = &kind {
      let coeff = param.element(&ring)?;
      for (mono, r) in omega.terms() {
        wedge_sum.add_term(mono.clone(), coeff.scaled(r));
      }
    }
    built.push(PerturbationTerm { label, param, kind, op });
  }
  if !wedge(model, &wedge_sum, &wedge_sum)?.is_zero() {
    return Err(Error::Structural("the wedge part of the perturbation does not square to zero".into()));
  }
  let curvature = operator.square()?;
  Ok(PerturbedDifferential { ring, d, terms: built, operator, curvature })
}

impl PerturbedDifferential {
  pub fn ring(&self) -> &RingDescriptor { &self.ring }

  pub fn d(&self) -> &FormOperator { &self.d }

  pub fn terms(&self) -> &[PerturbationTerm] { &self.terms }

  pub fn operator(&self) -> &RingOperator { &self.operator }

  pub fn curvature(&self) -> &RingOperator { &self.curvature }

  /// `P = Σ c_i op_i` with `c_i` the numeric value of a term, or 1 for a generator.
  pub fn perturbation(&self) -> Result<FormOperator> {
    let mut p = FormOperator::zero(self.d.dim());
    for t in &self.terms {
      let c = match &t.param {
        Param::Numeric(r) => r.clone(),
        Param::Generator { .. } => Rational::from_integer(1.into()),
      };
      p = p.plus(&t.op.scaled(&c))?;
    }
    Ok(p)
  }
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::algebra::rational::int;
  use crate::model::StructureConstant;

  fn h3() -> Model {
    Model::build_lie_algebra_model(3, &[StructureConstant { target: 3, j: 1, k: 2, coeff: int(1) }]).unwrap()
  }

  fn t2() -> Model { Model::build_torus_model(2, &[(-1, 1); 2]).unwrap() }

  fn field(n: usize, idx: usize) -> MultiVector {
    let mut c = vec![int(0); n];
    c[idx - 1] = int(1);
    MultiVector::constant_field(&c)
  }

  #[test]
  fn fermionic_relations_on_torus() {
    let m = t2();
    let id = FormOperator::identity(m.form_space_dim());
    for i in 1..=2 {
      for j in 1..=2 {
        let ai = FormOperator::creation(&m, i).unwrap();
        let aj = FormOperator::creation(&m, j).unwrap();
        let bi = FormOperator::annihilation(&m, i).unwrap();
        let bj = FormOperator::annihilation(&m, j).unwrap();
        let mixed = anticommutator(&ai, &bj).unwrap();
        if i == j {
          assert_eq!(mixed.matrix(), id.matrix());
        } else {
          assert!(mixed.is_zero());
        }
        assert!(anticommutator(&ai, &aj).unwrap().is_zero());
        assert!(anticommutator(&bi, &bj).unwrap().is_zero());
      }
    }
  }

  #[test]
  fn cartan_identity_matches_lie_derivative() {
    let m = h3();
    let x = field(3, 1);
    let d = FormOperator::d(&m);
    let xh = FormOperator::contraction_operator(&m, &x).unwrap();
    let lie = FormOperator::lie_derivative_operator(&m, &x).unwrap();
    assert_eq!(anticommutator(&d, &xh).unwrap().matrix(), lie.matrix());
  }

  #[test]
  fn no_terms_gives_d() {
    let m = h3();
    let dp = build_perturbed_d(&m, RingDescriptor::scalars(), vec![]).unwrap();
    assert_eq!(dp.operator().component(&RingMonomial::one(&RingDescriptor::scalars())).unwrap(), &FormOperator::d(&m));
    assert!(dp.curvature().is_zero());
  }

  #[test]
  fn numeric_wedge_square_is_d_omega() {
    let m = h3();
    let ring = RingDescriptor::scalars();
    let omega = Form::basic(3, &[3]).unwrap();
    let dp = build_perturbed_d(&m, ring, vec![("w".into(), Param::Numeric(int(2)), TermKind::Wedge(omega))]).unwrap();
    let expected = FormOperator::wedge_operator(&m, &Form::basic(3, &[1, 2]).unwrap()).unwrap().scaled(&int(2));
    assert_eq!(dp.curvature().component(&RingMonomial::one(&ring)).unwrap().matrix(), expected.matrix());
  }

  #[test]
  fn parity_rule_rejects_even_terms() {
    let m = h3();
    let ring = RingDescriptor::new(1, 0, 0).unwrap();
    let omega = Form::basic(3, &[1, 2]).unwrap();
    let err = build_perturbed_d(&m, ring, vec![("o".into(), Param::Numeric(int(1)), TermKind::Wedge(omega))]).unwrap_err();
    assert!(matches!(err, Error::ParityViolation { .. }));
    let theta = Param::Generator { name: "t".into(), odd: true, index: 0 };
    let err =
      build_perturbed_d(&m, ring, vec![("w".into(), theta, TermKind::Wedge(Form::basic(3, &[3]).unwrap()))]).unwrap_err();
    assert!(matches!(err, Error::ParityViolation { .. }));
  }

  #[test]
  fn odd_generator_with_two_form() {
    let m = h3();
    let ring = RingDescriptor::new(1, 0, 0).unwrap();
    let theta = Param::Generator { name: "t".into(), odd: true, index: 0 };
    let dp = build_perturbed_d(&m, ring, vec![("o".into(), theta, TermKind::Wedge(Form::basic(3, &[1, 2]).unwrap()))])
      .unwrap();
    // d(e1 e2) = 0, so the only curvature would be theta^2 = 0 and theta {d, e12} = theta (d e12) = 0.
    assert!(dp.curvature().is_zero());
  }

  #[test]
  fn evaluate_substitutes_even_values() {
    let m = t2();
    let ring = RingDescriptor::new(0, 1, 2).unwrap();
    let mu = Param::Generator { name: "mu".into(), odd: false, index: 0 };
    let dp = build_perturbed_d(&m, ring, vec![("x".into(), mu, TermKind::Contract(field(2, 1)))]).unwrap();
    let at = dp.operator().evaluate(&[int(3)]).unwrap();
    let expected = FormOperator::d(&m).plus(&FormOperator::annihilation(&m, 1).unwrap().scaled(&int(3))).unwrap();
    assert_eq!(at.matrix(), expected.matrix());
    assert_eq!(at.shift(), None);
  }
}
