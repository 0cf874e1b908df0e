//! Flat subcomplexes `T = ker (d')^2` and their homology.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::algebra::{RingDescriptor, Rational, SparseMatrix, Subquotient, Subspace};
use crate::error::{Error, Result};
use crate::fock::form::{form_literals, TermLiteral};
use crate::fock::operator::{vector_form, FormOperator, Param, PerturbedDifferential, RingOperator};
use crate::fock::{apply_d, contract, Form, MultiVector};
use crate::model::{Grading, Model};

/// A subspace `T` of the form space on which an odd operator `d'` squares to zero,
/// split into graded pieces.
#[derive(Clone, Debug)]
pub struct FlatSubcomplex {
  grading:     Grading,
  ambient:     usize,
  pieces:      BTreeMap<i64, Subspace>,
  total:       Subspace,
  operator:    RingOperator,
  constraints: Vec<FormOperator>,
  numeric:     bool,
}

impl FlatSubcomplex {
  /// `T` is the joint kernel of `constraints`; every component of `operator` must map `T`
  /// into itself. `numeric` records that `operator` carries a nonzero numeric perturbation.
  pub fn new(model: &Model, operator: RingOperator, constraints: Vec<FormOperator>, numeric: bool) -> Result<Self> {
    let ambient = model.form_space_dim();
    let grading = if constraints.iter().all(|c| c.shift().is_some()) { Grading::Degree } else { Grading::Parity };
    let mut labelled: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for k in 0..=model.dim() {
      labelled.entry(grading.label(k)).or_default().extend(model.degree_range(k));
    }
    let mut pieces = BTreeMap::new();
    for (label, coords) in labelled {
      let mut space = Subspace::coordinate(ambient, coords);
      for c in &constraints {
        if space.dim() == 0 {
          break;
        }
        space = space.kernel_of(c.matrix())?;
      }
      pieces.insert(label, space);
    }
    let total = Subspace::span(ambient, pieces.values().flat_map(|s| s.basis().iter().cloned()));
    for (m, op) in operator.components() {
      for v in total.basis() {
        let image = op.apply(v);
        if !total.contains(&image) {
          return Err(Error::NotInvariant(format!(
            "the {m} component of d' maps {} out of T",
            vector_form(model, v)
          )));
        }
      }
    }
    Ok(Self { grading, ambient, pieces, total, operator, constraints, numeric })
  }

  pub fn grading(&self) -> Grading { self.grading }

  pub fn ambient(&self) -> usize { self.ambient }

  pub fn pieces(&self) -> &BTreeMap<i64, Subspace> { &self.pieces }

  pub fn piece(&self, label: i64) -> Subspace { self.pieces.get(&label).cloned().unwrap_or_else(|| Subspace::zero(self.ambient)) }

  pub fn total(&self) -> &Subspace { &self.total }

  pub fn operator(&self) -> &RingOperator { &self.operator }

  pub fn constraints(&self) -> &[FormOperator] { &self.constraints }

  pub fn dims(&self) -> BTreeMap<i64, usize> { self.pieces.iter().map(|(&k, s)| (k, s.dim())).collect() }

  pub fn dim(&self) -> usize { self.total.dim() }

  /// The pieces regrouped by parity.
  pub fn parity_pieces(&self) -> BTreeMap<i64, Subspace> {
    let mut out: BTreeMap<i64, Subspace> = BTreeMap::new();
    for (&k, s) in &self.pieces {
      let p = k.rem_euclid(2);
      let merged = match out.remove(&p) {
        Some(old) => old.sum(s),
        None => s.clone(),
      };
      out.insert(p, merged);
    }
    for p in 0..2 {
      out.entry(p).or_insert_with(|| Subspace::zero(self.ambient));
    }
    out
  }

  /// Whether every curvature constraint vanishes on `T`.
  pub fn curvature_vanishes(&self) -> bool {
    self.constraints.iter().all(|c| self.total.basis().iter().all(|v| c.apply(v).is_zero()))
  }
}

pub fn flat_subcomplex(model: &Model, dp: &PerturbedDifferential) -> Result<FlatSubcomplex> {
  let numeric = dp.terms().iter().any(|t| matches!(&t.param, Param::Numeric(r) if !r.is_zero()));
  let constraints = dp.curvature().components().values().cloned().collect();
  FlatSubcomplex::new(model, dp.operator().clone(), constraints, numeric)
}

/// `ker ∇_X` with the differential `d`.
pub fn invariant_subcomplex(model: &Model, x: &MultiVector) -> Result<FlatSubcomplex> {
  let lie = FormOperator::lie_derivative_operator(model, x)?;
  FlatSubcomplex::new(model, RingOperator::from_operator(RingDescriptor::scalars(), FormOperator::d(model)), vec![lie], false)
}

/// `ker (Ω ∧ ·)` with the differential `d`; requires `Ω` closed.
pub fn wedge_kernel_subcomplex(model: &Model, omega: &Form) -> Result<FlatSubcomplex> {
  if !apply_d(model, omega)?.is_zero() {
    return Err(Error::FormNotClosed(omega.to_string()));
  }
  let op = FormOperator::wedge_operator(model, omega)?;
  FlatSubcomplex::new(model, RingOperator::from_operator(RingDescriptor::scalars(), FormOperator::d(model)), vec![op], false)
}

/// Subquotients `ker D / im D` on a flat subcomplex, per degree or per parity.
#[derive(Clone, Debug)]
pub struct ExoticHomology {
  pub grading: Grading,
  pub groups:  BTreeMap<i64, Subquotient>,
}

impl ExoticHomology {
  pub fn dims(&self) -> BTreeMap<i64, usize> { self.groups.iter().map(|(&k, q)| (k, q.dim())).collect() }

  pub fn dim(&self, label: i64) -> usize { self.groups.get(&label).map_or(0, Subquotient::dim) }

  pub fn report(&self, model: &Model) -> HomologyReport {
    HomologyReport {
      grading: self.grading,
      groups:  self
        .groups
        .iter()
        .map(|(&label, q)| GroupReport {
          label,
          dim: q.dim(),
          representatives: q.representatives().iter().map(|v| form_literals(&vector_form(model, v))).collect(),
        })
        .collect(),
    }
  }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupReport {
  pub label:           i64,
  pub dim:             usize,
  pub representatives: Vec<Vec<TermLiteral>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomologyReport {
  pub grading: Grading,
  pub groups:  Vec<GroupReport>,
}

/// Homology of `T` under `d'` with its even generators set to `even_values`. At the
/// origin (no nonzero value and no numeric term) the grading is by degree; otherwise by
/// parity.
pub fn exotic_homology(t: &FlatSubcomplex, even_values: &[Rational]) -> Result<ExoticHomology> {
  let op = t.operator.evaluate(even_values)?;
  let at_origin = !t.numeric && even_values.iter().all(Zero::is_zero);
  let grading = if at_origin && t.grading == Grading::Degree { Grading::Degree } else { Grading::Parity };
  let pieces = match grading {
    Grading::Degree => t.pieces.clone(),
    Grading::Parity => t.parity_pieces(),
  };
  homology_of(op.matrix(), &pieces, grading).map(|groups| ExoticHomology { grading, groups })
}

/// `ker D / D(previous piece)` for each piece, where the previous label is one lower in
/// degree or of the other parity.
pub fn homology_of(
  d: &SparseMatrix,
  pieces: &BTreeMap<i64, Subspace>,
  grading: Grading,
) -> Result<BTreeMap<i64, Subquotient>> {
  let mut out = BTreeMap::new();
  for (&label, piece) in pieces {
    let z = piece.kernel_of(d)?;
    let prev = grading.shift(label, -1);
    let b = match pieces.get(&prev) {
      Some(p) => p.image_under(d)?,
      None => Subspace::zero(piece.ambient()),
    };
    let q = Subquotient::new(z, b).map_err(|e| match e {
      Error::NotWellDefined { witness, .. } => {
        Error::Structural(format!("differential does not square to zero on the subcomplex; witness {witness}"))
      },
      other => other,
    })?;
    out.insert(label, q);
  }
  Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
  pub dims:               Vec<usize>,
  pub degree_zero_vanishes: bool,
  pub degree_one_is_reeb_kernel: bool,
  pub higher_degrees_full: bool,
  pub pass:               bool,
}

/// For a closed `2n`-form `Ω` on a `(2n+1)`-dimensional model with `ι_X Ω = 0`, checks
/// that `T = ker(Ω ∧ ·)` is `0` in degree 0, `ker ι_X` in degree 1 and everything above.
pub fn lemma1_check(model: &Model, omega: &Form, reeb: &MultiVector) -> Result<Lemma1Report> {
  let n = model.dim();
  if n % 2 == 0 {
    return Err(Error::Precondition(format!("model dimension {n} is even")));
  }
  if omega.degree() != Some(n - 1) {
    return Err(Error::Precondition(format!("form {omega} is not homogeneous of degree {}", n - 1)));
  }
  if reeb.order() != 1 {
    return Err(Error::Precondition("the Reeb field must have order 1".into()));
  }
  if !apply_d(model, omega)?.is_zero() {
    return Err(Error::FormNotClosed(omega.to_string()));
  }
  let inner = contract(model, reeb, omega)?;
  if !inner.is_zero() {
    return Err(Error::ReebNotInKernel(inner.to_string()));
  }
  let t = wedge_kernel_subcomplex(model, omega)?;
  let dims: Vec<usize> = (0..=n).map(|k| t.piece(k as i64).dim()).collect();
  let degree_zero_vanishes = dims[0] == 0;
  let contraction = FormOperator::contraction_operator(model, reeb)?;
  let reeb_kernel = Subspace::coordinate(model.form_space_dim(), model.degree_range(1)).kernel_of(contraction.matrix())?;
  let degree_one_is_reeb_kernel = t.piece(1) == reeb_kernel;
  let higher_degrees_full = (2..=n).all(|k| dims[k] == model.degree_range(k).len());
  Ok(Lemma1Report {
    pass: degree_zero_vanishes && degree_one_is_reeb_kernel && higher_degrees_full,
    dims,
    degree_zero_vanishes,
    degree_one_is_reeb_kernel,
    higher_degrees_full,
  })
}
