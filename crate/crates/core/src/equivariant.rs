//! The Cartan model `(∩ ker ∇_{X_i}) ⊗ Q[a_1..a_m]`, `deg a_i = 2`, with differential
//! `d + Σ a_i ι_{X_i}`, truncated at polynomial degree `D`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{Rational, SparseMatrix, SparseVector, Subspace};
use crate::error::{Error, Result};
use crate::flat::homology_of;
use crate::fock::operator::{vector_form, FormOperator};
use crate::fock::MultiVector;
use crate::model::{Grading, Model};
use crate::spectral::PerturbedComplex;

/// Exponent vectors of `Q[a_1..a_m]` up to total degree `cutoff`, ordered by degree then
/// lexicographically.
fn polynomial_monomials(m: usize, cutoff: usize) -> Vec<Vec<usize>> {
  fn extend(prefix: &mut Vec<usize>, left: usize, remaining: usize, out: &mut Vec<Vec<usize>>) {
    if left == 0 {
      if remaining == 0 {
        out.push(prefix.clone());
      }
      return;
    }
    for e in (0..=remaining).rev() {
      prefix.push(e);
      extend(prefix, left - 1, remaining - e, out);
      prefix.pop();
    }
  }
  let mut out = Vec::new();
  for degree in 0..=cutoff {
    extend(&mut Vec::new(), m, degree, &mut out);
  }
  out
}

#[derive(Clone, Debug)]
pub struct CartanComplex {
  cutoff:       usize,
  form_dim:     usize,
  polynomials:  Vec<Vec<usize>>,
  /// Total degree of every coordinate `poly * form_dim + form`.
  degrees:      Vec<i64>,
  pieces:       BTreeMap<i64, Subspace>,
  d:            SparseMatrix,
  perturbation: SparseMatrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivariantReport {
  pub cutoff:                  usize,
  pub fields:                  usize,
  pub complex_dims:            Vec<usize>,
  pub dims:                    Vec<usize>,
  pub truncation_safe_through: usize,
}

fn first_nonzero_column(m: &SparseMatrix) -> Option<usize> { (0..m.ncols()).find(|&j| !m.column(j).is_zero()) }

impl CartanComplex {
  pub fn build(model: &Model, fields: &[MultiVector], cutoff: usize) -> Result<Self> {
    if fields.is_empty() {
      return Err(Error::Precondition("the Cartan model needs at least one field".into()));
    }
    if cutoff < 2 {
      return Err(Error::Precondition(format!("polynomial cutoff {cutoff} is below 2")));
    }
    for x in fields {
      if x.order() != 1 {
        return Err(Error::Unsupported(format!("fields must have order 1, got order {}", x.order())));
      }
    }
    let lies = fields.iter().map(|x| FormOperator::lie_derivative_operator(model, x)).collect::<Result<Vec<_>>>()?;
    let contractions = fields.iter().map(|x| FormOperator::contraction_operator(model, x)).collect::<Result<Vec<_>>>()?;
    for i in 0..lies.len() {
      for j in i + 1..lies.len() {
        let bracket = lies[i].matrix().compose(lies[j].matrix())?.minus(&lies[j].matrix().compose(lies[i].matrix())?)?;
        if let Some(col) = first_nonzero_column(&bracket) {
          return Err(Error::NonCommuting(format!(
            "fields {} and {} do not commute on {}",
            i + 1,
            j + 1,
            vector_form(model, &SparseVector::unit(col))
          )));
        }
      }
    }

    let n = model.form_space_dim();
    let invariant_by_degree = (0..=model.dim())
      .map(|k| {
        let mut s = Subspace::coordinate(n, model.degree_range(k));
        for lie in &lies {
          s = s.kernel_of(lie.matrix())?;
        }
        Ok(s)
      })
      .collect::<Result<Vec<_>>>()?;

    let polynomials = polynomial_monomials(fields.len(), cutoff);
    let index: BTreeMap<&[usize], usize> = polynomials.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let ambient = polynomials.len() * n;
    let poly_degree = |p: &[usize]| p.iter().sum::<usize>();
    let degrees = polynomials
      .iter()
      .flat_map(|p| (0..n).map(move |i| (model.degree_of(i) + 2 * poly_degree(p)) as i64))
      .collect();

    let embed = |q: usize, v: &SparseVector| v.remap(|i| Some(q * n + i));
    let mut pieces: BTreeMap<i64, Vec<SparseVector>> = BTreeMap::new();
    for (q, p) in polynomials.iter().enumerate() {
      for (k, inv) in invariant_by_degree.iter().enumerate() {
        let label = (k + 2 * poly_degree(p)) as i64;
        pieces.entry(label).or_default().extend(inv.basis().iter().map(|v| embed(q, v)));
      }
    }
    let pieces: BTreeMap<i64, Subspace> =
      pieces.into_iter().map(|(label, vs)| (label, Subspace::span(ambient, vs))).collect();

    let form_d = model.d_matrix();
    let d_entries: Vec<(usize, usize, Rational)> = (0..polynomials.len())
      .flat_map(|q| form_d.entries().map(move |(i, j, c)| (q * n + i, q * n + j, c.clone())).collect::<Vec<_>>())
      .collect();
    let d = SparseMatrix::from_entries(ambient, ambient, d_entries)?;
    let mut p_entries = Vec::new();
    for (q, p) in polynomials.iter().enumerate() {
      for (a, iota) in contractions.iter().enumerate() {
        let mut raised = p.clone();
        raised[a] += 1;
        // Terms past the cutoff are dropped; this only affects total degrees above 2D - 2.
        if let Some(&r) = index.get(raised.as_slice()) {
          p_entries.extend(iota.matrix().entries().map(|(i, j, c)| (r * n + i, q * n + j, c.clone())));
        }
      }
    }
    let perturbation = SparseMatrix::from_entries(ambient, ambient, p_entries)?;

    let c = Self { cutoff, form_dim: n, polynomials, degrees, pieces, d, perturbation };
    c.verify()?;
    Ok(c)
  }

  fn verify(&self) -> Result<()> {
    let total = self.differential()?;
    let square = total.compose(&total)?;
    self.pieces.par_iter().try_for_each(|(&label, piece)| {
      let target = self.piece(label + 1);
      for v in piece.basis() {
        let image = total.apply(v);
        if !target.contains(&image) {
          return Err(Error::NotInvariant(format!("the Cartan differential leaves the invariant forms in total degree {label}")));
        }
        if !square.apply(v).is_zero() {
          return Err(Error::Structural(format!("the Cartan differential does not square to zero in total degree {label}")));
        }
      }
      Ok(())
    })
  }

  pub fn cutoff(&self) -> usize { self.cutoff }

  pub fn form_dim(&self) -> usize { self.form_dim }

  pub fn polynomials(&self) -> &[Vec<usize>] { &self.polynomials }

  pub fn ambient(&self) -> usize { self.degrees.len() }

  pub fn piece(&self, label: i64) -> Subspace {
    self.pieces.get(&label).cloned().unwrap_or_else(|| Subspace::zero(self.ambient()))
  }

  pub fn pieces(&self) -> &BTreeMap<i64, Subspace> { &self.pieces }

  /// `d + Σ a_i ι_{X_i}` on the full truncated space.
  pub fn differential(&self) -> Result<SparseMatrix> { self.d.plus(&self.perturbation) }

  /// Highest total degree not affected by the truncation.
  pub fn truncation_safe_through(&self) -> usize { 2 * self.cutoff - 2 }

  /// The pair `(d, Σ a_i ι_{X_i})` as a perturbed complex graded by total degree.
  pub fn perturbed_complex(&self) -> PerturbedComplex {
    PerturbedComplex {
      grading:            Grading::Degree,
      ambient:            self.ambient(),
      coordinate_degrees: self.degrees.clone(),
      pieces:             self.pieces.clone(),
      d:                  self.d.clone(),
      p:                  self.perturbation.clone(),
      p_shift:            1,
    }
  }
}

/// Dimensions of `ker d' / im d'` in total degrees `0..=2D-2`.
pub fn equivariant_cohomology(c: &CartanComplex) -> Result<EquivariantReport> {
  let top = c.truncation_safe_through() as i64;
  let d = c.differential()?;
  let pieces: BTreeMap<i64, Subspace> = (0..=top + 1).map(|k| (k, c.piece(k))).collect();
  let groups = homology_of(&d, &pieces, Grading::Degree)?;
  Ok(EquivariantReport {
    cutoff:                  c.cutoff,
    fields:                  c.polynomials.first().map_or(0, Vec::len),
    complex_dims:            (0..=top).map(|k| c.piece(k).dim()).collect(),
    dims:                    (0..=top).map(|k| groups[&k].dim()).collect(),
    truncation_safe_through: top as usize,
  })
}
