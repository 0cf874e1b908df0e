//! The exact sequence
//! `0 → R → ker ∇_X → H¹_Ω → H¹ → C/∇_X C → H²_Ω → H² → 0`
//! built from explicit maps, with exactness verified node by node.

use serde::Serialize;

use crate::algebra::{subquotient_induced_map, Rational, SparseMatrix, SparseVector, Subquotient, Subspace};
use crate::error::{Error, Result};
use crate::flat::{lemma1_check, wedge_kernel_subcomplex};
use crate::fock::form::{form_literals, TermLiteral};
use crate::fock::operator::{vector_form, FormOperator};
use crate::fock::{apply_d, contract, wedge, Form, FormMonomial, MultiVector};
use crate::model::Model;

#[derive(Clone, Debug, Serialize)]
pub struct NodeReport {
  pub name: String,
  pub dim:  usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapReport {
  pub name:   String,
  pub rank:   usize,
  pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactnessReport {
  pub node:    String,
  pub exact:   bool,
  #[serde(skip_serializing_if = "Option::is_none")]
  pub witness: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactSequenceReport {
  pub nodes:              Vec<NodeReport>,
  pub maps:               Vec<MapReport>,
  pub exactness:          Vec<ExactnessReport>,
  pub alternating_sum:    i64,
  pub theta:              Vec<TermLiteral>,
  pub theta_variation:    Option<Vec<TermLiteral>>,
  pub section_independent: bool,
  pub exact:              bool,
}

/// A 1-form `θ` of frequency zero with `ι_X θ = 1`, in canonical form.
pub fn find_theta(model: &Model, x: &MultiVector) -> Result<Form> {
  let contraction = FormOperator::contraction_operator(model, x)?;
  let cols: Vec<usize> = model.degree_range(1).filter(|&i| model.basis()[i].is_zero_frequency()).collect();
  let rows: Vec<usize> = model.degree_range(0).collect();
  let block = contraction.matrix().submatrix(&rows, &cols);
  let vacuum = model.index_of(&FormMonomial::vacuum(model.dim())).expect("vacuum in every model");
  let target = SparseVector::unit(rows.iter().position(|&r| r == vacuum).expect("vacuum in degree 0"));
  let solution = block
    .solve(&target)?
    .ok_or_else(|| Error::NonConstructible("no constant 1-form theta with theta(X) = 1".into()))?;
  Ok(vector_form(model, &solution.remap(|k| Some(cols[k]))))
}

fn matrix_strings(m: &SparseMatrix) -> Vec<Vec<String>> {
  m.to_dense().iter().map(|row| row.iter().map(ToString::to_string).collect()).collect()
}

/// Checks `im(incoming) = ker(outgoing)` inside a node of dimension `dim`; returns a
/// witness coordinate vector on failure.
fn exactness(dim: usize, incoming: Option<&SparseMatrix>, outgoing: Option<&SparseMatrix>) -> Result<Option<SparseVector>> {
  let image = match incoming {
    Some(m) => Subspace::span(dim, m.columns().iter().cloned()),
    None => Subspace::zero(dim),
  };
  let kernel = match outgoing {
    Some(m) => Subspace::full(dim).kernel_of(m)?,
    None => Subspace::full(dim),
  };
  if let Some(v) = kernel.basis().iter().find(|v| !image.contains(v)) {
    return Ok(Some(v.clone()));
  }
  Ok(image.basis().iter().find(|v| !kernel.contains(v)).cloned())
}

struct Pieces {
  nodes: Vec<(String, Subquotient)>,
  maps:  Vec<(String, SparseMatrix)>,
}

fn build(model: &Model, omega: &Form, x: &MultiVector, theta: &Form) -> Result<Pieces> {
  let ambient = model.form_space_dim();
  let t = wedge_kernel_subcomplex(model, omega)?;
  let d = FormOperator::d(model);
  let lie = FormOperator::lie_derivative_operator(model, x)?;
  let contraction = FormOperator::contraction_operator(model, x)?;
  let degree = |k: usize| Subspace::coordinate(ambient, model.degree_range(k));
  let functions = degree(0);
  let vacuum = model.index_of(&FormMonomial::vacuum(model.dim())).expect("vacuum");

  let constants = Subquotient::full(1);
  let invariant_functions = Subquotient::new(functions.kernel_of(lie.matrix())?, Subspace::zero(ambient))?;
  let h1_omega = Subquotient::new(t.piece(1).kernel_of(d.matrix())?, t.piece(0).image_under(d.matrix())?)?;
  let h1 = Subquotient::new(degree(1).kernel_of(d.matrix())?, functions.image_under(d.matrix())?)?;
  let coinvariants = Subquotient::new(functions.clone(), functions.image_under(lie.matrix())?)?;
  let h2_omega = Subquotient::new(t.piece(2).kernel_of(d.matrix())?, t.piece(1).image_under(d.matrix())?)?;
  let h2 = Subquotient::new(degree(2).kernel_of(d.matrix())?, degree(1).image_under(d.matrix())?)?;
  let terminal = Subquotient::full(0);

  let embed_constants = SparseMatrix::from_entries(ambient, 1, [(vacuum, 0, Rational::from_integer(1.into()))])?;
  let connecting = FormOperator::from_action(model, false, None, |f| {
    if f.degree().unwrap_or(0) != 0 {
      return Ok(Form::zero(model.dim()));
    }
    apply_d(model, &wedge(model, f, theta)?)
  })?;
  let identity = SparseMatrix::identity(ambient);
  let nodes = vec![
    ("R".to_string(), constants),
    ("ker Lie_X on functions".to_string(), invariant_functions),
    ("H^1_Omega".to_string(), h1_omega),
    ("H^1".to_string(), h1),
    ("functions / Lie_X(functions)".to_string(), coinvariants),
    ("H^2_Omega".to_string(), h2_omega),
    ("H^2".to_string(), h2),
    ("0".to_string(), terminal),
  ];
  let maps = vec![
    ("constants into invariant functions".to_string(), embed_constants),
    ("f -> [df]".to_string(), d.matrix().clone()),
    ("H^1_Omega -> H^1".to_string(), identity.clone()),
    ("[u] -> u(X)".to_string(), contraction.matrix().clone()),
    ("f -> [d(f theta)]".to_string(), connecting.matrix().clone()),
    ("H^2_Omega -> H^2".to_string(), identity),
    ("H^2 -> 0".to_string(), SparseMatrix::zeros(0, ambient)),
  ];
  Ok(Pieces { nodes, maps })
}

fn induced(pieces: &Pieces) -> Result<Vec<SparseMatrix>> {
  pieces
    .maps
    .iter()
    .enumerate()
    .map(|(i, (_, f))| subquotient_induced_map(f, &pieces.nodes[i].1, &pieces.nodes[i + 1].1))
    .collect()
}

/// Builds the sequence for a closed `2n`-form `Ω` and a field `X` with `ι_X Ω = 0`. `θ`
/// defaults to the canonical constant 1-form with `θ(X) = 1`.
pub fn theorem1_sequence(model: &Model, omega: &Form, x: &MultiVector, theta: Option<&Form>) -> Result<ExactSequenceReport> {
  lemma1_check(model, omega, x)?;
  let theta = match theta {
    Some(t) => {
      let value = contract(model, x, t)?;
      if value != Form::vacuum(model.dim()) {
        return Err(Error::Precondition(format!("theta(X) = {value}, expected 1")));
      }
      t.clone()
    },
    None => find_theta(model, x)?,
  };
  let pieces = build(model, omega, x, &theta)?;
  let matrices = induced(&pieces)?;

  let mut exactness_reports = Vec::new();
  for (i, (name, node)) in pieces.nodes.iter().enumerate().take(7) {
    let incoming = if i == 0 { None } else { Some(&matrices[i - 1]) };
    let witness = exactness(node.dim(), incoming, Some(&matrices[i]))?;
    exactness_reports.push(ExactnessReport {
      node:    name.clone(),
      exact:   witness.is_none(),
      witness: witness.map(|w| {
        let rep = node.representative_of(&w);
        if node.ambient() == model.form_space_dim() {
          format!("class {w} represented by {}", vector_form(model, &rep))
        } else {
          format!("class {w}")
        }
      }),
    });
  }
  let alternating_sum =
    pieces.nodes.iter().enumerate().map(|(i, (_, q))| if i % 2 == 0 { q.dim() as i64 } else { -(q.dim() as i64) }).sum();

  // Another section: θ' = θ + z with z a closed constant 1-form annihilated by X.
  let h1_omega = &pieces.nodes[2].1;
  let variation = h1_omega
    .cycles()
    .basis()
    .iter()
    .map(|v| vector_form(model, v))
    .find(|f| f.has_zero_frequency_support() && !f.is_zero());
  let section_independent = match &variation {
    Some(z) => {
      let other = build(model, omega, x, &theta.plus(z))?;
      induced(&other)?[4] == matrices[4]
    },
    None => true,
  };
  let exact = exactness_reports.iter().all(|e| e.exact);
  Ok(ExactSequenceReport {
    nodes: pieces.nodes.iter().map(|(name, q)| NodeReport { name: name.clone(), dim: q.dim() }).collect(),
    maps: pieces
      .maps
      .iter()
      .zip(&matrices)
      .map(|((name, _), m)| MapReport { name: name.clone(), rank: m.rank(), matrix: matrix_strings(m) })
      .collect(),
    exactness: exactness_reports,
    alternating_sum,
    theta: form_literals(&theta),
    theta_variation: variation.as_ref().map(form_literals),
    section_independent,
    exact: exact && alternating_sum == 0 && section_independent,
  })
}
