//! Finite-dimensional models of de Rham complexes.
//!
//! Two kinds are supported. A Chevalley–Eilenberg model is the exterior algebra on
//! `e^1..e^n` with `d e^i = Σ_{j<k} c^i_{jk} e^j ∧ e^k` extended as an odd derivation
//! (left-invariant forms on a Lie group). A torus model uses formal characters `χ_k`,
//! `k` in a box window around 0, with `d χ_k = Σ_j k_j χ_k dx^j`; the factor `2πi` is
//! dropped so that all arithmetic stays rational.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::ring::merge_sign;
use crate::algebra::{format_rational, parse_rational, Rational, SparseMatrix};
use crate::error::{Error, Result};
use crate::fock::form::FormMonomial;

const MAX_FORM_SPACE: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
  LieAlgebra,
  Torus,
}

/// How basis forms are bucketed: by form degree, or by its parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grading {
  Degree,
  Parity,
}

impl Grading {
  pub fn label(self, degree: usize) -> i64 {
    match self {
      Grading::Degree => degree as i64,
      Grading::Parity => (degree % 2) as i64,
    }
  }

  pub fn shift(self, label: i64, by: i64) -> i64 {
    match self {
      Grading::Degree => label + by,
      Grading::Parity => (label + by).rem_euclid(2),
    }
  }

  /// `(-1)^label`
  pub fn sign(self, label: i64) -> i64 { if label.rem_euclid(2) == 0 { 1 } else { -1 } }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureConstant {
  pub target: usize,
  pub j:      usize,
  pub k:      usize,
  pub coeff:  Rational,
}

#[derive(Clone, Debug)]
pub struct Model {
  kind:      ModelKind,
  dim:       usize,
  structure: Vec<StructureConstant>,
  window:    Vec<(i64, i64)>,
  /// `d e^i` for each generator, as (mask, coefficient) pairs.
  de:        Vec<Vec<(u32, Rational)>>,
  modes:     Vec<Vec<i64>>,
  basis:     Vec<FormMonomial>,
  index:     HashMap<FormMonomial, usize>,
  offsets:   Vec<usize>,
  d:         SparseMatrix,
}

fn subsets_of_size(n: usize, k: usize) -> Vec<u32> {
  fn rec(start: usize, n: usize, k: usize, acc: u32, out: &mut Vec<u32>) {
    if k == 0 {
      out.push(acc);
      return;
    }
    for i in start..n {
      if n - i < k {
        break;
      }
      rec(i + 1, n, k - 1, acc | (1 << i), out);
    }
  }
  let mut out = Vec::new();
  rec(0, n, k, 0, &mut out);
  out
}

fn window_modes(window: &[(i64, i64)]) -> Vec<Vec<i64>> {
  let mut modes = vec![Vec::new()];
  for &(lo, hi) in window {
    let mut next = Vec::new();
    for m in &modes {
      for k in lo..=hi {
        let mut m = m.clone();
        m.push(k);
        next.push(m);
      }
    }
    modes = next;
  }
  modes
}

/// Sign-aware product of three disjoint masks in order, or `None` if they overlap.
fn triple_merge(a: u32, b: u32, c: u32) -> Option<(bool, u32)> {
  let s1 = merge_sign(a as u64, b as u64)?;
  let s2 = merge_sign((a | b) as u64, c as u64)?;
  Some((s1 ^ s2, a | b | c))
}

impl Model {
  pub fn build_lie_algebra_model(n: usize, structure: &[StructureConstant]) -> Result<Model> {
    if n == 0 || n > 16 {
      return Err(Error::InvalidModel(format!("dimension {n} outside 1..=16")));
    }
    let mut merged: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
    for s in structure {
      if s.target == 0 || s.target > n {
        return Err(Error::InvalidModel(format!("target index {} outside 1..{n}", s.target)));
      }
      if s.j == 0 || s.k > n || s.j >= s.k {
        return Err(Error::InvalidModel(format!(
          "structure constant ({}, {}, {}) must satisfy 1 <= j < k <= {n}",
          s.target, s.j, s.k
        )));
      }
      *merged.entry((s.target, s.j, s.k)).or_insert_with(Rational::zero) += &s.coeff;
    }
    let structure: Vec<StructureConstant> = merged
      .into_iter()
      .filter(|(_, c)| !c.is_zero())
      .map(|((target, j, k), coeff)| StructureConstant { target, j, k, coeff })
      .collect();
    let mut de = vec![Vec::new(); n];
    for s in &structure {
      de[s.target - 1].push(((1u32 << (s.j - 1)) | (1u32 << (s.k - 1)), s.coeff.clone()));
    }
    let model = Self::assemble(ModelKind::LieAlgebra, n, structure, Vec::new(), de)?;
    let dd = model.d.compose(&model.d)?;
    if let Some(j) = (0..dd.ncols()).find(|&j| !dd.column(j).is_zero()) {
      return Err(Error::JacobiViolation { monomial: model.basis[j].to_string() });
    }
    Ok(model)
  }

  pub fn build_torus_model(n: usize, window: &[(i64, i64)]) -> Result<Model> {
    if n == 0 || n > 16 {
      return Err(Error::InvalidModel(format!("dimension {n} outside 1..=16")));
    }
    if window.len() != n {
      return Err(Error::InvalidModel(format!("window has {} intervals for dimension {n}", window.len())));
    }
    for (a, &(lo, hi)) in window.iter().enumerate() {
      if lo > 0 || hi < 0 {
        return Err(Error::InvalidModel(format!("window interval {} = [{lo}, {hi}] does not contain 0", a + 1)));
      }
    }
    Self::assemble(ModelKind::Torus, n, Vec::new(), window.to_vec(), vec![Vec::new(); n])
  }

  fn assemble(
    kind: ModelKind,
    dim: usize,
    structure: Vec<StructureConstant>,
    window: Vec<(i64, i64)>,
    de: Vec<Vec<(u32, Rational)>>,
  ) -> Result<Model> {
    let modes = match kind {
      ModelKind::LieAlgebra => vec![vec![0; dim]],
      ModelKind::Torus => window_modes(&window),
    };
    if modes.len().saturating_mul(1 << dim) > MAX_FORM_SPACE {
      return Err(Error::InvalidModel(format!(
        "form space of dimension {} exceeds the supported {MAX_FORM_SPACE}",
        modes.len() * (1 << dim)
      )));
    }
    let mut basis = Vec::new();
    let mut offsets = vec![0];
    for k in 0..=dim {
      let subsets = subsets_of_size(dim, k);
      for mode in &modes {
        for &mask in &subsets {
          basis.push(FormMonomial::from_mask(mode.clone(), mask));
        }
      }
      offsets.push(basis.len());
    }
    let index = basis.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let mut model = Model {
      kind,
      dim,
      structure,
      window,
      de,
      modes,
      basis,
      index,
      offsets,
      d: SparseMatrix::zeros(0, 0),
    };
    let size = model.basis.len();
    let mut entries = Vec::new();
    for (j, m) in model.basis.iter().enumerate() {
      for (out, c) in model.d_monomial(m) {
        entries.push((model.index[&out], j, c));
      }
    }
    model.d = SparseMatrix::from_entries(size, size, entries)?;
    Ok(model)
  }

  pub fn kind(&self) -> ModelKind { self.kind }

  pub fn dim(&self) -> usize { self.dim }

  pub fn structure(&self) -> &[StructureConstant] { &self.structure }

  pub fn window(&self) -> &[(i64, i64)] { &self.window }

  pub fn modes(&self) -> &[Vec<i64>] { &self.modes }

  pub fn basis(&self) -> &[FormMonomial] { &self.basis }

  pub fn form_space_dim(&self) -> usize { self.basis.len() }

  pub fn index_of(&self, m: &FormMonomial) -> Option<usize> { self.index.get(m).copied() }

  pub fn degree_range(&self, k: usize) -> std::ops::Range<usize> {
    if k > self.dim {
      return 0..0;
    }
    self.offsets[k]..self.offsets[k + 1]
  }

  pub fn degree_of(&self, index: usize) -> usize { self.basis[index].degree() }

  pub fn d_matrix(&self) -> &SparseMatrix { &self.d }

  /// Whether a frequency vector lies in the model (always zero for Lie-algebra models).
  pub fn admits_frequency(&self, freq: &[i64]) -> bool {
    if freq.len() != self.dim {
      return false;
    }
    match self.kind {
      ModelKind::LieAlgebra => freq.iter().all(|&k| k == 0),
      ModelKind::Torus => freq.iter().zip(&self.window).all(|(&k, &(lo, hi))| lo <= k && k <= hi),
    }
  }

  pub fn check_monomial(&self, m: &FormMonomial) -> Result<()> {
    if m.dim() != self.dim {
      return Err(Error::Schema(format!("frequency vector of length {} in a model of dimension {}", m.dim(), self.dim)));
    }
    if !self.admits_frequency(m.freq()) {
      return Err(Error::WindowOverflow { freq: m.freq().to_vec() });
    }
    Ok(())
  }

  /// `d` of one basis monomial.
  pub fn d_monomial(&self, m: &FormMonomial) -> Vec<(FormMonomial, Rational)> {
    let mut out: BTreeMap<FormMonomial, Rational> = BTreeMap::new();
    let mut push = |mono: FormMonomial, c: Rational| {
      let slot = out.entry(mono).or_insert_with(Rational::zero);
      *slot += c;
    };
    match self.kind {
      ModelKind::Torus => {
        for (j, &k) in m.freq().iter().enumerate() {
          if k == 0 {
            continue;
          }
          if let Some(neg) = merge_sign(1 << j, m.mask() as u64) {
            let c = Rational::from_integer(k.into());
            push(FormMonomial::from_mask(m.freq().to_vec(), m.mask() | (1 << j)), if neg { -c } else { c });
          }
        }
      },
      ModelKind::LieAlgebra => {
        let indices: Vec<u32> = (0..self.dim as u32).filter(|i| m.mask() & (1 << i) != 0).collect();
        for (r, &i) in indices.iter().enumerate() {
          let prefix = indices[..r].iter().fold(0u32, |a, &b| a | (1 << b));
          let suffix = indices[r + 1..].iter().fold(0u32, |a, &b| a | (1 << b));
          for (w, c) in &self.de[i as usize] {
            if let Some((neg, mask)) = triple_merge(prefix, *w, suffix) {
              let neg = neg ^ (r % 2 == 1);
              push(FormMonomial::from_mask(m.freq().to_vec(), mask), if neg { -c.clone() } else { c.clone() });
            }
          }
        }
      },
    }
    out.into_iter().filter(|(_, c)| !c.is_zero()).collect()
  }

  /// `d` restricted to degree `k`, as a block `Λ^k → Λ^{k+1}`.
  pub fn d_block(&self, k: usize) -> SparseMatrix {
    let cols: Vec<usize> = self.degree_range(k).collect();
    let rows: Vec<usize> = self.degree_range(k + 1).collect();
    self.d.submatrix(&rows, &cols)
  }

  /// Betti numbers `dim ker d / im d` per degree.
  pub fn full_homology(&self) -> Vec<usize> { self.homology_on(|_| true) }

  /// Betti numbers of each frequency mode separately (torus models).
  pub fn per_mode_homology(&self) -> BTreeMap<Vec<i64>, Vec<usize>> {
    self.modes.iter().map(|mode| (mode.clone(), self.homology_on(|m| m.freq() == mode.as_slice()))).collect()
  }

  fn homology_on(&self, keep: impl Fn(&FormMonomial) -> bool) -> Vec<usize> {
    let pick = |k: usize| -> Vec<usize> { self.degree_range(k).filter(|&i| keep(&self.basis[i])).collect() };
    let ranks: Vec<usize> = (0..=self.dim).map(|k| self.d.submatrix(&pick(k + 1), &pick(k)).rank()).collect();
    (0..=self.dim).map(|k| pick(k).len() - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect()
  }

  pub fn to_file(&self) -> ModelFile {
    ModelFile {
      kind:      self.kind,
      dim:       self.dim,
      structure: self
        .structure
        .iter()
        .map(|s| StructureEntry { target: s.target, j: s.j, k: s.k, coeff: format_rational(&s.coeff) })
        .collect(),
      window:    self.window.iter().map(|&(l, u)| [l, u]).collect(),
    }
  }
}

impl fmt::Display for Model {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match self.kind {
      ModelKind::LieAlgebra => write!(f, "lie_algebra(dim {}, {} structure constants)", self.dim, self.structure.len()),
      ModelKind::Torus => write!(f, "torus(dim {}, window {:?})", self.dim, self.window),
    }
  }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureEntry {
  pub target: usize,
  pub j:      usize,
  pub k:      usize,
  pub coeff:  String,
}

/// On-disk model schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
  pub kind:      ModelKind,
  pub dim:       usize,
  #[serde(default, skip_serializing_if = "Vec::is_empty")]
  pub structure: Vec<StructureEntry>,
  #[serde(default, skip_serializing_if = "Vec::is_empty")]
  pub window:    Vec<[i64; 2]>,
}

impl ModelFile {
  pub fn from_json(text: &str) -> Result<Self> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("model file: {e}")))
  }

  pub fn to_json(&self) -> String { serde_json::to_string_pretty(self).expect("model file serializes") }

  pub fn build(&self) -> Result<Model> {
    match self.kind {
      ModelKind::LieAlgebra => {
        if !self.window.is_empty() {
          return Err(Error::Schema("lie_algebra models take no window".into()));
        }
        let structure = self
          .structure
          .iter()
          .map(|s| Ok(StructureConstant { target: s.target, j: s.j, k: s.k, coeff: parse_rational(&s.coeff)? }))
          .collect::<Result<Vec<_>>>()?;
        Model::build_lie_algebra_model(self.dim, &structure)
      },
      ModelKind::Torus => {
        if !self.structure.is_empty() {
          return Err(Error::Schema("torus models take no structure constants".into()));
        }
        let window: Vec<(i64, i64)> = self.window.iter().map(|w| (w[0], w[1])).collect();
        Model::build_torus_model(self.dim, &window)
      },
    }
  }
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::algebra::rational::int;

  pub(crate) fn sc(target: usize, j: usize, k: usize, c: i64) -> StructureConstant {
    StructureConstant { target, j, k, coeff: int(c) }
  }

  #[test]
  fn abelian_three() {
    let m = Model::build_lie_algebra_model(3, &[]).unwrap();
    assert!(m.d_matrix().is_zero());
    assert_eq!(m.full_homology(), vec![1, 3, 3, 1]);
  }

  #[test]
  fn heisenberg_three() {
    let m = Model::build_lie_algebra_model(3, &[sc(3, 1, 2, 1)]).unwrap();
    assert_eq!(m.full_homology(), vec![1, 2, 2, 1]);
    let e3 = FormMonomial::new(vec![0; 3], &[3]).unwrap();
    let e12 = FormMonomial::new(vec![0; 3], &[1, 2]).unwrap();
    assert_eq!(m.d_monomial(&e3), vec![(e12, int(1))]);
  }

  #[test]
  fn heisenberg_five() {
    let m = Model::build_lie_algebra_model(5, &[sc(5, 1, 2, 1), sc(5, 3, 4, 1)]).unwrap();
    let h = m.full_homology();
    assert_eq!(h[0], 1);
    assert_eq!(h[1], 4);
  }

  #[test]
  fn jacobi_violation_names_e2() {
    let err = Model::build_lie_algebra_model(3, &[sc(1, 1, 2, 1), sc(2, 1, 3, 1)]).unwrap_err();
    assert_eq!(err, Error::JacobiViolation { monomial: "[2]".into() });
  }

  #[test]
  fn malformed_structure_constants() {
    assert!(matches!(Model::build_lie_algebra_model(3, &[sc(3, 2, 1, 1)]), Err(Error::InvalidModel(_))));
    assert!(matches!(Model::build_lie_algebra_model(3, &[sc(4, 1, 2, 1)]), Err(Error::InvalidModel(_))));
  }

  #[test]
  fn torus_examples() {
    let t1 = Model::build_torus_model(1, &[(-1, 1)]).unwrap();
    assert_eq!(t1.form_space_dim(), 6);
    assert_eq!(t1.full_homology(), vec![1, 1]);
    let t2 = Model::build_torus_model(2, &[(0, 0), (0, 0)]).unwrap();
    assert!(t2.d_matrix().is_zero());
    assert_eq!(t2.full_homology(), vec![1, 2, 1]);
    let t3 = Model::build_torus_model(3, &[(-1, 1); 3]).unwrap();
    assert_eq!(t3.form_space_dim(), 216);
    assert_eq!(t3.full_homology(), vec![1, 3, 3, 1]);
  }

  #[test]
  fn torus_homology_lives_in_mode_zero() {
    let t = Model::build_torus_model(2, &[(-1, 1), (-2, 1)]).unwrap();
    for (mode, betti) in t.per_mode_homology() {
      if mode.iter().all(|&k| k == 0) {
        assert_eq!(betti, vec![1, 2, 1]);
      } else {
        assert!(betti.iter().all(|&b| b == 0), "mode {mode:?} has {betti:?}");
      }
    }
  }

  #[test]
  fn window_must_contain_zero() {
    assert!(matches!(Model::build_torus_model(1, &[(1, 2)]), Err(Error::InvalidModel(_))));
  }

  #[test]
  fn d_squares_to_zero_on_torus() {
    let t = Model::build_torus_model(3, &[(-1, 1); 3]).unwrap();
    assert!(t.d_matrix().compose(t.d_matrix()).unwrap().is_zero());
  }

  #[test]
  fn model_file_round_trip() {
    let text = r#"{"kind":"lie_algebra","dim":3,"structure":[{"target":3,"j":1,"k":2,"coeff":"1"}]}"#;
    let file = ModelFile::from_json(text).unwrap();
    let model = file.build().unwrap();
    let once = model.to_file().to_json();
    let twice = ModelFile::from_json(&once).unwrap().build().unwrap().to_file().to_json();
    assert_eq!(once, twice);
    assert!(ModelFile::from_json(r#"{"kind":"torus","dim":1,"window":[[-1,1]],"extra":1}"#).is_err());
  }
}
