//! The spectral sequence of a perturbation `d + λP` on a flat subcomplex.
//!
//! Pages are indexed so that `E_1 = T` with `d_1 = d` and `E_2 = H(T, d)` with `d_2`
//! induced by `P`. A class `[x]` of `E_l` has a chain `x = u_0, u_1, …, u_{l-2}` with
//! `d u_0 = 0` and `d u_j = P u_{j-1}`, and `d_l [x] = [P u_{l-2}]`.
//!
//! The normative pages are subquotients `Z_l / B_l`: `Z_l` holds starts of chains of length
//! `l - 1` and `B_l = im d + {P u_{l-3}}` over chains of length `l - 2`. The Massey
//! cross-check rebuilds every chain by one joint canonical solve and compares classes.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::algebra::{Rational, SparseMatrix, SparseVector, Subquotient, Subspace};
use crate::error::{Error, Result};
use crate::flat::{homology_of, FlatSubcomplex};
use crate::fock::operator::FormOperator;
use crate::model::{Grading, Model};

/// A complex `T ⊆ Q^ambient` split into labelled pieces, with `d` and a perturbation `P`
/// shifting labels by 1 and `p_shift`.
#[derive(Clone, Debug)]
pub struct PerturbedComplex {
  pub grading:            Grading,
  pub ambient:            usize,
  /// Degree of each ambient coordinate, used to report observed shifts.
  pub coordinate_degrees: Vec<i64>,
  pub pieces:             BTreeMap<i64, Subspace>,
  pub d:                  SparseMatrix,
  pub p:                  SparseMatrix,
  pub p_shift:            i64,
}

impl PerturbedComplex {
  /// Degree grading when `T` is degree graded and `P` has a degree shift; parity otherwise.
  pub fn from_flat(model: &Model, t: &FlatSubcomplex, p: &FormOperator) -> Result<Self> {
    let coordinate_degrees = (0..model.form_space_dim()).map(|i| model.degree_of(i) as i64).collect();
    let (grading, pieces, p_shift) = match (t.grading(), p.shift()) {
      (Grading::Degree, Some(s)) => (Grading::Degree, t.pieces().clone(), s),
      _ => {
        if !p.is_odd() && !p.is_zero() {
          return Err(Error::Structural("a parity-graded perturbation must be odd".into()));
        }
        (Grading::Parity, t.parity_pieces(), 1)
      },
    };
    Ok(Self {
      grading,
      ambient: t.ambient(),
      coordinate_degrees,
      pieces,
      d: FormOperator::d(model).matrix().clone(),
      p: p.matrix().clone(),
      p_shift,
    })
  }

  pub fn piece(&self, label: i64) -> Subspace {
    self.pieces.get(&label).cloned().unwrap_or_else(|| Subspace::zero(self.ambient))
  }

  pub fn shift(&self, label: i64, by: i64) -> i64 { self.grading.shift(label, by) }

  /// Label step between consecutive chain elements.
  pub fn chain_step(&self) -> i64 {
    match self.grading {
      Grading::Degree => self.p_shift - 1,
      Grading::Parity => 0,
    }
  }

  /// Label shift of `d_l`.
  pub fn page_shift(&self, l: usize) -> i64 {
    if l == 1 {
      return 1;
    }
    (l as i64 - 2) * self.chain_step() + self.p_shift
  }

  pub fn dim(&self) -> usize { self.pieces.values().map(Subspace::dim).sum() }

  /// `d² = 0`, `dP + Pd = 0`, `P² = 0` on `T`, and `T` is stable under `d` and `P`.
  pub fn check(&self) -> Result<()> {
    let total = Subspace::span(self.ambient, self.pieces.values().flat_map(|s| s.basis().iter().cloned()));
    for v in total.basis() {
      let dv = self.d.apply(v);
      let pv = self.p.apply(v);
      if !total.contains(&dv) || !total.contains(&pv) {
        return Err(Error::Structural(format!("T is not stable under d and P at {v}")));
      }
      if !self.d.apply(&dv).is_zero() {
        return Err(Error::Structural(format!("d^2 != 0 on T at {v}")));
      }
      if !self.d.apply(&pv).plus(&self.p.apply(&dv)).is_zero() {
        return Err(Error::Structural(format!("dP + Pd != 0 on T at {v}")));
      }
      if !self.p.apply(&pv).is_zero() {
        return Err(Error::Structural(format!("P^2 != 0 on T at {v}")));
      }
    }
    Ok(())
  }

  fn sign(&self, label: i64) -> i64 { self.grading.sign(label) }

  fn degrees_of(&self, v: &SparseVector) -> BTreeSet<i64> { v.iter().map(|(i, _)| self.coordinate_degrees[i]).collect() }
}

type Chain = Vec<SparseVector>;

/// Chains of one length for every start label.
struct Chains {
  length: usize,
  by_label: BTreeMap<i64, Vec<Chain>>,
}

impl Chains {
  fn first(c: &PerturbedComplex) -> Result<Self> {
    let mut by_label = BTreeMap::new();
    for (&k, piece) in &c.pieces {
      let z = piece.kernel_of(&c.d)?;
      by_label.insert(k, z.basis().iter().map(|v| vec![v.clone()]).collect());
    }
    Ok(Chains { length: 1, by_label })
  }

  fn extend(&self, c: &PerturbedComplex) -> Result<Self> {
    let m = self.length;
    let step = c.chain_step();
    let mut by_label = BTreeMap::new();
    // Zero-prefixed chains can start at labels outside the complex when the step is nonzero.
    let labels: BTreeSet<i64> =
      self.by_label.keys().copied().chain(c.pieces.keys().map(|&l| c.shift(l, -(m as i64) * step))).collect();
    for k in labels {
      let chains = self.get(k);
      let w = c.piece(c.shift(k, m as i64 * step));
      let dw = w.basis_matrix();
      let m_dw = c.d.compose(&dw)?;
      let image = Subspace::span(c.ambient, m_dw.columns().iter().cloned());
      let ends: Vec<SparseVector> = chains.iter().map(|ch| c.p.apply(&ch[m - 1])).collect();
      let reduced = SparseMatrix::from_columns(c.ambient, ends.iter().map(|e| image.reduce(e)).collect())?;
      let mut out: Vec<Chain> = Vec::new();
      for a in reduced.kernel() {
        let mut chain = vec![SparseVector::new(); m];
        let mut target = SparseVector::new();
        for (i, coef) in a.iter() {
          for (j, u) in chains[i].iter().enumerate() {
            chain[j].axpy(coef, u);
          }
          target.axpy(coef, &ends[i]);
        }
        let x = m_dw
          .solve(&target)?
          .ok_or_else(|| Error::Contradiction("chain extension has no solution after the image test".into()))?;
        chain.push(dw.apply(&x));
        out.push(chain);
      }
      for z in w.kernel_of(&c.d)?.basis() {
        let mut chain = vec![SparseVector::new(); m];
        chain.push(z.clone());
        out.push(chain);
      }
      by_label.insert(k, out);
    }
    Ok(Chains { length: m + 1, by_label })
  }

  fn get(&self, label: i64) -> &[Chain] { self.by_label.get(&label).map_or(&[], Vec::as_slice) }
}

#[derive(Clone, Debug, Serialize)]
pub struct DifferentialBlock {
  pub from:            i64,
  pub to:              i64,
  pub rank:            usize,
  pub observed_shifts: Vec<i64>,
  pub parity_reversing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PageReport {
  pub page:          usize,
  pub dims:          BTreeMap<i64, usize>,
  pub even:          usize,
  pub odd:           usize,
  pub total:         usize,
  pub euler:         i64,
  pub shift:         i64,
  pub differentials: Vec<DifferentialBlock>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MasseyCheck {
  pub classes_checked: usize,
  pub agreements:      usize,
  pub mismatches:      Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
  pub convention:        String,
  pub grading:           Grading,
  pub complex_dim:       usize,
  pub pages:             Vec<PageReport>,
  pub stabilized_at:     usize,
  pub certified:         bool,
  pub e_infinity:        BTreeMap<i64, usize>,
  pub e_infinity_total:  usize,
  pub squares_vanish:    bool,
  pub recursion_holds:   bool,
  pub euler_constant:    bool,
  pub massey:            MasseyCheck,
}

/// One page: subquotients per label and `d_l` as matrices in representative bases.
pub struct Page {
  pub index:  usize,
  pub groups: BTreeMap<i64, Subquotient>,
  pub maps:   BTreeMap<i64, SparseMatrix>,
  /// Raw images `P u_{l-2}` of every representative, per source label.
  images:     BTreeMap<i64, Vec<SparseVector>>,
}

fn subquotient(z: Subspace, b: Subspace) -> Result<Subquotient> {
  Subquotient::new(z, b).map_err(|e| match e {
    Error::NotWellDefined { witness, .. } => Error::Structural(format!("page boundary not inside page cycles: {witness}")),
    other => other,
  })
}

fn combine(chains: &[Chain], coefs: &SparseVector, at: usize) -> SparseVector {
  let mut out = SparseVector::new();
  for (i, c) in coefs.iter() {
    out.axpy(c, &chains[i][at]);
  }
  out
}

fn build_page(c: &PerturbedComplex, l: usize, longer: Option<&Chains>, shorter: Option<&Chains>) -> Result<Page> {
  let labels: Vec<i64> = c.pieces.keys().copied().collect();
  let mut groups = BTreeMap::new();
  for &k in &labels {
    let (z, b) = if l == 1 {
      (c.piece(k), Subspace::zero(c.ambient))
    } else {
      let z = Subspace::span(c.ambient, longer.expect("chains").get(k).iter().map(|ch| ch[0].clone()));
      let mut b = c.piece(c.shift(k, -1)).image_under(&c.d)?;
      if l >= 3 {
        let s = c.shift(k, -((l as i64 - 3) * c.chain_step() + c.p_shift));
        let extra = shorter.expect("chains").get(s).iter().map(|ch| c.p.apply(&ch[l - 3])).collect::<Vec<_>>();
        b = b.sum(&Subspace::span(c.ambient, extra));
      }
      (z, b)
    };
    groups.insert(k, subquotient(z, b)?);
  }
  let mut maps = BTreeMap::new();
  let mut images = BTreeMap::new();
  for &k in &labels {
    let src = &groups[&k];
    let to = c.shift(k, c.page_shift(l));
    let empty = subquotient(Subspace::zero(c.ambient), Subspace::zero(c.ambient))?;
    let dst = groups.get(&to).unwrap_or(&empty);
    let mut cols = Vec::new();
    let mut raw = Vec::new();
    if l == 1 {
      for x in src.representatives() {
        let y = c.d.apply(x);
        cols.push(dst.class_coordinates(&y).map_err(|_| Error::Structural("d leaves the subcomplex".into()))?);
        raw.push(y);
      }
    } else {
      let chains = longer.expect("chains").get(k);
      let starts = SparseMatrix::from_columns(c.ambient, chains.iter().map(|ch| ch[0].clone()).collect())?;
      for zero_start in starts.kernel() {
        let y = c.p.apply(&combine(chains, &zero_start, l - 2));
        if !dst.boundaries().contains(&y) {
          return Err(Error::NotWellDefined {
            reason:  format!("d_{l} depends on the chain chosen for a class of label {k}"),
            witness: y.to_string(),
          });
        }
      }
      for x in src.representatives() {
        let coefs = starts
          .solve(x)?
          .ok_or_else(|| Error::Contradiction(format!("page {l} representative {x} has no chain")))?;
        let y = c.p.apply(&combine(chains, &coefs, l - 2));
        cols.push(
          dst
            .class_coordinates(&y)
            .map_err(|_| Error::Structural(format!("d_{l} image {y} is not a page cycle")))?,
        );
        raw.push(y);
      }
    }
    maps.insert(k, SparseMatrix::from_columns(dst.dim(), cols)?);
    images.insert(k, raw);
  }
  Ok(Page { index: l, groups, maps, images })
}

/// `d_l [x]` rebuilt from a joint canonical solve of `d u_1 = P x`, `d u_j = P u_{j-1}`.
pub fn massey_differential(c: &PerturbedComplex, l: usize, start: i64, x: &SparseVector) -> Result<SparseVector> {
  if l < 2 {
    return Ok(c.d.apply(x));
  }
  if l == 2 {
    return Ok(c.p.apply(x));
  }
  let step = c.chain_step();
  let n = l - 2;
  let bases: Vec<SparseMatrix> = (1..=n).map(|j| c.piece(c.shift(start, j as i64 * step)).basis_matrix()).collect();
  let offsets: Vec<usize> = bases.iter().scan(0, |acc, b| {
    let o = *acc;
    *acc += b.ncols();
    Some(o)
  }).collect();
  let ncols = bases.iter().map(SparseMatrix::ncols).sum();
  let mut entries: Vec<(usize, usize, Rational)> = Vec::new();
  for j in 0..n {
    let dblock = c.d.compose(&bases[j])?;
    for (r, col, v) in dblock.entries() {
      entries.push((j * c.ambient + r, offsets[j] + col, v.clone()));
    }
    if j > 0 {
      let pblock = c.p.compose(&bases[j - 1])?;
      for (r, col, v) in pblock.entries() {
        entries.push((j * c.ambient + r, offsets[j - 1] + col, -v.clone()));
      }
    }
  }
  let system = SparseMatrix::from_entries(n * c.ambient, ncols, entries)?;
  let rhs = c.p.apply(x);
  let y = system
    .solve(&rhs)?
    .ok_or_else(|| Error::Contradiction(format!("no Massey chain of length {} from {x}", l - 1)))?;
  let last: SparseVector = y.iter().filter(|(i, _)| *i >= offsets[n - 1]).map(|(i, v)| (i - offsets[n - 1], v.clone())).collect();
  Ok(c.p.apply(&bases[n - 1].apply(&last)))
}

/// Computes pages until the total dimension vanishes or `max_page` is reached.
pub fn spectral_sequence(c: &PerturbedComplex, max_page: Option<usize>) -> Result<(SpectralReport, Vec<Page>)> {
  c.check()?;
  let dim_t = c.dim();
  let max_page = max_page.unwrap_or(dim_t + 2).max(1);
  let mut pages: Vec<Page> = Vec::new();
  let mut shorter: Option<Chains> = None;
  let mut longer: Option<Chains> = None;
  let mut massey = MasseyCheck { classes_checked: 0, agreements: 0, mismatches: Vec::new() };
  for l in 1..=max_page {
    if l == 2 {
      longer = Some(Chains::first(c)?);
    } else if l >= 3 {
      let next = longer.as_ref().expect("chains").extend(c)?;
      shorter = longer.replace(next);
    }
    let page = build_page(c, l, longer.as_ref(), shorter.as_ref())?;
    for (&k, q) in &page.groups {
      let to = c.shift(k, c.page_shift(l));
      let Some(dst) = page.groups.get(&to) else { continue };
      for (j, x) in q.representatives().iter().enumerate() {
        massey.classes_checked += 1;
        let y = massey_differential(c, l, k, x)?;
        let agrees = match dst.class_coordinates(&y) {
          Ok(coords) => coords == *page.maps[&k].column(j),
          Err(_) => false,
        };
        if agrees {
          massey.agreements += 1;
        } else {
          massey.mismatches.push(format!("page {l}, label {k}, class {j}"));
        }
      }
    }
    let total: usize = page.groups.values().map(Subquotient::dim).sum();
    pages.push(page);
    if total == 0 {
      break;
    }
  }

  let mut reports = Vec::new();
  let mut squares_vanish = true;
  let mut recursion_holds = true;
  for (idx, page) in pages.iter().enumerate() {
    let l = page.index;
    let shift = c.page_shift(l);
    let dims: BTreeMap<i64, usize> = page.groups.iter().map(|(&k, q)| (k, q.dim())).collect();
    let mut differentials = Vec::new();
    for (&k, m) in &page.maps {
      let to = c.shift(k, shift);
      if let Some(next) = page.maps.get(&to) {
        if next.nrows() > 0 && m.ncols() > 0 && !next.compose(m)?.is_zero() {
          squares_vanish = false;
        }
      }
      let mut observed = BTreeSet::new();
      let mut parity_reversing = true;
      for (x, y) in page.groups[&k].representatives().iter().zip(&page.images[&k]) {
        if y.is_zero() {
          continue;
        }
        let (dx, dy) = (c.degrees_of(x), c.degrees_of(y));
        if dx.len() == 1 && dy.len() == 1 {
          observed.insert(dy.iter().next().unwrap() - dx.iter().next().unwrap());
        }
        let px: BTreeSet<i64> = dx.iter().map(|d| d.rem_euclid(2)).collect();
        let py: BTreeSet<i64> = dy.iter().map(|d| d.rem_euclid(2)).collect();
        if px.len() != 1 || py.len() != 1 || px == py {
          parity_reversing = false;
        }
      }
      differentials.push(DifferentialBlock {
        from: k,
        to,
        rank: m.rank(),
        observed_shifts: observed.into_iter().collect(),
        parity_reversing,
      });
    }
    if let Some(next) = pages.get(idx + 1) {
      for (&k, q) in &page.groups {
        let out_rank = page.maps[&k].rank();
        let in_rank: usize = page.maps.iter().filter(|(&s, _)| c.shift(s, shift) == k).map(|(_, m)| m.rank()).sum();
        let expected = q.dim() - out_rank - in_rank;
        if next.groups.get(&k).map_or(0, Subquotient::dim) != expected {
          recursion_holds = false;
        }
      }
    }
    let even = dims.iter().filter(|(&k, _)| k.rem_euclid(2) == 0).map(|(_, &d)| d).sum();
    let odd = dims.iter().filter(|(&k, _)| k.rem_euclid(2) == 1).map(|(_, &d)| d).sum();
    let euler = dims.iter().map(|(&k, &d)| c.sign(k) * d as i64).sum();
    reports.push(PageReport { page: l, total: even + odd, dims, even, odd, euler, shift, differentials });
  }
  let last = reports.last().expect("at least one page");
  let mut stabilized_at = last.page;
  for r in reports.iter().rev().skip(1) {
    if r.dims == last.dims && r.differentials.iter().all(|b| b.rank == 0) {
      stabilized_at = r.page;
    } else {
      break;
    }
  }
  let certified = last.total == 0 || last.page >= dim_t + 2;
  let euler_constant = reports.iter().all(|r| r.euler == reports[0].euler);
  let report = SpectralReport {
    convention: "E_1 = T with d_1 = d; E_2 = H(T, d) with d_2 induced by P; d_l [x] = [P u_(l-2)] for a chain d u_0 = 0, d u_j = P u_(j-1)".into(),
    grading: c.grading,
    complex_dim: dim_t,
    stabilized_at,
    certified,
    e_infinity: last.dims.clone(),
    e_infinity_total: last.total,
    squares_vanish,
    recursion_holds,
    euler_constant,
    massey,
    pages: reports,
  };
  Ok((report, pages))
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleReport {
  pub value: String,
  pub even:  usize,
  pub odd:   usize,
  pub total: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
  pub samples:          Vec<SampleReport>,
  pub min_total:        usize,
  pub e_infinity_total: usize,
  pub pass:             bool,
}

/// Parity-graded dimensions of `H(T, d + λ_0 P)` at each sample, compared with `E_∞`.
pub fn perturbed_homology_compare(c: &PerturbedComplex, samples: &[Rational], e_infinity_total: usize) -> Result<ComparisonReport> {
  if samples.len() < 3 {
    return Err(Error::Precondition(format!("at least 3 samples required, got {}", samples.len())));
  }
  if samples.iter().any(num_traits::Zero::is_zero) {
    return Err(Error::Precondition("samples must be nonzero".into()));
  }
  if (c.p_shift - 1).rem_euclid(2) != 0 {
    return Err(Error::Structural("d + P is not parity homogeneous".into()));
  }
  let mut parity: BTreeMap<i64, Subspace> = BTreeMap::new();
  for (&k, s) in &c.pieces {
    let p = k.rem_euclid(2);
    let merged = match parity.remove(&p) {
      Some(old) => old.sum(s),
      None => s.clone(),
    };
    parity.insert(p, merged);
  }
  for p in 0..2 {
    parity.entry(p).or_insert_with(|| Subspace::zero(c.ambient));
  }
  let mut out = Vec::new();
  for s in samples {
    let op = c.d.plus(&c.p.scaled(s))?;
    let groups = homology_of(&op, &parity, Grading::Parity)?;
    let even = groups[&0].dim();
    let odd = groups[&1].dim();
    out.push(SampleReport { value: s.to_string(), even, odd, total: even + odd });
  }
  let min_total = out.iter().map(|r| r.total).min().unwrap_or(0);
  Ok(ComparisonReport { samples: out, min_total, e_infinity_total, pass: min_total == e_infinity_total })
}
