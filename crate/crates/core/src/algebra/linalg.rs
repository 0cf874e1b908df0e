//! Sparse exact linear algebra over Q.
//!
//! Subspaces are always stored in reduced echelon form with the pivot at the *last*
//! nonzero coordinate of each basis vector. That is the shape the classical
//! free-variable kernel basis already has, so kernels come out canonical for free,
//! and any two spanning sets of the same subspace produce identical bases.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::rational::Rational;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseVector(BTreeMap<usize, Rational>);

impl SparseVector {
  pub fn new() -> Self { Self(BTreeMap::new()) }

  pub fn unit(i: usize) -> Self {
    let mut v = Self::new();
    v.0.insert(i, Rational::one());
    v
  }

  pub fn from_dense(values: &[Rational]) -> Self {
    Self(values.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect())
  }

  pub fn to_dense(&self, len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (&i, c) in &self.0 {
      out[i] = c.clone();
    }
    out
  }

  pub fn get(&self, i: usize) -> Option<&Rational> { self.0.get(&i) }

  pub fn is_zero(&self) -> bool { self.0.is_empty() }

  pub fn len_nonzero(&self) -> usize { self.0.len() }

  pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> { self.0.iter().map(|(&i, c)| (i, c)) }

  pub fn first_index(&self) -> Option<usize> { self.0.keys().next().copied() }

  pub fn last_index(&self) -> Option<usize> { self.0.keys().next_back().copied() }

  pub fn add_entry(&mut self, i: usize, c: Rational) {
    if c.is_zero() {
      return;
    }
    match self.0.get_mut(&i) {
      Some(slot) => {
        *slot += c;
        if slot.is_zero() {
          self.0.remove(&i);
        }
      },
      None => {
        self.0.insert(i, c);
      },
    }
  }

  /// `self += c * other`
  pub fn axpy(&mut self, c: &Rational, other: &SparseVector) {
    if c.is_zero() {
      return;
    }
    for (&i, v) in &other.0 {
      self.add_entry(i, c * v);
    }
  }

  pub fn scaled(&self, c: &Rational) -> SparseVector {
    if c.is_zero() {
      return SparseVector::new();
    }
    Self(self.0.iter().map(|(&i, v)| (i, v * c)).collect())
  }

  pub fn plus(&self, other: &SparseVector) -> SparseVector {
    let mut out = self.clone();
    out.axpy(&Rational::one(), other);
    out
  }

  pub fn minus(&self, other: &SparseVector) -> SparseVector {
    let mut out = self.clone();
    out.axpy(&-Rational::one(), other);
    out
  }

  /// Keeps the entries whose index passes `keep`, renumbered through `map`.
  pub fn remap(&self, map: impl Fn(usize) -> Option<usize>) -> SparseVector {
    let mut out = SparseVector::new();
    for (&i, c) in &self.0 {
      if let Some(j) = map(i) {
        out.add_entry(j, c.clone());
      }
    }
    out
  }
}

impl FromIterator<(usize, Rational)> for SparseVector {
  fn from_iter<I: IntoIterator<Item = (usize, Rational)>>(iter: I) -> Self {
    let mut v = SparseVector::new();
    for (i, c) in iter {
      v.add_entry(i, c);
    }
    v
  }
}

impl fmt::Display for SparseVector {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let parts: Vec<String> = self.0.iter().map(|(i, c)| format!("{i}:{c}")).collect();
    write!(f, "{{{}}}", parts.join(", "))
  }
}

/// Column-major sparse matrix; only nonzero entries are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
  nrows: usize,
  ncols: usize,
  cols:  Vec<SparseVector>,
}

impl SparseMatrix {
  pub fn zeros(nrows: usize, ncols: usize) -> Self { Self { nrows, ncols, cols: vec![SparseVector::new(); ncols] } }

  pub fn identity(n: usize) -> Self { Self { nrows: n, ncols: n, cols: (0..n).map(SparseVector::unit).collect() } }

  pub fn from_entries(
    nrows: usize,
    ncols: usize,
    entries: impl IntoIterator<Item = (usize, usize, Rational)>,
  ) -> Result<Self> {
    let mut m = Self::zeros(nrows, ncols);
    for (i, j, c) in entries {
      if i >= nrows || j >= ncols {
        return Err(Error::DimensionMismatch(format!("entry ({i},{j}) outside {nrows}x{ncols}")));
      }
      m.cols[j].add_entry(i, c);
    }
    Ok(m)
  }

  /// Builds a matrix from coefficients of any ring; only scalar entries are accepted.
  pub fn from_coefficients<C: super::ring::Coefficient>(
    nrows: usize,
    ncols: usize,
    entries: impl IntoIterator<Item = (usize, usize, C)>,
  ) -> Result<Self> {
    let mut scalars = Vec::new();
    for (i, j, c) in entries {
      let s = c.to_scalar().ok_or_else(|| {
        Error::UnsupportedCoefficient(format!("entry ({i},{j}) = {c:?} is not a field element"))
      })?;
      scalars.push((i, j, s));
    }
    Self::from_entries(nrows, ncols, scalars)
  }

  pub fn from_columns(nrows: usize, cols: Vec<SparseVector>) -> Result<Self> {
    for (j, c) in cols.iter().enumerate() {
      if c.last_index().is_some_and(|i| i >= nrows) {
        return Err(Error::DimensionMismatch(format!("column {j} has an entry beyond row {nrows}")));
      }
    }
    Ok(Self { nrows, ncols: cols.len(), cols })
  }

  pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m = Self::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
      for (j, c) in row.iter().enumerate() {
        m.cols[j].add_entry(i, c.clone());
      }
    }
    m
  }

  pub fn nrows(&self) -> usize { self.nrows }

  pub fn ncols(&self) -> usize { self.ncols }

  pub fn column(&self, j: usize) -> &SparseVector { &self.cols[j] }

  pub fn columns(&self) -> &[SparseVector] { &self.cols }

  pub fn entry(&self, i: usize, j: usize) -> Rational { self.cols[j].get(i).cloned().unwrap_or_else(Rational::zero) }

  pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
    self.cols.iter().enumerate().flat_map(|(j, col)| col.iter().map(move |(i, c)| (i, j, c)))
  }

  pub fn nnz(&self) -> usize { self.cols.iter().map(SparseVector::len_nonzero).sum() }

  pub fn is_zero(&self) -> bool { self.cols.iter().all(SparseVector::is_zero) }

  pub fn apply(&self, v: &SparseVector) -> SparseVector {
    let mut out = SparseVector::new();
    for (j, c) in v.iter() {
      if j < self.ncols {
        out.axpy(c, &self.cols[j]);
      }
    }
    out
  }

  /// `self * rhs`
  pub fn compose(&self, rhs: &SparseMatrix) -> Result<SparseMatrix> {
    if self.ncols != rhs.nrows {
      return Err(Error::DimensionMismatch(format!(
        "cannot compose {}x{} with {}x{}",
        self.nrows, self.ncols, rhs.nrows, rhs.ncols
      )));
    }
    Ok(SparseMatrix { nrows: self.nrows, ncols: rhs.ncols, cols: rhs.cols.iter().map(|c| self.apply(c)).collect() })
  }

  pub fn plus(&self, other: &SparseMatrix) -> Result<SparseMatrix> { self.combine(other, &Rational::one()) }

  pub fn minus(&self, other: &SparseMatrix) -> Result<SparseMatrix> { self.combine(other, &-Rational::one()) }

  fn combine(&self, other: &SparseMatrix, c: &Rational) -> Result<SparseMatrix> {
    if self.nrows != other.nrows || self.ncols != other.ncols {
      return Err(Error::DimensionMismatch(format!(
        "cannot add {}x{} and {}x{}",
        self.nrows, self.ncols, other.nrows, other.ncols
      )));
    }
    let cols = self
      .cols
      .iter()
      .zip(&other.cols)
      .map(|(a, b)| {
        let mut s = a.clone();
        s.axpy(c, b);
        s
      })
      .collect();
    Ok(SparseMatrix { nrows: self.nrows, ncols: self.ncols, cols })
  }

  pub fn scaled(&self, c: &Rational) -> SparseMatrix {
    SparseMatrix { nrows: self.nrows, ncols: self.ncols, cols: self.cols.iter().map(|v| v.scaled(c)).collect() }
  }

  pub fn rows(&self) -> Vec<SparseVector> {
    let mut rows = vec![SparseVector::new(); self.nrows];
    for (i, j, c) in self.entries() {
      rows[i].add_entry(j, c.clone());
    }
    rows
  }

  pub fn transpose(&self) -> SparseMatrix { SparseMatrix { nrows: self.ncols, ncols: self.nrows, cols: self.rows() } }

  /// Restriction to the given rows and columns, renumbered in the order given.
  pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> SparseMatrix {
    let row_pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(k, &i)| (i, k)).collect();
    let new_cols = cols.iter().map(|&j| self.cols[j].remap(|i| row_pos.get(&i).copied())).collect();
    SparseMatrix { nrows: rows.len(), ncols: cols.len(), cols: new_cols }
  }

  pub fn rank(&self) -> usize { Echelon::from_vectors(PivotSide::Leading, self.rows()).rank() }

  pub fn rank_kernel_image(&self) -> RankKernelImage {
    let rref = Echelon::from_vectors(PivotSide::Leading, self.rows());
    let rank = rref.rank();
    let kernel = rref.null_space(self.ncols);
    let image = Subspace::span(self.nrows, self.cols.iter().cloned()).basis().to_vec();
    debug_assert_eq!(rank + kernel.len(), self.ncols);
    debug_assert_eq!(rank, image.len());
    RankKernelImage { rank, kernel, image }
  }

  pub fn kernel(&self) -> Vec<SparseVector> {
    Echelon::from_vectors(PivotSide::Leading, self.rows()).null_space(self.ncols)
  }

  /// The particular solution of `self * x = rhs` whose free coordinates (non-pivot
  /// columns of the leading-pivot row echelon form) are zero, or `None`.
  pub fn solve(&self, rhs: &SparseVector) -> Result<Option<SparseVector>> {
    if rhs.last_index().is_some_and(|i| i >= self.nrows) {
      return Err(Error::DimensionMismatch(format!(
        "right-hand side has an entry beyond row {} of a {}x{} matrix",
        self.nrows, self.nrows, self.ncols
      )));
    }
    let mut rows = self.rows();
    for (i, c) in rhs.iter() {
      rows[i].add_entry(self.ncols, c.clone());
    }
    let rref = Echelon::from_vectors(PivotSide::Leading, rows);
    if rref.has_pivot(self.ncols) {
      return Ok(None);
    }
    let mut x = SparseVector::new();
    for (&p, row) in &rref.rows {
      if let Some(c) = row.get(self.ncols) {
        x.add_entry(p, c.clone());
      }
    }
    Ok(Some(x))
  }

  pub fn to_dense(&self) -> Vec<Vec<Rational>> {
    let mut out = vec![vec![Rational::zero(); self.ncols]; self.nrows];
    for (i, j, c) in self.entries() {
      out[i][j] = c.clone();
    }
    out
  }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankKernelImage {
  pub rank:   usize,
  pub kernel: Vec<SparseVector>,
  pub image:  Vec<SparseVector>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotSide {
  /// Pivot at the smallest nonzero index (ordinary row reduction).
  Leading,
  /// Pivot at the largest nonzero index (canonical subspace bases).
  Trailing,
}

/// A fully reduced echelon basis keyed by pivot: every row has a 1 at its pivot and a 0
/// at every other row's pivot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
  side: PivotSide,
  rows: BTreeMap<usize, SparseVector>,
}

impl Echelon {
  pub fn new(side: PivotSide) -> Self { Self { side, rows: BTreeMap::new() } }

  pub fn from_vectors(side: PivotSide, vectors: impl IntoIterator<Item = SparseVector>) -> Self {
    let mut e = Self::new(side);
    for v in vectors {
      e.insert(v);
    }
    e
  }

  pub fn rank(&self) -> usize { self.rows.len() }

  pub fn has_pivot(&self, i: usize) -> bool { self.rows.contains_key(&i) }

  pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ { self.rows.keys().copied() }

  pub fn rows(&self) -> impl Iterator<Item = (usize, &SparseVector)> { self.rows.iter().map(|(&p, r)| (p, r)) }

  /// Fully reduces `v` against the stored rows.
  pub fn reduce(&self, v: &SparseVector) -> SparseVector {
    let hits: Vec<(usize, Rational)> =
      v.iter().filter(|(i, _)| self.rows.contains_key(i)).map(|(i, c)| (i, c.clone())).collect();
    let mut out = v.clone();
    for (p, c) in hits {
      out.axpy(&-c, &self.rows[&p]);
    }
    out
  }

  /// Returns `true` if `v` enlarged the span.
  pub fn insert(&mut self, v: SparseVector) -> bool {
    let r = self.reduce(&v);
    let pivot = match self.side {
      PivotSide::Leading => r.first_index(),
      PivotSide::Trailing => r.last_index(),
    };
    let Some(p) = pivot else {
      return false;
    };
    let inv = Rational::one() / r.get(p).unwrap();
    let r = r.scaled(&inv);
    for row in self.rows.values_mut() {
      if let Some(c) = row.get(p).cloned() {
        row.axpy(&-c, &r);
      }
    }
    self.rows.insert(p, r);
    true
  }

  /// Free-variable kernel basis of the row space held here (leading pivots), one vector
  /// per free column in increasing order.
  fn null_space(&self, ncols: usize) -> Vec<SparseVector> {
    debug_assert_eq!(self.side, PivotSide::Leading);
    let mut by_free: BTreeMap<usize, SparseVector> = BTreeMap::new();
    for f in (0..ncols).filter(|f| !self.rows.contains_key(f)) {
      by_free.insert(f, SparseVector::unit(f));
    }
    for (&p, row) in &self.rows {
      for (j, c) in row.iter() {
        if let Some(v) = by_free.get_mut(&j) {
          v.add_entry(p, -c.clone());
        }
      }
    }
    by_free.into_values().collect()
  }
}

/// A subspace of Q^ambient in canonical (trailing-pivot reduced echelon) form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
  ambient: usize,
  echelon: Echelon,
  basis:   Vec<SparseVector>,
}

impl Subspace {
  pub fn zero(ambient: usize) -> Self { Self::span(ambient, std::iter::empty()) }

  pub fn full(ambient: usize) -> Self { Self::coordinate(ambient, 0..ambient) }

  pub fn coordinate(ambient: usize, indices: impl IntoIterator<Item = usize>) -> Self {
    Self::span(ambient, indices.into_iter().map(SparseVector::unit))
  }

  pub fn span(ambient: usize, vectors: impl IntoIterator<Item = SparseVector>) -> Self {
    let echelon = Echelon::from_vectors(PivotSide::Trailing, vectors);
    let basis = echelon.rows.values().cloned().collect();
    Self { ambient, echelon, basis }
  }

  pub fn ambient(&self) -> usize { self.ambient }

  pub fn dim(&self) -> usize { self.basis.len() }

  /// Canonical basis, ordered by pivot.
  pub fn basis(&self) -> &[SparseVector] { &self.basis }

  pub fn pivots(&self) -> Vec<usize> { self.echelon.pivots().collect() }

  pub fn echelon(&self) -> &Echelon { &self.echelon }

  pub fn reduce(&self, v: &SparseVector) -> SparseVector { self.echelon.reduce(v) }

  pub fn contains(&self, v: &SparseVector) -> bool { self.reduce(v).is_zero() }

  pub fn contains_subspace(&self, other: &Subspace) -> bool { other.basis.iter().all(|v| self.contains(v)) }

  /// Coordinates of `v` in the canonical basis, or `None` if `v` is outside.
  pub fn coordinates(&self, v: &SparseVector) -> Option<SparseVector> {
    let coords: SparseVector =
      self.echelon.pivots().enumerate().filter_map(|(k, p)| v.get(p).map(|c| (k, c.clone()))).collect();
    (self.combination(&coords) == *v).then_some(coords)
  }

  pub fn combination(&self, coords: &SparseVector) -> SparseVector {
    let mut out = SparseVector::new();
    for (k, c) in coords.iter() {
      out.axpy(c, &self.basis[k]);
    }
    out
  }

  pub fn sum(&self, other: &Subspace) -> Subspace {
    Subspace::span(self.ambient, self.basis.iter().chain(other.basis.iter()).cloned())
  }

  /// Columns are the basis vectors.
  pub fn basis_matrix(&self) -> SparseMatrix {
    SparseMatrix { nrows: self.ambient, ncols: self.basis.len(), cols: self.basis.clone() }
  }

  /// `{ v in self : op v = 0 }`
  pub fn kernel_of(&self, op: &SparseMatrix) -> Result<Subspace> {
    let restricted = op.compose(&self.basis_matrix())?;
    let kernel = restricted.kernel();
    Ok(Subspace::span(self.ambient, kernel.iter().map(|c| self.combination(c))))
  }

  /// `op(self)` inside the target space of `op`.
  pub fn image_under(&self, op: &SparseMatrix) -> Result<Subspace> {
    if op.ncols() != self.ambient {
      return Err(Error::DimensionMismatch(format!(
        "operator with {} columns applied to a subspace of Q^{}",
        op.ncols(),
        self.ambient
      )));
    }
    Ok(Subspace::span(op.nrows(), self.basis.iter().map(|v| op.apply(v))))
  }
}
