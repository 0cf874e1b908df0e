//! Subquotients Z/B with canonical representatives, and maps induced on them.

use super::linalg::{Echelon, PivotSide, SparseMatrix, SparseVector, Subspace};
use crate::error::{Error, Result};

/// `Z / B` for subspaces `B ⊆ Z` of a common ambient space.
///
/// The quotient basis is `Z ∩ {x : x_p = 0 for every pivot p of B}` in canonical form,
/// which depends only on the two subspaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subquotient {
  z:        Subspace,
  b:        Subspace,
  quotient: Echelon,
  reps:     Vec<SparseVector>,
}

impl Subquotient {
  pub fn new(z: Subspace, b: Subspace) -> Result<Self> {
    if z.ambient() != b.ambient() {
      return Err(Error::DimensionMismatch(format!("Z in Q^{} but B in Q^{}", z.ambient(), b.ambient())));
    }
    if let Some(w) = b.basis().iter().find(|v| !z.contains(v)) {
      return Err(Error::NotWellDefined { reason: "B is not contained in Z".into(), witness: w.to_string() });
    }
    let quotient = Echelon::from_vectors(PivotSide::Trailing, z.basis().iter().map(|v| b.reduce(v)));
    let reps = quotient.rows().map(|(_, r)| r.clone()).collect();
    Ok(Self { z, b, quotient, reps })
  }

  /// The whole space modulo nothing.
  pub fn full(ambient: usize) -> Self { Self::new(Subspace::full(ambient), Subspace::zero(ambient)).unwrap() }

  pub fn ambient(&self) -> usize { self.z.ambient() }

  pub fn dim(&self) -> usize { self.reps.len() }

  pub fn cycles(&self) -> &Subspace { &self.z }

  pub fn boundaries(&self) -> &Subspace { &self.b }

  /// Canonical representatives of a quotient basis.
  pub fn representatives(&self) -> &[SparseVector] { &self.reps }

  /// Coordinates of the class of `v` in the representative basis.
  pub fn class_coordinates(&self, v: &SparseVector) -> Result<SparseVector> {
    let r = self.b.reduce(v);
    let coords: SparseVector =
      self.quotient.pivots().enumerate().filter_map(|(k, p)| r.get(p).map(|c| (k, c.clone()))).collect();
    if self.representative_of(&coords) != r {
      return Err(Error::NotWellDefined { reason: "vector does not lie in Z".into(), witness: v.to_string() });
    }
    Ok(coords)
  }

  pub fn representative_of(&self, coords: &SparseVector) -> SparseVector {
    let mut out = SparseVector::new();
    for (k, c) in coords.iter() {
      out.axpy(c, &self.reps[k]);
    }
    out
  }

  pub fn is_zero_class(&self, v: &SparseVector) -> bool { self.b.contains(v) }
}

/// Matrix of the map induced by `f` from `src` to `dst`, after checking that `f` sends
/// cycles to cycles and boundaries to boundaries.
pub fn subquotient_induced_map(f: &SparseMatrix, src: &Subquotient, dst: &Subquotient) -> Result<SparseMatrix> {
  if f.ncols() != src.ambient() || f.nrows() != dst.ambient() {
    return Err(Error::DimensionMismatch(format!(
      "map {}x{} between ambients {} and {}",
      f.nrows(),
      f.ncols(),
      src.ambient(),
      dst.ambient()
    )));
  }
  for z in src.cycles().basis() {
    let image = f.apply(z);
    if !dst.cycles().contains(&image) {
      return Err(Error::NotWellDefined { reason: "f(Z_src) is not inside Z_dst".into(), witness: z.to_string() });
    }
  }
  for b in src.boundaries().basis() {
    if !dst.boundaries().contains(&f.apply(b)) {
      return Err(Error::NotWellDefined { reason: "f(B_src) is not inside B_dst".into(), witness: b.to_string() });
    }
  }
  let cols = src.representatives().iter().map(|r| dst.class_coordinates(&f.apply(r))).collect::<Result<Vec<_>>>()?;
  SparseMatrix::from_columns(dst.dim(), cols)
}

#[cfg(test)]
mod tests {
  use super::*;
  use crate::algebra::rational::int;

  fn v(xs: &[i64]) -> SparseVector { SparseVector::from_dense(&xs.iter().map(|&x| int(x)).collect::<Vec<_>>()) }

  #[test]
  fn identity_induces_identity() {
    let z = Subspace::span(3, [v(&[1, 0, 0]), v(&[0, 1, 1])]);
    let b = Subspace::span(3, [v(&[1, 1, 1])]);
    let q = Subquotient::new(z, b).unwrap();
    assert_eq!(q.dim(), 1);
    let m = subquotient_induced_map(&SparseMatrix::identity(3), &q, &q).unwrap();
    assert_eq!(m, SparseMatrix::identity(1));
  }

  #[test]
  fn zero_map_induces_zero() {
    let q = Subquotient::full(2);
    let m = subquotient_induced_map(&SparseMatrix::zeros(2, 2), &q, &q).unwrap();
    assert!(m.is_zero());
    assert_eq!((m.nrows(), m.ncols()), (2, 2));
  }

  #[test]
  fn swap_does_not_preserve_boundaries() {
    let q = Subquotient::new(Subspace::full(2), Subspace::span(2, [v(&[1, 0])])).unwrap();
    let swap = SparseMatrix::from_dense(&[vec![int(0), int(1)], vec![int(1), int(0)]]);
    let err = subquotient_induced_map(&swap, &q, &q).unwrap_err();
    assert!(matches!(err, Error::NotWellDefined { .. }));
  }

  #[test]
  fn b_outside_z_is_rejected() {
    let z = Subspace::span(2, [v(&[1, 0])]);
    let b = Subspace::span(2, [v(&[0, 1])]);
    assert!(Subquotient::new(z, b).is_err());
  }

  #[test]
  fn class_coordinates_ignore_boundaries() {
    let q = Subquotient::new(Subspace::full(3), Subspace::span(3, [v(&[0, 1, 1])])).unwrap();
    let a = q.class_coordinates(&v(&[2, 0, 5])).unwrap();
    let b = q.class_coordinates(&v(&[2, 3, 8])).unwrap();
    assert_eq!(a, b);
    assert!(q.is_zero_class(&v(&[0, -2, -2])));
  }
}
