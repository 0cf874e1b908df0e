//! Dense brute-force reference computations over Q. Shares no code with the library:
//! forms, operators, ranks and pages are rebuilt here from first principles.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::{One, Zero};

pub fn q(n: i64) -> Q { Q::from_integer(BigInt::from(n)) }

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
  pub rows: usize,
  pub cols: usize,
  data:     Vec<Q>,
}

impl Dense {
  pub fn zeros(rows: usize, cols: usize) -> Self { Self { rows, cols, data: vec![Q::zero(); rows * cols] } }

  pub fn identity(n: usize) -> Self {
    let mut m = Self::zeros(n, n);
    for i in 0..n {
      m.set(i, i, Q::one());
    }
    m
  }

  pub fn get(&self, i: usize, j: usize) -> &Q { &self.data[i * self.cols + j] }

  pub fn set(&mut self, i: usize, j: usize, v: Q) { self.data[i * self.cols + j] = v; }

  pub fn add_to(&mut self, i: usize, j: usize, v: &Q) { self.data[i * self.cols + j] += v; }

  pub fn from_columns(rows: usize, cols: &[Vec<Q>]) -> Self {
    let mut m = Self::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
      for (i, v) in c.iter().enumerate() {
        m.set(i, j, v.clone());
      }
    }
    m
  }

  pub fn column(&self, j: usize) -> Vec<Q> { (0..self.rows).map(|i| self.get(i, j).clone()).collect() }

  pub fn columns(&self) -> Vec<Vec<Q>> { (0..self.cols).map(|j| self.column(j)).collect() }

  pub fn mul(&self, o: &Dense) -> Dense {
    assert_eq!(self.cols, o.rows);
    let mut out = Dense::zeros(self.rows, o.cols);
    for i in 0..self.rows {
      for k in 0..self.cols {
        let a = self.get(i, k);
        if a.is_zero() {
          continue;
        }
        for j in 0..o.cols {
          let b = o.get(k, j);
          if !b.is_zero() {
            out.add_to(i, j, &(a * b));
          }
        }
      }
    }
    out
  }

  pub fn apply(&self, v: &[Q]) -> Vec<Q> {
    (0..self.rows)
      .map(|i| (0..self.cols).filter(|&j| !v[j].is_zero()).fold(Q::zero(), |acc, j| acc + self.get(i, j) * &v[j]))
      .collect()
  }

  pub fn add(&self, o: &Dense) -> Dense {
    Dense { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect() }
  }

  pub fn scale(&self, c: &Q) -> Dense { Dense { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() } }

  pub fn is_zero(&self) -> bool { self.data.iter().all(Zero::is_zero) }

  pub fn select_rows(&self, rows: &[usize]) -> Dense {
    let mut out = Dense::zeros(rows.len(), self.cols);
    for (r, &i) in rows.iter().enumerate() {
      for j in 0..self.cols {
        out.set(r, j, self.get(i, j).clone());
      }
    }
    out
  }

  pub fn select_cols(&self, cols: &[usize]) -> Dense {
    let mut out = Dense::zeros(self.rows, cols.len());
    for i in 0..self.rows {
      for (c, &j) in cols.iter().enumerate() {
        out.set(i, c, self.get(i, j).clone());
      }
    }
    out
  }

  pub fn vstack(blocks: &[&Dense]) -> Dense {
    let cols = blocks[0].cols;
    let mut data = Vec::new();
    for b in blocks {
      assert_eq!(b.cols, cols);
      data.extend(b.data.iter().cloned());
    }
    Dense { rows: blocks.iter().map(|b| b.rows).sum(), cols, data }
  }

  /// Reduced row echelon form and pivot columns.
  fn rref(&self) -> (Dense, Vec<usize>) {
    let mut m = self.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m.cols {
      let Some(p) = (row..m.rows).find(|&i| !m.get(i, col).is_zero()) else { continue };
      for j in 0..m.cols {
        m.data.swap(row * m.cols + j, p * m.cols + j);
      }
      let inv = Q::one() / m.get(row, col);
      for j in 0..m.cols {
        let v = m.get(row, j) * &inv;
        m.set(row, j, v);
      }
      for i in 0..m.rows {
        if i == row || m.get(i, col).is_zero() {
          continue;
        }
        let f = m.get(i, col).clone();
        for j in 0..m.cols {
          let v = m.get(row, j);
          if !v.is_zero() {
            let nv = m.get(i, j) - &f * v;
            m.set(i, j, nv);
          }
        }
      }
      pivots.push(col);
      row += 1;
      if row == m.rows {
        break;
      }
    }
    (m, pivots)
  }

  pub fn rank(&self) -> usize { if self.rows == 0 || self.cols == 0 { 0 } else { self.rref().1.len() } }

  pub fn kernel(&self) -> Vec<Vec<Q>> {
    if self.rows == 0 {
      return (0..self.cols).map(|j| unit(self.cols, j)).collect();
    }
    let (r, pivots) = self.rref();
    let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
    free
      .iter()
      .map(|&f| {
        let mut v = vec![Q::zero(); self.cols];
        v[f] = Q::one();
        for (row, &p) in pivots.iter().enumerate() {
          v[p] = -r.get(row, f).clone();
        }
        v
      })
      .collect()
  }
}

pub fn unit(n: usize, i: usize) -> Vec<Q> {
  let mut v = vec![Q::zero(); n];
  v[i] = Q::one();
  v
}

/// Sign of `e^A ∧ e^B` for disjoint index masks: one factor `-1` per pair `a ∈ A`, `b ∈ B`, `a > b`.
pub fn wedge_sign(a: u32, b: u32) -> Option<i64> {
  if a & b != 0 {
    return None;
  }
  let inversions: u32 = (0..32).filter(|i| a & (1 << i) != 0).map(|i| (b & ((1u32 << i) - 1)).count_ones()).sum();
  Some(if inversions % 2 == 0 { 1 } else { -1 })
}

pub fn mask(indices: &[usize]) -> u32 { indices.iter().fold(0, |m, &i| m | (1 << (i - 1))) }

/// The span of `χ_k dx^I` over a window (torus) or of `e^I` (Lie algebra).
pub struct Space {
  pub n:     usize,
  pub torus: bool,
  pub basis: Vec<(Vec<i64>, u32)>,
  index:     HashMap<(Vec<i64>, u32), usize>,
  /// `d e^i` as lists of `(mask, coefficient)`.
  de:        Vec<Vec<(u32, Q)>>,
}

impl Space {
  fn from_modes(n: usize, torus: bool, modes: Vec<Vec<i64>>, de: Vec<Vec<(u32, Q)>>) -> Self {
    let mut basis = Vec::new();
    for f in &modes {
      for m in 0..(1u32 << n) {
        basis.push((f.clone(), m));
      }
    }
    let index = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
    Self { n, torus, basis, index, de }
  }

  pub fn torus(n: usize, lo: i64, hi: i64) -> Self {
    let mut modes = vec![vec![]];
    for _ in 0..n {
      modes = modes.into_iter().flat_map(|m: Vec<i64>| (lo..=hi).map(move |k| [m.clone(), vec![k]].concat())).collect();
    }
    Self::from_modes(n, true, modes, vec![vec![]; n])
  }

  /// Structure constants `(i, j, k, c)` meaning `d e^i ∋ c e^j ∧ e^k`.
  pub fn lie(n: usize, structure: &[(usize, usize, usize, i64)]) -> Self {
    let mut de = vec![vec![]; n];
    for &(i, j, k, c) in structure {
      de[i - 1].push((mask(&[j, k]), q(c) * q(wedge_sign(mask(&[j]), mask(&[k])).unwrap())));
    }
    Self::from_modes(n, false, vec![vec![0; n]], de)
  }

  pub fn dim(&self) -> usize { self.basis.len() }

  pub fn degree_of(&self, i: usize) -> usize { self.basis[i].1.count_ones() as usize }

  pub fn coords(&self, k: usize) -> Vec<usize> { (0..self.dim()).filter(|&i| self.degree_of(i) == k).collect() }

  pub fn find(&self, freq: &[i64], m: u32) -> usize {
    *self.index.get(&(freq.to_vec(), m)).unwrap_or_else(|| panic!("{freq:?} outside the window"))
  }

  /// Left multiplication by `Σ c χ_g e^I`.
  pub fn wedge(&self, form: &[(Vec<i64>, Vec<usize>, Q)]) -> Dense {
    let mut out = Dense::zeros(self.dim(), self.dim());
    for (col, (f, m)) in self.basis.iter().enumerate() {
      for (g, idx, c) in form {
        let g = if g.is_empty() { vec![0; self.n] } else { g.clone() };
        if let Some(s) = wedge_sign(mask(idx), *m) {
          let freq: Vec<i64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
          out.add_to(self.find(&freq, mask(idx) | m), col, &(c * q(s)));
        }
      }
    }
    out
  }

  /// Interior product with `∂_j` (0-based `j`).
  pub fn iota(&self, j: usize) -> Dense {
    let mut out = Dense::zeros(self.dim(), self.dim());
    for (col, (f, m)) in self.basis.iter().enumerate() {
      if m & (1 << j) != 0 {
        let s = if (m & ((1u32 << j) - 1)).count_ones() % 2 == 0 { 1 } else { -1 };
        out.set(self.find(f, m & !(1 << j)), col, q(s));
      }
    }
    out
  }

  pub fn contraction(&self, x: &[Q]) -> Dense {
    (0..self.n).fold(Dense::zeros(self.dim(), self.dim()), |acc, j| acc.add(&self.iota(j).scale(&x[j])))
  }

  pub fn d(&self) -> Dense {
    let mut out = Dense::zeros(self.dim(), self.dim());
    for j in 0..self.n {
      let term = if self.torus {
        let mut scale = Dense::zeros(self.dim(), self.dim());
        for (i, (f, _)) in self.basis.iter().enumerate() {
          scale.set(i, i, q(f[j]));
        }
        self.wedge(&[(vec![], vec![j + 1], q(1))]).mul(&scale)
      } else {
        let two_form: Vec<(Vec<i64>, Vec<usize>, Q)> = self.de[j]
          .iter()
          .map(|(m, c)| (vec![], (1..=self.n).filter(|i| m & (1 << (i - 1)) != 0).collect(), c.clone()))
          .collect();
        self.wedge(&two_form).mul(&self.iota(j))
      };
      out = out.add(&term);
    }
    out
  }

  pub fn lie_derivative(&self, x: &[Q]) -> Dense {
    let d = self.d();
    let i = self.contraction(x);
    d.mul(&i).add(&i.mul(&d))
  }

  /// Vectors in degree `k` annihilated by every operator.
  pub fn kernel_in_degree(&self, ops: &[&Dense], k: usize) -> Vec<Vec<Q>> {
    let coords = self.coords(k);
    let restricted: Vec<Dense> = ops.iter().map(|o| o.select_cols(&coords)).collect();
    let stacked = if restricted.is_empty() { Dense::zeros(0, coords.len()) } else { Dense::vstack(&restricted.iter().collect::<Vec<_>>()) };
    stacked
      .kernel()
      .into_iter()
      .map(|v| {
        let mut full = vec![Q::zero(); self.dim()];
        for (c, &i) in coords.iter().enumerate() {
          full[i] = v[c].clone();
        }
        full
      })
      .collect()
  }

  /// Degree pieces of the joint kernel of `ops`.
  pub fn subcomplex(&self, ops: &[&Dense]) -> Vec<Dense> {
    (0..=self.n).map(|k| Dense::from_columns(self.dim(), &self.kernel_in_degree(ops, k))).collect()
  }
}

/// `dim H_k = dim C_k - rank d|C_k - rank d|C_{k-1}` for pieces given as basis matrices.
pub fn homology(d: &Dense, pieces: &[Dense]) -> Vec<usize> {
  let ranks: Vec<usize> = pieces.iter().map(|b| d.mul(b).rank()).collect();
  (0..pieces.len()).map(|k| pieces[k].cols - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect()
}

pub fn total_basis(pieces: &[Dense]) -> Dense {
  let cols: Vec<Vec<Q>> = pieces.iter().flat_map(Dense::columns).collect();
  Dense::from_columns(pieces[0].rows, &cols)
}

/// Chains `(c_0..c_{len-1})` in `T`-coordinates with `d c_0 = 0`, `d c_j = P c_{j-1}`.
fn chain_kernel(dt: &Dense, pt: &Dense, len: usize) -> Vec<Vec<Q>> {
  let (n, m) = (dt.rows, dt.cols);
  let mut sys = Dense::zeros(len * n, len * m);
  for j in 0..len {
    for r in 0..n {
      for c in 0..m {
        sys.set(j * n + r, j * m + c, dt.get(r, c).clone());
        if j > 0 {
          sys.set(j * n + r, (j - 1) * m + c, -pt.get(r, c).clone());
        }
      }
    }
  }
  sys.kernel()
}

/// Page dimensions of the spectral sequence of `d + εP` on `T`, per coordinate label, with
/// `E_1 = T`, `E_2 = H(T, d)`. Pages are graded, so projecting onto one label's
/// coordinates gives the dimension of that piece.
pub fn page_dims(d: &Dense, p: &Dense, t: &Dense, r: usize, labels: &[i64]) -> BTreeMap<i64, usize> {
  let dt = d.mul(t);
  let pt = p.mul(t);
  let m = t.cols;
  let (z, b): (Vec<Vec<Q>>, Vec<Vec<Q>>) = if r == 1 {
    (t.columns(), vec![])
  } else {
    let z = chain_kernel(&dt, &pt, r - 1).into_iter().map(|c| t.apply(&c[..m])).collect();
    let mut b = dt.columns();
    if r >= 3 {
      for c in chain_kernel(&dt, &pt, r - 2) {
        b.push(pt.apply(&c[(r - 3) * m..(r - 2) * m]));
      }
    }
    (z, b)
  };
  let mut distinct: Vec<i64> = labels.to_vec();
  distinct.sort();
  distinct.dedup();
  let rows = t.rows;
  distinct
    .into_iter()
    .map(|l| {
      let coords: Vec<usize> = (0..rows).filter(|&i| labels[i] == l).collect();
      let rank = |vs: &[Vec<Q>]| if vs.is_empty() { 0 } else { Dense::from_columns(rows, vs).select_rows(&coords).rank() };
      (l, rank(&z) - rank(&b))
    })
    .collect()
}

/// Total dimension of `H(T, d + sP)`.
pub fn perturbed_total(d: &Dense, p: &Dense, t: &Dense, s: &Q) -> usize { t.cols - 2 * d.add(&p.scale(s)).mul(t).rank() }

/// Exponent vectors in `m` variables with total degree at most `cutoff`.
pub fn polynomials(m: usize, cutoff: usize) -> Vec<Vec<usize>> {
  let mut out = vec![vec![]];
  for _ in 0..m {
    out = out.into_iter().flat_map(|p: Vec<usize>| (0..=cutoff).map(move |e| [p.clone(), vec![e]].concat())).collect();
  }
  out.into_iter().filter(|p| p.iter().sum::<usize>() <= cutoff).collect()
}

/// Cartan-model cohomology in total degrees `0..=2D-2` for constant fields.
pub fn cartan_dims(s: &Space, fields: &[Vec<Q>], cutoff: usize) -> Vec<usize> {
  let lies: Vec<Dense> = fields.iter().map(|x| s.lie_derivative(x)).collect();
  let inv: Vec<Vec<Vec<Q>>> = (0..=s.n).map(|k| s.kernel_in_degree(&lies.iter().collect::<Vec<_>>(), k)).collect();
  let polys = polynomials(fields.len(), cutoff);
  let n = s.dim();
  let big = polys.len() * n;
  let pos: HashMap<Vec<usize>, usize> = polys.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
  let d = s.d();
  let iotas: Vec<Dense> = fields.iter().map(|x| s.contraction(x)).collect();
  let mut op = Dense::zeros(big, big);
  for (pi, p) in polys.iter().enumerate() {
    for r in 0..n {
      for c in 0..n {
        let v = d.get(r, c);
        if !v.is_zero() {
          op.add_to(pi * n + r, pi * n + c, v);
        }
      }
    }
    for (a, iota) in iotas.iter().enumerate() {
      let mut raised = p.clone();
      raised[a] += 1;
      if let Some(&ri) = pos.get(&raised) {
        for r in 0..n {
          for c in 0..n {
            let v = iota.get(r, c);
            if !v.is_zero() {
              op.add_to(ri * n + r, pi * n + c, v);
            }
          }
        }
      }
    }
  }
  let top = 2 * cutoff - 2;
  let piece = |t: usize| -> Dense {
    let mut cols = Vec::new();
    for (pi, p) in polys.iter().enumerate() {
      let pd = 2 * p.iter().sum::<usize>();
      if pd > t || t - pd > s.n {
        continue;
      }
      for v in &inv[t - pd] {
        let mut full = vec![Q::zero(); big];
        for (i, x) in v.iter().enumerate() {
          full[pi * n + i] = x.clone();
        }
        cols.push(full);
      }
    }
    Dense::from_columns(big, &cols)
  };
  let pieces: Vec<Dense> = (0..=top + 1).map(piece).collect();
  homology(&op, &pieces)[..=top].to_vec()
}
