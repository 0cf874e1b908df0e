use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::ring::Coefficient;
use crate::algebra::{format_rational, parse_rational, Rational};
use crate::error::{Error, Result};

/// `χ_freq dx^{i_1} ∧ … ∧ dx^{i_k}` with strictly increasing indices, stored as a bitmask
/// (bit `i-1` for index `i`). The vacuum is the empty mask at zero frequency.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormMonomial {
  freq: Vec<i64>,
  mask: u32,
}

impl FormMonomial {
  pub fn vacuum(n: usize) -> Self { Self { freq: vec![0; n], mask: 0 } }

  /// `indices` are 1-based and must be strictly increasing.
  pub fn new(freq: Vec<i64>, indices: &[usize]) -> Result<Self> {
    let n = freq.len();
    for w in indices.windows(2) {
      if w[0] >= w[1] {
        return Err(Error::Schema(format!("indices {indices:?} are not strictly increasing")));
      }
    }
    let mut mask = 0u32;
    for &i in indices {
      if i == 0 || i > n {
        return Err(Error::Schema(format!("index {i} outside 1..{n}")));
      }
      mask |= 1 << (i - 1);
    }
    Ok(Self { freq, mask })
  }

  pub(crate) fn from_mask(freq: Vec<i64>, mask: u32) -> Self { Self { freq, mask } }

  pub fn freq(&self) -> &[i64] { &self.freq }

  pub fn mask(&self) -> u32 { self.mask }

  pub fn dim(&self) -> usize { self.freq.len() }

  pub fn degree(&self) -> usize { self.mask.count_ones() as usize }

  pub fn indices(&self) -> Vec<usize> { (0..32).filter(|i| self.mask & (1 << i) != 0).map(|i| i + 1).collect() }

  pub fn is_zero_frequency(&self) -> bool { self.freq.iter().all(|&k| k == 0) }
}

impl fmt::Display for FormMonomial {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let idx: Vec<String> = self.indices().iter().map(usize::to_string).collect();
    if self.is_zero_frequency() {
      write!(f, "[{}]", idx.join(","))
    } else {
      write!(f, "chi{:?}[{}]", self.freq, idx.join(","))
    }
  }
}

/// Sign of sorting a list of distinct indices, or `None` if one repeats.
pub(crate) fn sort_sign(indices: &[usize]) -> Option<(bool, Vec<usize>)> {
  let mut v = indices.to_vec();
  let mut odd = false;
  for i in 1..v.len() {
    let mut j = i;
    while j > 0 && v[j - 1] > v[j] {
      v.swap(j - 1, j);
      odd = !odd;
      j -= 1;
    }
  }
  if v.windows(2).any(|w| w[0] == w[1]) {
    return None;
  }
  Some((odd, v))
}

/// A sparse linear combination of form monomials. Coefficients sit to the left of the
/// monomial, which fixes the Koszul signs used by wedge, d and contraction.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<C = Rational> {
  n:     usize,
  terms: BTreeMap<FormMonomial, C>,
}

impl<C: Coefficient> Form<C> {
  pub fn zero(n: usize) -> Self { Self { n, terms: BTreeMap::new() } }

  pub fn monomial(m: FormMonomial, c: C) -> Self {
    let mut f = Self::zero(m.dim());
    f.add_term(m, c);
    f
  }

  /// Builds `c · χ_freq dx^{i_1} ∧ …` from indices in any order, reordering with sign.
  pub fn from_unordered(freq: Vec<i64>, indices: &[usize], c: C) -> Result<Self> {
    let n = freq.len();
    match sort_sign(indices) {
      None => Ok(Self::zero(n)),
      Some((odd, sorted)) => {
        let m = FormMonomial::new(freq, &sorted)?;
        Ok(Self::monomial(m, if odd { c.negated() } else { c }))
      },
    }
  }

  pub fn dim(&self) -> usize { self.n }

  pub fn add_term(&mut self, m: FormMonomial, c: C) {
    debug_assert_eq!(m.dim(), self.n);
    if c.is_zero() {
      return;
    }
    match self.terms.get(&m) {
      Some(old) => {
        let s = old.plus(&c);
        if s.is_zero() {
          self.terms.remove(&m);
        } else {
          self.terms.insert(m, s);
        }
      },
      None => {
        self.terms.insert(m, c);
      },
    }
  }

  pub fn terms(&self) -> impl Iterator<Item = (&FormMonomial, &C)> { self.terms.iter() }

  pub fn coefficient(&self, m: &FormMonomial) -> Option<&C> { self.terms.get(m) }

  pub fn len(&self) -> usize { self.terms.len() }

  pub fn is_empty(&self) -> bool { self.terms.is_empty() }

  pub fn is_zero(&self) -> bool { self.terms.is_empty() }

  pub fn plus(&self, other: &Self) -> Self {
    let mut out = self.clone();
    for (m, c) in &other.terms {
      out.add_term(m.clone(), c.clone());
    }
    out
  }

  pub fn minus(&self, other: &Self) -> Self { self.plus(&other.negated()) }

  pub fn scaled(&self, r: &Rational) -> Self {
    let mut out = Self::zero(self.n);
    for (m, c) in &self.terms {
      out.add_term(m.clone(), c.scaled(r));
    }
    out
  }

  pub fn negated(&self) -> Self { self.scaled(&-Rational::from_integer(1.into())) }

  /// Form degree when all terms share one.
  pub fn degree(&self) -> Option<usize> {
    let mut it = self.terms.keys().map(FormMonomial::degree);
    let first = it.next()?;
    it.all(|k| k == first).then_some(first)
  }

  /// `Some(true)` if every term has odd degree, `Some(false)` if every term is even.
  pub fn form_parity(&self) -> Option<bool> {
    let mut it = self.terms.keys().map(|m| m.degree() % 2 == 1);
    let first = it.next()?;
    it.all(|p| p == first).then_some(first)
  }

  pub fn component(&self, k: usize) -> Self {
    let mut out = Self::zero(self.n);
    for (m, c) in &self.terms {
      if m.degree() == k {
        out.add_term(m.clone(), c.clone());
      }
    }
    out
  }

  pub fn has_zero_frequency_support(&self) -> bool { self.terms.keys().all(FormMonomial::is_zero_frequency) }
}

impl<C: Coefficient + fmt::Display> fmt::Display for Form<C> {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.terms.is_empty() {
      return write!(f, "0");
    }
    let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c}*{m}")).collect();
    write!(f, "{}", parts.join(" + "))
  }
}

/// A skew-symmetric tensor with `order` upper indices; each key lists one strictly
/// increasing index set.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiVector<C = Rational> {
  n:     usize,
  order: usize,
  terms: BTreeMap<FormMonomial, C>,
}

impl<C: Coefficient> MultiVector<C> {
  pub fn zero(n: usize, order: usize) -> Self { Self { n, order, terms: BTreeMap::new() } }

  pub fn from_terms(n: usize, order: usize, terms: impl IntoIterator<Item = (FormMonomial, C)>) -> Result<Self> {
    if order == 0 {
      return Err(Error::Schema("multivector order must be at least 1".into()));
    }
    let mut out = Self::zero(n, order);
    for (m, c) in terms {
      if m.dim() != n {
        return Err(Error::Schema(format!("frequency vector length {} != dimension {n}", m.dim())));
      }
      if m.degree() != order {
        return Err(Error::Schema(format!("multivector term {m} does not have order {order}")));
      }
      if c.is_zero() {
        continue;
      }
      let s = match out.terms.remove(&m) {
        Some(old) => old.plus(&c),
        None => c,
      };
      if !s.is_zero() {
        out.terms.insert(m, s);
      }
    }
    Ok(out)
  }

  pub fn dim(&self) -> usize { self.n }

  pub fn order(&self) -> usize { self.order }

  pub fn terms(&self) -> impl Iterator<Item = (&FormMonomial, &C)> { self.terms.iter() }

  pub fn is_zero(&self) -> bool { self.terms.is_empty() }

  pub fn plus(&self, other: &Self) -> Result<Self> {
    if other.order != self.order {
      return Err(Error::Schema("cannot add multivectors of different order".into()));
    }
    Self::from_terms(self.n, self.order, self.terms.clone().into_iter().chain(other.terms.clone()))
  }

  pub fn scaled(&self, r: &Rational) -> Self {
    let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.scaled(r)));
    Self::from_terms(self.n, self.order, terms).expect("same shape")
  }

  pub fn has_zero_frequency_support(&self) -> bool { self.terms.keys().all(FormMonomial::is_zero_frequency) }
}

impl MultiVector<Rational> {
  /// The constant vector field `Σ c_i ∂_i`.
  pub fn constant_field(components: &[Rational]) -> Self {
    let n = components.len();
    let terms = components.iter().enumerate().map(|(i, c)| (FormMonomial::from_mask(vec![0; n], 1 << i), c.clone()));
    Self::from_terms(n, 1, terms).expect("well formed")
  }

  /// Components of a constant order-1 field, `None` if some term has nonzero frequency.
  pub fn constant_components(&self) -> Option<Vec<Rational>> {
    if self.order != 1 || !self.has_zero_frequency_support() {
      return None;
    }
    let mut out = vec![Rational::from_integer(0.into()); self.n];
    for (m, c) in &self.terms {
      out[m.indices()[0] - 1] = c.clone();
    }
    Some(out)
  }
}

impl Form<Rational> {
  /// `dx^{i_1} ∧ …` at zero frequency with coefficient 1.
  pub fn basic(n: usize, indices: &[usize]) -> Result<Self> {
    Self::from_unordered(vec![0; n], indices, Rational::from_integer(1.into()))
  }

  /// The character `χ_freq` as a 0-form.
  pub fn character(freq: Vec<i64>) -> Self {
    Self::monomial(FormMonomial::from_mask(freq, 0), Rational::from_integer(1.into()))
  }

  pub fn vacuum(n: usize) -> Self { Self::monomial(FormMonomial::vacuum(n), Rational::from_integer(1.into())) }
}

/// One term of a serialized form or multivector: `{"coeff": "p/q", "freq": [..], "idx": [..]}`
/// with 1-based, strictly increasing indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermLiteral {
  pub coeff: String,
  #[serde(default)]
  pub freq:  Vec<i64>,
  #[serde(default)]
  pub idx:   Vec<usize>,
}

impl TermLiteral {
  /// Parses the monomial; an empty frequency list means zero frequency.
  pub fn monomial(&self, n: usize) -> Result<(FormMonomial, Rational)> {
    let freq = if self.freq.is_empty() { vec![0; n] } else { self.freq.clone() };
    if freq.len() != n {
      return Err(Error::Schema(format!("frequency {:?} has length {}, expected {n}", self.freq, freq.len())));
    }
    Ok((FormMonomial::new(freq, &self.idx)?, parse_rational(&self.coeff)?))
  }
}

pub fn form_from_literals(n: usize, terms: &[TermLiteral]) -> Result<Form> {
  let mut f = Form::zero(n);
  for t in terms {
    let (m, c) = t.monomial(n)?;
    f.add_term(m, c);
  }
  Ok(f)
}

/// All terms must have the same number of indices, which becomes the order.
pub fn multivector_from_literals(n: usize, terms: &[TermLiteral]) -> Result<MultiVector> {
  let order = terms.first().map(|t| t.idx.len()).ok_or_else(|| Error::Schema("empty multivector".into()))?;
  let parsed = terms.iter().map(|t| t.monomial(n)).collect::<Result<Vec<_>>>()?;
  MultiVector::from_terms(n, order, parsed)
}

pub fn form_literals(f: &Form) -> Vec<TermLiteral> {
  f.terms()
    .map(|(m, c)| TermLiteral { coeff: format_rational(c), freq: m.freq().to_vec(), idx: m.indices() })
    .collect()
}

pub fn multivector_literals(x: &MultiVector) -> Vec<TermLiteral> {
  x.terms()
    .map(|(m, c)| TermLiteral { coeff: format_rational(c), freq: m.freq().to_vec(), idx: m.indices() })
    .collect()
}
