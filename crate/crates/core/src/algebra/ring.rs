//! Z2-graded supercommutative coefficient rings: a Grassmann algebra on odd generators
//! tensored with a polynomial ring on even generators, truncated above a total even degree.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{Error, Result};

/// Sign of concatenating two sorted index sets given as bitmasks: `None` when they
/// overlap, otherwise `true` when the merge permutation is odd.
pub(crate) fn merge_sign(a: u64, b: u64) -> Option<bool> {
  if a & b != 0 {
    return None;
  }
  let mut odd = false;
  let mut rest = b;
  while rest != 0 {
    let j = rest.trailing_zeros();
    rest &= rest - 1;
    let above = if j >= 63 { 0 } else { a >> (j + 1) };
    if above.count_ones() % 2 == 1 {
      odd = !odd;
    }
  }
  Some(odd)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingDescriptor {
  /// Number of odd (Grassmann) generators.
  pub odd:    usize,
  /// Number of even (polynomial) generators.
  pub even:   usize,
  /// Largest allowed total exponent of the even generators.
  pub cutoff: u32,
}

impl RingDescriptor {
  pub fn new(odd: usize, even: usize, cutoff: u32) -> Result<Self> {
    if odd > 64 {
      return Err(Error::Schema(format!("at most 64 odd generators supported, got {odd}")));
    }
    Ok(Self { odd, even, cutoff })
  }

  /// The ground field alone.
  pub fn scalars() -> Self { Self { odd: 0, even: 0, cutoff: 0 } }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingMonomial {
  odd:  u64,
  even: Vec<u32>,
}

impl RingMonomial {
  pub fn one(ring: &RingDescriptor) -> Self { Self { odd: 0, even: vec![0; ring.even] } }

  pub fn odd_generator(ring: &RingDescriptor, i: usize) -> Result<Self> {
    if i >= ring.odd {
      return Err(Error::Schema(format!("odd generator {} out of range", i + 1)));
    }
    Ok(Self { odd: 1 << i, even: vec![0; ring.even] })
  }

  pub fn even_generator(ring: &RingDescriptor, i: usize) -> Result<Self> {
    if i >= ring.even {
      return Err(Error::Schema(format!("even generator {} out of range", i + 1)));
    }
    let mut even = vec![0; ring.even];
    even[i] = 1;
    Ok(Self { odd: 0, even })
  }

  pub fn from_parts(ring: &RingDescriptor, odd: &[usize], even: &[u32]) -> Result<Self> {
    if even.len() != ring.even {
      return Err(Error::Schema(format!(
        "ring monomial has {} even exponents, ring has {} even generators",
        even.len(),
        ring.even
      )));
    }
    let mut mask = 0u64;
    for w in odd.windows(2) {
      if w[0] >= w[1] {
        return Err(Error::Schema("odd indices must be strictly increasing".into()));
      }
    }
    for &i in odd {
      if i == 0 || i > ring.odd {
        return Err(Error::Schema(format!("odd generator index {i} out of range")));
      }
      mask |= 1 << (i - 1);
    }
    let m = Self { odd: mask, even: even.to_vec() };
    if m.even_degree() > ring.cutoff {
      return Err(Error::Schema(format!("monomial exceeds cutoff {}", ring.cutoff)));
    }
    Ok(m)
  }

  pub fn is_one(&self) -> bool { self.odd == 0 && self.even.iter().all(|&e| e == 0) }

  pub fn is_odd(&self) -> bool { self.odd.count_ones() % 2 == 1 }

  pub fn even_degree(&self) -> u32 { self.even.iter().sum() }

  pub fn odd_indices(&self) -> Vec<usize> {
    (0..64).filter(|i| self.odd & (1 << i) != 0).map(|i| i + 1).collect()
  }

  pub fn even_exponents(&self) -> &[u32] { &self.even }

  /// Product with its sign, or `None` if it vanishes (repeated odd generator or cutoff).
  pub fn mul(&self, other: &Self, ring: &RingDescriptor) -> Option<(bool, RingMonomial)> {
    let negative = merge_sign(self.odd, other.odd)?;
    let even: Vec<u32> = self.even.iter().zip(&other.even).map(|(a, b)| a + b).collect();
    if even.iter().sum::<u32>() > ring.cutoff {
      return None;
    }
    Some((negative, RingMonomial { odd: self.odd | other.odd, even }))
  }
}

impl fmt::Display for RingMonomial {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.is_one() {
      return write!(f, "1");
    }
    let mut parts = Vec::new();
    for i in self.odd_indices() {
      parts.push(format!("t{i}"));
    }
    for (i, &e) in self.even.iter().enumerate() {
      match e {
        0 => {},
        1 => parts.push(format!("a{}", i + 1)),
        _ => parts.push(format!("a{}^{e}", i + 1)),
      }
    }
    write!(f, "{}", parts.join("*"))
  }
}

/// Wire form of a ring monomial: `{"odd":[indices],"even":[exponents]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingMonomialLiteral {
  pub odd:  Vec<usize>,
  pub even: Vec<u32>,
}

impl From<&RingMonomial> for RingMonomialLiteral {
  fn from(m: &RingMonomial) -> Self { Self { odd: m.odd_indices(), even: m.even.clone() } }
}

/// Coefficients that forms and multivectors can carry.
///
/// `twisted` is the parity automorphism (even part minus odd part); it is how the
/// Koszul sign of moving a coefficient past an odd operator is realized.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + Send + Sync {
  fn is_zero(&self) -> bool;
  fn plus(&self, other: &Self) -> Self;
  fn times(&self, other: &Self) -> Self;
  fn scaled(&self, r: &Rational) -> Self;
  fn twisted(&self) -> Self;
  fn to_scalar(&self) -> Option<Rational>;

  fn negated(&self) -> Self { self.scaled(&-Rational::one()) }

  fn twisted_pow(&self, k: usize) -> Self {
    if k % 2 == 1 {
      self.twisted()
    } else {
      self.clone()
    }
  }
}

impl Coefficient for Rational {
  fn is_zero(&self) -> bool { Zero::is_zero(self) }

  fn plus(&self, other: &Self) -> Self { self + other }

  fn times(&self, other: &Self) -> Self { self * other }

  fn scaled(&self, r: &Rational) -> Self { self * r }

  fn twisted(&self) -> Self { self.clone() }

  fn to_scalar(&self) -> Option<Rational> { Some(self.clone()) }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedRingElement {
  ring:  RingDescriptor,
  terms: BTreeMap<RingMonomial, Rational>,
}

impl GradedRingElement {
  pub fn zero(ring: RingDescriptor) -> Self { Self { ring, terms: BTreeMap::new() } }

  pub fn scalar(ring: RingDescriptor, r: Rational) -> Self {
    let mut e = Self::zero(ring);
    e.add_term(RingMonomial::one(&ring), r);
    e
  }

  pub fn one(ring: RingDescriptor) -> Self { Self::scalar(ring, Rational::one()) }

  pub fn monomial(ring: RingDescriptor, m: RingMonomial, c: Rational) -> Self {
    let mut e = Self::zero(ring);
    if m.even_degree() <= ring.cutoff {
      e.add_term(m, c);
    }
    e
  }

  pub fn ring(&self) -> &RingDescriptor { &self.ring }

  pub fn terms(&self) -> impl Iterator<Item = (&RingMonomial, &Rational)> { self.terms.iter() }

  pub fn add_term(&mut self, m: RingMonomial, c: Rational) {
    if Zero::is_zero(&c) {
      return;
    }
    let slot = self.terms.entry(m.clone()).or_insert_with(Rational::zero);
    *slot += c;
    if Zero::is_zero(slot) {
      self.terms.remove(&m);
    }
  }

  /// `Some(false)` for even, `Some(true)` for odd, `None` when mixed. Zero is even.
  pub fn parity(&self) -> Option<bool> {
    let mut it = self.terms.keys().map(RingMonomial::is_odd);
    match it.next() {
      None => Some(false),
      Some(p) => it.all(|q| q == p).then_some(p),
    }
  }
}

impl Coefficient for GradedRingElement {
  fn is_zero(&self) -> bool { self.terms.is_empty() }

  fn plus(&self, other: &Self) -> Self {
    let mut out = self.clone();
    for (m, c) in &other.terms {
      out.add_term(m.clone(), c.clone());
    }
    out
  }

  fn times(&self, other: &Self) -> Self {
    let mut out = Self::zero(self.ring);
    for (m, c) in &self.terms {
      for (n, e) in &other.terms {
        if let Some((neg, mn)) = m.mul(n, &self.ring) {
          let v = c * e;
          out.add_term(mn, if neg { -v } else { v });
        }
      }
    }
    out
  }

  fn scaled(&self, r: &Rational) -> Self {
    let mut out = Self::zero(self.ring);
    for (m, c) in &self.terms {
      out.add_term(m.clone(), c * r);
    }
    out
  }

  fn twisted(&self) -> Self {
    let mut out = Self::zero(self.ring);
    for (m, c) in &self.terms {
      out.add_term(m.clone(), if m.is_odd() { -c.clone() } else { c.clone() });
    }
    out
  }

  fn to_scalar(&self) -> Option<Rational> {
    match self.terms.len() {
      0 => Some(Rational::zero()),
      1 => {
        let (m, c) = self.terms.iter().next().unwrap();
        m.is_one().then(|| c.clone())
      },
      _ => None,
    }
  }
}

impl fmt::Display for GradedRingElement {
  fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if self.terms.is_empty() {
      return write!(f, "0");
    }
    let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c})*{m}")).collect();
    write!(f, "{}", parts.join(" + "))
  }
}
