//! Exterior derivative, wedge product, contraction and Lie derivative on forms with
//! coefficients in any graded ring.

use crate::algebra::ring::{merge_sign, Coefficient};
use crate::error::{Error, Result};
use crate::fock::form::{Form, FormMonomial, MultiVector};
use crate::model::Model;

fn check_dim(model: &Model, n: usize) -> Result<()> {
  if n != model.dim() {
    return Err(Error::DimensionMismatch(format!("object of dimension {n} used with a model of dimension {}", model.dim())));
  }
  Ok(())
}

fn add_freq(a: &[i64], b: &[i64]) -> Vec<i64> { a.iter().zip(b).map(|(x, y)| x + y).collect() }

/// `a ∧ b` on monomials: the sign is `true` when negative, `None` when the product vanishes.
pub(crate) fn wedge_monomials(a: &FormMonomial, b: &FormMonomial) -> Option<(bool, FormMonomial)> {
  let neg = merge_sign(a.mask() as u64, b.mask() as u64)?;
  Some((neg, FormMonomial::from_mask(add_freq(a.freq(), b.freq()), a.mask() | b.mask())))
}

/// `a^+_j` on a mask (0-based `j`): removes `j` with sign `(-1)^{#indices below j}`.
pub(crate) fn annihilate(mask: u32, j: u32) -> Option<(bool, u32)> {
  if mask & (1 << j) == 0 {
    return None;
  }
  let below = (mask & ((1u32 << j) - 1)).count_ones();
  Some((below % 2 == 1, mask & !(1 << j)))
}

/// `a^+_{i_1} … a^+_{i_k}` applied to a mask, the rightmost factor first.
pub(crate) fn contract_mask(indices: u32, mask: u32) -> Option<(bool, u32)> {
  let mut neg = false;
  let mut current = mask;
  for j in (0..32).rev().filter(|j| indices & (1 << j) != 0) {
    let (s, m) = annihilate(current, j)?;
    neg ^= s;
    current = m;
  }
  Some((neg, current))
}

pub fn apply_d<C: Coefficient>(model: &Model, f: &Form<C>) -> Result<Form<C>> {
  check_dim(model, f.dim())?;
  let mut out = Form::zero(model.dim());
  for (m, c) in f.terms() {
    model.check_monomial(m)?;
    let tc = c.twisted();
    for (image, r) in model.d_monomial(m) {
      out.add_term(image, tc.scaled(&r));
    }
  }
  Ok(out)
}

/// `(r α) ∧ (s β) = r · twist^{|α|}(s) · α ∧ β`
pub fn wedge<C: Coefficient>(model: &Model, a: &Form<C>, b: &Form<C>) -> Result<Form<C>> {
  check_dim(model, a.dim())?;
  check_dim(model, b.dim())?;
  let mut out = Form::zero(model.dim());
  for (ma, ca) in a.terms() {
    for (mb, cb) in b.terms() {
      if let Some((neg, m)) = wedge_monomials(ma, mb) {
        model.check_monomial(&m)?;
        let c = ca.times(&cb.twisted_pow(ma.degree()));
        out.add_term(m, if neg { c.negated() } else { c });
      }
    }
  }
  Ok(out)
}

/// `(s ι_I)(r α) = s · twist^{|I|}(r) · ι_I α` with `ι_I = a^+_{i_1} … a^+_{i_k}`.
pub fn contract<C: Coefficient>(model: &Model, x: &MultiVector<C>, f: &Form<C>) -> Result<Form<C>> {
  check_dim(model, x.dim())?;
  check_dim(model, f.dim())?;
  let mut out = Form::zero(model.dim());
  for (mx, cx) in x.terms() {
    for (mf, cf) in f.terms() {
      if let Some((neg, mask)) = contract_mask(mx.mask(), mf.mask()) {
        let m = FormMonomial::from_mask(add_freq(mx.freq(), mf.freq()), mask);
        model.check_monomial(&m)?;
        let c = cx.times(&cf.twisted_pow(x.order()));
        out.add_term(m, if neg { c.negated() } else { c });
      }
    }
  }
  Ok(out)
}

/// `∇_X f = d ι_X f + ι_X d f` for an order-1 field.
pub fn lie_derivative<C: Coefficient>(model: &Model, x: &MultiVector<C>, f: &Form<C>) -> Result<Form<C>> {
  if x.order() != 1 {
    return Err(Error::Unsupported(format!("Lie derivative along a multivector of order {}", x.order())));
  }
  let a = apply_d(model, &contract(model, x, f)?)?;
  let b = contract(model, x, &apply_d(model, f)?)?;
  Ok(a.plus(&b))
}
