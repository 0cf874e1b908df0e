//! Differential forms in fermionic language: creation operators `a^i` (wedge with
//! `dx^i`), annihilation operators `a^+_j` (contraction), `d`, and perturbed differentials.

pub mod calculus;
pub mod form;
pub mod identities;
pub mod operator;

pub use calculus::{apply_d, contract, lie_derivative, wedge};
pub use form::{form_from_literals, form_literals, multivector_from_literals, multivector_literals, Form, FormMonomial, MultiVector, TermLiteral};
pub use operator::{
  anticommutator, build_perturbed_d, commutator, form_vector, operator_square, vector_form, FormOperator, Param,
  PerturbationTerm, PerturbedDifferential, RingOperator, TermKind,
};
