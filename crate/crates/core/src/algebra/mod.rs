//! Exact arithmetic: rationals, graded supercommutative rings, sparse linear algebra
//! and subquotients.

pub mod linalg;
pub mod rational;
pub mod ring;
pub mod subquotient;

pub use linalg::{Echelon, PivotSide, RankKernelImage, SparseMatrix, SparseVector, Subspace};
pub use rational::{format_rational, parse_rational, Rational};
pub use ring::{Coefficient, GradedRingElement, RingDescriptor, RingMonomial, RingMonomialLiteral};
pub use subquotient::{subquotient_induced_map, Subquotient};
