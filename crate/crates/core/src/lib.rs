//! Discrete Morse and Morse–Bott theory on finite CW complexes presented as
//! graded cell posets with incidence numbers and regularity flags.
//!
//! The modules build on each other in this order: [`complex`] and
//! [`function`] hold the input data, [`morse`] and [`bott`] validate
//! functions, [`homology`] computes ranks over the integers, [`gradient`]
//! handles combinatorial vector fields, and [`inequalities`] assembles the
//! polynomial identities. [`gen`] provides seeded generators and independent
//! oracles, [`corpus`] sweeps them in parallel, and [`cli`] backs the `dmb`
//! binary.

pub mod bott;
pub mod cli;
pub mod complex;
pub mod corpus;
pub mod function;
pub mod gen;
pub mod gradient;
pub mod homology;
pub mod inequalities;
pub mod morse;
pub mod par;
pub mod poly;

pub use bott::{collections, Collection, Collections, ReducedCollection};
pub use complex::{CellId, CellSpec, Complex, ComplexError, CoverSpec};
pub use function::{CellFunction, Value};
pub use gradient::VectorField;
pub use poly::IntPolynomial;
