//! Model checking for a stit logic of objective and subjective oughts over
//! finite epistemic branching-time models and their Kripke counterparts.

pub mod axioms;
pub mod btmodel;
pub mod formula;
pub mod kripke;
pub mod puzzles;
pub mod semantics;
pub mod value;
