//! Moore machine minimization by duality, and digit indexing of
//! substitution fixed points.

pub mod dot;
pub mod duality;
pub mod equivalence;
pub mod error;
pub mod format;
pub mod machine;
pub mod substitution;

pub use duality::{bidual, dual, DualMachine, OutputVector};
pub use equivalence::{
    equivalent, isomorphic, minimize, normal_form, oracle_minimize, product, states_equivalent,
    Equivalence, Isomorphism, OutputCombiner,
};
pub use error::{Error, ParseError, Result};
pub use format::{emit_machine, parse_machine};
pub use machine::{Counterexample, MooreMachine, Word};
pub use substitution::{
    emit_subst, letter_at, letter_at_constant, minimize_substitution, parse_subst, parse_substitution,
    phi, psi, to_padded_machine, PaddedMachine, PaddingSpec, SubstFile, Substitution,
};
