//! Semantics engine for recursive quantum programs with quantum control flow.
//!
//! Programs branch on "coin" qudits through quantum case statements. Unfolding
//! a recursive call creates a fresh copy of every coin, so the meaning of a
//! recursive program is an operator on a Fock space over the coins tensored
//! with the principal system. This crate computes those operators in a
//! truncated Fock space, both as a least fixed point and as the limit of
//! syntactic approximations, and derives symmetric (boson/fermion) semantics
//! and principal-system output states from them.
//!
//! The numeric core is generic over the real scalar; the aliases at the crate
//! root fix it to `f64`.

pub mod fock;
pub mod lang;
pub mod linalg;
pub mod oracles;
pub mod parser;
pub mod scalar;
pub mod semantics;
pub mod states;
pub mod symmetry;

pub use lang::{CoinRef, Declaration, GateLibrary, Program, SpaceSpec, Spaces};
pub use parser::{parse, SourceModule};

pub type SparseMatrix = linalg::Sparse<f64>;
pub type DenseMatrix = linalg::Dense<f64>;
pub type Complex64 = num_complex::Complex<f64>;
pub type FockOperator = fock::FockOperator<f64>;
pub type FockState = states::FockState<f64>;
pub type Engine = semantics::Engine<f64>;
