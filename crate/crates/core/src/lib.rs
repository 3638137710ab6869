//! Average-cost infinite-horizon optimal control of switched Boolean
//! control networks (SBCNs).
//!
//! The pipeline goes: Boolean rules -> algebraic state-space form
//! (network transition matrices over unit vectors) -> optimal state
//! transition graph from an initial state under constraints -> Karp's
//! minimum-mean-cycle dynamic program -> a state-feedback control and
//! switching law whose closed loop attains the minimum average cost.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the
//! command-line front end live in the companion `sbcn-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod all_initial;
pub mod expr;
pub mod logic;
pub mod mmc;
pub mod model;
pub mod oracle;
pub mod ostg;
pub mod parse;
pub mod policy;
pub mod scc;

#[cfg(test)]
pub(crate) mod testutil;

pub use expr::{BooleanExpr, StructureMatrix};
pub use logic::LogicalMatrix;
pub use mmc::{KarpTable, MmcResult};
pub use model::{ConstraintSet, ProblemInstance, SbcnModel, StageCost};
pub use ostg::{Edge, Ostg};
pub use policy::FeedbackLaw;
