//! Construction engine for bidirected (symmetric) odd cycles.
//!
//! Starting from copies of the complete symmetric digraph on three vertices,
//! the engine applies only directed Hajos operations — joins and
//! identifications of independent vertex sets — to build the symmetric cycle
//! of any odd order, recording every operation in a replayable certificate.
//! A verifier replays certificates through the primitive operations, checks
//! operation counts against closed-form bounds and the `N ln N` complexity
//! envelope, and brute-forces dichromatic numbers of small instances.

pub mod analysis;
pub mod builder;
pub mod cli;
pub mod digraph;
pub mod hajos_ops;
pub mod trace;

pub use digraph::{symmetric_cycle, ArcClass, Digraph, DigraphError, Label};
pub use hajos_ops::{CyclicSpec, JoinSpec, OpError};
pub use trace::{GraphId, HajosTrace, TraceError, TraceStep};
