//! Balanced hypercubes BHₙ under conditional edge faults, and a constructive
//! fault-free Hamiltonian cycle through any prescribed fault-free edge when at
//! most 4n−5 edges fail.
//!
//! Modules, bottom up: [`topology`] builds BHₙ and its four-way splits,
//! [`faults`] models faulty edge sets, [`pathfinder`] holds exact-search
//! oracles, [`construct`] is the inductive constructor, [`verify`] checks
//! every structural claim independently, [`io`] reads and writes the JSON
//! and DOT formats, and [`stress`] runs seeded experiments.

pub mod construct;
pub mod faults;
pub mod io;
pub mod pathfinder;
pub mod stress;
pub mod topology;
pub mod verify;

pub use construct::{construct_ham_cycle, stitch, CaseTrace, ConstructError, Constructor, StitchError};
pub use faults::{FaultError, FaultSet};
pub use pathfinder::{HamCycle, Path, SearchBudget, SearchError, SearchStats, Searcher};
pub use topology::{Color, Edge, Partition, SubCube, Topology, Vertex};
