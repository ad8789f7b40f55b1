//! Exact machine models for quantum and classical computation.
//!
//! This crate is `no_std` (it needs `alloc`). It holds every algorithm of the
//! workbench: exact Clifford+T scalar arithmetic, deterministic and
//! probabilistic Turing machines with Gödel numbering, quantum Turing machine
//! simulation with well-formedness checking, the quantum gate model, a
//! Solovay-Kitaev compiler over SU(2), and the hybrid-device harness that
//! measures how observation breaks reversible reset.
//!
//! File formats, the command line and anything touching the filesystem live in
//! the `qtmlab` companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod encoding;
pub mod error;
pub mod gates;
pub mod machine;
pub mod ptm;
pub mod qtm;
pub mod scalar;
pub mod sk;
pub mod suhd;
pub mod tm;
pub mod universal;
pub mod utm;

pub use error::{Error, Result};

/// Default cap on explored configurations, shared by every enumeration.
pub const DEFAULT_CONFIG_GUARD: usize = 1_000_000;
