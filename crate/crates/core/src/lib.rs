//! Allocation-only core of `danneal`: QUBO models with incremental energy
//! bookkeeping, a parallel-trial annealer with a dynamic escape offset, and
//! QUBO formulations of number partitioning and modularity-based graph
//! partitioning.
//!
//! The crate is `no_std` and needs only `alloc`. Wall-clock time limits are
//! supplied by the caller through the [`anneal::Clock`] trait so that the
//! annealer itself never touches the operating system.
//!
//! ```
//! use danneal_core::anneal::{anneal, AnnealParams, NoClock, Schedule};
//! use danneal_core::problems::{build_number_partition, decode_number_partition, NumberSet};
//!
//! let set = NumberSet::new(vec![2, 3, 5]).unwrap();
//! let model = build_number_partition(&set);
//! let schedule = Schedule::geometric(50.0, 0.05, 200).unwrap();
//! let params = AnnealParams { restarts: 4, seed: 7, ..AnnealParams::default() };
//! let result = anneal(&model, &[], &schedule, &params, None, &NoClock).unwrap();
//! let split = decode_number_partition(&set, &result.best_bits).unwrap();
//! assert_eq!(split.d, 0);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod anneal;
pub mod error;
pub mod graph;
pub mod problems;
pub mod qubo;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
