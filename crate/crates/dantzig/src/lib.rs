//! Command-line front end and file formats for the Dantzig selector solvers
//! in [`dantzig_core`].
//!
//! * [`io`]: CSV readers and writers for designs, observations, labels and
//!   benchmark results.
//! * [`sweep`]: benchmark sweeps on a thread pool.
//! * [`cli`]: the `dantzig` binary.

pub mod cli;
pub mod clock;
pub mod io;
pub mod sweep;

pub use clock::StdClock;
pub use dantzig_core as core;
