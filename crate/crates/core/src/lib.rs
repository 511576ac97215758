//! Numerical substrate for time-dependent Schrödinger problems on a
//! 1-periodic quantum waveguide, and for the recovery of a periodic
//! potential difference from boundary data.
//!
//! The crate is organized around the pipeline
//!
//! ```text
//! lattice  -- grids, complex fields, norms, shifted-lattice Fourier analysis
//! fbg      -- Floquet-Bloch-Gel'fand decomposition of cylinder fields
//! forward  -- fibered Crank-Nicolson IBVP solver and boundary operators
//! cgo      -- complex geometric optics solutions via a Faddeev-type inverse
//! inverse  -- Fourier-coefficient probes, Parseval resummation, sweeps
//! ```
//!
//! All heavy inner loops are data-parallel over independent work items
//! (FFT lines, interpolation targets, fibers, frequency points) and are
//! dispatched through [`exec`], which falls back to sequential execution
//! when the `parallel` feature is disabled. Results are bit-identical
//! regardless of worker count: every parallel map writes to its own slot
//! and all reductions run in a fixed order.

pub mod error;
pub mod exec;
pub mod lattice;
pub mod fbg;
pub mod forward;
pub mod cgo;
pub mod inverse;

pub use error::CoreError;
pub use num_complex::Complex64;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
