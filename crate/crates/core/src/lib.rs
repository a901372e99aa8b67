//! The loop O(n) model on finite domains of the hexagonal lattice.
//!
//! The crate is organised bottom-up:
//!
//! * [`hexlattice`] builds domains (simply connected unions of hexagonal faces).
//! * [`config`] handles edge configurations, loop and cluster decompositions, and the
//!   loop/spin correspondence.
//! * [`measures`] computes partition functions and full probability tables by exhaustive
//!   enumeration for the loop, percolation and FK-Ising measures.
//! * [`couplings`] holds the parameter maps, loop colouring, two-sheet construction and
//!   the exact stochastic-domination checkers.
//! * [`mcmc`] samples large domains with a face-flip Metropolis chain.
//! * [`analysis`] fits exponential tails, scans parameter grids and runs Monte Carlo
//!   domination probes.

pub mod analysis;
pub mod config;
pub mod couplings;
mod error;
mod flow;
pub mod hexlattice;
pub mod mcmc;
pub mod measures;
mod sum;
mod unionfind;

pub use error::{Error, Result};
pub use hexlattice::{Domain, FaceCoord, HexVertex, Parity, Preset};
pub use config::{EdgeConfig, Spin, SpinConfig};
