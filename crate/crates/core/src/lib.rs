//! Partitions of the cyclic group `Z/N` into pairs with prescribed differences.
//!
//! For even `N = 2n` and units `d_1, ..., d_n` of `Z/N`, [`solver::solve`]
//! builds such a partition constructively:
//!
//! 1. [`signflip`] picks signs `s_i` with `sum s_i d_i = n (mod 2n)` using a
//!    witness-tracking sumset dynamic program.
//! 2. [`hall`] realizes the halved differences `(s_i d_i + 1) / 2 (mod n)` as
//!    the differences `i - c_i` of a permutation `c`.
//! 3. [`solver::assemble`] pairs each even residue `2i` with the odd residue
//!    `2 c_i + 1`.
//!
//! The [`oracle`] module is an independent exhaustive solver and counter. It
//! is used to cross-check the pipeline and to sweep small odd moduli, where
//! no construction is known.

pub mod cli;
pub mod error;
pub mod hall;
pub mod oracle;
pub mod signflip;
pub mod solver;
pub mod zmod;

pub use error::{Error, Result};
pub use hall::{HallSolution, HalvedDifferences, SearchConfig};
pub use oracle::{ExplorationReport, OracleBounds};
pub use signflip::{SignVector, WitnessTable};
pub use solver::AssignedPartition;
pub use zmod::{Instance, Orientation, Pair, PairPartition, Parity, Residue, VerificationReport};
