//! Numerical toolkit for the 1D quantum East model with open boundaries.
//!
//! The chain lives on bitstring configurations of L sites; spin flips are
//! gated by the occupation of the left neighbor, with unconstrained terms at
//! the boundary. The crate covers Hamiltonian assembly, dense and filtered
//! eigensolvers, spin-coherent variational states, Fock-space and
//! entanglement observables, quench dynamics, boundary response, and
//! spectral statistics.

pub mod basis;
pub mod cache;
pub mod coherent;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod fit;
mod lapack;
pub mod observables;
pub mod operators;
pub mod response;
pub mod specstats;
pub mod state;

pub use basis::SpinBasis;
pub use error::{EastError, Result};
pub use operators::{build_hamiltonian, HamiltonianSpec, OperatorMatrix, Regime};
pub use state::{BasisTag, PureState};
