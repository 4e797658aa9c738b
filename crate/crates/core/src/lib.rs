//! Coulomb-gauge Yang–Mills workbench on a periodic `N³` lattice.
//!
//! Fields, the Faddeev–Popov operator and its Green's functions, the
//! Hamilton flow with the instantaneous Coulomb term, a truncated bosonic
//! Fock space, and gap-estimate quadratures.

pub mod algebra;
pub mod error;
pub mod faddeev_popov;
pub mod fields;
pub mod fock;
pub mod gap;
pub mod greens;
pub mod hamiltonian;
pub mod lattice;
pub mod linalg;
pub mod random;
pub mod snapshot;
mod spectral;

pub use algebra::StructureConstants;
pub use error::{Result, YmError};
pub use lattice::{ColorScalarField, FieldKind, Grid, LatticeField};
pub use snapshot::Snapshot;
