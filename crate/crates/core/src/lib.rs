//! Verification laboratory for the canonical Green current on complex tori.
//!
//! The crate has three legs:
//!
//! * numerics on rank-2 complex lattices: Weierstrass sigma, quasi-periods,
//!   the modular discriminant, the canonical Green function `g` and the
//!   translation units `phi`, together with their distribution and trace
//!   identities ([`lattice`], [`elliptic`], [`green`]);
//! * a bidegree-typed term algebra with a directed rewriting engine that
//!   re-derives the product formula for Green currents on a product of two
//!   tori ([`currents`]);
//! * exact integer/rational linear algebra for the cohomology of real tori
//!   with coefficients in the unipotent logarithm module: Koszul complexes,
//!   Smith normal form, punctured-torus localization, residue maps, trace
//!   operators and their weight decomposition ([`cohomology`]).
//!
//! [`checks`] wires the three legs into named verification suites with
//! seeded sampling and machine-readable reports; the `greenpol` binary is a
//! thin CLI over those suites.

pub mod lattice;
pub mod elliptic;
pub mod green;
pub mod currents;
pub mod cohomology;
pub mod report;
pub mod checks;

pub use lattice::{Lattice, LatticeError, PointRep, TorsionPoint};

/// Version string echoed in every report.
pub const ENGINE_VERSION: &str = concat!("greenpol-", env!("CARGO_PKG_VERSION"));
