//! Exact integer and rational linear algebra for the topological logarithm
//! modules: Koszul-complex cohomology of real tori, the punctured-torus
//! localization with its residue maps, polylogarithm classes as residue
//! preimages, and trace-operator eigenspace decompositions.
//!
//! Everything over Z goes through big-integer Smith normal forms; the
//! eigenspace work uses exact rationals. No floating point enters this
//! module.

pub mod intmat;
pub mod koszul;
pub mod logmodule;
pub mod punctured;
pub mod ratmat;
pub mod trace;

pub use intmat::{kernel_basis, smith_normal_form, solve_columns, IntMat, Snf};
pub use koszul::{induced_map_free, induced_map_is_zero, CochainComplex, CohomologyGroup};
pub use logmodule::LogModule;
pub use punctured::{PolylogClass, PuncturedCohomology, SIZE_BUDGET};
pub use ratmat::RatMat;
pub use trace::{
    assembled_punctured_trace, stalk_permutation, trace_cochain_matrix, trace_on_cohomology,
    verify_trace_chain_map, weight_decomposition, weight_eigenspace, weight_zero_polylog,
};

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomologyError {
    #[error("size budget exceeded: dimension {dim} > {limit} (Smith normal form is cubic)")]
    BudgetExceeded { dim: usize, limit: usize },
    #[error("residue datum infeasible: its augmentation class in the coinvariants is {class}, not 0")]
    ResidueInfeasible { class: BigInt },
    #[error("trace parameter a = {a} is not invertible modulo N = {n}")]
    GcdViolation { a: u32, n: u32 },
    #[error("assembled punctured trace requires level-0 coefficients, got level {level}")]
    UnsupportedLevel { level: u32 },
    #[error("exactness verification failed: {0}")]
    ExactnessFailure(String),
}

/// Structured text report: per-degree rank and torsion invariants, plus
/// named induced-map matrices in row-major integer form.
#[derive(Debug, Default, Clone)]
pub struct StructuredReport {
    lines: Vec<String>,
}

impl StructuredReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_group(&mut self, label: &str, group: &CohomologyGroup) {
        let torsion: Vec<String> = group.torsion.iter().map(|t| t.to_string()).collect();
        self.lines.push(format!(
            "group {label} degree {} rank {} torsion [{}]",
            group.degree,
            group.free_rank,
            torsion.join(" ")
        ));
    }

    pub fn push_map(&mut self, name: &str, matrix: &IntMat) {
        self.lines.push(format!("map {name} {}", matrix.row_major_string()));
    }

    pub fn push_note(&mut self, note: &str) {
        self.lines.push(format!("note {note}"));
    }

    pub fn to_text(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}
