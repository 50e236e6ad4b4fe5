//! A bidegree-typed term algebra for formal currents on products of tori,
//! with a directed rewriting engine that re-derives the product formula for
//! the translation difference of the canonical Green current.
//!
//! Terms are built from the symbols `g` (canonical Green current), `nu` (its
//! smooth form), `delta` (Dirac currents of product subvarieties), pullback
//! and pushforward along the registered maps, wedge, the star product and
//! `dd^c`. Equality is modulo `im d + im dbar` exactly through the
//! integration-by-parts rule R3; no cohomological quotient is computed.

mod engine;
mod lemma;

pub use engine::{
    ambient, bidegree, register_rules, wavefront, DerivationStep, DerivationTrace, Engine,
    RuleInfo,
};
pub use lemma::{
    corpus_invariants_hold, green_lemma_first_display, green_lemma_lhs, green_lemma_rhs_display,
    green_lemma_rhs_statement, product_setup, random_corpus_term, verify_green_lemma,
    ProductSetup,
};

use std::fmt;

use thiserror::Error;

/// A space symbol: an atomic torus factor or an ordered product of factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpaceSym {
    pub name: String,
    pub relative_dimension: u32,
    pub factors: Vec<SpaceSym>,
}

impl SpaceSym {
    pub fn atomic(name: &str, relative_dimension: u32) -> Self {
        assert!(relative_dimension >= 1);
        SpaceSym {
            name: name.to_string(),
            relative_dimension,
            factors: Vec::new(),
        }
    }

    pub fn product(factors: Vec<SpaceSym>) -> Self {
        assert!(factors.len() >= 2);
        let name = factors.iter().map(|f| f.name.as_str()).collect::<Vec<_>>().join("x");
        let relative_dimension = factors.iter().map(|f| f.relative_dimension).sum();
        SpaceSym {
            name,
            relative_dimension,
            factors,
        }
    }

    pub fn is_product(&self) -> bool {
        !self.factors.is_empty()
    }
}

/// One factor of a product subvariety tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorSlice {
    /// The whole factor.
    Full,
    /// The zero section of the factor.
    Zero,
    /// The zero section translated by a named torsion section.
    Translated(String),
}

impl FactorSlice {
    /// The zero tag is the identity translation.
    pub fn canonical(self) -> FactorSlice {
        match self {
            FactorSlice::Translated(t) if t == "0" => FactorSlice::Zero,
            other => other,
        }
    }

    pub fn is_proper(&self) -> bool {
        !matches!(self, FactorSlice::Full)
    }
}

/// Support tag of a Dirac current: one slice per factor of the ambient
/// space (a single slice for an atomic space).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeltaTag {
    pub space: SpaceSym,
    pub slices: Vec<FactorSlice>,
}

impl DeltaTag {
    pub fn new(space: SpaceSym, slices: Vec<FactorSlice>) -> Self {
        let expected = if space.is_product() { space.factors.len() } else { 1 };
        assert_eq!(slices.len(), expected, "one slice per factor");
        DeltaTag {
            space,
            slices: slices.into_iter().map(FactorSlice::canonical).collect(),
        }
    }

    /// Codimension of the tagged subvariety.
    pub fn codim(&self) -> u32 {
        if self.space.is_product() {
            self.space
                .factors
                .iter()
                .zip(&self.slices)
                .map(|(f, s)| if s.is_proper() { f.relative_dimension } else { 0 })
                .sum()
        } else if self.slices[0].is_proper() {
            self.space.relative_dimension
        } else {
            0
        }
    }
}

/// Maps between the registered spaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MapSym {
    /// Projection of a product onto one factor.
    Proj { product: SpaceSym, factor: usize },
    /// Translation of a space by a named torsion section.
    Translate { space: SpaceSym, tag: String },
    /// Componentwise translation of a product, one tag per factor.
    TranslateProduct { product: SpaceSym, tags: Vec<String> },
    /// Slice immersion of one factor into the product, the other factors
    /// pinned at the given torsion tags ("0" for the zero section).
    SliceEmbed {
        product: SpaceSym,
        factor: usize,
        tags: Vec<String>,
    },
}

impl MapSym {
    /// Codimension added by a pushforward along this map (immersions only).
    pub fn immersion_codim(&self) -> Option<u32> {
        match self {
            MapSym::SliceEmbed { product, factor, .. } => Some(
                product
                    .factors
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i != factor)
                    .map(|(_, f)| f.relative_dimension)
                    .sum(),
            ),
            _ => None,
        }
    }
}

/// A formal current.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CurrentTerm {
    Zero,
    /// The canonical Green current of a space, bidegree (d-1, d-1).
    Green(SpaceSym),
    /// Its smooth form, bidegree (d, d), translation invariant.
    Nu(SpaceSym),
    /// Dirac current of a product subvariety, bidegree (codim, codim).
    Delta(DeltaTag),
    Pullback(MapSym, Box<CurrentTerm>),
    Pushforward(MapSym, Box<CurrentTerm>),
    Wedge(Vec<CurrentTerm>),
    Star(Box<CurrentTerm>, Box<CurrentTerm>),
    Ddc(Box<CurrentTerm>),
    Sum(Vec<(i64, CurrentTerm)>),
}

impl CurrentTerm {
    pub fn pull(map: MapSym, t: CurrentTerm) -> CurrentTerm {
        CurrentTerm::Pullback(map, Box::new(t))
    }

    pub fn push(map: MapSym, t: CurrentTerm) -> CurrentTerm {
        CurrentTerm::Pushforward(map, Box::new(t))
    }

    pub fn star(l: CurrentTerm, r: CurrentTerm) -> CurrentTerm {
        CurrentTerm::Star(Box::new(l), Box::new(r))
    }

    pub fn ddc(t: CurrentTerm) -> CurrentTerm {
        CurrentTerm::Ddc(Box::new(t))
    }

    pub fn diff(a: CurrentTerm, b: CurrentTerm) -> CurrentTerm {
        CurrentTerm::Sum(vec![(1, a), (-1, b)])
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, CurrentTerm::Zero) || matches!(self, CurrentTerm::Sum(v) if v.is_empty())
    }

    /// Canonical S-expression rendering; also the total order used for
    /// wedge-factor and summand sorting.
    pub fn sexpr(&self) -> String {
        format!("{self}")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurrentError {
    #[error("type error: {0}")]
    Type(String),
    #[error("inadmissible wedge: wavefront tags of {left} and {right} clash")]
    Admissibility { left: String, right: String },
    #[error("rewriting budget of {budget} steps exceeded")]
    BudgetExceeded { budget: usize },
    #[error("derivation failed: lhs normalized to {lhs_normal}, rhs to {rhs_normal}")]
    DerivationFailure { lhs_normal: String, rhs_normal: String },
}

fn slice_sexpr(slice: &FactorSlice, factor: &SpaceSym) -> String {
    match slice {
        FactorSlice::Full => format!("(full {})", factor.name),
        FactorSlice::Zero => format!("(zero {})", factor.name),
        FactorSlice::Translated(t) => format!("(pt {} {})", t, factor.name),
    }
}

impl fmt::Display for MapSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapSym::Proj { product, factor } => {
                write!(f, "(q {})", product.factors[*factor].name)
            }
            MapSym::Translate { space, tag } => write!(f, "(tr {} {})", tag, space.name),
            MapSym::TranslateProduct { tags, .. } => write!(f, "(trx {})", tags.join(" ")),
            MapSym::SliceEmbed { product, factor, tags } => {
                write!(f, "(emb {} {})", product.factors[*factor].name, tags.join(" "))
            }
        }
    }
}

impl fmt::Display for CurrentTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurrentTerm::Zero => write!(f, "0"),
            CurrentTerm::Green(s) => write!(f, "(g {})", s.name),
            CurrentTerm::Nu(s) => write!(f, "(nu {})", s.name),
            CurrentTerm::Delta(tag) => {
                write!(f, "(delta")?;
                if tag.space.is_product() {
                    for (slice, factor) in tag.slices.iter().zip(&tag.space.factors) {
                        write!(f, " {}", slice_sexpr(slice, factor))?;
                    }
                } else {
                    write!(f, " {}", slice_sexpr(&tag.slices[0], &tag.space))?;
                }
                write!(f, ")")
            }
            CurrentTerm::Pullback(map, t) => write!(f, "(pull {map} {t})"),
            CurrentTerm::Pushforward(map, t) => write!(f, "(push {map} {t})"),
            CurrentTerm::Wedge(children) => {
                write!(f, "(wedge")?;
                for c in children {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
            CurrentTerm::Star(l, r) => write!(f, "(star {l} {r})"),
            CurrentTerm::Ddc(t) => write!(f, "(ddc {t})"),
            CurrentTerm::Sum(terms) => {
                write!(f, "(sum")?;
                for (c, t) in terms {
                    write!(f, " ({c} {t})")?;
                }
                write!(f, ")")
            }
        }
    }
}
