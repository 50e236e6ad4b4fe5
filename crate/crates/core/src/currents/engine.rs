//! Directed rewriting for current terms.
//!
//! The strategy is deterministic: between rule steps the term is kept in a
//! canonical sum-of-wedges form (linearity, flattening, sorted factors,
//! collected integer coefficients); local rules R1, R2, R4, R5 and the
//! pushforward expansion are applied innermost-first in registration order;
//! when no local redex remains, the integration-by-parts rule R3 fires on
//! matched pairs `c*(u ^ delta_{X x t}) - c*(u ^ delta_{X x t'})`, logged as
//! a reversed R1 step, an R3 step and a forward R1 step. Confluence is not
//! assumed; everything is bounded by a step budget.

use super::*;

/// A registered rewrite rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

/// The rule set: the five current identities plus the two structural moves
/// the strategy uses between them.
pub fn register_rules() -> Vec<RuleInfo> {
    vec![
        RuleInfo {
            name: "R1-green-equation",
            summary: "ddc g(X) -> delta(zero section) - nu(X), compatibly with pullback decorations",
        },
        RuleInfo {
            name: "R2-star-expansion",
            summary: "g1 * g2 -> g1 ^ delta(divisor of g2) + nu(g1) ^ g2",
        },
        RuleInfo {
            name: "R3-integration-by-parts",
            summary: "eta ^ ddc(omega) = ddc(eta) ^ omega mod im d + im dbar, for disjoint wavefronts",
        },
        RuleInfo {
            name: "R4-pullback-distribution",
            summary: "translation pullback distributes over star/wedge/sum, composes with projections, translates delta tags",
        },
        RuleInfo {
            name: "R5-nu-invariance",
            summary: "translation pullback of nu is nu",
        },
        RuleInfo {
            name: "expand-pushforward",
            summary: "slice-immersion pushforward becomes projection pullback wedged with the slice Dirac current",
        },
        RuleInfo {
            name: "canonicalize",
            summary: "linearity, flattening, sorted wedge factors, collected integer sums",
        },
    ]
}

/// One step of a derivation: a registered rule applied at some position,
/// with the whole term before and after.
#[derive(Debug, Clone)]
pub struct DerivationStep {
    pub index: usize,
    pub rule: &'static str,
    /// True when an equational rule was applied right-to-left.
    pub reversed: bool,
    /// True when the step verified wavefront admissibility.
    pub wavefront_checked: bool,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, Default)]
pub struct DerivationTrace {
    pub steps: Vec<DerivationStep>,
    pub terminal: bool,
}

impl DerivationTrace {
    /// Line-oriented text format: step index, rule name (with a `^-1` marker
    /// for right-to-left applications), resulting term. Bit-exact across
    /// runs for identical inputs.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let marker = if step.reversed { "^-1" } else { "" };
            out.push_str(&format!("{:04} {}{} {}\n", step.index, step.rule, marker, step.after));
        }
        out.push_str(&format!("terminal {}\n", self.terminal));
        out
    }
}

/// Ambient space of a term; `None` for the polymorphic zero term.
pub fn ambient(t: &CurrentTerm) -> Result<Option<SpaceSym>, CurrentError> {
    fn merge(
        a: Option<SpaceSym>,
        b: Option<SpaceSym>,
    ) -> Result<Option<SpaceSym>, CurrentError> {
        match (a, b) {
            (None, x) => Ok(x),
            (x, None) => Ok(x),
            (Some(x), Some(y)) if x == y => Ok(Some(x)),
            (Some(x), Some(y)) => Err(CurrentError::Type(format!(
                "ambient mismatch: {} vs {}",
                x.name, y.name
            ))),
        }
    }
    match t {
        CurrentTerm::Zero => Ok(None),
        CurrentTerm::Green(s) | CurrentTerm::Nu(s) => Ok(Some(s.clone())),
        CurrentTerm::Delta(tag) => Ok(Some(tag.space.clone())),
        CurrentTerm::Pullback(map, inner) => {
            let inner_space = ambient(inner)?;
            let (source, target) = map_spaces(map);
            if let Some(s) = inner_space {
                if s != target {
                    return Err(CurrentError::Type(format!(
                        "pullback along a map into {} applied to a current on {}",
                        target.name, s.name
                    )));
                }
            }
            Ok(Some(source))
        }
        CurrentTerm::Pushforward(map, inner) => {
            let inner_space = ambient(inner)?;
            let (source, target) = map_spaces(map);
            if let Some(s) = inner_space {
                if s != source {
                    return Err(CurrentError::Type(format!(
                        "pushforward along a map from {} applied to a current on {}",
                        source.name, s.name
                    )));
                }
            }
            Ok(Some(target))
        }
        CurrentTerm::Wedge(children) => {
            let mut acc = None;
            for c in children {
                acc = merge(acc, ambient(c)?)?;
            }
            Ok(acc)
        }
        CurrentTerm::Star(l, r) => merge(ambient(l)?, ambient(r)?),
        CurrentTerm::Ddc(inner) => ambient(inner),
        CurrentTerm::Sum(terms) => {
            let mut acc = None;
            for (_, c) in terms {
                acc = merge(acc, ambient(c)?)?;
            }
            Ok(acc)
        }
    }
}

fn map_spaces(map: &MapSym) -> (SpaceSym, SpaceSym) {
    match map {
        MapSym::Proj { product, factor } => (product.clone(), product.factors[*factor].clone()),
        MapSym::Translate { space, .. } => (space.clone(), space.clone()),
        MapSym::TranslateProduct { product, .. } => (product.clone(), product.clone()),
        MapSym::SliceEmbed { product, factor, .. } => {
            (product.factors[*factor].clone(), product.clone())
        }
    }
}

/// Bidegree (p, p) of a term; `None` for zero. Wedge products beyond the
/// top degree of the ambient space are a type error.
pub fn bidegree(t: &CurrentTerm) -> Result<Option<u32>, CurrentError> {
    fn merge(a: Option<u32>, b: Option<u32>) -> Result<Option<u32>, CurrentError> {
        match (a, b) {
            (None, x) => Ok(x),
            (x, None) => Ok(x),
            (Some(x), Some(y)) if x == y => Ok(Some(x)),
            (Some(x), Some(y)) => Err(CurrentError::Type(format!(
                "bidegree mismatch: ({x},{x}) vs ({y},{y})"
            ))),
        }
    }
    let deg = match t {
        CurrentTerm::Zero => None,
        CurrentTerm::Green(s) => Some(s.relative_dimension - 1),
        CurrentTerm::Nu(s) => Some(s.relative_dimension),
        CurrentTerm::Delta(tag) => Some(tag.codim()),
        CurrentTerm::Pullback(_, inner) => bidegree(inner)?,
        CurrentTerm::Pushforward(map, inner) => {
            let c = map.immersion_codim().ok_or_else(|| {
                CurrentError::Type("pushforward is only typed along slice immersions".into())
            })?;
            bidegree(inner)?.map(|p| p + c)
        }
        CurrentTerm::Wedge(children) => {
            let mut total = 0;
            let mut any = false;
            for c in children {
                if let Some(p) = bidegree(c)? {
                    total += p;
                    any = true;
                }
            }
            if any {
                if let Some(space) = ambient(t)? {
                    if total > space.relative_dimension {
                        return Err(CurrentError::Type(format!(
                            "wedge of bidegree ({total},{total}) exceeds the dimension of {}",
                            space.name
                        )));
                    }
                }
                Some(total)
            } else {
                None
            }
        }
        CurrentTerm::Star(l, r) => match (bidegree(l)?, bidegree(r)?) {
            (Some(p), Some(q)) => Some(p + q + 1),
            _ => None,
        },
        CurrentTerm::Ddc(inner) => bidegree(inner)?.map(|p| p + 1),
        CurrentTerm::Sum(terms) => {
            let mut acc = None;
            for (_, c) in terms {
                acc = merge(acc, bidegree(c)?)?;
            }
            acc
        }
    };
    Ok(deg)
}

fn compose_tags(a: &str, b: &str) -> String {
    if a == "0" {
        b.to_string()
    } else if b == "0" {
        a.to_string()
    } else {
        format!("{a}+{b}")
    }
}

fn translate_slice(slice: &FactorSlice, tag: &str) -> FactorSlice {
    match slice {
        FactorSlice::Full => FactorSlice::Full,
        FactorSlice::Zero => FactorSlice::Translated(tag.to_string()).canonical(),
        FactorSlice::Translated(t) => FactorSlice::Translated(compose_tags(t, tag)).canonical(),
    }
}

/// Symbolic wavefront supports: the subvariety tags along which a term is
/// singular. `nu` is smooth; a star product is conservatively assigned the
/// union of its arguments' supports and divisors.
pub fn wavefront(t: &CurrentTerm) -> Result<Vec<DeltaTag>, CurrentError> {
    let tags = match t {
        CurrentTerm::Zero | CurrentTerm::Nu(_) => vec![],
        CurrentTerm::Green(s) => {
            let slices = if s.is_product() {
                vec![FactorSlice::Zero; s.factors.len()]
            } else {
                vec![FactorSlice::Zero]
            };
            vec![DeltaTag::new(s.clone(), slices)]
        }
        CurrentTerm::Delta(tag) => vec![tag.clone()],
        CurrentTerm::Pullback(map, inner) => {
            let inner_tags = wavefront(inner)?;
            match map {
                MapSym::Proj { product, factor } => inner_tags
                    .into_iter()
                    .map(|tag| {
                        let mut slices = vec![FactorSlice::Full; product.factors.len()];
                        slices[*factor] = tag.slices[0].clone();
                        DeltaTag::new(product.clone(), slices)
                    })
                    .collect(),
                MapSym::Translate { tag: step, .. } => inner_tags
                    .into_iter()
                    .map(|tag| DeltaTag {
                        slices: tag.slices.iter().map(|s| translate_slice(s, step)).collect(),
                        ..tag
                    })
                    .collect(),
                MapSym::TranslateProduct { tags: steps, .. } => inner_tags
                    .into_iter()
                    .map(|tag| DeltaTag {
                        slices: tag
                            .slices
                            .iter()
                            .zip(steps)
                            .map(|(s, step)| translate_slice(s, step))
                            .collect(),
                        ..tag
                    })
                    .collect(),
                MapSym::SliceEmbed { .. } => {
                    return Err(CurrentError::Type(
                        "wavefront through a slice restriction is not supported".into(),
                    ))
                }
            }
        }
        CurrentTerm::Pushforward(map, inner) => match map {
            MapSym::SliceEmbed { product, factor, tags } => {
                let mut out = vec![image_tag(product, *factor, tags)];
                for tag in wavefront(inner)? {
                    let mut slices: Vec<FactorSlice> = tags
                        .iter()
                        .map(|t| FactorSlice::Translated(t.clone()).canonical())
                        .collect();
                    slices[*factor] = tag.slices[0].clone();
                    // the pinned slot was inserted above at the factor index
                    let mut full = Vec::with_capacity(product.factors.len());
                    let mut pin_iter = slices.into_iter();
                    for i in 0..product.factors.len() {
                        if i == *factor {
                            full.push(tag.slices[0].clone());
                            pin_iter.next();
                        } else {
                            full.push(
                                FactorSlice::Translated(tags[if i < *factor { i } else { i - 1 }].clone())
                                    .canonical(),
                            );
                        }
                    }
                    out.push(DeltaTag::new(product.clone(), full));
                }
                out
            }
            _ => {
                return Err(CurrentError::Type(
                    "pushforward wavefront only supported along slice immersions".into(),
                ))
            }
        },
        CurrentTerm::Wedge(children) => {
            let mut out = vec![];
            for c in children {
                out.extend(wavefront(c)?);
            }
            out
        }
        CurrentTerm::Star(l, r) => {
            let mut out = wavefront(l)?;
            out.extend(wavefront(r)?);
            out
        }
        CurrentTerm::Ddc(inner) => wavefront(inner)?,
        CurrentTerm::Sum(terms) => {
            let mut out = vec![];
            for (_, c) in terms {
                out.extend(wavefront(c)?);
            }
            out
        }
    };
    Ok(tags)
}

/// Image of a slice immersion as a Dirac tag: the embedded factor is full,
/// the other factors pinned at their tags.
fn image_tag(product: &SpaceSym, factor: usize, tags: &[String]) -> DeltaTag {
    let mut slices = Vec::with_capacity(product.factors.len());
    let mut pin = tags.iter();
    for i in 0..product.factors.len() {
        if i == factor {
            slices.push(FactorSlice::Full);
        } else {
            slices.push(FactorSlice::Translated(pin.next().expect("one tag per pinned factor").clone()));
        }
    }
    DeltaTag::new(product.clone(), slices)
}

fn slices_intersect(a: &FactorSlice, b: &FactorSlice) -> bool {
    match (a, b) {
        (FactorSlice::Full, _) | (_, FactorSlice::Full) => true,
        (FactorSlice::Zero, FactorSlice::Zero) => true,
        (FactorSlice::Translated(x), FactorSlice::Translated(y)) => x == y,
        _ => false,
    }
}

/// Two product-subvariety conormal supports clash when the supports meet
/// and some factor is proper on both sides.
fn tags_clash(a: &DeltaTag, b: &DeltaTag) -> bool {
    if a.space != b.space {
        return false;
    }
    let meet = a
        .slices
        .iter()
        .zip(&b.slices)
        .all(|(x, y)| slices_intersect(x, y));
    let common_proper = a
        .slices
        .iter()
        .zip(&b.slices)
        .any(|(x, y)| x.is_proper() && y.is_proper());
    meet && common_proper
}

fn check_admissible(parts: &[&CurrentTerm]) -> Result<(), CurrentError> {
    for i in 0..parts.len() {
        for j in 0..i {
            for ta in wavefront(parts[i])? {
                for tb in wavefront(parts[j])? {
                    if tags_clash(&ta, &tb) {
                        return Err(CurrentError::Admissibility {
                            left: parts[j].sexpr(),
                            right: parts[i].sexpr(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// A pullback chain ending in the canonical Green current:
/// `G(X)`, `tr^* G(X)`, `q^* G(X)` or `q^* tr^* G(X)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GreenChain {
    pub proj: Option<(SpaceSym, usize)>,
    pub translate: Option<String>,
    pub space: SpaceSym,
}

pub(crate) fn as_green_chain(t: &CurrentTerm) -> Option<GreenChain> {
    let mut proj = None;
    let mut rest = t;
    if let CurrentTerm::Pullback(MapSym::Proj { product, factor }, inner) = rest {
        proj = Some((product.clone(), *factor));
        rest = inner;
    }
    let mut translate = None;
    if let CurrentTerm::Pullback(MapSym::Translate { tag, .. }, inner) = rest {
        translate = Some(tag.clone());
        rest = inner;
    }
    match rest {
        CurrentTerm::Green(s) => Some(GreenChain {
            proj,
            translate,
            space: s.clone(),
        }),
        _ => None,
    }
}

impl GreenChain {
    /// Dirac tag of the chain's divisor (the translated zero section).
    pub fn divisor(&self) -> DeltaTag {
        let slice = match &self.translate {
            None => FactorSlice::Zero,
            Some(t) => FactorSlice::Translated(t.clone()).canonical(),
        };
        match &self.proj {
            None => DeltaTag::new(self.space.clone(), vec![slice]),
            Some((product, factor)) => {
                let mut slices = vec![FactorSlice::Full; product.factors.len()];
                slices[*factor] = slice;
                DeltaTag::new(product.clone(), slices)
            }
        }
    }

    /// The smooth form of the chain, keeping the translation decoration so
    /// that R5 gets to strip it in a visible step.
    pub fn nu_term(&self) -> CurrentTerm {
        let mut t = CurrentTerm::Nu(self.space.clone());
        if let Some(tag) = &self.translate {
            t = CurrentTerm::pull(
                MapSym::Translate {
                    space: self.space.clone(),
                    tag: tag.clone(),
                },
                t,
            );
        }
        if let Some((product, factor)) = &self.proj {
            t = CurrentTerm::pull(
                MapSym::Proj {
                    product: product.clone(),
                    factor: *factor,
                },
                t,
            );
        }
        t
    }

    /// The smooth form in its canonical (R5-normalized) shape.
    pub fn nu_term_stripped(&self) -> CurrentTerm {
        let t = CurrentTerm::Nu(self.space.clone());
        match &self.proj {
            None => t,
            Some((product, factor)) => CurrentTerm::pull(
                MapSym::Proj {
                    product: product.clone(),
                    factor: *factor,
                },
                t,
            ),
        }
    }

    /// The chain itself as a term.
    pub fn term(&self) -> CurrentTerm {
        let mut t = CurrentTerm::Green(self.space.clone());
        if let Some(tag) = &self.translate {
            t = CurrentTerm::pull(
                MapSym::Translate {
                    space: self.space.clone(),
                    tag: tag.clone(),
                },
                t,
            );
        }
        if let Some((product, factor)) = &self.proj {
            t = CurrentTerm::pull(
                MapSym::Proj {
                    product: product.clone(),
                    factor: *factor,
                },
                t,
            );
        }
        t
    }
}

/// Monomial representation used by the canonical form: sorted atoms with an
/// integer coefficient.
type Poly = Vec<(i64, Vec<CurrentTerm>)>;

fn poly_add(acc: &mut Poly, c: i64, atoms: Vec<CurrentTerm>) {
    if c != 0 {
        acc.push((c, atoms));
    }
}

fn canon(t: &CurrentTerm) -> Result<Poly, CurrentError> {
    let mut out: Poly = Vec::new();
    match t {
        CurrentTerm::Zero => {}
        CurrentTerm::Green(_) | CurrentTerm::Nu(_) | CurrentTerm::Delta(_) => {
            poly_add(&mut out, 1, vec![t.clone()]);
        }
        CurrentTerm::Sum(terms) => {
            for (c, child) in terms {
                for (cc, atoms) in canon(child)? {
                    poly_add(&mut out, c * cc, atoms);
                }
            }
        }
        CurrentTerm::Wedge(children) => {
            let mut acc: Poly = vec![(1, vec![])];
            for child in children {
                let p = canon(child)?;
                let mut next: Poly = Vec::new();
                for (ca, atoms_a) in &acc {
                    for (cb, atoms_b) in &p {
                        let mut atoms = atoms_a.clone();
                        atoms.extend(atoms_b.clone());
                        poly_add(&mut next, ca * cb, atoms);
                    }
                }
                acc = next;
            }
            for (c, atoms) in acc {
                if atoms.is_empty() {
                    return Err(CurrentError::Type("empty wedge product".into()));
                }
                poly_add(&mut out, c, atoms);
            }
        }
        CurrentTerm::Star(l, r) => {
            for (cl, al) in canon(l)? {
                for (cr, ar) in canon(r)? {
                    let lt = rebuild_monomial(&al);
                    let rt = rebuild_monomial(&ar);
                    poly_add(&mut out, cl * cr, vec![CurrentTerm::star(lt, rt)]);
                }
            }
        }
        CurrentTerm::Ddc(inner) => {
            for (c, atoms) in canon(inner)? {
                poly_add(&mut out, c, vec![CurrentTerm::ddc(rebuild_monomial(&atoms))]);
            }
        }
        CurrentTerm::Pullback(map, inner) => {
            for (c, atoms) in canon(inner)? {
                poly_add(
                    &mut out,
                    c,
                    vec![CurrentTerm::pull(map.clone(), rebuild_monomial(&atoms))],
                );
            }
        }
        CurrentTerm::Pushforward(map, inner) => {
            for (c, atoms) in canon(inner)? {
                poly_add(
                    &mut out,
                    c,
                    vec![CurrentTerm::push(map.clone(), rebuild_monomial(&atoms))],
                );
            }
        }
    }
    // sort atoms, collect equal monomials, sort monomials
    let mut keyed: Vec<(String, i64, Vec<CurrentTerm>)> = Vec::new();
    for (c, mut atoms) in out {
        atoms.sort_by(|a, b| a.sexpr().cmp(&b.sexpr()));
        let key = atoms.iter().map(|a| a.sexpr()).collect::<Vec<_>>().join(" ");
        match keyed.iter_mut().find(|(k, _, _)| *k == key) {
            Some((_, coeff, _)) => *coeff += c,
            None => keyed.push((key, c, atoms)),
        }
    }
    keyed.retain(|(_, c, _)| *c != 0);
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let poly: Poly = keyed.into_iter().map(|(_, c, atoms)| (c, atoms)).collect();
    for (_, atoms) in &poly {
        let refs: Vec<&CurrentTerm> = atoms.iter().collect();
        check_admissible(&refs)?;
    }
    Ok(poly)
}

fn rebuild_monomial(atoms: &[CurrentTerm]) -> CurrentTerm {
    match atoms.len() {
        0 => CurrentTerm::Zero,
        1 => atoms[0].clone(),
        _ => CurrentTerm::Wedge(atoms.to_vec()),
    }
}

fn rebuild(poly: &Poly) -> CurrentTerm {
    match poly.len() {
        0 => CurrentTerm::Zero,
        1 if poly[0].0 == 1 => rebuild_monomial(&poly[0].1),
        _ => CurrentTerm::Sum(
            poly.iter()
                .map(|(c, atoms)| (*c, rebuild_monomial(atoms)))
                .collect(),
        ),
    }
}

/// Outcome of one local rule application.
struct LocalRewrite {
    rule: &'static str,
    wavefront_checked: bool,
    term: CurrentTerm,
}

/// The rewriting engine: a registered rule set, a deterministic strategy
/// and a step budget (default 10^4).
#[derive(Debug, Clone)]
pub struct Engine {
    rules: Vec<RuleInfo>,
    budget: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine {
            rules: register_rules(),
            budget: 10_000,
        }
    }

    pub fn with_budget(budget: usize) -> Self {
        Engine {
            rules: register_rules(),
            budget,
        }
    }

    pub fn rules(&self) -> &[RuleInfo] {
        &self.rules
    }

    /// Directed normal form: fixed point of the rule set under the
    /// deterministic strategy; idempotent.
    pub fn normalize(&self, t: &CurrentTerm) -> Result<CurrentTerm, CurrentError> {
        Ok(self.normalize_traced(t)?.0)
    }

    /// Normal form together with the full derivation trace. Every step is
    /// checked to preserve bidegree and ambient space.
    pub fn normalize_traced(
        &self,
        t: &CurrentTerm,
    ) -> Result<(CurrentTerm, DerivationTrace), CurrentError> {
        let expected_deg = bidegree(t)?;
        let expected_space = ambient(t)?;
        let mut term = t.clone();
        let mut trace = DerivationTrace::default();
        let log = |trace: &mut DerivationTrace,
                       rule: &'static str,
                       reversed: bool,
                       wavefront_checked: bool,
                       before: &CurrentTerm,
                       after: &CurrentTerm|
         -> Result<(), CurrentError> {
            let deg = bidegree(after)?;
            let sp = ambient(after)?;
            if deg.is_some() && expected_deg.is_some() && deg != expected_deg {
                return Err(CurrentError::Type(format!(
                    "step {rule} changed the bidegree from {expected_deg:?} to {deg:?}"
                )));
            }
            if sp.is_some() && expected_space.is_some() && sp != expected_space {
                return Err(CurrentError::Type(format!(
                    "step {rule} changed the ambient space"
                )));
            }
            trace.steps.push(DerivationStep {
                index: trace.steps.len(),
                rule,
                reversed,
                wavefront_checked,
                before: before.sexpr(),
                after: after.sexpr(),
            });
            Ok(())
        };

        let mut steps_used = 0usize;
        loop {
            steps_used += 1;
            if steps_used > self.budget {
                return Err(CurrentError::BudgetExceeded { budget: self.budget });
            }
            let canonical = rebuild(&canon(&term)?);
            if canonical != term {
                log(&mut trace, "canonicalize", false, false, &term, &canonical)?;
                term = canonical;
            }
            if let Some(rw) = rewrite_first(&term)? {
                log(&mut trace, rw.rule, false, rw.wavefront_checked, &term, &rw.term)?;
                term = rw.term;
                continue;
            }
            if let Some(pair_steps) = self.delta_pair_steps(&term)? {
                for (rule, reversed, wavefront_checked, next) in pair_steps {
                    log(&mut trace, rule, reversed, wavefront_checked, &term, &next)?;
                    term = next;
                }
                continue;
            }
            if let Some(quad_steps) = self.delta_quad_steps(&term)? {
                for (rule, reversed, wavefront_checked, next) in quad_steps {
                    log(&mut trace, rule, reversed, wavefront_checked, &term, &next)?;
                    term = next;
                }
                continue;
            }
            break;
        }
        trace.terminal = true;
        Ok((term, trace))
    }

    /// Equality of directed normal forms, falling back to normalizing the
    /// difference (which lets R3 cancel matched pairs across the two sides).
    pub fn equivalent(&self, a: &CurrentTerm, b: &CurrentTerm) -> Result<bool, CurrentError> {
        let da = bidegree(a)?;
        let db = bidegree(b)?;
        if let (Some(x), Some(y)) = (da, db) {
            if x != y {
                return Err(CurrentError::Type(format!(
                    "cannot compare currents of bidegrees ({x},{x}) and ({y},{y})"
                )));
            }
        }
        let sa = ambient(a)?;
        let sb = ambient(b)?;
        if let (Some(x), Some(y)) = (sa, sb) {
            if x != y {
                return Err(CurrentError::Type(
                    "cannot compare currents on different spaces".into(),
                ));
            }
        }
        if self.normalize(a)? == self.normalize(b)? {
            return Ok(true);
        }
        Ok(self.normalize(&CurrentTerm::diff(a.clone(), b.clone()))?.is_zero())
    }

    /// R3 on the canonical sum: find monomials `c * (u ^ delta_{X x t})` and
    /// `-c * (u ^ delta_{X x t'})` whose tags differ in exactly one proper
    /// slot (all other slots full), with `u` a single Green chain with
    /// disjoint wavefront. Returns the three logged sub-steps.
    #[allow(clippy::type_complexity)]
    fn delta_pair_steps(
        &self,
        term: &CurrentTerm,
    ) -> Result<Option<Vec<(&'static str, bool, bool, CurrentTerm)>>, CurrentError> {
        let CurrentTerm::Sum(monomials) = term else {
            return Ok(None);
        };
        let split = |atoms: &CurrentTerm| -> Option<(CurrentTerm, DeltaTag)> {
            let CurrentTerm::Wedge(children) = atoms else {
                return None;
            };
            if children.len() != 2 {
                return None;
            }
            for (i, c) in children.iter().enumerate() {
                if let CurrentTerm::Delta(tag) = c {
                    let other = children[1 - i].clone();
                    if as_green_chain(&other).is_some() {
                        return Some((other, tag.clone()));
                    }
                }
            }
            None
        };
        for (i, (ci, ti)) in monomials.iter().enumerate() {
            let Some((u_i, tag_i)) = split(ti) else { continue };
            for (j, (cj, tj)) in monomials.iter().enumerate() {
                if i == j || *cj != -*ci {
                    continue;
                }
                let Some((u_j, tag_j)) = split(tj) else { continue };
                if u_i != u_j || tag_i.space != tag_j.space {
                    continue;
                }
                // tags must differ in exactly one slot, all others full
                let diff: Vec<usize> = (0..tag_i.slices.len())
                    .filter(|&k| tag_i.slices[k] != tag_j.slices[k])
                    .collect();
                if diff.len() != 1 {
                    continue;
                }
                let slot = diff[0];
                if (0..tag_i.slices.len())
                    .any(|k| k != slot && tag_i.slices[k] != FactorSlice::Full)
                {
                    continue;
                }
                if !tag_i.slices[slot].is_proper() || !tag_j.slices[slot].is_proper() {
                    continue;
                }
                let product = tag_i.space.clone();
                let factor_space = product.factors[slot].clone();
                let green_side = |slice: &FactorSlice| -> CurrentTerm {
                    match slice {
                        FactorSlice::Zero => CurrentTerm::Green(factor_space.clone()),
                        FactorSlice::Translated(s) => CurrentTerm::pull(
                            MapSym::Translate {
                                space: factor_space.clone(),
                                tag: s.clone(),
                            },
                            CurrentTerm::Green(factor_space.clone()),
                        ),
                        FactorSlice::Full => unreachable!(),
                    }
                };
                // h = q_slot^* (t_i^* g - t_j^* g): ddc h = delta_i - delta_j
                let h = CurrentTerm::pull(
                    MapSym::Proj {
                        product: product.clone(),
                        factor: slot,
                    },
                    CurrentTerm::diff(green_side(&tag_i.slices[slot]), green_side(&tag_j.slices[slot])),
                );
                // admissibility of the R3 swap
                let mut clash = false;
                for a in wavefront(&u_i)? {
                    for b in wavefront(&h)? {
                        if tags_clash(&a, &b) {
                            clash = true;
                        }
                    }
                }
                if clash {
                    continue;
                }
                let chain = as_green_chain(&u_i).expect("checked by split");
                // step 1 (R1 reversed): the pair becomes c * u ^ ddc(h)
                let mut keep: Vec<(i64, CurrentTerm)> = monomials
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != i && *k != j)
                    .map(|(_, m)| m.clone())
                    .collect();
                let step1 = {
                    let mut v = keep.clone();
                    v.push((
                        *ci,
                        CurrentTerm::Wedge(vec![u_i.clone(), CurrentTerm::ddc(h.clone())]),
                    ));
                    CurrentTerm::Sum(v)
                };
                // step 2 (R3): move ddc onto the Green chain
                let step2 = {
                    let mut v = keep.clone();
                    v.push((
                        *ci,
                        CurrentTerm::Wedge(vec![CurrentTerm::ddc(u_i.clone()), h.clone()]),
                    ));
                    CurrentTerm::Sum(v)
                };
                // step 3 (R1): expand ddc(u) = delta(divisor) - nu
                let step3 = {
                    let expanded = CurrentTerm::Sum(vec![
                        (1, CurrentTerm::Delta(chain.divisor())),
                        (-1, chain.nu_term()),
                    ]);
                    keep.push((*ci, CurrentTerm::Wedge(vec![expanded, h.clone()])));
                    CurrentTerm::Sum(keep)
                };
                return Ok(Some(vec![
                    ("R1-green-equation", true, false, step1),
                    ("R3-integration-by-parts", false, true, step2),
                    ("R1-green-equation", false, false, step3),
                ]));
            }
        }
        Ok(None)
    }

    /// R3 on the canonical sum, expanded form: an exact quadruple
    /// `c*(u ^ delta_v) - c*(u ^ nu_v) - c*(delta_u ^ v) + c*(nu_u ^ v)`
    /// for Green chains u, v with disjoint wavefronts is the Green-equation
    /// expansion of `c*(u ^ ddc v) - c*(ddc u ^ v)` and is discharged by
    /// the integration-by-parts exchange.
    #[allow(clippy::type_complexity)]
    fn delta_quad_steps(
        &self,
        term: &CurrentTerm,
    ) -> Result<Option<Vec<(&'static str, bool, bool, CurrentTerm)>>, CurrentError> {
        let CurrentTerm::Sum(monomials) = term else {
            return Ok(None);
        };
        // collect the Green chains appearing as wedge partners
        let mut chains: Vec<GreenChain> = Vec::new();
        for (_, t) in monomials {
            if let CurrentTerm::Wedge(children) = t {
                for c in children {
                    if let Some(chain) = as_green_chain(c) {
                        if !chains.contains(&chain) {
                            chains.push(chain);
                        }
                    }
                }
            }
        }
        let key_of = |a: &CurrentTerm, b: &CurrentTerm| {
            let mut pair = [a.sexpr(), b.sexpr()];
            pair.sort();
            pair.join(" ")
        };
        let coeff_at = |key: &str| -> Option<(usize, i64)> {
            monomials.iter().enumerate().find_map(|(idx, (c, t))| {
                let CurrentTerm::Wedge(children) = t else { return None };
                if children.len() == 2 && key_of(&children[0], &children[1]) == *key {
                    Some((idx, *c))
                } else {
                    None
                }
            })
        };
        for u in &chains {
            for v in &chains {
                if u == v {
                    continue;
                }
                // admissibility of the exchange
                let u_term = u.term();
                let v_term = v.term();
                let mut clash = false;
                for a in wavefront(&u_term)? {
                    for b in wavefront(&v_term)? {
                        if tags_clash(&a, &b) {
                            clash = true;
                        }
                    }
                }
                if clash {
                    continue;
                }
                let u_delta_v = key_of(&u_term, &CurrentTerm::Delta(v.divisor()));
                let u_nu_v = key_of(&u_term, &v.nu_term_stripped());
                let delta_u_v = key_of(&CurrentTerm::Delta(u.divisor()), &v_term);
                let nu_u_v = key_of(&u.nu_term_stripped(), &v_term);
                let (Some((i1, c1)), Some((i2, c2)), Some((_, c3)), Some((_, c4))) = (
                    coeff_at(&u_delta_v),
                    coeff_at(&u_nu_v),
                    coeff_at(&delta_u_v),
                    coeff_at(&nu_u_v),
                ) else {
                    continue;
                };
                if c1 == 0 || c2 != -c1 || c3 != -c1 || c4 != c1 {
                    continue;
                }
                let keep = |skip: &[usize]| -> Vec<(i64, CurrentTerm)> {
                    monomials
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !skip.contains(k))
                        .map(|(_, m)| m.clone())
                        .collect()
                };
                // step 1 (R1 reversed): fold the v-side pair into u ^ ddc v
                let step1 = {
                    let mut rest = keep(&[i1, i2]);
                    rest.push((
                        c1,
                        CurrentTerm::Wedge(vec![u_term.clone(), CurrentTerm::ddc(v_term.clone())]),
                    ));
                    CurrentTerm::Sum(rest)
                };
                // step 2 (R3): exchange ddc onto u
                let step2 = {
                    let mut rest = keep(&[i1, i2]);
                    rest.push((
                        c1,
                        CurrentTerm::Wedge(vec![CurrentTerm::ddc(u_term.clone()), v_term.clone()]),
                    ));
                    CurrentTerm::Sum(rest)
                };
                // step 3 (R1): expand ddc u; canonicalization then cancels
                // the remaining u-side pair
                let step3 = {
                    let mut rest = keep(&[i1, i2]);
                    let expanded = CurrentTerm::Sum(vec![
                        (1, CurrentTerm::Delta(u.divisor())),
                        (-1, u.nu_term()),
                    ]);
                    rest.push((c1, CurrentTerm::Wedge(vec![expanded, v_term.clone()])));
                    CurrentTerm::Sum(rest)
                };
                return Ok(Some(vec![
                    ("R1-green-equation", true, false, step1),
                    ("R3-integration-by-parts", false, true, step2),
                    ("R1-green-equation", false, false, step3),
                ]));
            }
        }
        Ok(None)
    }
}

/// Innermost-first, leftmost application of the first matching local rule,
/// in registration order R1, R2, R4, R5, expand-pushforward.
fn rewrite_first(t: &CurrentTerm) -> Result<Option<LocalRewrite>, CurrentError> {
    // children first
    match t {
        CurrentTerm::Pullback(map, inner) => {
            if let Some(rw) = rewrite_first(inner)? {
                return Ok(Some(LocalRewrite {
                    term: CurrentTerm::pull(map.clone(), rw.term),
                    ..rw
                }));
            }
        }
        CurrentTerm::Pushforward(map, inner) => {
            if let Some(rw) = rewrite_first(inner)? {
                return Ok(Some(LocalRewrite {
                    term: CurrentTerm::push(map.clone(), rw.term),
                    ..rw
                }));
            }
        }
        CurrentTerm::Ddc(inner) => {
            if let Some(rw) = rewrite_first(inner)? {
                return Ok(Some(LocalRewrite {
                    term: CurrentTerm::ddc(rw.term),
                    ..rw
                }));
            }
        }
        CurrentTerm::Wedge(children) => {
            for (i, c) in children.iter().enumerate() {
                if let Some(rw) = rewrite_first(c)? {
                    let mut v = children.clone();
                    v[i] = rw.term;
                    return Ok(Some(LocalRewrite {
                        term: CurrentTerm::Wedge(v),
                        ..rw
                    }));
                }
            }
        }
        CurrentTerm::Star(l, r) => {
            if let Some(rw) = rewrite_first(l)? {
                return Ok(Some(LocalRewrite {
                    term: CurrentTerm::star(rw.term, (**r).clone()),
                    ..rw
                }));
            }
            if let Some(rw) = rewrite_first(r)? {
                return Ok(Some(LocalRewrite {
                    term: CurrentTerm::star((**l).clone(), rw.term),
                    ..rw
                }));
            }
        }
        CurrentTerm::Sum(terms) => {
            for (i, (_, c)) in terms.iter().enumerate() {
                if let Some(rw) = rewrite_first(c)? {
                    let mut v = terms.clone();
                    v[i].1 = rw.term;
                    return Ok(Some(LocalRewrite {
                        term: CurrentTerm::Sum(v),
                        ..rw
                    }));
                }
            }
        }
        _ => {}
    }
    rewrite_at_node(t)
}

fn rewrite_at_node(t: &CurrentTerm) -> Result<Option<LocalRewrite>, CurrentError> {
    // R1: ddc of a Green chain
    if let CurrentTerm::Ddc(inner) = t {
        if let Some(chain) = as_green_chain(inner) {
            let term = CurrentTerm::Sum(vec![
                (1, CurrentTerm::Delta(chain.divisor())),
                (-1, chain.nu_term()),
            ]);
            return Ok(Some(LocalRewrite {
                rule: "R1-green-equation",
                wavefront_checked: false,
                term,
            }));
        }
    }
    // R2: star of two Green chains
    if let CurrentTerm::Star(l, r) = t {
        if let (Some(cl), Some(cr)) = (as_green_chain(l), as_green_chain(r)) {
            let dirac = CurrentTerm::Delta(cr.divisor());
            check_admissible(&[l, &dirac])?;
            let term = CurrentTerm::Sum(vec![
                (1, CurrentTerm::Wedge(vec![(**l).clone(), dirac])),
                (1, CurrentTerm::Wedge(vec![cl.nu_term(), (**r).clone()])),
            ]);
            return Ok(Some(LocalRewrite {
                rule: "R2-star-expansion",
                wavefront_checked: true,
                term,
            }));
        }
    }
    if let CurrentTerm::Pullback(map, inner) = t {
        // R4: identity translations disappear
        let is_identity = match map {
            MapSym::Translate { tag, .. } => tag == "0",
            MapSym::TranslateProduct { tags, .. } => tags.iter().all(|t| t == "0"),
            _ => false,
        };
        if is_identity {
            return Ok(Some(LocalRewrite {
                rule: "R4-pullback-distribution",
                wavefront_checked: false,
                term: (**inner).clone(),
            }));
        }
        // R4: distribute any pullback over wedge and star
        match &**inner {
            CurrentTerm::Wedge(children) => {
                let term = CurrentTerm::Wedge(
                    children
                        .iter()
                        .map(|c| CurrentTerm::pull(map.clone(), c.clone()))
                        .collect(),
                );
                return Ok(Some(LocalRewrite {
                    rule: "R4-pullback-distribution",
                    wavefront_checked: false,
                    term,
                }));
            }
            CurrentTerm::Star(l, r) => {
                let term = CurrentTerm::star(
                    CurrentTerm::pull(map.clone(), (**l).clone()),
                    CurrentTerm::pull(map.clone(), (**r).clone()),
                );
                return Ok(Some(LocalRewrite {
                    rule: "R4-pullback-distribution",
                    wavefront_checked: false,
                    term,
                }));
            }
            _ => {}
        }
        match map {
            MapSym::TranslateProduct { product, tags } => match &**inner {
                // (s x t)^* q_i^* = q_i^* s_i^*
                CurrentTerm::Pullback(MapSym::Proj { product: p2, factor }, x) if p2 == product => {
                    let tag = tags[*factor].clone();
                    let factor_space = product.factors[*factor].clone();
                    let inner_term = if tag == "0" {
                        (**x).clone()
                    } else {
                        CurrentTerm::pull(
                            MapSym::Translate {
                                space: factor_space,
                                tag,
                            },
                            (**x).clone(),
                        )
                    };
                    let term = CurrentTerm::pull(
                        MapSym::Proj {
                            product: product.clone(),
                            factor: *factor,
                        },
                        inner_term,
                    );
                    return Ok(Some(LocalRewrite {
                        rule: "R4-pullback-distribution",
                        wavefront_checked: false,
                        term,
                    }));
                }
                // pullback of a Dirac current translates its tag
                CurrentTerm::Delta(tag) if tag.space == *product => {
                    let slices = tag
                        .slices
                        .iter()
                        .zip(tags)
                        .map(|(s, step)| translate_slice(s, step))
                        .collect();
                    return Ok(Some(LocalRewrite {
                        rule: "R4-pullback-distribution",
                        wavefront_checked: false,
                        term: CurrentTerm::Delta(DeltaTag::new(product.clone(), slices)),
                    }));
                }
                _ => {}
            },
            MapSym::Translate { space, tag } => match &**inner {
                // R5 before tag bookkeeping: nu is translation invariant
                CurrentTerm::Nu(s) if s == space => {
                    return Ok(Some(LocalRewrite {
                        rule: "R5-nu-invariance",
                        wavefront_checked: false,
                        term: CurrentTerm::Nu(s.clone()),
                    }));
                }
                CurrentTerm::Delta(dt) if dt.space == *space => {
                    let slices = dt.slices.iter().map(|s| translate_slice(s, tag)).collect();
                    return Ok(Some(LocalRewrite {
                        rule: "R4-pullback-distribution",
                        wavefront_checked: false,
                        term: CurrentTerm::Delta(DeltaTag::new(space.clone(), slices)),
                    }));
                }
                // compose consecutive translations
                CurrentTerm::Pullback(MapSym::Translate { space: s2, tag: t2 }, x) if s2 == space => {
                    let term = CurrentTerm::pull(
                        MapSym::Translate {
                            space: space.clone(),
                            tag: compose_tags(t2, tag),
                        },
                        (**x).clone(),
                    );
                    return Ok(Some(LocalRewrite {
                        rule: "R4-pullback-distribution",
                        wavefront_checked: false,
                        term,
                    }));
                }
                _ => {}
            },
            MapSym::Proj { product, factor } => {
                // promote a factor Dirac current to the product
                if let CurrentTerm::Delta(dt) = &**inner {
                    if !dt.space.is_product() && dt.space == product.factors[*factor] {
                        let mut slices = vec![FactorSlice::Full; product.factors.len()];
                        slices[*factor] = dt.slices[0].clone();
                        return Ok(Some(LocalRewrite {
                            rule: "R4-pullback-distribution",
                            wavefront_checked: false,
                            term: CurrentTerm::Delta(DeltaTag::new(product.clone(), slices)),
                        }));
                    }
                }
            }
            MapSym::SliceEmbed { .. } => {}
        }
    }
    // expand-pushforward: slice immersions become pullback ^ Dirac
    if let CurrentTerm::Pushforward(MapSym::SliceEmbed { product, factor, tags }, inner) = t {
        let pulled = CurrentTerm::pull(
            MapSym::Proj {
                product: product.clone(),
                factor: *factor,
            },
            (**inner).clone(),
        );
        let dirac = CurrentTerm::Delta(image_tag(product, *factor, tags));
        check_admissible(&[&pulled, &dirac])?;
        return Ok(Some(LocalRewrite {
            rule: "expand-pushforward",
            wavefront_checked: true,
            term: CurrentTerm::Wedge(vec![pulled, dirac]),
        }));
    }
    Ok(None)
}
