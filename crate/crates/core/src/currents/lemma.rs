//! The product formula for the translation difference of the canonical
//! current on A x B, re-derived mechanically:
//!
//! `(sigma x tau)^* g_{AxB} - g_{AxB}`, with `g_{AxB}` expanded by the
//! fibre-product rule as `q_A^* g_A * q_B^* g_B`, rewrites to
//!
//! `(q_A^* sigma^* g_A - q_A^* g_A) ^ delta_{A x tau}
//!  + (q_B^* tau^* g_B - q_B^* g_B) ^ delta_{0 x B}`.

use super::*;

/// Registered spaces, sections and projections for a two-factor product.
#[derive(Debug, Clone)]
pub struct ProductSetup {
    pub factor_a: SpaceSym,
    pub factor_b: SpaceSym,
    pub product: SpaceSym,
    pub sigma: String,
    pub tau: String,
}

/// Registers A and B of the given relative dimensions with torsion section
/// tags sigma on A and tau on B ("0" gives the degenerate zero section).
pub fn product_setup(dim_a: u32, dim_b: u32, sigma: &str, tau: &str) -> ProductSetup {
    let factor_a = SpaceSym::atomic("A", dim_a);
    let factor_b = SpaceSym::atomic("B", dim_b);
    let product = SpaceSym::product(vec![factor_a.clone(), factor_b.clone()]);
    ProductSetup {
        factor_a,
        factor_b,
        product,
        sigma: sigma.to_string(),
        tau: tau.to_string(),
    }
}

impl ProductSetup {
    pub fn proj_a(&self) -> MapSym {
        MapSym::Proj {
            product: self.product.clone(),
            factor: 0,
        }
    }

    pub fn proj_b(&self) -> MapSym {
        MapSym::Proj {
            product: self.product.clone(),
            factor: 1,
        }
    }

    fn translate_a(&self, tag: &str) -> MapSym {
        MapSym::Translate {
            space: self.factor_a.clone(),
            tag: tag.to_string(),
        }
    }

    fn translate_b(&self, tag: &str) -> MapSym {
        MapSym::Translate {
            space: self.factor_b.clone(),
            tag: tag.to_string(),
        }
    }

    /// q_A^* g_A, optionally translated on the factor first.
    pub fn green_a(&self, translated: bool) -> CurrentTerm {
        let mut g = CurrentTerm::Green(self.factor_a.clone());
        if translated && self.sigma != "0" {
            g = CurrentTerm::pull(self.translate_a(&self.sigma), g);
        }
        CurrentTerm::pull(self.proj_a(), g)
    }

    pub fn green_b(&self, translated: bool) -> CurrentTerm {
        let mut g = CurrentTerm::Green(self.factor_b.clone());
        if translated && self.tau != "0" {
            g = CurrentTerm::pull(self.translate_b(&self.tau), g);
        }
        CurrentTerm::pull(self.proj_b(), g)
    }

    pub fn nu_a(&self) -> CurrentTerm {
        CurrentTerm::pull(self.proj_a(), CurrentTerm::Nu(self.factor_a.clone()))
    }

    /// delta_{A x t} for a torsion tag on B ("0" for the zero section).
    pub fn delta_a_cross(&self, tag: &str) -> CurrentTerm {
        CurrentTerm::Delta(DeltaTag::new(
            self.product.clone(),
            vec![
                FactorSlice::Full,
                FactorSlice::Translated(tag.to_string()).canonical(),
            ],
        ))
    }

    /// delta_{s x B} for a torsion tag on A.
    pub fn delta_cross_b(&self, tag: &str) -> CurrentTerm {
        CurrentTerm::Delta(DeltaTag::new(
            self.product.clone(),
            vec![
                FactorSlice::Translated(tag.to_string()).canonical(),
                FactorSlice::Full,
            ],
        ))
    }

    /// The canonical current of the product expanded by the fibre-product
    /// rule: q_A^* g_A * q_B^* g_B.
    pub fn green_product(&self) -> CurrentTerm {
        CurrentTerm::star(self.green_a(false), self.green_b(false))
    }

    pub fn translate_product(&self) -> MapSym {
        MapSym::TranslateProduct {
            product: self.product.clone(),
            tags: vec![self.sigma.clone(), self.tau.clone()],
        }
    }
}

/// `(sigma x tau)^* (q_A^* g_A * q_B^* g_B) - q_A^* g_A * q_B^* g_B`.
pub fn green_lemma_lhs(setup: &ProductSetup) -> CurrentTerm {
    let g = setup.green_product();
    CurrentTerm::diff(CurrentTerm::pull(setup.translate_product(), g.clone()), g)
}

/// The final display:
/// `(q_A^* s^* g_A - q_A^* g_A) ^ delta_{A x tau} + (q_B^* t^* g_B - q_B^* g_B) ^ delta_{0 x B}`.
pub fn green_lemma_rhs_display(setup: &ProductSetup) -> CurrentTerm {
    let x_part = CurrentTerm::Wedge(vec![
        CurrentTerm::diff(setup.green_a(true), setup.green_a(false)),
        setup.delta_a_cross(&setup.tau),
    ]);
    let y_part = CurrentTerm::Wedge(vec![
        CurrentTerm::diff(setup.green_b(true), setup.green_b(false)),
        setup.delta_cross_b("0"),
    ]);
    CurrentTerm::Sum(vec![(1, x_part), (1, y_part)])
}

/// The statement form `(| Id x tau |)_* x + (0 x Id)_* y` with
/// `x = sigma^* g_A - g_A` and `y = tau^* g_B - g_B` pushed forward along
/// the slice immersions.
pub fn green_lemma_rhs_statement(setup: &ProductSetup) -> CurrentTerm {
    let x = CurrentTerm::diff(
        if setup.sigma == "0" {
            CurrentTerm::Green(setup.factor_a.clone())
        } else {
            CurrentTerm::pull(setup.translate_a(&setup.sigma), CurrentTerm::Green(setup.factor_a.clone()))
        },
        CurrentTerm::Green(setup.factor_a.clone()),
    );
    let y = CurrentTerm::diff(
        if setup.tau == "0" {
            CurrentTerm::Green(setup.factor_b.clone())
        } else {
            CurrentTerm::pull(setup.translate_b(&setup.tau), CurrentTerm::Green(setup.factor_b.clone()))
        },
        CurrentTerm::Green(setup.factor_b.clone()),
    );
    let embed_a = MapSym::SliceEmbed {
        product: setup.product.clone(),
        factor: 0,
        tags: vec![setup.tau.clone()],
    };
    let embed_b = MapSym::SliceEmbed {
        product: setup.product.clone(),
        factor: 1,
        tags: vec!["0".to_string()],
    };
    CurrentTerm::Sum(vec![
        (1, CurrentTerm::push(embed_a, x)),
        (1, CurrentTerm::push(embed_b, y)),
    ])
}

/// The opening computation of the derivation, which normalizes to zero:
/// `q_A^* g_A ^ (delta_{A x 0} - delta_{A x tau})
///  + (q_B^* t^* g_B - q_B^* g_B) ^ (delta_{0 x B} - q_A^* nu_A)`.
pub fn green_lemma_first_display(setup: &ProductSetup) -> CurrentTerm {
    let first = CurrentTerm::Wedge(vec![
        setup.green_a(false),
        CurrentTerm::diff(setup.delta_a_cross("0"), setup.delta_a_cross(&setup.tau)),
    ]);
    let second = CurrentTerm::Wedge(vec![
        CurrentTerm::diff(setup.green_b(true), setup.green_b(false)),
        CurrentTerm::diff(setup.delta_cross_b("0"), setup.nu_a()),
    ]);
    CurrentTerm::Sum(vec![(1, first), (1, second)])
}

/// Rewrites the translation difference of the product current to the final
/// display and returns the complete derivation trace.
pub fn verify_green_lemma(dim_a: u32, dim_b: u32) -> Result<DerivationTrace, CurrentError> {
    let setup = product_setup(dim_a, dim_b, "sigma", "tau");
    let engine = Engine::new();
    let lhs = green_lemma_lhs(&setup);
    let rhs = green_lemma_rhs_display(&setup);
    // trace the constructive rewriting of the difference to zero; the steps
    // replay the proof: pullback distribution, star expansion, nu
    // invariance, then the integration-by-parts exchange
    let (normal, trace) = engine.normalize_traced(&CurrentTerm::diff(lhs, rhs))?;
    if !normal.is_zero() {
        let rhs_normal = engine.normalize(&green_lemma_rhs_display(&setup))?;
        return Err(CurrentError::DerivationFailure {
            lhs_normal: normal.sexpr(),
            rhs_normal: rhs_normal.sexpr(),
        });
    }
    Ok(trace)
}

/// Random well-typed sums over the derivation's atom vocabulary, with
/// occasional pullback/ddc/star wrappers; used by the idempotence and
/// equivalence-axiom corpora.
pub fn random_corpus_term(rng: &mut rand_chacha::ChaCha8Rng, setup: &ProductSetup) -> CurrentTerm {
    use rand::Rng;
    let atoms = [
        setup.green_a(false),
        setup.green_a(true),
        setup.green_b(false),
        setup.green_b(true),
        setup.nu_a(),
        CurrentTerm::pull(setup.proj_b(), CurrentTerm::Nu(setup.factor_b.clone())),
        setup.delta_a_cross("0"),
        setup.delta_a_cross("tau"),
        setup.delta_cross_b("0"),
        setup.delta_cross_b("sigma"),
    ];
    let mut summands = Vec::new();
    for _ in 0..rng.gen_range(1..=4) {
        let coeff = *[-3i64, -2, -1, 1, 2, 3].get(rng.gen_range(0..6)).unwrap();
        let a = atoms[rng.gen_range(0..atoms.len())].clone();
        let term = match rng.gen_range(0..6) {
            0 => CurrentTerm::pull(setup.translate_product(), a),
            1 => {
                // wedge with a compatible partner from the other factor
                let b = atoms[rng.gen_range(0..atoms.len())].clone();
                let wedge = CurrentTerm::Wedge(vec![a.clone(), b]);
                if Engine::new().normalize(&wedge).is_ok() && bidegree(&wedge).is_ok() {
                    wedge
                } else {
                    a
                }
            }
            2 => CurrentTerm::ddc(a),
            3 => CurrentTerm::star(
                setup.green_a(rng.gen_bool(0.5)),
                setup.green_b(rng.gen_bool(0.5)),
            ),
            _ => a,
        };
        summands.push((coeff, term));
    }
    CurrentTerm::Sum(summands)
}

/// Runs the seeded idempotence and equivalence-axiom corpus; draws whose
/// summands carry mismatched bidegrees are skipped, not counted.
pub fn corpus_invariants_hold(seed: u64, count: usize) -> bool {
    use rand::SeedableRng;
    let setup = product_setup(1, 1, "sigma", "tau");
    let engine = Engine::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < count {
        let t = random_corpus_term(&mut rng, &setup);
        let Ok(n1) = engine.normalize(&t) else { continue };
        let n2 = match engine.normalize(&n1) {
            Ok(n2) => n2,
            Err(_) => return false,
        };
        if n1 != n2 {
            return false;
        }
        let padded = CurrentTerm::Sum(vec![(1, t.clone()), (1, CurrentTerm::Zero)]);
        let ok = engine.equivalent(&t, &t).unwrap_or(false)
            && engine.equivalent(&t, &padded).unwrap_or(false)
            && engine.equivalent(&t, &n1).unwrap_or(false)
            && engine.equivalent(&n1, &t).unwrap_or(false);
        if !ok {
            return false;
        }
        checked += 1;
    }
    true
}
