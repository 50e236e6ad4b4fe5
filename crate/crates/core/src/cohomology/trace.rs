//! Trace operators: restriction to the degree-a covering followed by the
//! transfer, realized on Koszul cochains as the partial norm
//! `m (x) e_S -> (prod_{i not in S} (1 + T_i + .. + T_i^{a-1})) phi_a(m) (x) e_S`,
//! together with their weight (generalized eigenspace) decompositions and
//! the assembled action on the punctured presentation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::intmat::IntMat;
use super::koszul::{induced_map_free, subsets, CochainComplex, CohomologyGroup};
use super::logmodule::LogModule;
use super::punctured::PuncturedCohomology;
use super::ratmat::RatMat;
use super::CohomologyError;

/// Partial norm element `1 + T_i + ... + T_i^{a-1}` of one generator.
pub fn norm_element(module: &LogModule, i: usize, a: u32) -> IntMat {
    let rank = module.rank();
    let t = module.action(i);
    let mut power = IntMat::identity(rank);
    let mut sum = IntMat::zeros(rank, rank);
    for _ in 0..a {
        for r in 0..rank {
            for c in 0..rank {
                let v = power[(r, c)].clone();
                sum[(r, c)] += v;
            }
        }
        power = t.mul(&power);
    }
    sum
}

/// The trace on k-cochains: per exterior basis vector e_S, the module map
/// is the product of the partial norms over the generators outside S,
/// composed with the coefficient change phi_a.
pub fn trace_cochain_matrix(module: &LogModule, a: u32, k: usize) -> IntMat {
    let vars = module.generators();
    let rank = module.rank();
    let phi = module.phi_a(a);
    let norms: Vec<IntMat> = (0..vars).map(|i| norm_element(module, i, a)).collect();
    let table = subsets(vars, k);
    let mut out = IntMat::zeros(table.len() * rank, table.len() * rank);
    for (s_idx, s) in table.iter().enumerate() {
        let mut block = phi.clone();
        for (i, norm) in norms.iter().enumerate() {
            if !s.contains(&i) {
                block = norm.mul(&block);
            }
        }
        for r in 0..rank {
            for c in 0..rank {
                if !block[(r, c)].is_zero() {
                    out[(s_idx * rank + r, s_idx * rank + c)] = block[(r, c)].clone();
                }
            }
        }
    }
    out
}

/// The trace is a chain map: d_k tr_k = tr_{k+1} d_k in every degree.
pub fn verify_trace_chain_map(module: &LogModule, complex: &CochainComplex, a: u32) -> bool {
    for k in 0..complex.top_degree() {
        let d = complex.differential(k).unwrap();
        let tr_k = trace_cochain_matrix(module, a, k);
        let tr_k1 = trace_cochain_matrix(module, a, k + 1);
        if d.mul(&tr_k) != tr_k1.mul(d) {
            return false;
        }
    }
    true
}

/// Induced trace matrix on the free part of H^k.
pub fn trace_on_cohomology(
    module: &LogModule,
    group: &CohomologyGroup,
    a: u32,
    k: usize,
) -> RatMat {
    let f = trace_cochain_matrix(module, a, k);
    induced_map_free(group, group, &f).expect("trace maps cocycles to cocycles")
}

/// a^r as an exact rational.
pub fn weight_eigenvalue(a: u32, r: u32) -> BigRational {
    BigRational::from(BigInt::from(a).pow(r))
}

/// Basis of the generalized eigenspace of weight r, i.e. of eigenvalue a^r.
pub fn weight_eigenspace(t: &RatMat, a: u32, r: u32) -> RatMat {
    t.generalized_eigenspace(&weight_eigenvalue(a, r))
}

/// Weight decomposition 0..max_weight; the spaces are returned in weight
/// order and must sum to the full dimension to count as a decomposition.
pub fn weight_decomposition(t: &RatMat, a: u32, max_weight: u32) -> Vec<RatMat> {
    (0..=max_weight).map(|r| weight_eigenspace(t, a, r)).collect()
}

fn mod_inverse(a: u32, n: u32) -> Option<u32> {
    if n == 1 {
        return Some(0);
    }
    (1..n).find(|x| (a as u64 * *x as u64) % n as u64 == 1)
}

/// Permutation of the punctures x -> a^{-1} x, as a matrix on the stalk
/// space: (P phi)_x = phi_{a^{-1} x} blockwise over module coordinates.
pub fn stalk_permutation(p: &PuncturedCohomology, a: u32) -> Result<IntMat, CohomologyError> {
    let n = p.order();
    let a_inv = mod_inverse(a % n.max(1), n).ok_or(CohomologyError::GcdViolation { a, n })?;
    let rank = p.module().rank();
    let mut out = IntMat::zeros(p.stalk_rank(), p.stalk_rank());
    for x in 0..p.stalk_count() {
        let coords = p.puncture_coords(x);
        let image: Vec<u32> = coords.iter().map(|&c| (c * a_inv) % n).collect();
        let y = p.puncture_index(&image);
        for m in 0..rank {
            out[(x * rank + m, y * rank + m)] = BigInt::one();
        }
    }
    Ok(out)
}

/// The assembled trace on the punctured presentation (torus block followed
/// by the stalk block). Supported for level-0 coefficients, where the
/// straight-path stalk identifications carry no monodromy twist and the
/// cone-level trace is block compatible on the nose.
pub fn assembled_punctured_trace(
    p: &PuncturedCohomology,
    a: u32,
) -> Result<RatMat, CohomologyError> {
    let n = p.order();
    if mod_inverse(a % n.max(1), n).is_none() {
        return Err(CohomologyError::GcdViolation { a, n });
    }
    if p.module().level() != 0 {
        return Err(CohomologyError::UnsupportedLevel {
            level: p.module().level(),
        });
    }
    // with level-0 coefficients the kernel lifts vanish, so the stalk and
    // torus blocks do not couple
    assert!(p.stalk_lifts().is_zero());
    let top = p.complex().top_degree();
    let torus_block = trace_on_cohomology(p.module(), p.torus_part(), a, top - 1);
    let perm = RatMat::from_int(&stalk_permutation(p, a)?);
    let kernel = RatMat::from_int(p.kernel());
    let stalk_block = kernel
        .solve(&perm.mul(&kernel))
        .expect("the permutation preserves the augmentation kernel");
    let t_rank = p.torus_part().free_rank;
    let k_rank = p.kernel().cols();
    let mut out = RatMat::zeros(t_rank + k_rank, t_rank + k_rank);
    for i in 0..t_rank {
        for j in 0..t_rank {
            out[(i, j)] = torus_block[(i, j)].clone();
        }
    }
    for i in 0..k_rank {
        for j in 0..k_rank {
            out[(t_rank + i, t_rank + j)] = stalk_block[(i, j)].clone();
        }
    }
    Ok(out)
}

/// The unique weight-0 class with the given residue datum, in presentation
/// coordinates: solved inside the generalized eigenspace of eigenvalue 1 of
/// the assembled trace for the normalizing parameter `a0`.
pub fn weight_zero_polylog(
    p: &PuncturedCohomology,
    a0: u32,
    phi: &[i64],
) -> Result<RatMat, CohomologyError> {
    let t = assembled_punctured_trace(p, a0)?;
    let w0 = weight_eigenspace(&t, a0, 0);
    let residues = p.residue_matrix().mul(&w0);
    let target = RatMat::from_int(&p.stalk_vector(phi));
    let gamma = residues.solve(&target).ok_or_else(|| {
        CohomologyError::ExactnessFailure(
            "residue datum is not realized in the weight-0 eigenspace".into(),
        )
    })?;
    Ok(w0.mul(&gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_is_a_chain_map() {
        for (g, n, a) in [(1u32, 0u32, 2u32), (1, 1, 2), (1, 2, 3), (2, 1, 2)] {
            let module = LogModule::build(g, n);
            let complex = CochainComplex::build(&module);
            assert!(
                verify_trace_chain_map(&module, &complex, a),
                "trace not a chain map for ({g},{n},{a})"
            );
        }
    }

    #[test]
    fn scalar_action_on_trivial_coefficients() {
        // tr_[a] = a^{2g-k} on H^k(X, Q)
        for g in [1u32, 2] {
            let module = LogModule::build(g, 0);
            let complex = CochainComplex::build(&module);
            for a in [2u32, 3] {
                for k in 0..=complex.top_degree() {
                    let group = complex.cohomology_at(k);
                    let t = trace_on_cohomology(&module, &group, a, k);
                    let expected = RatMat::identity(group.free_rank)
                        .scale(&weight_eigenvalue(a, (2 * g) as u32 - k as u32));
                    assert_eq!(t, expected, "(g,k,a) = ({g},{k},{a})");
                }
            }
        }
    }

    #[test]
    fn traces_commute_on_log_cohomology() {
        let module = LogModule::build(1, 2);
        let complex = CochainComplex::build(&module);
        for k in 0..=complex.top_degree() {
            let group = complex.cohomology_at(k);
            let t3 = trace_on_cohomology(&module, &group, 3, k);
            let t5 = trace_on_cohomology(&module, &group, 5, k);
            assert_eq!(t3.mul(&t5), t5.mul(&t3), "traces do not commute on H^{k}");
        }
    }

    #[test]
    fn weight_decomposition_of_torus_cohomology() {
        // the total cohomology splits into weights r = 0..2g of dimension
        // C(2g, 2g - r), independently of a in {2, 3, 5}
        for g in [1u32, 2] {
            let module = LogModule::build(g, 0);
            let complex = CochainComplex::build(&module);
            let top = complex.top_degree();
            let total: usize = (0..=top)
                .map(|k| complex.cohomology_at(k).free_rank)
                .sum();
            // block trace on the direct sum of all degrees
            let mut blocks: Vec<RatMat> = Vec::new();
            for a in [2u32, 3, 5] {
                let mut t = RatMat::zeros(total, total);
                let mut offset = 0;
                for k in 0..=top {
                    let group = complex.cohomology_at(k);
                    let b = trace_on_cohomology(&module, &group, a, k);
                    for i in 0..group.free_rank {
                        for j in 0..group.free_rank {
                            t[(offset + i, offset + j)] = b[(i, j)].clone();
                        }
                    }
                    offset += group.free_rank;
                }
                let spaces = weight_decomposition(&t, a, 2 * g);
                let dims: Vec<usize> = spaces.iter().map(|s| s.cols()).collect();
                let expected: Vec<usize> = (0..=2 * g)
                    .map(|r| num_integer::binomial(2 * g as u64, (2 * g - r) as u64) as usize)
                    .collect();
                assert_eq!(dims, expected, "(g, a) = ({g}, {a})");
                assert_eq!(dims.iter().sum::<usize>(), total);
                blocks.push(t);
                // the r-th space is independent of a: compare with a = 2
                if a != 2 {
                    for r in 0..=2 * g {
                        let s_a = weight_eigenspace(blocks.last().unwrap(), a, r);
                        let s_2 = weight_eigenspace(&blocks[0], 2, r);
                        assert!(RatMat::span_equal(&s_a, &s_2), "weight {r} depends on a");
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_trace_blocks_and_residue_equivariance() {
        let module = LogModule::build(1, 0);
        let p = PuncturedCohomology::build(&module, 2).unwrap();
        for a in [3u32, 5] {
            let t = assembled_punctured_trace(&p, a).unwrap();
            // a = 1 (mod N): the puncture permutation is the identity
            let perm_int = stalk_permutation(&p, a).unwrap();
            assert_eq!(perm_int, super::super::intmat::IntMat::identity(p.stalk_rank()));
            // residue equivariance: Res o tr = P o Res as matrices
            let res = p.residue_matrix();
            let perm = RatMat::from_int(&perm_int);
            assert_eq!(res.mul(&t), perm.mul(&res));
        }
        // a = 2 (mod 3) genuinely permutes the 3-torsion punctures
        let p3 = PuncturedCohomology::build(&module, 3).unwrap();
        let perm3 = stalk_permutation(&p3, 2).unwrap();
        assert_ne!(perm3, super::super::intmat::IntMat::identity(p3.stalk_rank()));
        // trace parameters must be invertible mod N
        assert!(matches!(
            assembled_punctured_trace(&p, 2),
            Err(CohomologyError::GcdViolation { .. })
        ));
        // traces commute on the assembled group: (a, b) = (3, 5), N = 2
        let t3 = assembled_punctured_trace(&p, 3).unwrap();
        let t5 = assembled_punctured_trace(&p, 5).unwrap();
        assert_eq!(t3.mul(&t5), t5.mul(&t3));
    }

    #[test]
    fn weight_zero_eigenspace_of_punctured_group() {
        // a = 1 (mod N): the stalk block is the identity, the torus block
        // has eigenvalue a, so weight 0 has dimension N^{2g} - 1 and the
        // residue restricted to it is bijective
        for (n, a) in [(2u32, 3u32), (3, 4)] {
            let module = LogModule::build(1, 0);
            let p = PuncturedCohomology::build(&module, n).unwrap();
            let t = assembled_punctured_trace(&p, a).unwrap();
            let w0 = weight_eigenspace(&t, a, 0);
            assert_eq!(w0.cols(), (n * n - 1) as usize);
            let res_on_w0 = p.residue_matrix().mul(&w0);
            assert_eq!(res_on_w0.rank(), (n * n - 1) as usize);
        }
    }

    #[test]
    fn higher_level_assembled_trace_is_refused() {
        let module = LogModule::build(1, 1);
        let p = PuncturedCohomology::build(&module, 2).unwrap();
        assert!(matches!(
            assembled_punctured_trace(&p, 3),
            Err(CohomologyError::UnsupportedLevel { .. })
        ));
    }

    #[test]
    fn norm_compatibility_of_the_polylog() {
        // tr_[a] pol_phi = pol_{[a] phi}; for a = 1 (mod N) the class is
        // fixed because the permutation is trivial
        let module = LogModule::build(1, 0);
        for (n, a) in [(2u32, 3u32), (3, 4), (3, 2)] {
            let p = PuncturedCohomology::build(&module, n).unwrap();
            let count = p.stalk_count() - 1;
            let phi: Vec<i64> = (0..count as i64).map(|i| i + 1).collect();
            let a0 = n + 1;
            let pol = weight_zero_polylog(&p, a0, &phi).unwrap();
            let t = assembled_punctured_trace(&p, a).unwrap();
            let lhs = t.mul(&pol);
            // permuted datum: ([a] phi)(x) = phi(a^{-1} x)
            let a_inv = mod_inverse(a % n, n).unwrap();
            let mut permuted = vec![0i64; count];
            for x in 1..p.stalk_count() {
                let coords = p.puncture_coords(x);
                let image: Vec<u32> = coords.iter().map(|&c| (c * a_inv) % n).collect();
                let y = p.puncture_index(&image);
                permuted[x - 1] = phi[y - 1];
            }
            let rhs = weight_zero_polylog(&p, a0, &permuted).unwrap();
            assert_eq!(lhs, rhs, "norm compatibility failed for (N, a) = ({n}, {a})");
            if a % n == 1 {
                assert_eq!(lhs, pol, "class must be fixed for a = 1 (mod N)");
            }
        }
    }

    #[test]
    fn weight_zero_polylog_has_expected_residue() {
        let module = LogModule::build(1, 0);
        let p = PuncturedCohomology::build(&module, 2).unwrap();
        let pol = weight_zero_polylog(&p, 3, &[1, 1, 1]).unwrap();
        let res = p.residue_matrix().mul(&pol);
        let expected = RatMat::from_int(&p.stalk_vector(&[1, 1, 1]));
        assert_eq!(res, expected);
        assert!(!pol.is_zero());
        // zero datum gives the zero class
        let zero = weight_zero_polylog(&p, 3, &[0, 0, 0]).unwrap();
        assert!(zero.is_zero());
    }
}
