//! The cellular Koszul complex of the real torus with coefficients in a
//! logarithm module, and invariant-factor presentations of its cohomology.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::intmat::{kernel_basis, smith_normal_form, solve_columns, IntMat, Snf};
use super::logmodule::LogModule;
use super::ratmat::RatMat;

/// Lexicographically ordered k-subsets of {0, .., vars-1}.
pub fn subsets(vars: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(out: &mut Vec<Vec<usize>>, current: &mut Vec<usize>, start: usize, vars: usize, k: usize) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..vars {
            current.push(i);
            rec(out, current, i + 1, vars, k);
            current.pop();
        }
    }
    rec(&mut out, &mut current, 0, vars, k);
    out
}

/// C^k = M (x) Lambda^k(Z^{2g}) with differential
/// d(m (x) e_S) = sum_i sign(i, S) (T_i - 1) m (x) e_{S + i}.
#[derive(Debug, Clone)]
pub struct CochainComplex {
    genus: u32,
    module_rank: usize,
    subset_tables: Vec<Vec<Vec<usize>>>,
    differentials: Vec<IntMat>,
}

impl CochainComplex {
    pub fn build(module: &LogModule) -> Self {
        let vars = module.generators();
        let rank = module.rank();
        let subset_tables: Vec<Vec<Vec<usize>>> = (0..=vars).map(|k| subsets(vars, k)).collect();
        let mut differentials = Vec::with_capacity(vars);
        for k in 0..vars {
            let src = &subset_tables[k];
            let dst = &subset_tables[k + 1];
            let mut d = IntMat::zeros(dst.len() * rank, src.len() * rank);
            for (s_idx, s) in src.iter().enumerate() {
                for i in 0..vars {
                    if s.contains(&i) {
                        continue;
                    }
                    let before = s.iter().filter(|&&j| j < i).count();
                    let sign = if before % 2 == 0 { 1 } else { -1 };
                    let mut target = s.clone();
                    target.insert(before, i);
                    let t_idx = dst
                        .iter()
                        .position(|u| *u == target)
                        .expect("target subset present");
                    let op = module.action(i);
                    for col in 0..rank {
                        for row in 0..rank {
                            let mut v = op[(row, col)].clone();
                            if row == col {
                                v -= BigInt::one();
                            }
                            if !v.is_zero() {
                                d[(t_idx * rank + row, s_idx * rank + col)] =
                                    if sign == 1 { v } else { -v };
                            }
                        }
                    }
                }
            }
            differentials.push(d);
        }
        CochainComplex {
            genus: module.genus(),
            module_rank: rank,
            subset_tables,
            differentials,
        }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn top_degree(&self) -> usize {
        2 * self.genus as usize
    }

    pub fn module_rank(&self) -> usize {
        self.module_rank
    }

    pub fn dim(&self, k: usize) -> usize {
        self.subset_tables[k].len() * self.module_rank
    }

    pub fn total_dim(&self) -> usize {
        (0..=self.top_degree()).map(|k| self.dim(k)).sum()
    }

    /// d_k : C^k -> C^{k+1}; None past the top degree.
    pub fn differential(&self, k: usize) -> Option<&IntMat> {
        self.differentials.get(k)
    }

    pub fn verify_d_squared(&self) -> bool {
        for k in 0..self.differentials.len() - 1 {
            if !self.differentials[k + 1].mul(&self.differentials[k]).is_zero() {
                return false;
            }
        }
        true
    }

    /// Promote a module map to the k-cochains (block diagonal over the
    /// exterior basis).
    pub fn module_map_on_cochains(&self, f: &IntMat, k: usize) -> IntMat {
        let blocks = self.subset_tables[k].len();
        let mut out = IntMat::zeros(blocks * f.rows(), blocks * f.cols());
        for b in 0..blocks {
            for i in 0..f.rows() {
                for j in 0..f.cols() {
                    if !f[(i, j)].is_zero() {
                        out[(b * f.rows() + i, b * f.cols() + j)] = f[(i, j)].clone();
                    }
                }
            }
        }
        out
    }

    pub fn cohomology_at(&self, k: usize) -> CohomologyGroup {
        let dim = self.dim(k);
        let kernel = match self.differential(k) {
            Some(d) => kernel_basis(&smith_normal_form(d)),
            None => IntMat::identity(dim),
        };
        let boundary_matrix = if k > 0 {
            Some(self.differentials[k - 1].clone())
        } else {
            None
        };
        CohomologyGroup::from_kernel_and_boundary(k, dim, kernel, boundary_matrix)
    }

    pub fn cohomology(&self) -> Vec<CohomologyGroup> {
        (0..=self.top_degree()).map(|k| self.cohomology_at(k)).collect()
    }
}

/// Invariant-factor presentation of one cohomology group, with enough of
/// the change-of-basis data to compute coordinates of arbitrary cocycles
/// and maps induced by chain maps.
#[derive(Debug, Clone)]
pub struct CohomologyGroup {
    pub degree: usize,
    pub free_rank: usize,
    /// Nontrivial invariant factors of the torsion subgroup.
    pub torsion: Vec<BigInt>,
    dim: usize,
    kernel: IntMat,
    kernel_snf: Snf,
    /// Coordinates on the kernel: y' = rep_change * (kernel coords); the
    /// first `bound_rank` coordinates are cyclic of orders d_1 | d_2 | ...,
    /// the rest are free.
    rep_change: IntMat,
    rep_change_inv: IntMat,
    bound_rank: usize,
    invariant_factors: Vec<BigInt>,
    boundary_matrix: Option<IntMat>,
    boundary_snf: Option<Snf>,
    /// Cocycle representatives of the free classes, as columns.
    pub representatives: IntMat,
}

impl CohomologyGroup {
    fn from_kernel_and_boundary(
        degree: usize,
        dim: usize,
        kernel: IntMat,
        boundary_matrix: Option<IntMat>,
    ) -> Self {
        let z = kernel.cols();
        let kernel_snf = smith_normal_form(&kernel);
        // boundaries in kernel coordinates
        let y = match &boundary_matrix {
            Some(b) => solve_columns(&kernel_snf, b).expect("boundaries are cocycles"),
            None => IntMat::zeros(z, 0),
        };
        let y_snf = smith_normal_form(&y);
        let bound_rank = y_snf.rank;
        let invariant_factors: Vec<BigInt> = (0..bound_rank).map(|i| y_snf.d[(i, i)].clone()).collect();
        let torsion: Vec<BigInt> = invariant_factors
            .iter()
            .filter(|e| **e > BigInt::one())
            .cloned()
            .collect();
        let free_rank = z - bound_rank;
        // coordinates y' = p * (kernel coords), boundaries = span(d_i e_i)
        let rep_change = y_snf.p.clone();
        let rep_change_inv = y_snf.p_inv.clone();
        let mut representatives = IntMat::zeros(dim, free_rank);
        for j in 0..free_rank {
            let coords = rep_change_inv.column(bound_rank + j);
            let cocycle = kernel.mul_vec(&coords);
            for i in 0..dim {
                representatives[(i, j)] = cocycle[i].clone();
            }
        }
        let boundary_snf = boundary_matrix.as_ref().map(smith_normal_form);
        CohomologyGroup {
            degree,
            free_rank,
            torsion,
            dim,
            kernel,
            kernel_snf,
            rep_change,
            rep_change_inv,
            bound_rank,
            invariant_factors,
            boundary_matrix,
            boundary_snf,
            representatives,
        }
    }

    pub fn dim_cochains(&self) -> usize {
        self.dim
    }

    /// Integral coordinates of cocycles (columns) in the presentation:
    /// first the cyclic block, then the free block. None if some column is
    /// not a cocycle.
    pub fn class_coords(&self, cocycles: &IntMat) -> Option<IntMat> {
        let in_kernel = solve_columns(&self.kernel_snf, cocycles)?;
        Some(self.rep_change.mul(&in_kernel))
    }

    /// True iff every column is an integral coboundary.
    pub fn is_zero_class(&self, cocycles: &IntMat) -> bool {
        match (&self.boundary_snf, cocycles.is_zero()) {
            (_, true) => true,
            (Some(snf), _) => solve_columns(snf, cocycles).is_some(),
            (None, false) => false,
        }
    }

    /// Representatives of every nontrivial class generator: the torsion
    /// generators (invariant factor > 1) followed by the free generators.
    pub fn generator_representatives(&self) -> IntMat {
        let mut cols = Vec::new();
        for i in 0..self.bound_rank {
            if self.invariant_factors[i] > BigInt::one() {
                cols.push(self.kernel.mul_vec(&self.rep_change_inv.column(i)));
            }
        }
        for j in 0..self.free_rank {
            cols.push(self.kernel.mul_vec(&self.rep_change_inv.column(self.bound_rank + j)));
        }
        IntMat::from_columns(self.dim, cols)
    }

    /// Rational coordinates of rational cocycles (columns) on the free
    /// basis, solving against representatives plus coboundaries.
    pub fn rational_coords(&self, cocycles: &RatMat) -> Option<RatMat> {
        let reps = RatMat::from_int(&self.representatives);
        let system = match &self.boundary_matrix {
            Some(b) => reps.hstack(&RatMat::from_int(b)),
            None => reps,
        };
        let sol = system.solve(cocycles)?;
        let mut out = RatMat::zeros(self.free_rank, cocycles.cols());
        for i in 0..self.free_rank {
            for j in 0..cocycles.cols() {
                out[(i, j)] = sol[(i, j)].clone();
            }
        }
        Some(out)
    }
}

/// Matrix of the map induced on free parts by a chain map `f` in one
/// degree; None if some image is not a cocycle of the target.
pub fn induced_map_free(
    source: &CohomologyGroup,
    target: &CohomologyGroup,
    f: &IntMat,
) -> Option<RatMat> {
    let images = RatMat::from_int(f).mul(&RatMat::from_int(&source.representatives));
    target.rational_coords(&images)
}

/// True iff the induced map vanishes integrally: the image of every class
/// generator (torsion included) is an integral coboundary.
pub fn induced_map_is_zero(
    source: &CohomologyGroup,
    target: &CohomologyGroup,
    f: &IntMat,
) -> bool {
    let generators = source.generator_representatives();
    if generators.cols() == 0 {
        return true;
    }
    target.is_zero_class(&f.mul(&generators))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn betti(complex: &CochainComplex) -> Vec<usize> {
        complex.cohomology().iter().map(|g| g.free_rank).collect()
    }

    #[test]
    fn d_squared_vanishes() {
        for (g, n) in [(1u32, 0u32), (1, 2), (1, 3), (2, 0), (2, 2)] {
            let complex = CochainComplex::build(&LogModule::build(g, n));
            assert!(complex.verify_d_squared(), "d^2 != 0 for (g, n) = ({g}, {n})");
        }
    }

    #[test]
    fn trivial_coefficients_give_torus_betti_numbers() {
        let c1 = CochainComplex::build(&LogModule::build(1, 0));
        assert_eq!(betti(&c1), vec![1, 2, 1]);
        let c2 = CochainComplex::build(&LogModule::build(2, 0));
        assert_eq!(betti(&c2), vec![1, 4, 6, 4, 1]);
        for g in c1.cohomology() {
            assert!(g.torsion.is_empty());
        }
    }

    #[test]
    fn log_coefficients_level_one() {
        // H^0 = invariants = the degree-1 monomials, rank 2; chi = 0
        let complex = CochainComplex::build(&LogModule::build(1, 1));
        let b = betti(&complex);
        assert_eq!(b, vec![2, 3, 1]);
        assert_eq!(b[0] as i64 - b[1] as i64 + b[2] as i64, 0);
    }

    #[test]
    fn euler_characteristic_vanishes() {
        for (g, n) in [(1u32, 1u32), (1, 2), (1, 3), (2, 1), (2, 2)] {
            let complex = CochainComplex::build(&LogModule::build(g, n));
            let chi: i64 = complex
                .cohomology()
                .iter()
                .enumerate()
                .map(|(k, grp)| {
                    let sign = if k % 2 == 0 { 1 } else { -1 };
                    sign * grp.free_rank as i64
                })
                .sum();
            assert_eq!(chi, 0, "chi != 0 for (g, n) = ({g}, {n})");
        }
    }

    #[test]
    fn top_cohomology_is_coinvariants_z() {
        for (g, n) in [(1u32, 0u32), (1, 1), (1, 3), (2, 1)] {
            let complex = CochainComplex::build(&LogModule::build(g, n));
            let top = complex.cohomology_at(complex.top_degree());
            assert_eq!(top.free_rank, 1, "(g, n) = ({g}, {n})");
            assert!(top.torsion.is_empty());
        }
    }

    #[test]
    fn transitions_vanish_below_the_top_and_are_iso_on_top() {
        for (g, nmax) in [(1u32, 3u32), (2, 2)] {
            let mut module = LogModule::build(g, nmax);
            for _ in 0..nmax {
                let (lower, phi) = module.transition_to_lower();
                let upper_complex = CochainComplex::build(&module);
                let lower_complex = CochainComplex::build(&lower);
                let top = upper_complex.top_degree();
                for k in 0..=top {
                    let f = upper_complex.module_map_on_cochains(&phi, k);
                    let src = upper_complex.cohomology_at(k);
                    let dst = lower_complex.cohomology_at(k);
                    if k < top {
                        assert!(
                            induced_map_is_zero(&src, &dst, &f),
                            "transition not zero on H^{k}, (g, n) = ({g}, {})",
                            module.level()
                        );
                    } else {
                        // an isomorphism on the top group, and the identity
                        // in the canonical augmentation coordinates
                        let m = induced_map_free(&src, &dst, &f).expect("images are cocycles");
                        assert_eq!((m.rows(), m.cols()), (1, 1));
                        let unit = num_rational::BigRational::one();
                        assert!(m[(0, 0)] == unit || m[(0, 0)] == -unit.clone());
                        let aug_src = module.augmentation().mul(&src.representatives);
                        let aug_dst = lower.augmentation().mul(&f.mul(&src.representatives));
                        assert_eq!(aug_src, aug_dst, "transition must preserve the augmentation class");
                        assert!(
                            aug_src[(0, 0)] == BigInt::one() || aug_src[(0, 0)] == -BigInt::one(),
                            "top representative must generate the coinvariants"
                        );
                    }
                }
                module = lower;
            }
        }
    }

    #[test]
    fn class_coords_roundtrip() {
        let complex = CochainComplex::build(&LogModule::build(1, 1));
        let h1 = complex.cohomology_at(1);
        // each representative has unit coordinates in its own presentation
        let coords = h1.class_coords(&h1.representatives).unwrap();
        for j in 0..h1.free_rank {
            for i in 0..h1.free_rank {
                let expected = if i == j { BigInt::one() } else { BigInt::zero() };
                assert_eq!(coords[(h1.bound_rank + i, j)], expected);
            }
        }
        // a coboundary has zero class
        if let Some(d0) = complex.differential(0) {
            let img = d0.column(0);
            let img_m = IntMat::from_columns(d0.rows(), vec![img]);
            assert!(h1.is_zero_class(&img_m));
        }
    }
}
