//! Cohomology of the torus punctured at its N-torsion points, assembled
//! from the localization data: the stalk sum at the punctures maps to the
//! top cohomology (coinvariants) through straight-path trivialization
//! followed by the augmentation, and the degree 2g-1 group of the
//! complement is presented as (torus part) + (kernel of that map), with
//! lifted cochains witnessing every kernel vector as a residue.

use num_bigint::BigInt;
use num_traits::One;

use super::intmat::{kernel_basis, smith_normal_form, solve_columns, IntMat, Snf};
use super::koszul::{CochainComplex, CohomologyGroup};
use super::logmodule::LogModule;
use super::ratmat::RatMat;
use super::CohomologyError;

/// Hard cap on the cochain and stalk dimensions; Smith normal form is
/// cubic, so larger configurations are refused with a clear error.
pub const SIZE_BUDGET: usize = 20_000;

/// An explicit cocycle on the punctured torus: a stalk datum at the
/// punctures together with a (2g-1)-cochain whose coboundary cancels it in
/// the mapping cone.
#[derive(Debug, Clone)]
pub struct PolylogClass {
    /// Stalk vector over all N^{2g} punctures (module coordinates each).
    pub stalk: IntMat,
    /// The lifted cochain c with d c + f(stalk) = 0.
    pub cochain: IntMat,
}

#[derive(Debug)]
pub struct PuncturedCohomology {
    module: LogModule,
    complex: CochainComplex,
    h_top: CohomologyGroup,
    h_sub: CohomologyGroup,
    order: u32,
    stalk_count: usize,
    /// Trivialize-then-sum map (+x M_x -> C^{2g} = M: identity per stalk).
    f_matrix: IntMat,
    /// Composite to the coinvariants: the augmentation on every stalk.
    connecting: IntMat,
    /// Integral basis of ker(connecting), as columns.
    kernel: IntMat,
    kernel_rat: RatMat,
    /// Solutions of d c_j = -f(kernel_j).
    stalk_lifts: IntMat,
    d_sub_snf: Snf,
}

impl PuncturedCohomology {
    pub fn build(module: &LogModule, order: u32) -> Result<Self, CohomologyError> {
        assert!(order >= 1);
        let complex = CochainComplex::build(module);
        let stalk_count = (order as usize).pow(2 * module.genus());
        let stalk_rank = stalk_count * module.rank();
        let dim = complex.total_dim().max(stalk_rank);
        if dim > SIZE_BUDGET {
            return Err(CohomologyError::BudgetExceeded {
                dim,
                limit: SIZE_BUDGET,
            });
        }
        let top = complex.top_degree();
        let h_top = complex.cohomology_at(top);
        let h_sub = complex.cohomology_at(top - 1);
        assert_eq!(h_top.free_rank, 1, "coinvariants of the logarithm module are Z");
        assert!(h_top.torsion.is_empty());

        let rank = module.rank();
        // f: stalk (x, m) -> m in C^{2g} = M (straight-path trivialization)
        let mut f_matrix = IntMat::zeros(rank, stalk_rank);
        for x in 0..stalk_count {
            for m in 0..rank {
                f_matrix[(m, x * rank + m)] = BigInt::one();
            }
        }
        // connecting = trivialize, then project to the coinvariants; the
        // projection M -> M/IM = Z is the augmentation, so the composite is
        // the augmentation on every stalk (cross-checked against the
        // Smith-normal-form presentation in verify_exactness)
        let connecting = module.augmentation().mul(&f_matrix);
        let kernel = kernel_basis(&smith_normal_form(&connecting));
        let kernel_rat = RatMat::from_int(&kernel);
        let d_sub = complex
            .differential(top - 1)
            .expect("differential below the top degree")
            .clone();
        let d_sub_snf = smith_normal_form(&d_sub);
        // negated images of the kernel under f must be integral coboundaries
        let mut rhs = f_matrix.mul(&kernel);
        for i in 0..rhs.rows() {
            for j in 0..rhs.cols() {
                let v = -rhs[(i, j)].clone();
                rhs[(i, j)] = v;
            }
        }
        let stalk_lifts = solve_columns(&d_sub_snf, &rhs)
            .expect("kernel vectors of the connecting map are residues");
        Ok(PuncturedCohomology {
            module: module.clone(),
            complex,
            h_top,
            h_sub,
            order,
            stalk_count,
            f_matrix,
            connecting,
            kernel,
            kernel_rat,
            stalk_lifts,
            d_sub_snf,
        })
    }

    pub fn module(&self) -> &LogModule {
        &self.module
    }

    pub fn complex(&self) -> &CochainComplex {
        &self.complex
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn stalk_count(&self) -> usize {
        self.stalk_count
    }

    pub fn stalk_rank(&self) -> usize {
        self.stalk_count * self.module.rank()
    }

    pub fn torus_part(&self) -> &CohomologyGroup {
        &self.h_sub
    }

    pub fn top_part(&self) -> &CohomologyGroup {
        &self.h_top
    }

    pub fn connecting(&self) -> &IntMat {
        &self.connecting
    }

    pub fn kernel(&self) -> &IntMat {
        &self.kernel
    }

    pub fn stalk_lifts(&self) -> &IntMat {
        &self.stalk_lifts
    }

    /// Free rank of H^{2g-1} of the punctured torus.
    pub fn rank(&self) -> usize {
        self.h_sub.free_rank + self.kernel.cols()
    }

    /// Index of the puncture with the given (Z/N)^{2g} coordinates.
    pub fn puncture_index(&self, coords: &[u32]) -> usize {
        assert_eq!(coords.len(), 2 * self.module.genus() as usize);
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.order as usize + (c % self.order) as usize)
    }

    /// Coordinates of the puncture with the given index.
    pub fn puncture_coords(&self, index: usize) -> Vec<u32> {
        let mut out = vec![0u32; 2 * self.module.genus() as usize];
        let mut rest = index;
        for slot in out.iter_mut().rev() {
            *slot = (rest % self.order as usize) as u32;
            rest /= self.order as usize;
        }
        out
    }

    /// The long-exact-sequence bookkeeping, asserted exactly:
    /// the connecting map is the augmentation on every stalk and is
    /// surjective; residues of the presentation generators exhaust its
    /// kernel integrally; the rank adds up over Q.
    pub fn verify_exactness(&self) -> Result<(), CohomologyError> {
        // the augmentation route agrees (up to the sign of the chosen
        // generator) with the class map of the Smith-normal-form
        // presentation of H^{2g}
        let coords = self
            .h_top
            .class_coords(&self.f_matrix)
            .ok_or_else(|| CohomologyError::ExactnessFailure("stalk image not a cocycle".into()))?;
        let free_row = coords.rows() - 1;
        let matches_plus = (0..self.stalk_rank())
            .all(|j| coords[(free_row, j)] == self.connecting[(0, j)]);
        let matches_minus = (0..self.stalk_rank())
            .all(|j| coords[(free_row, j)] == -self.connecting[(0, j)].clone());
        if !(matches_plus || matches_minus) {
            return Err(CohomologyError::ExactnessFailure(
                "coinvariant class map disagrees with the augmentation route".into(),
            ));
        }
        // surjectivity onto the coinvariants over Z
        let snf = smith_normal_form(&self.connecting);
        if snf.rank != 1 || snf.d[(0, 0)] != BigInt::one() {
            return Err(CohomologyError::ExactnessFailure(
                "connecting map is not onto the coinvariants".into(),
            ));
        }
        // composite stalk -> H^{2g} kills exactly the kernel block, whose
        // lifts exist integrally (checked at construction)
        if !self.connecting.mul(&self.kernel).is_zero() {
            return Err(CohomologyError::ExactnessFailure(
                "residue image does not lie in the kernel of the connecting map".into(),
            ));
        }
        // rank bookkeeping over Q
        let expected = self.h_sub.free_rank + (self.stalk_rank() - 1);
        if self.rank() != expected {
            return Err(CohomologyError::ExactnessFailure(format!(
                "rank {} differs from torus {} + stalk-kernel {}",
                self.rank(),
                self.h_sub.free_rank,
                self.stalk_rank() - 1
            )));
        }
        // the lifted generators really are cone cocycles: d c_j = -f(psi_j)
        let top = self.complex.top_degree();
        let d_sub = self.complex.differential(top - 1).unwrap();
        let mut check = d_sub.mul(&self.stalk_lifts);
        let fk = self.f_matrix.mul(&self.kernel);
        for i in 0..check.rows() {
            for j in 0..check.cols() {
                let v = check[(i, j)].clone() + fk[(i, j)].clone();
                check[(i, j)] = v;
            }
        }
        if !check.is_zero() {
            return Err(CohomologyError::ExactnessFailure(
                "stalk lifts fail the cone cocycle condition".into(),
            ));
        }
        Ok(())
    }

    /// Residue matrix of the presentation: torus generators have residue
    /// zero, stalk generators map to their kernel vectors.
    pub fn residue_matrix(&self) -> RatMat {
        let torus = RatMat::zeros(self.stalk_rank(), self.h_sub.free_rank);
        torus.hstack(&self.kernel_rat)
    }

    /// Stalk vector of an integer datum on the nonzero punctures, extended
    /// at 0 by the augmentation-kernel condition (unit multiples).
    pub fn stalk_vector(&self, phi: &[i64]) -> IntMat {
        assert_eq!(phi.len(), self.stalk_count - 1, "one value per nonzero puncture");
        let rank = self.module.rank();
        let unit = self.module.unit_index();
        let mut stalk = IntMat::zeros(self.stalk_rank(), 1);
        let total: i64 = phi.iter().sum();
        stalk[(unit, 0)] = BigInt::from(-total);
        for (x, value) in phi.iter().enumerate() {
            stalk[((x + 1) * rank + unit, 0)] = BigInt::from(*value);
        }
        stalk
    }

    /// The polylogarithm cocycle with the given residue on the nonzero
    /// punctures: solve the integer linear system d c = -f(stalk).
    pub fn polylog_class(&self, phi: &[i64]) -> Result<PolylogClass, CohomologyError> {
        self.polylog_class_from_stalk(self.stalk_vector(phi))
    }

    /// As `polylog_class` but with a caller-provided full stalk datum; the
    /// augmentation class of the datum must vanish in the coinvariants.
    pub fn polylog_class_from_stalk(&self, stalk: IntMat) -> Result<PolylogClass, CohomologyError> {
        assert_eq!(stalk.rows(), self.stalk_rank());
        assert_eq!(stalk.cols(), 1);
        let class = self.connecting.mul(&stalk);
        if !class.is_zero() {
            return Err(CohomologyError::ResidueInfeasible {
                class: class[(0, 0)].clone(),
            });
        }
        let mut rhs = self.f_matrix.mul(&stalk);
        for i in 0..rhs.rows() {
            let v = -rhs[(i, 0)].clone();
            rhs[(i, 0)] = v;
        }
        let cochain = solve_columns(&self.d_sub_snf, &rhs).ok_or_else(|| {
            CohomologyError::ExactnessFailure(
                "augmentation-balanced stalk datum admitted no integral lift".into(),
            )
        })?;
        Ok(PolylogClass { stalk, cochain })
    }

    /// Back-substitution: the lifted cochain cancels the stalk datum in the
    /// cone, exactly.
    pub fn verify_residue(&self, class: &PolylogClass) -> bool {
        let top = self.complex.top_degree();
        let d_sub = self.complex.differential(top - 1).unwrap();
        let mut check = d_sub.mul(&class.cochain);
        let fs = self.f_matrix.mul(&class.stalk);
        for i in 0..check.rows() {
            let v = check[(i, 0)].clone() + fs[(i, 0)].clone();
            check[(i, 0)] = v;
        }
        check.is_zero()
    }

    /// Rational presentation coordinates (torus block then stalk block) of
    /// a cone cocycle given by a stalk datum and a lifted cochain.
    pub fn class_coords_rat(&self, stalk: &RatMat, cochain: &RatMat) -> Option<RatMat> {
        let alpha = self.kernel_rat.solve(stalk)?;
        // subtract the stalk lifts to land in the torus cocycles
        let remainder = cochain.sub(&RatMat::from_int(&self.stalk_lifts).mul(&alpha));
        let beta = self.h_sub.rational_coords(&remainder)?;
        Some(beta.vstack_unchecked(&alpha))
    }
}

impl RatMat {
    /// Vertical stacking helper used by the presentation coordinates.
    pub(crate) fn vstack_unchecked(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols(), other.cols());
        let mut out = RatMat::zeros(self.rows() + other.rows(), self.cols());
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                out[(i, j)] = self[(i, j)].clone();
            }
            for i in 0..other.rows() {
                out[(self.rows() + i, j)] = other[(i, j)].clone();
            }
        }
        out
    }
}
