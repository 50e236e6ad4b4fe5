//! The unipotent logarithm module: the group ring of Z^{2g} truncated at
//! the (n+1)-st power of the augmentation ideal, with the generators acting
//! as multiplication by 1 + x_i on monomials in x_i = t_i - 1.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::HashMap;

use super::intmat::IntMat;

/// Finite free Z-module Z[Gamma]/I^{n+1} for Gamma = Z^{2g}, with basis the
/// monomials of total degree <= n, ordered by degree then lexicographically
/// (so the level-(n-1) basis is a prefix of the level-n basis).
#[derive(Debug, Clone)]
pub struct LogModule {
    g: u32,
    level: u32,
    monomials: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    action: Vec<IntMat>,
}

fn enumerate_monomials(vars: usize, max_degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for degree in 0..=max_degree {
        let mut current = vec![0u32; vars];
        fn rec(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, pos: usize, remaining: u32) {
            if pos == current.len() - 1 {
                current[pos] = remaining;
                out.push(current.clone());
                return;
            }
            // lexicographically decreasing exponent on the earlier variable
            for e in (0..=remaining).rev() {
                current[pos] = e;
                rec(out, current, pos + 1, remaining - e);
            }
        }
        rec(&mut out, &mut current, 0, degree);
    }
    out
}

impl LogModule {
    pub fn build(g: u32, level: u32) -> Self {
        assert!(g >= 1);
        let vars = (2 * g) as usize;
        let monomials = enumerate_monomials(vars, level);
        let index: HashMap<Vec<u32>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let rank = monomials.len();
        let mut action = Vec::with_capacity(vars);
        for i in 0..vars {
            let mut t = IntMat::zeros(rank, rank);
            for (col, alpha) in monomials.iter().enumerate() {
                t[(col, col)] = BigInt::one();
                let degree: u32 = alpha.iter().sum();
                if degree < level {
                    let mut up = alpha.clone();
                    up[i] += 1;
                    t[(index[&up], col)] = BigInt::one();
                }
            }
            action.push(t);
        }
        LogModule {
            g,
            level,
            monomials,
            index,
            action,
        }
    }

    pub fn genus(&self) -> u32 {
        self.g
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn generators(&self) -> usize {
        (2 * self.g) as usize
    }

    pub fn rank(&self) -> usize {
        self.monomials.len()
    }

    /// Action of the i-th generator t_i.
    pub fn action(&self, i: usize) -> &IntMat {
        &self.action[i]
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    /// Augmentation Z[Gamma]/I^{n+1} -> Z as a row vector: the coefficient
    /// of the constant monomial in the t-basis, i.e. x^alpha -> 0 for
    /// alpha != 0 and 1 -> 1.
    pub fn augmentation(&self) -> IntMat {
        let mut row = IntMat::zeros(1, self.rank());
        row[(0, 0)] = BigInt::one();
        row
    }

    /// Index of the multiplicative unit 1 in the basis.
    pub fn unit_index(&self) -> usize {
        0
    }

    /// Basis-truncation map onto the level-(n-1) module.
    pub fn transition_to_lower(&self) -> (LogModule, IntMat) {
        assert!(self.level >= 1);
        let lower = LogModule::build(self.g, self.level - 1);
        let mut t = IntMat::zeros(lower.rank(), self.rank());
        for (j, alpha) in lower.monomials.iter().enumerate() {
            assert_eq!(alpha, &self.monomials[j], "lower basis must be a prefix");
            t[(j, j)] = BigInt::one();
        }
        (lower, t)
    }

    /// Truncated product of two elements in monomial coordinates.
    pub fn multiply(&self, u: &[BigInt], v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.rank()];
        for (i, ci) in u.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, cj) in v.iter().enumerate() {
                if cj.is_zero() {
                    continue;
                }
                let gamma: Vec<u32> = self.monomials[i]
                    .iter()
                    .zip(&self.monomials[j])
                    .map(|(a, b)| a + b)
                    .collect();
                if gamma.iter().sum::<u32>() <= self.level {
                    out[self.index[&gamma]] += ci * cj;
                }
            }
        }
        out
    }

    /// The ring endomorphism t_i -> t_i^a, i.e. x_i -> (1 + x_i)^a - 1,
    /// as a matrix in the monomial basis. Triangular with a^{|alpha|} on
    /// the diagonal, hence invertible over Q but not over Z for n >= 1.
    pub fn phi_a(&self, a: u32) -> IntMat {
        let vars = self.generators();
        // y_i = (1 + x_i)^a - 1 as ring elements
        let mut y = Vec::with_capacity(vars);
        for i in 0..vars {
            let mut el = vec![BigInt::zero(); self.rank()];
            for k in 1..=self.level.min(a) {
                let mut mono = vec![0u32; vars];
                mono[i] = k;
                el[self.index[&mono]] = binomial(a, k);
            }
            y.push(el);
        }
        let mut columns: Vec<Vec<BigInt>> = Vec::with_capacity(self.rank());
        for alpha in &self.monomials {
            let degree: u32 = alpha.iter().sum();
            if degree == 0 {
                let mut unit = vec![BigInt::zero(); self.rank()];
                unit[0] = BigInt::one();
                columns.push(unit);
                continue;
            }
            // phi(x^alpha) = phi(x^{alpha - e_i}) * y_i for the first i with
            // alpha_i > 0; that predecessor was already computed
            let i = alpha.iter().position(|&e| e > 0).unwrap();
            let mut prev = alpha.clone();
            prev[i] -= 1;
            let base = columns[self.index[&prev]].clone();
            columns.push(self.multiply(&base, &y[i]));
        }
        IntMat::from_columns(self.rank(), columns)
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::binomial as int_binomial;

    #[test]
    fn rank_formula() {
        // rank = binomial(2g + n, n)
        for (g, n) in [(1u32, 0u32), (1, 1), (1, 3), (2, 2), (2, 0), (3, 1)] {
            let m = LogModule::build(g, n);
            assert_eq!(m.rank() as u64, int_binomial((2 * g + n) as u64, n as u64));
        }
        // (2, 2): 1 + 4 + 10 = 15 monomials of degree <= 2 in 4 variables
        assert_eq!(LogModule::build(2, 2).rank(), 15);
    }

    #[test]
    fn level_zero_is_trivial() {
        let m = LogModule::build(1, 0);
        assert_eq!(m.rank(), 1);
        for i in 0..2 {
            assert_eq!(*m.action(i), IntMat::identity(1));
        }
    }

    #[test]
    fn level_one_action_shape() {
        // basis [1, x1, x2]; t_i sends 1 to 1 + x_i and fixes the rest
        let m = LogModule::build(1, 1);
        assert_eq!(m.rank(), 3);
        let t1 = m.action(0);
        let expected = IntMat::from_fn(3, 3, |i, j| {
            [[1, 0, 0], [1, 1, 0], [0, 0, 1]][i][j]
        });
        assert_eq!(*t1, expected);
    }

    #[test]
    fn action_invariants() {
        for (g, n) in [(1u32, 2u32), (2, 1)] {
            let m = LogModule::build(g, n);
            let vars = m.generators();
            // commuting generators
            for i in 0..vars {
                for j in 0..i {
                    assert_eq!(
                        m.action(i).mul(m.action(j)),
                        m.action(j).mul(m.action(i)),
                        "generators {i} and {j} must commute"
                    );
                }
            }
            // (T_i - 1)^{n+1} = 0
            let id = IntMat::identity(m.rank());
            for i in 0..vars {
                let mut nil = m.action(i).clone();
                for c in 0..m.rank() {
                    nil[(c, c)] -= BigInt::one();
                }
                let mut pw = id.clone();
                for _ in 0..=n {
                    pw = pw.mul(&nil);
                }
                assert!(pw.is_zero());
            }
        }
    }

    #[test]
    fn transition_intertwines_actions() {
        for (g, n) in [(1u32, 2u32), (1, 3), (2, 2)] {
            let m = LogModule::build(g, n);
            let (lower, t) = m.transition_to_lower();
            for i in 0..m.generators() {
                assert_eq!(
                    t.mul(m.action(i)),
                    lower.action(i).mul(&t),
                    "transition must intertwine t_{i}"
                );
            }
        }
    }

    #[test]
    fn phi_a_is_multiplicative_and_augmentation_compatible() {
        let m = LogModule::build(1, 3);
        let phi2 = m.phi_a(2);
        let phi3 = m.phi_a(3);
        let phi6 = m.phi_a(6);
        // t -> t^2 -> (t^2)^3 = t^6
        assert_eq!(phi3.mul(&phi2), phi6);
        assert_eq!(phi2.mul(&phi3), phi6);
        // aug o phi_a = aug, and phi_a fixes the unit
        let aug = m.augmentation();
        assert_eq!(aug.mul(&phi2), aug);
        let unit_col = phi2.column(m.unit_index());
        assert_eq!(unit_col[0], BigInt::one());
        assert!(unit_col[1..].iter().all(|e| e.is_zero()));
        // phi_a intertwines T_i with T_i^a
        let t1 = m.action(0);
        let t1_sq = t1.mul(t1);
        assert_eq!(phi2.mul(t1), t1_sq.mul(&phi2));
    }
}
