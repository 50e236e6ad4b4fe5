//! Exact rational matrices for the Q-level work: ranks, kernels, solves,
//! generalized eigenspaces and span comparisons.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::intmat::IntMat;

#[derive(Debug, Clone, PartialEq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_int(m: &IntMat) -> Self {
        let mut out = Self::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out[(i, j)] = BigRational::from(m[(i, j)].clone());
            }
        }
        out
    }

    pub fn from_i64(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut out = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = BigRational::from(BigInt::from(f(i, j)));
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    if !other[(k, j)].is_zero() {
                        let v = &self[(i, k)] * &other[(k, j)];
                        out[(i, j)] += v;
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &RatMat) -> RatMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.rows * self.cols {
            out.data[i] -= other.data[i].clone();
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> RatMat {
        let mut out = self.clone();
        for e in &mut out.data {
            *e *= s.clone();
        }
        out
    }

    pub fn pow(&self, e: usize) -> RatMat {
        assert_eq!(self.rows, self.cols);
        let mut out = RatMat::identity(self.rows);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn hstack(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.rows, other.rows);
        let mut out = RatMat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> RatMat {
        let mut out = RatMat::zeros(self.rows, 1);
        for i in 0..self.rows {
            out[(i, 0)] = self[(i, j)].clone();
        }
        out
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (RatMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            // largest-magnitude pivot keeps the arithmetic tame
            let mut best: Option<usize> = None;
            for i in row..m.rows {
                if !m[(i, col)].is_zero()
                    && best
                        .map(|b| m[(i, col)].abs() > m[(b, col)].abs())
                        .unwrap_or(true)
                {
                    best = Some(i);
                }
            }
            let Some(p) = best else { continue };
            if p != row {
                for j in 0..m.cols {
                    let tmp = m[(row, j)].clone();
                    m[(row, j)] = m[(p, j)].clone();
                    m[(p, j)] = tmp;
                }
            }
            let inv = m[(row, col)].recip();
            for j in col..m.cols {
                let v = &m[(row, j)] * &inv;
                m[(row, j)] = v;
            }
            for i in 0..m.rows {
                if i != row && !m[(i, col)].is_zero() {
                    let f = m[(i, col)].clone();
                    for j in col..m.cols {
                        let v = &m[(row, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, as columns.
    pub fn kernel_basis(&self) -> RatMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        let mut out = RatMat::zeros(self.cols, free.len());
        for (k, &fj) in free.iter().enumerate() {
            out[(fj, k)] = BigRational::one();
            for (i, &pj) in pivots.iter().enumerate() {
                out[(pj, k)] = -r[(i, fj)].clone();
            }
        }
        out
    }

    /// Solves `self * x = b` exactly; None when inconsistent.
    pub fn solve(&self, b: &RatMat) -> Option<RatMat> {
        assert_eq!(self.rows, b.rows);
        let stacked = self.hstack(b);
        let (r, pivots) = stacked.rref();
        // inconsistency: a pivot in the b-block
        if pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = RatMat::zeros(self.cols, b.cols);
        for (i, &p) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x[(p, j)] = r[(i, self.cols + j)].clone();
            }
        }
        Some(x)
    }

    /// Do the columns of `a` and `b` span the same subspace?
    pub fn span_equal(a: &RatMat, b: &RatMat) -> bool {
        let ra = a.rank();
        let rb = b.rank();
        ra == rb && a.hstack(b).rank() == ra
    }

    /// Basis of the generalized eigenspace `ker (self - lambda)^m`, grown
    /// until the dimension stabilizes.
    pub fn generalized_eigenspace(&self, lambda: &BigRational) -> RatMat {
        assert_eq!(self.rows, self.cols);
        let shifted = self.sub(&RatMat::identity(self.rows).scale(lambda));
        let mut power = shifted.clone();
        let mut basis = power.kernel_basis();
        loop {
            power = power.mul(&shifted);
            let next = power.kernel_basis();
            if next.cols() == basis.cols() {
                return basis;
            }
            basis = next;
        }
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_kernel_solve() {
        let a = RatMat::from_i64(2, 3, |i, j| [[1, 2, 3], [2, 4, 6]][i][j]);
        assert_eq!(a.rank(), 1);
        let k = a.kernel_basis();
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
        let b = RatMat::from_i64(2, 1, |i, _| [3, 6][i]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        let bad = RatMat::from_i64(2, 1, |i, _| [1, 0][i]);
        assert!(a.solve(&bad).is_none());
    }

    #[test]
    fn generalized_eigenspace_of_jordan_block() {
        // [[2, 1], [0, 2]]: plain kernel of (T - 2) is 1-dimensional, the
        // generalized eigenspace is the whole plane
        let t = RatMat::from_i64(2, 2, |i, j| [[2, 1], [0, 2]][i][j]);
        let two = BigRational::from(BigInt::from(2));
        let plain = t
            .sub(&RatMat::identity(2).scale(&two))
            .kernel_basis();
        assert_eq!(plain.cols(), 1);
        let gen = t.generalized_eigenspace(&two);
        assert_eq!(gen.cols(), 2);
    }

    #[test]
    fn eigenspace_of_diagonal_weights() {
        // diag(a^2, a, 1) with weight 0 picks the third axis
        let t = RatMat::from_i64(3, 3, |i, j| {
            if i == j {
                [9, 3, 1][i]
            } else {
                0
            }
        });
        let space = t.generalized_eigenspace(&BigRational::one());
        assert_eq!(space.cols(), 1);
        assert!(!space[(2, 0)].is_zero());
        assert!(space[(0, 0)].is_zero() && space[(1, 0)].is_zero());
    }

    #[test]
    fn span_comparison() {
        let a = RatMat::from_i64(3, 2, |i, j| [[1, 0], [0, 1], [0, 0]][i][j]);
        let b = RatMat::from_i64(3, 2, |i, j| [[1, 1], [1, -1], [0, 0]][i][j]);
        let c = RatMat::from_i64(3, 1, |i, _| [0, 0, 1][i]);
        assert!(RatMat::span_equal(&a, &b));
        assert!(!RatMat::span_equal(&a, &c));
    }
}
