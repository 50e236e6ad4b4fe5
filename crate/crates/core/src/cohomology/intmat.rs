//! Dense big-integer matrices and the Smith normal form.
//!
//! The SNF drives every exact computation here: kernels, integer solves,
//! and the invariant-factor presentations of cohomology groups. Transforms
//! are tracked on both sides together with their inverses, so that
//! `p * a * q = d` and `a = p_inv * d * q_inv` can be re-verified cheaply.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> i64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = BigInt::from(f(i, j));
            }
        }
        m
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

    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "shape mismatch in matrix product");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(i, j)] += prod;
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .sum::<BigInt>()
            })
            .collect()
    }

    pub fn hstack(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.rows, other.rows);
        let mut out = IntMat::zeros(self.rows, self.cols + other.cols);
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

    pub fn from_columns(rows: usize, cols: Vec<Vec<BigInt>>) -> IntMat {
        let mut out = IntMat::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for i in 0..rows {
                out[(i, j)] = col[i].clone();
            }
        }
        out
    }

    /// Row-major integer rendering used by the structured text reports.
    pub fn row_major_string(&self) -> String {
        let entries: Vec<String> = self.data.iter().map(|e| e.to_string()).collect();
        format!("{}x{} [{}]", self.rows, self.cols, entries.join(" "))
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Smith normal form `p * a * q = d` with diagonal `d` of nonnegative
/// invariant factors `d_1 | d_2 | ...`, and the inverse transforms so that
/// `a = p_inv * d * q_inv`.
#[derive(Debug, Clone)]
pub struct Snf {
    pub d: IntMat,
    pub p: IntMat,
    pub p_inv: IntMat,
    pub q: IntMat,
    pub q_inv: IntMat,
    pub rank: usize,
}

impl Snf {
    /// The nontrivial invariant factors (entries > 1).
    pub fn torsion_factors(&self) -> Vec<BigInt> {
        (0..self.rank)
            .map(|i| self.d[(i, i)].clone())
            .filter(|e| *e > BigInt::one())
            .collect()
    }

    /// Re-verify the factorization: `p*a*q == d` and `p_inv*d*q_inv == a`.
    pub fn verify(&self, a: &IntMat) -> bool {
        self.p.mul(a).mul(&self.q) == self.d && self.p_inv.mul(&self.d).mul(&self.q_inv) == *a
    }
}

pub fn smith_normal_form(a: &IntMat) -> Snf {
    let mut d = a.clone();
    let (rows, cols) = (d.rows, d.cols);
    let mut p = IntMat::identity(rows);
    let mut p_inv = IntMat::identity(rows);
    let mut q = IntMat::identity(cols);
    let mut q_inv = IntMat::identity(cols);

    // elementary operations, mirrored onto the transforms
    fn row_axpy(d: &mut IntMat, p: &mut IntMat, p_inv: &mut IntMat, i: usize, t: usize, f: &BigInt) {
        // row_i -= f * row_t
        for j in 0..d.cols {
            let v = &d[(t, j)] * f;
            d[(i, j)] -= v;
        }
        for j in 0..p.cols {
            let v = &p[(t, j)] * f;
            p[(i, j)] -= v;
        }
        for r in 0..p_inv.rows {
            let v = &p_inv[(r, i)] * f;
            p_inv[(r, t)] += v;
        }
    }
    fn col_axpy(d: &mut IntMat, q: &mut IntMat, q_inv: &mut IntMat, j: usize, t: usize, f: &BigInt) {
        // col_j -= f * col_t
        for i in 0..d.rows {
            let v = &d[(i, t)] * f;
            d[(i, j)] -= v;
        }
        for i in 0..q.rows {
            let v = &q[(i, t)] * f;
            q[(i, j)] -= v;
        }
        for c in 0..q_inv.cols {
            let v = &q_inv[(j, c)] * f;
            q_inv[(t, c)] += v;
        }
    }
    fn row_swap(d: &mut IntMat, p: &mut IntMat, p_inv: &mut IntMat, i: usize, t: usize) {
        if i == t {
            return;
        }
        for j in 0..d.cols {
            let tmp = d[(i, j)].clone();
            d[(i, j)] = d[(t, j)].clone();
            d[(t, j)] = tmp;
        }
        for j in 0..p.cols {
            let tmp = p[(i, j)].clone();
            p[(i, j)] = p[(t, j)].clone();
            p[(t, j)] = tmp;
        }
        for r in 0..p_inv.rows {
            let tmp = p_inv[(r, i)].clone();
            p_inv[(r, i)] = p_inv[(r, t)].clone();
            p_inv[(r, t)] = tmp;
        }
    }
    fn col_swap(d: &mut IntMat, q: &mut IntMat, q_inv: &mut IntMat, j: usize, t: usize) {
        if j == t {
            return;
        }
        for i in 0..d.rows {
            let tmp = d[(i, j)].clone();
            d[(i, j)] = d[(i, t)].clone();
            d[(i, t)] = tmp;
        }
        for i in 0..q.rows {
            let tmp = q[(i, j)].clone();
            q[(i, j)] = q[(i, t)].clone();
            q[(i, t)] = tmp;
        }
        for c in 0..q_inv.cols {
            let tmp = q_inv[(j, c)].clone();
            q_inv[(j, c)] = q_inv[(t, c)].clone();
            q_inv[(t, c)] = tmp;
        }
    }
    fn row_negate(d: &mut IntMat, p: &mut IntMat, p_inv: &mut IntMat, i: usize) {
        for j in 0..d.cols {
            let v = -d[(i, j)].clone();
            d[(i, j)] = v;
        }
        for j in 0..p.cols {
            let v = -p[(i, j)].clone();
            p[(i, j)] = v;
        }
        for r in 0..p_inv.rows {
            let v = -p_inv[(r, i)].clone();
            p_inv[(r, i)] = v;
        }
    }

    let mut t = 0usize;
    while t < rows.min(cols) {
        // smallest nonzero pivot in the remaining submatrix
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[(i, j)].is_zero()
                    && pivot
                        .map(|(pi, pj)| d[(i, j)].abs() < d[(pi, pj)].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        row_swap(&mut d, &mut p, &mut p_inv, pi, t);
        col_swap(&mut d, &mut q, &mut q_inv, pj, t);

        // clear row and column t; restart if a remainder becomes the new pivot
        let mut clean = true;
        for i in (t + 1)..rows {
            if !d[(i, t)].is_zero() {
                let f = d[(i, t)].div_floor(&d[(t, t)]);
                if !f.is_zero() {
                    row_axpy(&mut d, &mut p, &mut p_inv, i, t, &f);
                }
                if !d[(i, t)].is_zero() {
                    clean = false;
                }
            }
        }
        for j in (t + 1)..cols {
            if !d[(t, j)].is_zero() {
                let f = d[(t, j)].div_floor(&d[(t, t)]);
                if !f.is_zero() {
                    col_axpy(&mut d, &mut q, &mut q_inv, j, t, &f);
                }
                if !d[(t, j)].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // divisibility: the pivot must divide the remaining submatrix
        let mut fixed = true;
        'search: for i in (t + 1)..rows {
            for j in (t + 1)..cols {
                if !(&d[(i, j)] % &d[(t, t)]).is_zero() {
                    // fold row i into row t to expose a smaller pivot
                    let one = BigInt::from(-1);
                    row_axpy(&mut d, &mut p, &mut p_inv, t, i, &one);
                    fixed = false;
                    break 'search;
                }
            }
        }
        if !fixed {
            continue;
        }
        if d[(t, t)].is_negative() {
            row_negate(&mut d, &mut p, &mut p_inv, t);
        }
        t += 1;
    }
    let rank = t;
    Snf {
        d,
        p,
        p_inv,
        q,
        q_inv,
        rank,
    }
}

/// Integral kernel basis of `a` (columns), via the SNF column transform.
pub fn kernel_basis(snf: &Snf) -> IntMat {
    let n = snf.q.cols();
    let free = n - snf.rank;
    let mut out = IntMat::zeros(n, free);
    for j in 0..free {
        for i in 0..n {
            out[(i, j)] = snf.q[(i, snf.rank + j)].clone();
        }
    }
    out
}

/// Solves `a x = b` over the integers for every column of `b`, given the
/// SNF of `a`; returns None when some column has no integral solution.
pub fn solve_columns(snf: &Snf, b: &IntMat) -> Option<IntMat> {
    let pb = snf.p.mul(b);
    let mut y = IntMat::zeros(snf.q.rows(), b.cols());
    for j in 0..b.cols() {
        for i in 0..snf.d.rows() {
            if i < snf.rank {
                let (quot, rem) = pb[(i, j)].div_rem(&snf.d[(i, i)]);
                if !rem.is_zero() {
                    return None;
                }
                y[(i, j)] = quot;
            } else if !pb[(i, j)].is_zero() {
                return None;
            }
        }
    }
    Some(snf.q.mul(&y))
}
