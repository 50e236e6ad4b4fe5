//! Rank-2 complex lattices: modulus reduction, torsion and division points.
//!
//! All congruence tests are carried out in lattice coordinates `(s, t)` with
//! `z = s*omega1 + t*omega2`, which makes tolerances scale-free.

use num_complex::Complex64;
use thiserror::Error;

/// Boundary tie tolerance for the fundamental-domain conventions.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("degenerate lattice: periods are collinear (omega2/omega1 is real)")]
    Degenerate,
    #[error("zero period omega1")]
    ZeroPeriod,
    #[error("modulus reduction lost more than half the working precision (near-degenerate input)")]
    PrecisionLoss,
}

/// A 2x2 unimodular integer matrix `[[a, b], [c, d]]` acting on the modulus
/// by `tau -> (a*tau + b)/(c*tau + d)` and on the basis by
/// `omega2' = a*omega2 + b*omega1`, `omega1' = c*omega2 + d*omega1`.
pub type Unimodular = [[i64; 2]; 2];

fn mat_mul(m: Unimodular, n: Unimodular) -> Option<Unimodular> {
    let mut out = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let x = m[i][0].checked_mul(n[0][j])?;
            let y = m[i][1].checked_mul(n[1][j])?;
            out[i][j] = x.checked_add(y)?;
        }
    }
    Some(out)
}

/// An oriented rank-2 lattice with reduced modulus.
///
/// Invariants: `Im(omega2/omega1) > 0`, `|Re tau| <= 1/2`, `|tau| >= 1`
/// (so `Im tau >= sqrt(3)/2`), with boundary ties resolved to `Re tau >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    omega1: Complex64,
    omega2: Complex64,
    tau: Complex64,
    covolume: f64,
}

/// A point of the complex plane together with its lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRep {
    pub z: Complex64,
    /// Coordinates with `z = s*omega1 + t*omega2`.
    pub s: f64,
    pub t: f64,
    /// True when `(s, t)` lies in the fundamental square `[0, 1)^2`.
    pub reduced: bool,
}

/// An N-torsion point `(j*omega1 + k*omega2)/N` with `0 <= j, k < N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorsionPoint {
    pub j: u32,
    pub k: u32,
    pub order: u32,
}

impl TorsionPoint {
    pub fn is_zero(&self) -> bool {
        self.j == 0 && self.k == 0
    }

    pub fn value(&self, lattice: &Lattice) -> Complex64 {
        lattice.from_coords(
            f64::from(self.j) / f64::from(self.order),
            f64::from(self.k) / f64::from(self.order),
        )
    }
}

impl Lattice {
    /// Reduces an arbitrary oriented basis to the standard fundamental domain
    /// and returns the lattice together with the unimodular basis change.
    ///
    /// If `Im(omega2/omega1) < 0` the basis is reordered first to restore
    /// orientation. Near-degenerate inputs whose reduced modulus cannot be
    /// trusted to half the working precision are rejected.
    pub fn reduce(omega1: Complex64, omega2: Complex64) -> Result<(Self, Unimodular), LatticeError> {
        if omega1.norm() == 0.0 || omega2.norm() == 0.0 {
            return Err(LatticeError::ZeroPeriod);
        }
        let ratio = omega2 / omega1;
        if ratio.im == 0.0 {
            return Err(LatticeError::Degenerate);
        }

        let mut m: Unimodular = [[1, 0], [0, 1]];
        let mut tau = ratio;
        if tau.im < 0.0 {
            // swap generators: tau -> 1/tau
            m = [[0, 1], [1, 0]];
            tau = 1.0 / tau;
        }

        let apply = |m: Unimodular, step: Unimodular| mat_mul(step, m).ok_or(LatticeError::PrecisionLoss);

        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > 10_000 {
                return Err(LatticeError::PrecisionLoss);
            }
            // shift Re tau into (-1/2, 1/2], ties resolved towards +1/2
            let shift = (tau.re - 0.5 - TIE_EPS).ceil();
            if shift.abs() > 9.0e15 {
                return Err(LatticeError::PrecisionLoss);
            }
            if shift != 0.0 {
                let k = shift as i64;
                m = apply(m, [[1, -k], [0, 1]])?;
                tau -= Complex64::new(shift, 0.0);
            }
            if tau.norm() < 1.0 - TIE_EPS {
                m = apply(m, [[0, -1], [1, 0]])?;
                tau = -1.0 / tau;
            } else {
                break;
            }
        }
        // boundary tie: force Re tau >= 0 on the arc |tau| = 1
        if (tau.norm() - 1.0).abs() <= TIE_EPS && tau.re < -TIE_EPS {
            m = apply(m, [[0, -1], [1, 0]])?;
        }

        let [[a, b], [c, d]] = m;
        let new_omega2 = (a as f64) * omega2 + (b as f64) * omega1;
        let new_omega1 = (c as f64) * omega2 + (d as f64) * omega1;
        let tau_red = new_omega2 / new_omega1;

        // Precision guard: periods are known to relative f64 epsilon; the
        // basis change amplifies that by the matrix size. Reject when the
        // estimated error in Im tau exceeds half the working precision.
        let norm_m = m.iter().flatten().map(|e| e.unsigned_abs()).max().unwrap() as f64;
        let err_est = f64::EPSILON
            * norm_m
            * (omega1.norm() + omega2.norm())
            / new_omega1.norm()
            * (1.0 + tau_red.norm());
        if !tau_red.im.is_finite() || err_est > 1.5e-8 * tau_red.im {
            return Err(LatticeError::PrecisionLoss);
        }
        debug_assert!(tau_red.im > 0.8);
        debug_assert!(tau_red.re.abs() <= 0.5 + 1e-9);
        debug_assert!(tau_red.norm() >= 1.0 - 1e-9);

        let covolume = (new_omega1.conj() * new_omega2).im;
        Ok((
            Lattice {
                omega1: new_omega1,
                omega2: new_omega2,
                tau: tau_red,
                covolume,
            },
            m,
        ))
    }

    /// The lattice `omega1 * (Z + Z tau)` for an already reduced `tau`.
    pub fn from_reduced_tau(omega1: Complex64, tau: Complex64) -> Result<Self, LatticeError> {
        let (lattice, m) = Self::reduce(omega1, omega1 * tau)?;
        debug_assert_eq!(m, [[1, 0], [0, 1]], "tau was not reduced: {tau}");
        Ok(lattice)
    }

    /// `Z + Z tau` for reduced `tau`.
    pub fn normalized(tau: Complex64) -> Result<Self, LatticeError> {
        Self::from_reduced_tau(Complex64::new(1.0, 0.0), tau)
    }

    pub fn omega1(&self) -> Complex64 {
        self.omega1
    }

    pub fn omega2(&self) -> Complex64 {
        self.omega2
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    /// Area of the fundamental parallelogram.
    pub fn covolume(&self) -> f64 {
        self.covolume
    }

    /// Lattice coordinates `(s, t)` of `z = s*omega1 + t*omega2`.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let s = (z.conj() * self.omega2).im / self.covolume;
        let t = (self.omega1.conj() * z).im / self.covolume;
        (s, t)
    }

    pub fn from_coords(&self, s: f64, t: f64) -> Complex64 {
        self.omega1 * s + self.omega2 * t
    }

    /// Representative of `z` modulo the lattice in the fundamental
    /// parallelogram, with its coordinates.
    pub fn reduce_point(&self, z: Complex64) -> PointRep {
        let (s, t) = self.coords(z);
        let sr = s - s.floor();
        let tr = t - t.floor();
        PointRep {
            z: self.from_coords(sr, tr),
            s: sr,
            t: tr,
            reduced: true,
        }
    }

    /// Euclidean distance, in lattice coordinates, from `z` to the nearest
    /// lattice point.
    pub fn coord_distance_to_lattice(&self, z: Complex64) -> f64 {
        let (s, t) = self.coords(z);
        let ds = s - s.round();
        let dt = t - t.round();
        (ds * ds + dt * dt).sqrt()
    }

    /// True iff `z - w` lies within `tol` (in lattice coordinates) of a
    /// lattice point.
    pub fn is_congruent(&self, z: Complex64, w: Complex64, tol: f64) -> bool {
        assert!(tol > 0.0, "tolerance must be positive");
        self.coord_distance_to_lattice(z - w) <= tol
    }

    /// All `N^2` N-torsion points, lexicographic in `(j, k)`; the zero point
    /// comes first.
    pub fn torsion_points(&self, order: u32) -> Vec<TorsionPoint> {
        assert!(order >= 1);
        let mut points = Vec::with_capacity((order as usize).pow(2));
        for j in 0..order {
            for k in 0..order {
                points.push(TorsionPoint { j, k, order });
            }
        }
        points
    }

    /// The `a^2` preimages of `z` under multiplication by `a`, i.e. all `w`
    /// with `a*w = z (mod lattice)`, lexicographic in the translate `(j, k)`.
    pub fn division_preimages(&self, z: Complex64, a: u32) -> Vec<Complex64> {
        assert!(a >= 1);
        let af = f64::from(a);
        let mut out = Vec::with_capacity((a as usize).pow(2));
        for j in 0..a {
            for k in 0..a {
                let translate = self.from_coords(f64::from(j), f64::from(k));
                out.push((z + translate) / af);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn reduce_integer_translation() {
        let (lat, m) = Lattice::reduce(c(1.0, 0.0), c(3.0, 1.0)).unwrap();
        assert!((lat.tau() - c(0.0, 1.0)).norm() < 1e-14);
        assert_eq!(m, [[1, -3], [0, 1]]);
    }

    #[test]
    fn reduce_preserves_homothety() {
        let (lat, m) = Lattice::reduce(c(2.0, 0.0), c(0.0, 2.0)).unwrap();
        assert!((lat.tau() - c(0.0, 1.0)).norm() < 1e-14);
        assert!((lat.omega1() - c(2.0, 0.0)).norm() < 1e-14);
        assert_eq!(m, [[1, 0], [0, 1]]);
    }

    #[test]
    fn reduce_gauss_example() {
        // Hand reduction of tau = 0.3 + 0.4i: invert (-1/tau = -1.2 + 1.6i),
        // then shift by +1, giving tau = -0.2 + 1.6i and matrix T^1 * S.
        let (lat, m) = Lattice::reduce(c(1.0, 0.0), c(0.3, 0.4)).unwrap();
        assert!((lat.tau() - c(-0.2, 1.6)).norm() < 1e-12);
        assert_eq!(m, [[1, -1], [1, 0]]);
        assert!((lat.omega1() - c(0.3, 0.4)).norm() < 1e-14);
        assert!((lat.omega2() - c(-0.7, 0.4)).norm() < 1e-14);
    }

    #[test]
    fn reduce_restores_orientation() {
        let (lat, m) = Lattice::reduce(c(1.0, 0.0), c(0.0, -1.0)).unwrap();
        assert!(lat.tau().im > 0.0);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert_eq!(det, -1);
    }

    #[test]
    fn reduce_is_idempotent() {
        let (lat, _) = Lattice::reduce(c(0.7, 0.1), c(0.2, 0.9)).unwrap();
        let (lat2, m) = Lattice::reduce(lat.omega1(), lat.omega2()).unwrap();
        assert_eq!(m, [[1, 0], [0, 1]]);
        assert!((lat2.tau() - lat.tau()).norm() < 1e-14);
    }

    #[test]
    fn reduce_boundary_tie_prefers_nonnegative_re() {
        // tau on the unit circle with negative real part maps to +|Re|
        let tau = C::from_polar(1.0, std::f64::consts::PI * 2.0 / 3.0);
        let (lat, _) = Lattice::reduce(c(1.0, 0.0), tau).unwrap();
        assert!(lat.tau().re >= 0.0, "tie broken to {}", lat.tau());
        assert!((lat.tau().re - 0.5).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert_eq!(
            Lattice::reduce(c(0.0, 0.0), c(1.0, 0.0)),
            Err(LatticeError::ZeroPeriod)
        );
        assert_eq!(
            Lattice::reduce(c(1.0, 0.0), c(2.5, 0.0)),
            Err(LatticeError::Degenerate)
        );
        // nearly collinear: reduction would lose most of the precision
        assert_eq!(
            Lattice::reduce(c(1.0, 0.0), c(0.333333333, 1e-13)),
            Err(LatticeError::PrecisionLoss)
        );
    }

    #[test]
    fn torsion_enumeration() {
        let lat = Lattice::normalized(c(0.0, 1.0)).unwrap();
        let pts = lat.torsion_points(2);
        assert_eq!(pts.len(), 4);
        assert!(pts[0].is_zero());
        let values: Vec<C> = pts.iter().map(|p| p.value(&lat)).collect();
        let expected = [c(0.0, 0.0), c(0.0, 0.5), c(0.5, 0.0), c(0.5, 0.5)];
        for (v, e) in values.iter().zip(expected.iter()) {
            assert!((v - e).norm() < 1e-14);
        }
        // pairwise non-congruent
        for i in 0..4 {
            for j in 0..i {
                assert!(!lat.is_congruent(values[i], values[j], 1e-9));
            }
        }
        assert_eq!(lat.torsion_points(1).len(), 1);
        assert_eq!(lat.torsion_points(3).len(), 9);
        assert_eq!(lat.torsion_points(3).iter().filter(|p| !p.is_zero()).count(), 8);
    }

    #[test]
    fn congruence_examples() {
        let lat = Lattice::normalized(c(0.0, 1.0)).unwrap();
        assert!(lat.is_congruent(c(0.5, 0.0), c(1.5, 1.0), 1e-12));
        assert!(!lat.is_congruent(c(0.5, 0.0), c(0.6, 0.0), 1e-12));
        let (lat2, _) = Lattice::reduce(c(0.4, 0.1), c(-0.1, 0.7)).unwrap();
        let z = c(0.123, 0.456);
        let w = z + 7.0 * lat2.omega1() - 4.0 * lat2.omega2();
        assert!(lat2.is_congruent(z, w, 1e-10));
    }

    #[test]
    fn division_preimages_examples() {
        let lat = Lattice::normalized(c(0.0, 1.0)).unwrap();
        // fibre over zero for a = 2 is the set of 2-torsion points
        let pre = lat.division_preimages(c(0.0, 0.0), 2);
        assert_eq!(pre.len(), 4);
        let torsion: Vec<C> = lat.torsion_points(2).iter().map(|p| p.value(&lat)).collect();
        for t in &torsion {
            assert!(pre.iter().any(|w| lat.is_congruent(*w, *t, 1e-12)));
        }
        // a = 1 is the identity
        let z = c(0.3, 0.4);
        let pre1 = lat.division_preimages(z, 1);
        assert_eq!(pre1.len(), 1);
        assert!((pre1[0] - z).norm() < 1e-15);
        // a = 3: each w satisfies 3w = z mod lattice, pairwise non-congruent,
        // and the set is closed under the 1/3-lattice translates
        let pre3 = lat.division_preimages(z, 3);
        assert_eq!(pre3.len(), 9);
        for w in &pre3 {
            assert!(lat.is_congruent(3.0 * w, z, 1e-12));
        }
        for i in 0..9 {
            for j in 0..i {
                assert!(!lat.is_congruent(pre3[i], pre3[j], 1e-9));
            }
        }
        for w in &pre3 {
            for shift in [lat.omega1() / 3.0, lat.omega2() / 3.0] {
                let moved = w + shift;
                assert!(pre3.iter().any(|u| lat.is_congruent(*u, moved, 1e-12)));
            }
        }
    }

    #[test]
    fn coprime_multiplication_permutes_torsion() {
        let (lat, _) = Lattice::reduce(c(1.1, 0.2), c(0.3, 1.4)).unwrap();
        for (n, a) in [(2u32, 3u32), (3, 4), (5, 2), (4, 5)] {
            let pts: Vec<C> = lat.torsion_points(n).iter().map(|p| p.value(&lat)).collect();
            let mut hit = vec![false; pts.len()];
            for p in &pts {
                let q = *p * f64::from(a);
                let idx = pts
                    .iter()
                    .position(|r| lat.is_congruent(*r, q, 1e-9))
                    .expect("multiplication by a coprime unit must stay in the torsion set");
                assert!(!hit[idx], "not a permutation");
                hit[idx] = true;
            }
            if a % n == 1 {
                for p in &pts {
                    assert!(lat.is_congruent(*p * f64::from(a), *p, 1e-9));
                }
            }
        }
    }

    #[test]
    fn point_reduction_roundtrip() {
        let (lat, _) = Lattice::reduce(c(0.9, -0.3), c(0.2, 1.1)).unwrap();
        let z = c(5.75, -3.25);
        let rep = lat.reduce_point(z);
        assert!(rep.reduced);
        assert!((0.0..1.0).contains(&rep.s) && (0.0..1.0).contains(&rep.t));
        assert!(lat.is_congruent(rep.z, z, 1e-9));
        let (s, t) = lat.coords(z);
        assert!((lat.from_coords(s, t) - z).norm() < 1e-12 * z.norm().max(1.0));
    }
}
