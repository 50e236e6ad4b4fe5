//! Special functions on a reduced lattice: Weierstrass sigma through the odd
//! theta series, quasi-periods, Dedekind eta and the discriminant.
//!
//! Quasi-periods are computed from the weight-2 Eisenstein q-expansion and
//! cross-validated at construction time against an independent route, the
//! Weierstrass zeta function at the half-periods evaluated by direct lattice
//! summation with Eisenstein-series tail acceleration. Disagreement is an
//! error, not a warning.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::Lattice;

/// Relative series cutoff; leaves ample headroom below f64 resolution.
const SERIES_EPS: f64 = 5e-16;
/// Agreement demanded between the q-expansion and lattice-sum quasi-periods.
const QP_CROSS_TOL: f64 = 1e-8;
/// Agreement demanded between the eta-product and Eisenstein discriminants.
const DELTA_CROSS_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("q-series did not reach target accuracy within {bound} terms")]
    TruncationFailure { bound: usize },
    #[error("quasi-period routes disagree: q-expansion vs lattice sum differ by {delta:.3e} (tol {tol:.1e})")]
    QuasiPeriodMismatch { delta: f64, tol: f64 },
    #[error("discriminant cross-check failed: eta-product vs g2^3 - 27 g3^2 differ by {delta:.3e} relative (tol {tol:.1e})")]
    DiscriminantMismatch { delta: f64, tol: f64 },
}

fn i2pi() -> Complex64 {
    Complex64::new(0.0, 2.0 * PI)
}

/// q = exp(2 pi i tau), the square of the half-nome.
pub fn nome_sq(tau: Complex64) -> Complex64 {
    (Complex64::i() * 2.0 * PI * tau).exp()
}

/// Lambert-type Eisenstein series 1 + c * sum_{n>=1} n^p q^n / (1 - q^n).
fn eisenstein_series(tau: Complex64, p: u32, c: f64) -> Complex64 {
    let q = nome_sq(tau);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for n in 1..=4000u32 {
        qn *= q;
        let term = (n as f64).powi(p as i32) * qn / (Complex64::new(1.0, 0.0) - qn);
        sum += term;
        if term.norm() < SERIES_EPS * (1.0 + sum.norm()) {
            break;
        }
    }
    Complex64::new(1.0, 0.0) + c * sum
}

/// E2(tau) = 1 - 24 sum sigma_1(n) q^n.
pub fn eisenstein_e2(tau: Complex64) -> Complex64 {
    eisenstein_series(tau, 1, -24.0)
}

/// E4(tau) = 1 + 240 sum sigma_3(n) q^n.
pub fn eisenstein_e4(tau: Complex64) -> Complex64 {
    eisenstein_series(tau, 3, 240.0)
}

/// E6(tau) = 1 - 504 sum sigma_5(n) q^n.
pub fn eisenstein_e6(tau: Complex64) -> Complex64 {
    eisenstein_series(tau, 5, -504.0)
}

/// Dedekind eta(tau) = q^{1/24} prod (1 - q^n), valid for any Im tau > 0.
pub fn dedekind_eta_tau(tau: Complex64) -> Complex64 {
    let q = nome_sq(tau);
    let mut product = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 1..=4000u32 {
        qn *= q;
        product *= Complex64::new(1.0, 0.0) - qn;
        if qn.norm() < SERIES_EPS {
            break;
        }
    }
    (Complex64::i() * PI * tau / 12.0).exp() * product
}

/// Delta(tau) = (2 pi)^12 eta(tau)^24 for the normalized lattice Z + Z tau.
pub fn discriminant_tau(tau: Complex64) -> Complex64 {
    let eta = dedekind_eta_tau(tau);
    (2.0 * PI).powi(12) * eta.powi(24)
}

/// Delta(tau) from the weight 4 and 6 Eisenstein series,
/// (2 pi)^12 (E4^3 - E6^2)/1728. Independent of the eta product.
pub fn discriminant_from_eisenstein(tau: Complex64) -> Complex64 {
    let e4 = eisenstein_e4(tau);
    let e6 = eisenstein_e6(tau);
    (2.0 * PI).powi(12) * (e4.powi(3) - e6.powi(2)) / 1728.0
}

/// Direct lattice summation with Eisenstein-series tail acceleration.
///
/// Everything here works on the normalized lattice Z + Z tau and is kept
/// independent of the q-expansion route used by [`QuasiPeriods`]: the only
/// series involved are absolutely convergent sums over lattice points, with
/// tails corrected by exact boundary integrals.
pub mod lattice_sums {
    use super::*;

    /// Integral of w^{-k} over the complement of the centered fundamental
    /// parallelogram of half-width `half`, via the exact boundary integral
    /// (i/2) oint w^{-k} conj(w) dw along the positively oriented boundary.
    fn outside_integral(tau: Complex64, k: i32, half: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let corners = [
            -half * one - half * tau,
            half * one - half * tau,
            half * one + half * tau,
            -half * one + half * tau,
        ];
        let mut total = Complex64::new(0.0, 0.0);
        for s in 0..4 {
            let a = corners[s];
            let b = corners[(s + 1) % 4];
            let q = b - a;
            // int_a^b [(conj(a) - conj(q) a / q) u^{-k} + (conj(q)/q) u^{1-k}] du
            let c1 = a.conj() - q.conj() * a / q;
            let c2 = q.conj() / q;
            let p1 = (b.powi(1 - k) - a.powi(1 - k)) / ((1 - k) as f64);
            let p2 = (b.powi(2 - k) - a.powi(2 - k)) / ((2 - k) as f64);
            total += c1 * p1 + c2 * p2;
        }
        Complex64::new(0.0, 0.5) * total
    }

    /// Euler-Maclaurin tail of a box-truncated sum of w^{-k}: point values
    /// differ from cell averages by the second and fourth complex cell
    /// moments, and the cell-average total over the outside region is an
    /// exact boundary integral.
    fn eisenstein_tail(tau: Complex64, k: i32, half: f64) -> Complex64 {
        let area = tau.im;
        let mu2 = (Complex64::new(1.0, 0.0) + tau * tau) / 12.0;
        let m4 = (Complex64::new(1.0, 0.0) + tau.powi(4)) / 80.0 + tau * tau / 24.0;
        let i_of = |j: i32| outside_integral(tau, j, half) / area;
        let kk = |j: i32| (j * (j + 1)) as f64;
        // S(k) ~ I_k - mu2/2 k(k+1) S(k+2) - m4/24 k..(k+3) I_{k+4}
        let inner = i_of(k + 2) - mu2 / 2.0 * kk(k + 2) * i_of(k + 4);
        i_of(k) - mu2 / 2.0 * kk(k) * inner - m4 / 24.0 * kk(k) * kk(k + 2) * i_of(k + 4)
    }

    /// Eisenstein sum G_k = sum' omega^{-k} over Z + Z tau (even k >= 4):
    /// box sum plus the tail correction.
    pub fn eisenstein_gk(tau: Complex64, k: i32, m_box: i64) -> Complex64 {
        debug_assert!(k >= 4 && k % 2 == 0);
        let mut sum = Complex64::new(0.0, 0.0);
        for m in -m_box..=m_box {
            for n in -m_box..=m_box {
                if m == 0 && n == 0 {
                    continue;
                }
                let w = Complex64::new(m as f64, 0.0) + (n as f64) * tau;
                sum += w.powi(-k);
            }
        }
        sum + eisenstein_tail(tau, k, m_box as f64 + 0.5)
    }

    /// Shared lattice-sum evaluator: the Eisenstein values G_4..G_14 are
    /// accumulated in a single pass over the box and reused for every
    /// zeta evaluation on the same lattice.
    pub struct ZetaOracle {
        tau: Complex64,
        gk: [Complex64; 6],
    }

    impl ZetaOracle {
        pub fn new(tau: Complex64) -> Self {
            let m_box = 40i64.max((12.0 * tau.norm()).ceil() as i64);
            let mut gk = [Complex64::new(0.0, 0.0); 6];
            for m in -m_box..=m_box {
                for n in -m_box..=m_box {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    let w = Complex64::new(m as f64, 0.0) + (n as f64) * tau;
                    let w2 = 1.0 / (w * w);
                    let mut p = w2 * w2;
                    for slot in gk.iter_mut() {
                        *slot += p;
                        p *= w2;
                    }
                }
            }
            let half = m_box as f64 + 0.5;
            for (idx, slot) in gk.iter_mut().enumerate() {
                *slot += eisenstein_tail(tau, 4 + 2 * idx as i32, half);
            }
            ZetaOracle { tau, gk }
        }

        /// Weierstrass zeta by the absolutely convergent corrected sum: the
        /// residual kernel (z/w)^{K+1}/(z-w) is summed over a box and the
        /// subtracted geometric-series heads are restored through G_4..G_14.
        pub fn zeta(&self, z: Complex64) -> Complex64 {
            const K: i32 = 13;
            let m_box = 26i64.max((3.0 * (z.norm() + 1.0)).ceil() as i64);
            let mut sum = 1.0 / z;
            for m in -m_box..=m_box {
                for n in -m_box..=m_box {
                    if m == 0 && n == 0 {
                        continue;
                    }
                    let w = Complex64::new(m as f64, 0.0) + (n as f64) * self.tau;
                    sum += (z / w).powi(K + 1) / (z - w);
                }
            }
            for (idx, g) in self.gk.iter().enumerate() {
                sum -= z.powi(3 + 2 * idx as i32) * g;
            }
            sum
        }
    }

    /// Weierstrass zeta for Z + Z tau (one-shot convenience).
    pub fn weierstrass_zeta(tau: Complex64, z: Complex64) -> Complex64 {
        ZetaOracle::new(tau).zeta(z)
    }

    /// Quasi-periods of Z + Z tau as 2 zeta(half-period).
    pub fn quasi_periods_by_lattice_sum(tau: Complex64) -> (Complex64, Complex64) {
        let oracle = ZetaOracle::new(tau);
        let eta1 = 2.0 * oracle.zeta(Complex64::new(0.5, 0.0));
        let eta2 = 2.0 * oracle.zeta(tau / 2.0);
        (eta1, eta2)
    }
}

/// The pair (eta1, eta2) of quasi-periods with its R-linear extension.
///
/// Carries the Legendre relation `eta1*omega2 - eta2*omega1 = 2 pi i` for the
/// oriented basis.
#[derive(Debug, Clone)]
pub struct QuasiPeriods {
    eta1: Complex64,
    eta2: Complex64,
    lattice: Lattice,
}

impl QuasiPeriods {
    /// Computes the quasi-periods of a reduced lattice.
    ///
    /// eta1 comes from the weight-2 Eisenstein expansion (G_2 = pi^2/3 E2 on
    /// the normalized lattice), eta2 closes the Legendre relation; both are
    /// then checked against the lattice-sum route to [`QP_CROSS_TOL`].
    pub fn compute(lattice: &Lattice) -> Result<Self, EllipticError> {
        let tau = lattice.tau();
        let omega1 = lattice.omega1();
        let g2_norm = PI * PI / 3.0 * eisenstein_e2(tau);
        let eta1 = g2_norm / omega1;
        let eta2 = (eta1 * lattice.omega2() - i2pi()) / omega1;

        let (o1, o2) = lattice_sums::quasi_periods_by_lattice_sum(tau);
        let scale = eta1.norm() + eta2.norm();
        let delta = ((o1 / omega1) - eta1).norm().max(((o2 / omega1) - eta2).norm());
        if delta > QP_CROSS_TOL * scale {
            return Err(EllipticError::QuasiPeriodMismatch {
                delta: delta / scale,
                tol: QP_CROSS_TOL,
            });
        }
        Ok(QuasiPeriods {
            eta1,
            eta2,
            lattice: lattice.clone(),
        })
    }

    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// The R-linear extension: for z = s*omega1 + t*omega2 with s, t real,
    /// returns s*eta1 + t*eta2.
    pub fn eta_linear(&self, z: Complex64) -> Complex64 {
        let (s, t) = self.lattice.coords(z);
        self.eta1 * s + self.eta2 * t
    }

    /// Quasi-period of the lattice element m*omega1 + n*omega2.
    pub fn eta_of_lattice_element(&self, m: i64, n: i64) -> Complex64 {
        self.eta1 * (m as f64) + self.eta2 * (n as f64)
    }

    /// Residual of the Legendre relation, |eta1 w2 - eta2 w1 - 2 pi i|.
    pub fn legendre_residual(&self) -> f64 {
        (self.eta1 * self.lattice.omega2() - self.eta2 * self.lattice.omega1() - i2pi()).norm()
    }
}

/// Sign of the sigma periodicity law: +1 iff omega/2 is again a lattice
/// point, i.e. iff both coordinates are even.
pub fn sigma_period_sign(m: i64, n: i64) -> f64 {
    if m % 2 == 0 && n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Weierstrass sigma through the odd theta function with the exponential
/// prefactor; the q-series decays like |q|^{(k+1/2)^2}, so a reduced modulus
/// needs fewer than 20 terms for full double precision.
#[derive(Debug, Clone)]
pub struct SigmaEvaluator {
    lattice: Lattice,
    /// Half-nome exp(i pi tau).
    q: Complex64,
    /// Quasi-period eta1 of the normalized lattice Z + Z tau.
    eta1_norm: Complex64,
    theta1_prime0: Complex64,
    truncation_bound: usize,
    target_eps: f64,
}

impl SigmaEvaluator {
    pub fn new(lattice: &Lattice) -> Result<Self, EllipticError> {
        Self::with_accuracy(lattice, 64, SERIES_EPS)
    }

    pub fn with_accuracy(
        lattice: &Lattice,
        truncation_bound: usize,
        target_eps: f64,
    ) -> Result<Self, EllipticError> {
        let tau = lattice.tau();
        let q = (Complex64::i() * PI * tau).exp();
        let eta1_norm = PI * PI / 3.0 * eisenstein_e2(tau);
        let mut eval = SigmaEvaluator {
            lattice: lattice.clone(),
            q,
            eta1_norm,
            theta1_prime0: Complex64::new(0.0, 0.0),
            truncation_bound,
            target_eps,
        };
        eval.theta1_prime0 = eval.theta1_derivative_at_zero()?;
        Ok(eval)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn nome(&self) -> Complex64 {
        self.q
    }

    pub fn truncation_bound(&self) -> usize {
        self.truncation_bound
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    /// theta_1(u) = 2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1)u).
    fn theta1(&self, u: Complex64) -> Result<Complex64, EllipticError> {
        let log_q = Complex64::i() * PI * self.lattice.tau();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut peak = 0.0f64;
        for n in 0..self.truncation_bound {
            let half = n as f64 + 0.5;
            let coeff = (log_q * half * half).exp();
            let term = coeff * ((2.0 * n as f64 + 1.0) * u).sin() * if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += term;
            let mag = term.norm();
            peak = peak.max(mag);
            if mag < self.target_eps * peak.max(sum.norm()) && n >= 2 {
                return Ok(2.0 * sum);
            }
        }
        Err(EllipticError::TruncationFailure {
            bound: self.truncation_bound,
        })
    }

    fn theta1_derivative_at_zero(&self) -> Result<Complex64, EllipticError> {
        let log_q = Complex64::i() * PI * self.lattice.tau();
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..self.truncation_bound {
            let half = n as f64 + 0.5;
            let odd = 2.0 * n as f64 + 1.0;
            let term = (log_q * half * half).exp() * odd * if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += term;
            if term.norm() < self.target_eps * sum.norm() && n >= 2 {
                return Ok(2.0 * sum);
            }
        }
        Err(EllipticError::TruncationFailure {
            bound: self.truncation_bound,
        })
    }

    /// sigma(z) for the lattice, via sigma(c z; c L) = c sigma(z; L) applied
    /// to the normalized lattice.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        let omega1 = self.lattice.omega1();
        Ok(omega1 * self.evaluate_normalized(z / omega1)?)
    }

    /// sigma(v) for Z + Z tau: exp(eta1 v^2 / 2) theta1(pi v) / (pi theta1'(0)).
    fn evaluate_normalized(&self, v: Complex64) -> Result<Complex64, EllipticError> {
        let theta = self.theta1(PI * v)?;
        Ok((self.eta1_norm * v * v / 2.0).exp() * theta / (PI * self.theta1_prime0))
    }
}

/// Dedekind eta and the discriminant of the (normalized) modulus.
#[derive(Debug, Clone)]
pub struct ModularValues {
    dedekind_eta: Complex64,
    delta: Complex64,
    lattice: Lattice,
}

impl ModularValues {
    /// Computes eta by the q-product and Delta = (2 pi)^12 eta^24,
    /// cross-checked against g2^3 - 27 g3^2 from the Eisenstein series.
    pub fn compute(lattice: &Lattice) -> Result<Self, EllipticError> {
        let tau = lattice.tau();
        let eta = dedekind_eta_tau(tau);
        let delta = (2.0 * PI).powi(12) * eta.powi(24);
        let check = discriminant_from_eisenstein(tau);
        let delta_rel = (delta - check).norm() / delta.norm();
        if !(delta_rel < DELTA_CROSS_TOL) {
            return Err(EllipticError::DiscriminantMismatch {
                delta: delta_rel,
                tol: DELTA_CROSS_TOL,
            });
        }
        Ok(ModularValues {
            dedekind_eta: eta,
            delta,
            lattice: lattice.clone(),
        })
    }

    pub fn dedekind_eta(&self) -> Complex64 {
        self.dedekind_eta
    }

    /// Delta(tau) of the normalized modulus (no period normalization).
    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// log |Delta| of the lattice itself, i.e. with the weight-12 period
    /// normalization log|Delta(tau)| - 12 log|omega1|.
    pub fn log_abs_delta_lattice(&self) -> f64 {
        self.delta.norm().ln() - 12.0 * self.lattice.omega1().norm().ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn square_lattice() -> Lattice {
        Lattice::normalized(c(0.0, 1.0)).unwrap()
    }

    #[test]
    fn dedekind_eta_at_i() {
        // eta(i) = Gamma(1/4) / (2 pi^{3/4})
        let gamma_quarter = 3.625_609_908_221_908_3_f64;
        let expected = gamma_quarter / (2.0 * PI.powf(0.75));
        let eta = dedekind_eta_tau(c(0.0, 1.0));
        assert!(eta.im.abs() < 1e-15);
        assert!((eta.re - expected).abs() < 1e-12, "eta(i) = {}", eta.re);
    }

    #[test]
    fn discriminant_modularity() {
        // |Delta(-1/tau)| = |tau|^12 |Delta(tau)| at tau = 2i
        let tau = c(0.0, 2.0);
        let lhs = discriminant_tau(-1.0 / tau).norm();
        let rhs = tau.norm().powi(12) * discriminant_tau(tau).norm();
        assert!((lhs / rhs - 1.0).abs() < 1e-10);
        // |Delta| depends only on q: tau and tau + 1 agree
        let a = discriminant_tau(c(-0.2, 1.6)).norm();
        let b = discriminant_tau(c(0.8, 1.6)).norm();
        assert!((a / b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eisenstein_lattice_sums_match_q_series() {
        // G_4 = pi^4/45 E4 and G_6 = 2 pi^6/945 E6
        for tau in [c(0.0, 1.0), c(0.0, 2.0), c(0.5, 0.8660254037844386), c(-0.2, 1.6)] {
            let g4 = lattice_sums::eisenstein_gk(tau, 4, 40);
            let g4_q = PI.powi(4) / 45.0 * eisenstein_e4(tau);
            assert!(
                (g4 - g4_q).norm() < 1e-9 * g4_q.norm().max(1.0),
                "G4 mismatch at {tau}: {g4} vs {g4_q}"
            );
            let g6 = lattice_sums::eisenstein_gk(tau, 6, 40);
            let g6_q = 2.0 * PI.powi(6) / 945.0 * eisenstein_e6(tau);
            assert!(
                (g6 - g6_q).norm() < 1e-9 * g6_q.norm().max(1.0),
                "G6 mismatch at {tau}: {g6} vs {g6_q}"
            );
        }
    }

    #[test]
    fn quasi_periods_of_square_lattice() {
        let qp = QuasiPeriods::compute(&square_lattice()).unwrap();
        assert!((qp.eta1() - c(PI, 0.0)).norm() < 1e-10);
        assert!((qp.eta2() - c(0.0, -PI)).norm() < 1e-10);
        assert!(qp.legendre_residual() < 1e-12);
    }

    #[test]
    fn quasi_periods_scale_inversely() {
        let (base, _) = Lattice::reduce(c(1.0, 0.0), c(0.25, 1.25)).unwrap();
        let scale = c(1.7, -0.6);
        let (scaled, _) = Lattice::reduce(base.omega1() * scale, base.omega2() * scale).unwrap();
        let qp = QuasiPeriods::compute(&base).unwrap();
        let qps = QuasiPeriods::compute(&scaled).unwrap();
        assert!((qps.eta1() - qp.eta1() / scale).norm() < 1e-9 * qp.eta1().norm());
        assert!((qps.eta2() - qp.eta2() / scale).norm() < 1e-9 * qp.eta2().norm());
    }

    #[test]
    fn eta_linear_examples() {
        let qp = QuasiPeriods::compute(&square_lattice()).unwrap();
        assert!((qp.eta_linear(c(1.0, 0.0)) - qp.eta1()).norm() < 1e-12);
        let mid = qp.eta_linear(c(0.5, 0.5));
        assert!((mid - (qp.eta1() + qp.eta2()) / 2.0).norm() < 1e-12);
        // z = i on Z + Zi gives eta2 = -pi i
        assert!((qp.eta_linear(c(0.0, 1.0)) - c(0.0, -PI)).norm() < 1e-10);
        // R-linearity, not C-linearity: eta(i z) != i eta(z) in general
        let z = c(0.3, 0.4);
        let sum = qp.eta_linear(z) + qp.eta_linear(c(0.2, -0.1));
        assert!((qp.eta_linear(z + c(0.2, -0.1)) - sum).norm() < 1e-12);
    }

    #[test]
    fn sigma_is_odd_and_normalized() {
        let sig = SigmaEvaluator::new(&square_lattice()).unwrap();
        for z in [c(0.31, 0.17), c(-0.4, 0.62), c(0.05, -0.33)] {
            let a = sig.evaluate(z).unwrap();
            let b = sig.evaluate(-z).unwrap();
            assert!((a + b).norm() < 1e-14 * a.norm().max(1e-300));
        }
        let z = c(1e-6, 0.0);
        let ratio = sig.evaluate(z).unwrap() / z;
        assert!((ratio - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn sigma_periodicity_law() {
        let (lat, _) = Lattice::reduce(c(1.1, 0.1), c(-0.2, 1.3)).unwrap();
        let sig = SigmaEvaluator::new(&lat).unwrap();
        let qp = QuasiPeriods::compute(&lat).unwrap();
        let z = c(0.23, 0.39);
        for (m, n) in [(1i64, 0i64), (0, 1), (1, 1), (2, 0), (-1, 2)] {
            let omega = lat.omega1() * (m as f64) + lat.omega2() * (n as f64);
            let eta = qp.eta_of_lattice_element(m, n);
            let lhs = sig.evaluate(z + omega).unwrap();
            let rhs = sigma_period_sign(m, n) * (eta * (z + omega / 2.0)).exp() * sig.evaluate(z).unwrap();
            assert!(
                (lhs - rhs).norm() < 1e-9 * lhs.norm(),
                "periodicity failed for ({m},{n}): {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn sigma_homogeneity() {
        let (base, _) = Lattice::reduce(c(1.0, 0.0), c(0.3, 1.2)).unwrap();
        let scale = c(0.8, 1.1);
        let (scaled, _) = Lattice::reduce(base.omega1() * scale, base.omega2() * scale).unwrap();
        let s0 = SigmaEvaluator::new(&base).unwrap();
        let s1 = SigmaEvaluator::new(&scaled).unwrap();
        for z in [c(0.21, 0.11), c(-0.33, 0.47)] {
            let lhs = s1.evaluate(scale * z).unwrap();
            let rhs = scale * s0.evaluate(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * rhs.norm());
        }
    }

    #[test]
    fn log_derivative_of_sigma_matches_zeta_oracle() {
        let lat = square_lattice();
        let sig = SigmaEvaluator::new(&lat).unwrap();
        let z = c(0.27, 0.34);
        let h = 1e-5;
        let d = (sig.evaluate(z + c(h, 0.0)).unwrap() - sig.evaluate(z - c(h, 0.0)).unwrap())
            / (2.0 * h)
            / sig.evaluate(z).unwrap();
        let zeta = lattice_sums::weierstrass_zeta(lat.tau(), z);
        assert!((d - zeta).norm() < 1e-5, "sigma'/sigma = {d}, zeta = {zeta}");
    }

    #[test]
    fn modular_values_cross_check_passes() {
        let mv = ModularValues::compute(&square_lattice()).unwrap();
        assert!(mv.delta().norm() > 0.0);
        // Delta(i) is real and positive
        assert!(mv.delta().im.abs() < 1e-12 * mv.delta().re);
    }

    #[test]
    fn quasi_periods_for_eccentric_moduli() {
        // the cross-validation against the lattice-sum route must hold even
        // far from the square torus
        for tau in [c(0.0, 5.0), c(0.5, 8.0), c(-0.49, 1.02), c(0.37, 3.3)] {
            let lattice = Lattice::normalized(tau).unwrap();
            let qp = QuasiPeriods::compute(&lattice)
                .unwrap_or_else(|e| panic!("cross-check failed at tau = {tau}: {e}"));
            assert!(qp.legendre_residual() < 1e-10);
        }
    }

    #[test]
    fn sigma_vanishes_at_lattice_points() {
        // the zero is exact up to eps at the scale of the local derivative
        // (automorphy makes |sigma'| grow doubly exponentially farther out)
        let lat = square_lattice();
        let sig = SigmaEvaluator::new(&lat).unwrap();
        for (m, n) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (-1.0, 1.0)] {
            let z = c(m, n);
            let v = sig.evaluate(z).unwrap();
            assert!(v.norm() < 1e-9, "sigma({z}) = {v}");
        }
    }

    #[test]
    fn zeta_oracle_satisfies_quasi_periodicity() {
        // zeta(z + 1) - zeta(z) = eta1 directly from the lattice-sum route
        let tau = c(-0.2, 1.6);
        let z = c(0.21, 0.4);
        let eta1 = 2.0 * lattice_sums::weierstrass_zeta(tau, c(0.5, 0.0));
        let diff = lattice_sums::weierstrass_zeta(tau, z + c(1.0, 0.0))
            - lattice_sums::weierstrass_zeta(tau, z);
        assert!((diff - eta1).norm() < 1e-9);
    }
}
