//! The canonical Green current on an elliptic curve and its translation
//! units: evaluation, automorphy, pushforward and distribution relations,
//! the Robert trace relation, and the main identity
//! `g(Nz) - N^2 g(z) = -2 sum_{s != 0} log|phi_{-s}(z)|`.

use num_complex::Complex64;
use thiserror::Error;

use crate::elliptic::{EllipticError, ModularValues, QuasiPeriods, SigmaEvaluator};
use crate::lattice::{Lattice, LatticeError};

/// Default exclusion radius around the lattice, in lattice coordinates.
pub const DEFAULT_SINGULAR_RADIUS: f64 = 0.05;

/// Congruence tolerance for exact pole/zero signals of the translation unit.
const SIGNAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreenError {
    #[error("singular input: distance {distance:.3e} to the lattice is below the exclusion radius {radius:.3e}")]
    Singular { distance: f64, radius: f64 },
    #[error("pole: evaluation point is congruent to 0 (distance {distance:.3e})")]
    Pole { distance: f64 },
    #[error("z0 must be a nonzero N-torsion value, got distance {dist_lattice:.3e} to the lattice and {dist_torsion:.3e} to N-division points")]
    InvalidTranslationPoint { dist_lattice: f64, dist_torsion: f64 },
    #[error("trace parameter a = {a} must satisfy a = 1 (mod {n})")]
    InvalidTraceParameter { a: u32, n: u32 },
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Evaluator for the canonical current
/// `g(z) = -2 log| e^{-z eta(z)/2} sigma(z) | - (1/6) log|Delta|`
/// with `eta` the R-linear quasi-period extension and `Delta` carrying the
/// weight-12 period normalization, so that `g` is invariant under
/// `(z, L) -> (c z, c L)`.
#[derive(Debug, Clone)]
pub struct GreenEvaluator {
    lattice: Lattice,
    quasi: QuasiPeriods,
    sigma: SigmaEvaluator,
    modular: ModularValues,
    singular_radius: f64,
    /// (1/12) log |Delta| including the period normalization.
    log_delta_12: f64,
}

impl GreenEvaluator {
    pub fn new(lattice: &Lattice) -> Result<Self, GreenError> {
        Self::with_singular_radius(lattice, DEFAULT_SINGULAR_RADIUS)
    }

    pub fn with_singular_radius(lattice: &Lattice, singular_radius: f64) -> Result<Self, GreenError> {
        assert!(singular_radius > 0.0);
        let quasi = QuasiPeriods::compute(lattice)?;
        let sigma = SigmaEvaluator::new(lattice)?;
        let modular = ModularValues::compute(lattice)?;
        let log_delta_12 = modular.log_abs_delta_lattice() / 12.0;
        Ok(GreenEvaluator {
            lattice: lattice.clone(),
            quasi,
            sigma,
            modular,
            singular_radius,
            log_delta_12,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn quasi_periods(&self) -> &QuasiPeriods {
        &self.quasi
    }

    pub fn sigma(&self) -> &SigmaEvaluator {
        &self.sigma
    }

    pub fn modular_values(&self) -> &ModularValues {
        &self.modular
    }

    pub fn singular_radius(&self) -> f64 {
        self.singular_radius
    }

    fn guard(&self, z: Complex64) -> Result<(), GreenError> {
        let distance = self.lattice.coord_distance_to_lattice(z);
        if distance < self.singular_radius {
            return Err(GreenError::Singular {
                distance,
                radius: self.singular_radius,
            });
        }
        Ok(())
    }

    /// The canonical current at `z`. Inputs inside the exclusion radius
    /// return a typed singular signal, never a large float.
    pub fn g_value(&self, z: Complex64) -> Result<f64, GreenError> {
        self.guard(z)?;
        let eta_z = self.quasi.eta_linear(z);
        let sigma_z = self.sigma.evaluate(z)?;
        let exp_re = (-z * eta_z / 2.0).re;
        Ok(-2.0 * (exp_re + sigma_z.norm().ln() + self.log_delta_12))
    }

    /// `| sum_{w : n w = z} g(w) - g(z) |`, the pushforward invariance
    /// residual for the isogeny [n].
    pub fn pushforward_residual(&self, n: u32, z: Complex64) -> Result<f64, GreenError> {
        let mut sum = 0.0;
        for w in self.lattice.division_preimages(z, n) {
            sum += self.g_value(w)?;
        }
        Ok((sum - self.g_value(z)?).abs())
    }

    /// `| g(N z) - sum_{s in E[N]} g(z + s) |`, the distribution relation
    /// residual.
    pub fn distribution_residual(&self, n: u32, z: Complex64) -> Result<f64, GreenError> {
        let mut sum = 0.0;
        for p in self.lattice.torsion_points(n) {
            sum += self.g_value(z + p.value(&self.lattice))?;
        }
        Ok((self.g_value(z * f64::from(n))? - sum).abs())
    }

    /// Translation unit with divisor `(z0) - (0)` for a nonzero N-torsion
    /// value `z0`.
    pub fn translation_unit(&self, z0: Complex64, order: u32) -> Result<TranslationUnit, GreenError> {
        TranslationUnit::new(self, z0, order)
    }

    /// Residual of the main identity at g = 1:
    /// `| g(N z) - N^2 g(z) + 2 sum_{s in E[N], s != 0} log|phi_{-s}(z)| |`.
    pub fn main_theorem_residual(&self, n: u32, z: Complex64) -> Result<f64, GreenError> {
        let lhs = self.g_value(z * f64::from(n))? - f64::from(n * n) * self.g_value(z)?;
        let mut log_sum = 0.0;
        for p in self.lattice.torsion_points(n) {
            if p.is_zero() {
                continue;
            }
            let unit = self.translation_unit(-p.value(&self.lattice), n)?;
            let phi = unit.phi_value(z)?;
            log_sum += phi.norm().ln();
        }
        Ok((lhs + 2.0 * log_sum).abs())
    }
}

/// The translation unit
/// `phi(z) = e^{z eta(z0) - z0 eta(z0)/2} sigma(z - z0) / sigma(z)`
/// with a simple zero at `z0`, a simple pole at `0`, and `phi^N` periodic.
#[derive(Debug, Clone)]
pub struct TranslationUnit {
    lattice: Lattice,
    quasi: QuasiPeriods,
    sigma: SigmaEvaluator,
    z0: Complex64,
    order: u32,
    eta_z0: Complex64,
}

impl TranslationUnit {
    pub fn new(green: &GreenEvaluator, z0: Complex64, order: u32) -> Result<Self, GreenError> {
        assert!(order >= 1);
        let lattice = green.lattice.clone();
        let dist_lattice = lattice.coord_distance_to_lattice(z0);
        let dist_torsion = lattice.coord_distance_to_lattice(z0 * f64::from(order));
        if dist_lattice <= SIGNAL_TOL || dist_torsion > SIGNAL_TOL {
            return Err(GreenError::InvalidTranslationPoint {
                dist_lattice,
                dist_torsion,
            });
        }
        let eta_z0 = green.quasi.eta_linear(z0);
        Ok(TranslationUnit {
            lattice,
            quasi: green.quasi.clone(),
            sigma: green.sigma.clone(),
            z0,
            order,
            eta_z0,
        })
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// phi(z). A pole signal is raised for `z = 0 (mod L)`; `z = z0 (mod L)`
    /// returns exactly zero.
    pub fn phi_value(&self, z: Complex64) -> Result<Complex64, GreenError> {
        let pole_dist = self.lattice.coord_distance_to_lattice(z);
        if pole_dist <= SIGNAL_TOL {
            return Err(GreenError::Pole { distance: pole_dist });
        }
        if self.lattice.coord_distance_to_lattice(z - self.z0) <= SIGNAL_TOL {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let prefactor = (z * self.eta_z0 - self.z0 * self.eta_z0 / 2.0).exp();
        Ok(prefactor * self.sigma.evaluate(z - self.z0)? / self.sigma.evaluate(z)?)
    }

    /// The automorphy factor `alpha(omega, z0) = e^{omega eta(z0) - eta(omega) z0}`
    /// for the lattice element `omega = m omega1 + n omega2`; a unit-modulus
    /// homomorphism whose image has order dividing N.
    pub fn automorphy_factor(&self, m: i64, n: i64) -> Complex64 {
        let omega = self.lattice.omega1() * (m as f64) + self.lattice.omega2() * (n as f64);
        let eta_omega = self.quasi.eta_of_lattice_element(m, n);
        (omega * self.eta_z0 - eta_omega * self.z0).exp()
    }

    /// Robert's distribution relation for `P(z) = prod_{w : a w = z} phi(w)`
    /// with `a = 1 (mod N)`: over the given sample points, returns the
    /// maximal modulus residual `| |P/phi| - 1 |` and the maximal drift of
    /// `arg(P/phi)` (the ratio is a constant root of unity).
    pub fn robert_trace_check(&self, a: u32, samples: &[Complex64]) -> Result<(f64, f64), GreenError> {
        if a % self.order != 1 {
            return Err(GreenError::InvalidTraceParameter { a, n: self.order });
        }
        let mut modulus_residual = 0.0f64;
        let mut reference_arg: Option<f64> = None;
        let mut phase_drift = 0.0f64;
        for &z in samples {
            let mut product = Complex64::new(1.0, 0.0);
            for w in self.lattice.division_preimages(z, a) {
                product *= self.phi_value(w)?;
            }
            let ratio = product / self.phi_value(z)?;
            modulus_residual = modulus_residual.max((ratio.norm() - 1.0).abs());
            let arg = ratio.arg();
            match reference_arg {
                None => reference_arg = Some(arg),
                Some(reference) => {
                    let mut drift = (arg - reference).abs();
                    if drift > std::f64::consts::PI {
                        drift = 2.0 * std::f64::consts::PI - drift;
                    }
                    phase_drift = phase_drift.max(drift);
                }
            }
        }
        Ok((modulus_residual, phase_drift))
    }
}
