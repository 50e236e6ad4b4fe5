//! C ABI over the verification laboratory.
//!
//! Conventions: every fallible call returns a [`GpStatus`]; results come
//! back through out-pointers; handles are opaque and freed with their
//! matching `_free` function. A textual description of the most recent
//! error on the current thread is available through
//! [`gp_last_error_message`] and stays valid until the next failing call
//! on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;

use greenpol::currents;
use greenpol::green::{GreenError, GreenEvaluator, TranslationUnit};
use greenpol::lattice::{Lattice, LatticeError};

/// Status codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateLattice = 3,
    PrecisionLoss = 4,
    /// Evaluation inside the exclusion radius around the lattice.
    SingularInput = 5,
    /// Evaluation at a pole of the translation unit.
    Pole = 6,
    DerivationFailed = 7,
    InternalPanic = 8,
}

/// An oriented rank-2 lattice with reduced modulus (opaque).
pub struct GpLattice(Lattice);

/// Evaluator for the canonical Green current (opaque).
pub struct GpGreen(GreenEvaluator);

/// A translation unit phi with divisor (z0) - (0) (opaque).
pub struct GpTranslationUnit(TranslationUnit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
}

fn status_of_green_error(e: &GreenError) -> GpStatus {
    match e {
        GreenError::Singular { .. } => GpStatus::SingularInput,
        GreenError::Pole { .. } => GpStatus::Pole,
        GreenError::InvalidTranslationPoint { .. } | GreenError::InvalidTraceParameter { .. } => {
            GpStatus::InvalidArgument
        }
        GreenError::Elliptic(_) => GpStatus::PrecisionLoss,
        GreenError::Lattice(LatticeError::Degenerate | LatticeError::ZeroPeriod) => {
            GpStatus::DegenerateLattice
        }
        GreenError::Lattice(LatticeError::PrecisionLoss) => GpStatus::PrecisionLoss,
    }
}

fn guarded(body: impl FnOnce() -> GpStatus) -> GpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic across the FFI boundary".into());
            GpStatus::InternalPanic
        }
    }
}

/// Most recent error message on this thread, or NULL when none was
/// recorded. The pointer stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn gp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Reduces the lattice spanned by omega1 and omega2 and returns a handle.
#[no_mangle]
pub extern "C" fn gp_lattice_reduce(
    omega1_re: f64,
    omega1_im: f64,
    omega2_re: f64,
    omega2_im: f64,
    out: *mut *mut GpLattice,
) -> GpStatus {
    guarded(|| {
        if out.is_null() {
            return GpStatus::NullPointer;
        }
        let omega1 = Complex64::new(omega1_re, omega1_im);
        let omega2 = Complex64::new(omega2_re, omega2_im);
        match Lattice::reduce(omega1, omega2) {
            Ok((lattice, _)) => {
                unsafe { *out = Box::into_raw(Box::new(GpLattice(lattice))) };
                GpStatus::Ok
            }
            Err(e) => {
                let status = match e {
                    LatticeError::PrecisionLoss => GpStatus::PrecisionLoss,
                    _ => GpStatus::DegenerateLattice,
                };
                set_error(e.to_string());
                status
            }
        }
    })
}

/// Reduced modulus of the lattice.
#[no_mangle]
pub extern "C" fn gp_lattice_tau(
    lattice: *const GpLattice,
    out_re: *mut f64,
    out_im: *mut f64,
) -> GpStatus {
    guarded(|| {
        if lattice.is_null() || out_re.is_null() || out_im.is_null() {
            return GpStatus::NullPointer;
        }
        let tau = unsafe { &(*lattice).0 }.tau();
        unsafe {
            *out_re = tau.re;
            *out_im = tau.im;
        }
        GpStatus::Ok
    })
}

#[no_mangle]
pub extern "C" fn gp_lattice_free(lattice: *mut GpLattice) {
    if !lattice.is_null() {
        drop(unsafe { Box::from_raw(lattice) });
    }
}

/// Builds a canonical-current evaluator; `singular_radius <= 0` selects the
/// default exclusion radius 0.05 (in lattice coordinates).
#[no_mangle]
pub extern "C" fn gp_green_new(
    lattice: *const GpLattice,
    singular_radius: f64,
    out: *mut *mut GpGreen,
) -> GpStatus {
    guarded(|| {
        if lattice.is_null() || out.is_null() {
            return GpStatus::NullPointer;
        }
        let lattice = unsafe { &(*lattice).0 };
        let radius = if singular_radius > 0.0 {
            singular_radius
        } else {
            greenpol::green::DEFAULT_SINGULAR_RADIUS
        };
        match GreenEvaluator::with_singular_radius(lattice, radius) {
            Ok(green) => {
                unsafe { *out = Box::into_raw(Box::new(GpGreen(green))) };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn gp_green_free(green: *mut GpGreen) {
    if !green.is_null() {
        drop(unsafe { Box::from_raw(green) });
    }
}

/// The canonical current g at z = z_re + i z_im.
#[no_mangle]
pub extern "C" fn gp_green_value(
    green: *const GpGreen,
    z_re: f64,
    z_im: f64,
    out: *mut f64,
) -> GpStatus {
    guarded(|| {
        if green.is_null() || out.is_null() {
            return GpStatus::NullPointer;
        }
        match unsafe { &(*green).0 }.g_value(Complex64::new(z_re, z_im)) {
            Ok(v) => {
                unsafe { *out = v };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

/// Weierstrass sigma at z for the evaluator's lattice.
#[no_mangle]
pub extern "C" fn gp_green_sigma(
    green: *const GpGreen,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> GpStatus {
    guarded(|| {
        if green.is_null() || out_re.is_null() || out_im.is_null() {
            return GpStatus::NullPointer;
        }
        match unsafe { &(*green).0 }.sigma().evaluate(Complex64::new(z_re, z_im)) {
            Ok(v) => {
                unsafe {
                    *out_re = v.re;
                    *out_im = v.im;
                }
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                GpStatus::PrecisionLoss
            }
        }
    })
}

/// Quasi-periods (eta1, eta2) of the evaluator's lattice.
#[no_mangle]
pub extern "C" fn gp_green_quasi_periods(
    green: *const GpGreen,
    eta1_re: *mut f64,
    eta1_im: *mut f64,
    eta2_re: *mut f64,
    eta2_im: *mut f64,
) -> GpStatus {
    guarded(|| {
        if green.is_null()
            || eta1_re.is_null()
            || eta1_im.is_null()
            || eta2_re.is_null()
            || eta2_im.is_null()
        {
            return GpStatus::NullPointer;
        }
        let qp = unsafe { &(*green).0 }.quasi_periods();
        unsafe {
            *eta1_re = qp.eta1().re;
            *eta1_im = qp.eta1().im;
            *eta2_re = qp.eta2().re;
            *eta2_im = qp.eta2().im;
        }
        GpStatus::Ok
    })
}

/// Builds the translation unit with divisor (z0) - (0) for a nonzero
/// N-torsion value z0.
#[no_mangle]
pub extern "C" fn gp_translation_unit_new(
    green: *const GpGreen,
    z0_re: f64,
    z0_im: f64,
    order: u32,
    out: *mut *mut GpTranslationUnit,
) -> GpStatus {
    guarded(|| {
        if green.is_null() || out.is_null() {
            return GpStatus::NullPointer;
        }
        if order == 0 {
            set_error("torsion order must be positive".into());
            return GpStatus::InvalidArgument;
        }
        match unsafe { &(*green).0 }.translation_unit(Complex64::new(z0_re, z0_im), order) {
            Ok(unit) => {
                unsafe { *out = Box::into_raw(Box::new(GpTranslationUnit(unit))) };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

#[no_mangle]
pub extern "C" fn gp_translation_unit_free(unit: *mut GpTranslationUnit) {
    if !unit.is_null() {
        drop(unsafe { Box::from_raw(unit) });
    }
}

/// phi(z); a pole of phi reports GpStatus::Pole.
#[no_mangle]
pub extern "C" fn gp_phi_value(
    unit: *const GpTranslationUnit,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> GpStatus {
    guarded(|| {
        if unit.is_null() || out_re.is_null() || out_im.is_null() {
            return GpStatus::NullPointer;
        }
        match unsafe { &(*unit).0 }.phi_value(Complex64::new(z_re, z_im)) {
            Ok(v) => {
                unsafe {
                    *out_re = v.re;
                    *out_im = v.im;
                }
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

/// Automorphy factor alpha(m*omega1 + n*omega2, z0).
#[no_mangle]
pub extern "C" fn gp_automorphy_factor(
    unit: *const GpTranslationUnit,
    m: i64,
    n: i64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> GpStatus {
    guarded(|| {
        if unit.is_null() || out_re.is_null() || out_im.is_null() {
            return GpStatus::NullPointer;
        }
        let v = unsafe { &(*unit).0 }.automorphy_factor(m, n);
        unsafe {
            *out_re = v.re;
            *out_im = v.im;
        }
        GpStatus::Ok
    })
}

/// Residual of the pushforward invariance at z for the isogeny degree n.
#[no_mangle]
pub extern "C" fn gp_check_pushforward(
    green: *const GpGreen,
    degree: u32,
    z_re: f64,
    z_im: f64,
    out_residual: *mut f64,
) -> GpStatus {
    guarded(|| {
        if green.is_null() || out_residual.is_null() {
            return GpStatus::NullPointer;
        }
        if degree == 0 {
            set_error("isogeny degree must be positive".into());
            return GpStatus::InvalidArgument;
        }
        match unsafe { &(*green).0 }.pushforward_residual(degree, Complex64::new(z_re, z_im)) {
            Ok(r) => {
                unsafe { *out_residual = r };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

/// Residual of the distribution relation at z for torsion order N.
#[no_mangle]
pub extern "C" fn gp_check_distribution(
    green: *const GpGreen,
    order: u32,
    z_re: f64,
    z_im: f64,
    out_residual: *mut f64,
) -> GpStatus {
    guarded(|| {
        if green.is_null() || out_residual.is_null() {
            return GpStatus::NullPointer;
        }
        if order == 0 {
            set_error("torsion order must be positive".into());
            return GpStatus::InvalidArgument;
        }
        match unsafe { &(*green).0 }.distribution_residual(order, Complex64::new(z_re, z_im)) {
            Ok(r) => {
                unsafe { *out_residual = r };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

/// Residual of the main identity
/// g(Nz) - N^2 g(z) + 2 sum_{s != 0} log|phi_{-s}(z)| at z.
#[no_mangle]
pub extern "C" fn gp_check_main_theorem(
    green: *const GpGreen,
    order: u32,
    z_re: f64,
    z_im: f64,
    out_residual: *mut f64,
) -> GpStatus {
    guarded(|| {
        if green.is_null() || out_residual.is_null() {
            return GpStatus::NullPointer;
        }
        if order == 0 {
            set_error("torsion order must be positive".into());
            return GpStatus::InvalidArgument;
        }
        match unsafe { &(*green).0 }.main_theorem_residual(order, Complex64::new(z_re, z_im)) {
            Ok(r) => {
                unsafe { *out_residual = r };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                status_of_green_error(&e)
            }
        }
    })
}

/// Re-derives the product formula for the translation difference of the
/// canonical current on a product of tori of the given dimensions and
/// reports the derivation length.
#[no_mangle]
pub extern "C" fn gp_green_lemma_verify(
    dim_a: u32,
    dim_b: u32,
    out_steps: *mut usize,
) -> GpStatus {
    guarded(|| {
        if out_steps.is_null() {
            return GpStatus::NullPointer;
        }
        if dim_a == 0 || dim_b == 0 {
            set_error("factor dimensions must be positive".into());
            return GpStatus::InvalidArgument;
        }
        match currents::verify_green_lemma(dim_a, dim_b) {
            Ok(trace) => {
                unsafe { *out_steps = trace.steps.len() };
                GpStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                GpStatus::DerivationFailed
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_green() -> *mut GpGreen {
        let mut lattice: *mut GpLattice = std::ptr::null_mut();
        assert_eq!(
            gp_lattice_reduce(1.0, 0.0, 0.0, 1.0, &mut lattice),
            GpStatus::Ok
        );
        let mut green: *mut GpGreen = std::ptr::null_mut();
        assert_eq!(gp_green_new(lattice, 0.0, &mut green), GpStatus::Ok);
        gp_lattice_free(lattice);
        green
    }

    #[test]
    fn lattice_reduction_and_errors() {
        let mut lattice: *mut GpLattice = std::ptr::null_mut();
        assert_eq!(
            gp_lattice_reduce(1.0, 0.0, 3.0, 1.0, &mut lattice),
            GpStatus::Ok
        );
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(gp_lattice_tau(lattice, &mut re, &mut im), GpStatus::Ok);
        assert!((re - 0.0).abs() < 1e-14 && (im - 1.0).abs() < 1e-14);
        gp_lattice_free(lattice);
        // collinear periods
        let mut bad: *mut GpLattice = std::ptr::null_mut();
        assert_eq!(
            gp_lattice_reduce(1.0, 0.0, 2.0, 0.0, &mut bad),
            GpStatus::DegenerateLattice
        );
        assert!(!gp_last_error_message().is_null());
        assert_eq!(
            gp_lattice_reduce(1.0, 0.0, 0.0, 1.0, std::ptr::null_mut()),
            GpStatus::NullPointer
        );
    }

    #[test]
    fn green_value_matches_library_and_signals_singularities() {
        let green = square_green();
        let mut value = 0.0;
        assert_eq!(gp_green_value(green, 0.3, 0.4, &mut value), GpStatus::Ok);
        assert!((value - (-0.5306375309525166)).abs() < 1e-12);
        assert_eq!(
            gp_green_value(green, 0.0, 0.0, &mut value),
            GpStatus::SingularInput
        );
        assert!(!gp_last_error_message().is_null());
        gp_green_free(green);
    }

    #[test]
    fn translation_unit_round_trip() {
        let green = square_green();
        let mut unit: *mut GpTranslationUnit = std::ptr::null_mut();
        assert_eq!(
            gp_translation_unit_new(green, 0.5, 0.0, 2, &mut unit),
            GpStatus::Ok
        );
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(gp_phi_value(unit, 0.21, 0.34, &mut re, &mut im), GpStatus::Ok);
        assert!(re.hypot(im) > 0.0);
        // pole at the lattice
        assert_eq!(gp_phi_value(unit, 1.0, 1.0, &mut re, &mut im), GpStatus::Pole);
        // automorphy factor is a root of unity
        assert_eq!(gp_automorphy_factor(unit, 1, 0, &mut re, &mut im), GpStatus::Ok);
        assert!((re.hypot(im) - 1.0).abs() < 1e-12);
        gp_translation_unit_free(unit);
        // z0 not torsion
        let mut bad: *mut GpTranslationUnit = std::ptr::null_mut();
        assert_eq!(
            gp_translation_unit_new(green, 0.31, 0.0, 2, &mut bad),
            GpStatus::InvalidArgument
        );
        gp_green_free(green);
    }

    #[test]
    fn residual_checks_are_small() {
        let green = square_green();
        let mut r = f64::INFINITY;
        assert_eq!(gp_check_distribution(green, 2, 0.21, 0.34, &mut r), GpStatus::Ok);
        assert!(r < 1e-7, "distribution residual {r}");
        assert_eq!(gp_check_pushforward(green, 2, 0.21, 0.34, &mut r), GpStatus::Ok);
        assert!(r < 1e-7, "pushforward residual {r}");
        assert_eq!(gp_check_main_theorem(green, 2, 0.21, 0.34, &mut r), GpStatus::Ok);
        assert!(r < 1e-6, "main theorem residual {r}");
        gp_green_free(green);
    }

    #[test]
    fn symbolic_derivation_is_exposed() {
        let mut steps = 0usize;
        assert_eq!(gp_green_lemma_verify(1, 1, &mut steps), GpStatus::Ok);
        assert!(steps > 0 && steps <= 40);
        assert_eq!(gp_green_lemma_verify(0, 1, &mut steps), GpStatus::InvalidArgument);
    }

    #[test]
    fn quasi_periods_satisfy_legendre() {
        let green = square_green();
        let (mut a_re, mut a_im, mut b_re, mut b_im) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            gp_green_quasi_periods(green, &mut a_re, &mut a_im, &mut b_re, &mut b_im),
            GpStatus::Ok
        );
        assert!((a_re - std::f64::consts::PI).abs() < 1e-10);
        assert!((b_im + std::f64::consts::PI).abs() < 1e-10);
        gp_green_free(green);
    }
}
