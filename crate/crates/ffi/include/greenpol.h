#ifndef GREENPOL_H
#define GREENPOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes of every fallible call.
 */
typedef enum GpStatus {
  GpStatus_Ok = 0,
  GpStatus_NullPointer = 1,
  GpStatus_InvalidArgument = 2,
  GpStatus_DegenerateLattice = 3,
  GpStatus_PrecisionLoss = 4,
  /**
   * Evaluation inside the exclusion radius around the lattice.
   */
  GpStatus_SingularInput = 5,
  /**
   * Evaluation at a pole of the translation unit.
   */
  GpStatus_Pole = 6,
  GpStatus_DerivationFailed = 7,
  GpStatus_InternalPanic = 8,
} GpStatus;

/**
 * Evaluator for the canonical Green current (opaque).
 */
typedef struct GpGreen GpGreen;

/**
 * An oriented rank-2 lattice with reduced modulus (opaque).
 */
typedef struct GpLattice GpLattice;

/**
 * A translation unit phi with divisor (z0) - (0) (opaque).
 */
typedef struct GpTranslationUnit GpTranslationUnit;

/**
 * Most recent error message on this thread, or NULL when none was
 * recorded. The pointer stays valid until the next failing call.
 */
const char *gp_last_error_message(void);

/**
 * Reduces the lattice spanned by omega1 and omega2 and returns a handle.
 */
enum GpStatus gp_lattice_reduce(double omega1_re,
                                double omega1_im,
                                double omega2_re,
                                double omega2_im,
                                struct GpLattice **out);

/**
 * Reduced modulus of the lattice.
 */
enum GpStatus gp_lattice_tau(const struct GpLattice *lattice, double *out_re, double *out_im);

void gp_lattice_free(struct GpLattice *lattice);

/**
 * Builds a canonical-current evaluator; `singular_radius <= 0` selects the
 * default exclusion radius 0.05 (in lattice coordinates).
 */
enum GpStatus gp_green_new(const struct GpLattice *lattice,
                           double singular_radius,
                           struct GpGreen **out);

void gp_green_free(struct GpGreen *green);

/**
 * The canonical current g at z = z_re + i z_im.
 */
enum GpStatus gp_green_value(const struct GpGreen *green, double z_re, double z_im, double *out);

/**
 * Weierstrass sigma at z for the evaluator's lattice.
 */
enum GpStatus gp_green_sigma(const struct GpGreen *green,
                             double z_re,
                             double z_im,
                             double *out_re,
                             double *out_im);

/**
 * Quasi-periods (eta1, eta2) of the evaluator's lattice.
 */
enum GpStatus gp_green_quasi_periods(const struct GpGreen *green,
                                     double *eta1_re,
                                     double *eta1_im,
                                     double *eta2_re,
                                     double *eta2_im);

/**
 * Builds the translation unit with divisor (z0) - (0) for a nonzero
 * N-torsion value z0.
 */
enum GpStatus gp_translation_unit_new(const struct GpGreen *green,
                                      double z0_re,
                                      double z0_im,
                                      uint32_t order,
                                      struct GpTranslationUnit **out);

void gp_translation_unit_free(struct GpTranslationUnit *unit);

/**
 * phi(z); a pole of phi reports GpStatus::Pole.
 */
enum GpStatus gp_phi_value(const struct GpTranslationUnit *unit,
                           double z_re,
                           double z_im,
                           double *out_re,
                           double *out_im);

/**
 * Automorphy factor alpha(m*omega1 + n*omega2, z0).
 */
enum GpStatus gp_automorphy_factor(const struct GpTranslationUnit *unit,
                                   int64_t m,
                                   int64_t n,
                                   double *out_re,
                                   double *out_im);

/**
 * Residual of the pushforward invariance at z for the isogeny degree n.
 */
enum GpStatus gp_check_pushforward(const struct GpGreen *green,
                                   uint32_t degree,
                                   double z_re,
                                   double z_im,
                                   double *out_residual);

/**
 * Residual of the distribution relation at z for torsion order N.
 */
enum GpStatus gp_check_distribution(const struct GpGreen *green,
                                    uint32_t order,
                                    double z_re,
                                    double z_im,
                                    double *out_residual);

/**
 * Residual of the main identity
 * g(Nz) - N^2 g(z) + 2 sum_{s != 0} log|phi_{-s}(z)| at z.
 */
enum GpStatus gp_check_main_theorem(const struct GpGreen *green,
                                    uint32_t order,
                                    double z_re,
                                    double z_im,
                                    double *out_residual);

/**
 * Re-derives the product formula for the translation difference of the
 * canonical current on a product of tori of the given dimensions and
 * reports the derivation length.
 */
enum GpStatus gp_green_lemma_verify(uint32_t dim_a, uint32_t dim_b, uintptr_t *out_steps);

#endif  /* GREENPOL_H */
