#ifndef BH_COMPLEXITY_H
#define BH_COMPLEXITY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Largest supported lattice dimension.
 */
#define BHC_MAX_DIM 3

typedef enum BhcStatus {
  BHC_STATUS_OK = 0,
  BHC_STATUS_NULL_POINTER = 1,
  BHC_STATUS_INVALID_ARGUMENT = 2,
  BHC_STATUS_CONVERGENCE = 3,
  BHC_STATUS_INSTABILITY = 4,
  BHC_STATUS_DOMAIN = 5,
  BHC_STATUS_PANIC = 6,
} BhcStatus;

/**
 * Opaque mean-field solution.
 */
typedef struct BhcMeanField BhcMeanField;

/**
 * Opaque complexity report.
 */
typedef struct BhcReport BhcReport;

/**
 * Model point. Only the first `d` entries of `extents` are read.
 */
typedef struct BhcParams {
  size_t d;
  size_t extents[BHC_MAX_DIM];
  /**
   * Fock-space truncation (levels per site).
   */
  size_t n;
  double t;
  double mu_bar;
} BhcParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *bhc_version(void);

/**
 * Message for the last failure on this thread (empty after success).
 * Valid until the next `bhc_*` call on the same thread.
 */
const char *bhc_last_error_message(void);

/**
 * Self-consistent mean field at `params`.
 *
 * # Safety
 * `params` must point to a valid `BhcParams`; `out` to writable storage.
 */
enum BhcStatus bhc_meanfield_solve(const struct BhcParams *params, struct BhcMeanField **out);

/**
 * Order parameter; NaN for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle from `bhc_meanfield_solve`.
 */
double bhc_meanfield_phi(const struct BhcMeanField *h);

/**
 * Mean-field energy per site; NaN for a null handle.
 *
 * # Safety
 * As [`bhc_meanfield_phi`].
 */
double bhc_meanfield_free_energy(const struct BhcMeanField *h);

/**
 * Number of on-site levels; 0 for a null handle.
 *
 * # Safety
 * As [`bhc_meanfield_phi`].
 */
size_t bhc_meanfield_levels(const struct BhcMeanField *h);

/**
 * Copy the on-site energies (ascending) into `buf`, which holds `len` doubles.
 *
 * # Safety
 * `h` must be a live handle and `buf` valid for `len` writes.
 */
enum BhcStatus bhc_meanfield_energies(const struct BhcMeanField *h, double *buf, size_t len);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void bhc_meanfield_free(struct BhcMeanField *h);

/**
 * Complexity of the fluctuation-corrected ground state for each of the
 * `n_kappas` orders in `kappas`.
 *
 * # Safety
 * `params` valid, `kappas` valid for `n_kappas` reads, `out` writable.
 */
enum BhcStatus bhc_complexity(const struct BhcParams *params,
                              const double *kappas,
                              size_t n_kappas,
                              struct BhcReport **out);

/**
 * Number of complexity orders in the report; 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live report handle.
 */
size_t bhc_report_num_kappas(const struct BhcReport *h);

/**
 * Total complexity `C_kappa` for the `i`-th requested order.
 *
 * # Safety
 * `h` a live report handle, `out` writable.
 */
enum BhcStatus bhc_report_total(const struct BhcReport *h, size_t i, double *out);

/**
 * Complexity per site for the `i`-th requested order.
 *
 * # Safety
 * As [`bhc_report_total`].
 */
enum BhcStatus bhc_report_density(const struct BhcReport *h, size_t i, double *out);

/**
 * `sqrt(C_2)`; `Domain` if order 2 was not requested.
 *
 * # Safety
 * As [`bhc_report_total`].
 */
enum BhcStatus bhc_report_c_qc(const struct BhcReport *h, double *out);

/**
 * Number of modes excluded as zero modes.
 *
 * # Safety
 * `h` must be null or a live report handle.
 */
size_t bhc_report_zero_modes(const struct BhcReport *h);

/**
 * Smallest non-zero-mode frequency; NaN for a null handle.
 *
 * # Safety
 * As [`bhc_report_zero_modes`].
 */
double bhc_report_min_omega(const struct BhcReport *h);

/**
 * # Safety
 * `h` must be null or a handle not yet freed.
 */
void bhc_report_free(struct BhcReport *h);

/**
 * Tip of Mott lobe `lobe` (>= 1) for the truncation in `params`.
 *
 * # Safety
 * `params` valid, `t_c` and `mu_c` writable.
 */
enum BhcStatus bhc_locate_tip(const struct BhcParams *params,
                              size_t lobe,
                              double *t_c,
                              double *mu_c);

/**
 * Free-field reference complexity density in closed form.
 *
 * # Safety
 * `out` writable.
 */
enum BhcStatus bhc_c_closed_form(double m, double omega0, size_t d, double kappa, double *out);

/**
 * Free-field reference complexity density by adaptive quadrature.
 *
 * # Safety
 * `out` writable.
 */
enum BhcStatus bhc_c_kappa_quadrature(double m, double omega0, size_t d, double kappa, double *out);

/**
 * Holographic complexity shift `delta C_V` for correlation length `xi`.
 *
 * # Safety
 * `out` writable.
 */
enum BhcStatus bhc_cv_delta(size_t d,
                            double l,
                            double g_n,
                            double sigma_d,
                            double xi,
                            double nu,
                            double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BH_COMPLEXITY_H */
