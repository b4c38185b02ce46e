#pragma once

#include "repvar/matrix.hpp"
#include "repvar/replication.hpp"

#include <cstddef>
#include <span>

namespace repvar {

/// Relative tolerance for the replicate-path versus contrast-path identity.
inline constexpr double kIdentityTolerance = 1e-10;

/**
 * @brief A variance estimate computed along two routes.
 *
 * via_replicates comes from the replicate deviations with the scheme's
 * scaling; via_contrasts is computed directly (sum of d_h^2, or the JK1
 * closed form). Construction throws DimensionMismatch if they disagree
 * beyond kIdentityTolerance * (1 + via_contrasts).
 */
struct VarianceEstimate {
    SchemeSpec scheme;
    double value = 0.0;
    double via_replicates = 0.0;
    double via_contrasts = 0.0;
    std::size_t n_components = 0;
};

/// (1/R) sum X_r^2 for an unperturbed BRR run.
VarianceEstimate variance_brr(const ReplicateEstimates& est, std::size_t num_replicates);

/// (1/(eps^2 R)) sum X_r^2. Throws EpsilonOutOfRange for eps outside (0, 1].
VarianceEstimate variance_fay_brr(const ReplicateEstimates& est, std::size_t num_replicates, double epsilon);

/// (1/(2 eps^2)) sum_h [X_(h1)^2 + X_(h2)^2]; deviations ordered by (h, i).
VarianceEstimate variance_paired_jk(const ReplicateEstimates& est, double epsilon);

/// ((G-1)/G) sum_i (T_i - T)^2.
VarianceEstimate variance_jk1(const ReplicateEstimates& est, std::size_t num_zones);

/// Dispatches on est.scheme.
VarianceEstimate estimate_variance(const ReplicateEstimates& est);

/// Theoretical covariance of BRR deviations: Cov(X_r, X_s) = sum_h a_rh a_sh Var(d_h).
Matrix<double> brr_deviation_covariance(std::span<const double> stratum_variances, const Matrix<int>& signs);

} // namespace repvar
