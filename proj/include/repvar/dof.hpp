#pragma once

#include "repvar/design.hpp"
#include "repvar/estimators.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace repvar {

enum class DofBasis { Contrasts, JkReplicates };

/// Degrees of freedom used to pick the interval quantile.
enum class DofRule { Corrected, Naive, FixedH, Normal };

std::string_view to_string(DofBasis basis) noexcept;
std::string_view to_string(DofRule rule) noexcept;
/// Accepts corrected, naive, fixed-h (or fixed_h), normal.
DofRule parse_dof_rule(std::string_view name);

/// Welch-Satterthwaite degrees of freedom from stratum components.
struct DofEstimate {
    double naive = 1.0;             ///< (sum d^2)^2 / sum d^4, in [1, H]
    double corrected = 1.0;         ///< 3 naive - 2, in [1, 3H - 2]
    double corrected_clamped = 1.0; ///< max(corrected, 1)
    DofBasis basis = DofBasis::Contrasts;
    std::size_t n_components = 0;
};

/// Throws DegenerateContrasts when every component is zero.
double ws_naive(std::span<const double> d);

DofEstimate ws_corrected(std::span<const double> d);

/**
 * Degrees of freedom from the (h1) deviations of a paired jackknife, one
 * per stratum. Deviations are divided by @p epsilon first; the squared sum
 * enters the numerator exactly as in the contrast form.
 */
DofEstimate ws_from_jk_replicates(std::span<const double> h1_deviations, double epsilon = 1.0);

/// Normal-theory variance of sum d_h^2: sum 2 sigma_h^4, sigma_h^2 = Var(d_h).
double variance_of_variance_normal(std::span<const double> sigma2);

/// Var(sum_r X_r^2) = R^2 sum Var(d_h^2) under the same model.
double replicate_sum_variance_normal(std::span<const double> sigma2, std::size_t num_replicates);

struct IntervalOptions {
    DofRule rule = DofRule::Corrected;
    bool cap_at_h = false;
};

/// Degrees of freedom the rule selects; nullopt for the normal rule.
std::optional<double> dof_for_rule(const DofEstimate& dof, DofRule rule, bool cap_at_h);

struct ConfidenceInterval {
    double center = 0.0;
    double half_width = 0.0;
    double level = 0.95;
    /// Degrees of freedom behind the quantile; nullopt for normal or degenerate intervals.
    std::optional<double> dof_used;
    /// Point interval from a zero variance estimate.
    bool degenerate = false;

    double lower() const noexcept { return center - half_width; }
    double upper() const noexcept { return center + half_width; }
    bool covers(double value) const noexcept { return lower() <= value && value <= upper(); }
};

/**
 * T +/- q * sqrt(V). A zero variance yields a degenerate point interval;
 * a positive variance without @p dof throws DegenerateContrasts.
 * Throws InvalidProbability unless 0 < level < 1.
 */
ConfidenceInterval confidence_interval(double total, const VarianceEstimate& variance,
                                       const std::optional<DofEstimate>& dof, double level,
                                       const IntervalOptions& options = {});

} // namespace repvar
