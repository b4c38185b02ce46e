#pragma once

#include "repvar/design.hpp"
#include "repvar/matrix.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace repvar {

enum class SchemeKind { Brr, FayBrr, PairedJk, FayJk, Jk1 };

std::string_view to_string(SchemeKind kind) noexcept;
/// Accepts the CLI spellings: brr, fay-brr, paired-jk, fay-jk, jk1.
SchemeKind parse_scheme_kind(std::string_view name);

inline constexpr double kDefaultFayEpsilon = 0.5;

/// Replicate scheme and its Fay perturbation factor.
struct SchemeSpec {
    SchemeKind kind = SchemeKind::Brr;
    double epsilon = 1.0;
    std::optional<std::size_t> hadamard_order;

    static SchemeSpec brr(std::optional<std::size_t> order = std::nullopt);
    static SchemeSpec fay_brr(double epsilon = kDefaultFayEpsilon,
                              std::optional<std::size_t> order = std::nullopt);
    static SchemeSpec paired_jk();
    static SchemeSpec fay_jk(double epsilon = kDefaultFayEpsilon);
    static SchemeSpec jk1();

    /// Builds a spec for @p kind; epsilon is ignored (fixed at 1) for brr, paired-jk and jk1.
    static SchemeSpec make(SchemeKind kind, double epsilon = kDefaultFayEpsilon,
                           std::optional<std::size_t> order = std::nullopt);

    bool is_brr_family() const noexcept { return kind == SchemeKind::Brr || kind == SchemeKind::FayBrr; }
    bool is_paired_jk_family() const noexcept {
        return kind == SchemeKind::PairedJk || kind == SchemeKind::FayJk;
    }

    /// Throws EpsilonOutOfRange unless 0 < epsilon <= 1 (and == 1 for the unperturbed kinds).
    void validate() const;

    friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

/**
 * @brief Materialized replicate weights.
 *
 * weights(r, k) is the weight of observation k (flat index 2h + i, or the
 * zone index for JK1) in replicate r. For the two-PSU schemes, signs(r, h)
 * gives the perturbation direction s in w_h1 (1 + s eps), w_h2 (1 - s eps):
 * the Hadamard entry for BRR, +1/-1 on the perturbed stratum and 0
 * elsewhere for the paired jackknife. Replicates of the paired jackknife
 * are ordered (1,1), (1,2), (2,1), ...; replicate (h1) up-weights unit 1.
 */
struct ReplicateWeightTable {
    SchemeSpec scheme;
    std::vector<double> full_weights;
    Matrix<double> weights;
    Matrix<int> signs;
    std::size_t hadamard_order = 0;

    std::size_t num_replicates() const noexcept { return weights.rows(); }
    std::size_t num_observations() const noexcept { return weights.cols(); }
};

/// Replicate totals and their deviations from the full-sample total.
struct ReplicateEstimates {
    SchemeSpec scheme;
    double t_full = 0.0;
    std::vector<double> t_rep;
    std::vector<double> deviations;
    /// d_h for the two-PSU schemes; zone totals w_i y_i for JK1.
    std::vector<double> components;

    std::size_t num_replicates() const noexcept { return t_rep.size(); }
};

ReplicateWeightTable brr_weights(const StratifiedSample& sample, const SchemeSpec& spec);
ReplicateWeightTable paired_jk_weights(const StratifiedSample& sample, const SchemeSpec& spec);
/// Dispatches on spec.kind (not JK1).
ReplicateWeightTable replicate_weights(const StratifiedSample& sample, const SchemeSpec& spec);

/// Validates a JK1 zone list: at least two zones, positive finite weights, finite y.
void validate_zones(std::span<const Observation> zones);

/// Replicate i drops zone i and scales the others by G / (G - 1).
ReplicateWeightTable jk1_weights(std::span<const Observation> zones);

ReplicateEstimates replicate_estimates(const StratifiedSample& sample, const ReplicateWeightTable& table);
ReplicateEstimates replicate_estimates(std::span<const Observation> zones, const ReplicateWeightTable& table);

/// Mean of the replicate totals minus the full-sample total (BRR family only).
double replicate_mean_check(const ReplicateEstimates& est, const SchemeSpec& scheme);

} // namespace repvar
