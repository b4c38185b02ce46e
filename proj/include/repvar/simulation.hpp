#pragma once

#include "repvar/design.hpp"
#include "repvar/dof.hpp"
#include "repvar/matrix.hpp"
#include "repvar/replication.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace repvar::sim {

struct EqualSigma { double sigma = 1.0; };
struct LinearSigma { double min = 1.0; double max = 1.0; };
/// Stratum 1 has sigma = ratio, all others sigma = 1.
struct OneDominantSigma { double ratio = 10.0; };
struct CustomSigma { std::vector<double> sigmas; };

using SigmaProfile = std::variant<EqualSigma, LinearSigma, OneDominantSigma, CustomSigma>;

/// Per-stratum unit standard deviations for @p num_strata strata.
std::vector<double> stratum_sigmas(const SigmaProfile& profile, std::size_t num_strata);

struct SimulationConfig {
    std::size_t num_strata = 10;
    SigmaProfile sigma_profile = EqualSigma{};
    /// Per-stratum unit means; empty means 0 everywhere.
    std::vector<double> means;
    std::size_t n_reps = 1000;
    double level = 0.95;
    std::uint64_t seed = 1;
    SchemeSpec scheme = SchemeSpec::brr();
    std::vector<DofRule> dof_rules{DofRule::Corrected, DofRule::Naive, DofRule::FixedH, DofRule::Normal};
    bool cap_at_h = false;
    /// 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;

    /// Throws ConfigError on violated invariants (sigma > 0, n_reps >= 100, ...).
    void validate() const;
    std::vector<double> sigmas() const { return stratum_sigmas(sigma_profile, num_strata); }
    std::vector<double> unit_means() const;
    /// Expectation of the total under the generator: sum_h 2 mu_h.
    double true_total() const;
};

inline constexpr std::size_t kMinReps = 100;

/// Unit-weight sample with y_hi ~ N(mu_h, sigma_h^2); deterministic in (seed, rep_index).
StratifiedSample draw_sample(const SimulationConfig& config, std::uint64_t rep_index);

struct RuleCoverage {
    DofRule rule = DofRule::Corrected;
    std::size_t covered = 0;
    std::size_t n = 0;
    double coverage = 0.0;
    double mc_se = 0.0;
    /// Mean and SD of the dof behind the quantile (0 for the normal rule).
    double mean_dof = 0.0;
    double sd_dof = 0.0;
};

struct CovarianceComparison {
    Matrix<double> empirical;
    Matrix<double> theoretical;
    Matrix<double> mc_se;
    /// Largest |empirical - theoretical| / mc_se over entries with mc_se > 0.
    double max_abs_z = 0.0;
};

struct SimulationReport {
    std::size_t n_reps = 0;
    std::size_t num_strata = 0;
    std::size_t num_replicates = 0;
    double level = 0.95;
    std::uint64_t seed = 0;
    SchemeSpec scheme;
    double true_total = 0.0;
    std::vector<double> sigmas;
    std::vector<RuleCoverage> coverage;
    std::size_t n_degenerate = 0;
    double mean_variance = 0.0;
    double expected_variance = 0.0;
    double var_variance = 0.0;
    double var_variance_normal = 0.0;
    double mean_naive_dof = 0.0;
    double mean_corrected_dof = 0.0;
    /// Present for BRR-family schemes: deviations divided by epsilon.
    std::optional<CovarianceComparison> deviation_covariance;
    /// Wall time; echoed by the CLI, not serialized.
    double elapsed_seconds = 0.0;
    unsigned threads_used = 1;
};

SimulationReport run_coverage(const SimulationConfig& config);

struct StratumMoments {
    double sigma = 0.0;
    double mean_d = 0.0;
    double se_mean_d = 0.0;
    double var_d = 0.0;
    double var_d2 = 0.0;
    /// var_d2 / var_d^2, 2 under normality.
    double ratio = 0.0;
    /// 2 Var(d)^2 with the realized Var(d).
    double predicted_var_d2 = 0.0;
};

/// n_reps unit-weight contrasts per stratum; compares Var(d^2) with 2 Var(d)^2.
std::vector<StratumMoments> check_chi2_approx(const SimulationConfig& config);

/// BRR deviations over n_reps samples versus brr_deviation_covariance at the realized Var(d_h).
CovarianceComparison check_deviation_covariance(const SimulationConfig& config);

struct DofCalibration {
    std::size_t n = 0;
    std::size_t n_degenerate = 0;
    double mean_naive = 0.0;
    double sd_naive = 0.0;
    double mean_corrected = 0.0;
    double sd_corrected = 0.0;
};

DofCalibration check_dof_calibration(const SimulationConfig& config);

} // namespace repvar::sim
