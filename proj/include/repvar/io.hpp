#pragma once

#include "repvar/design.hpp"
#include "repvar/dof.hpp"
#include "repvar/estimators.hpp"
#include "repvar/hadamard.hpp"
#include "repvar/replication.hpp"
#include "repvar/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace repvar::io {

/**
 * Reads a `stratum,psu,weight,y` CSV. Strata keep first-appearance order and
 * units are ordered by psu. Errors carry the 1-based line number:
 * ParseError, DuplicatePsu, NonPositiveWeight, MissingPair.
 */
StratifiedSample parse_sample(std::istream& in);
StratifiedSample parse_sample(const std::filesystem::path& path);

/// `stratum,psu,weight,rw1..rwK`, one row per observation, shortest round-trip doubles.
void write_replicate_weights(std::ostream& out, const StratifiedSample& sample, const ReplicateWeightTable& table);

/// Rows of comma-separated +1/-1 entries.
void write_sign_matrix(std::ostream& out, const SignMatrix& M);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
/// %.12g, for human-facing summaries.
std::string format_12g(double x);

inline constexpr int kReportSchemaVersion = 1;

struct SchemeVariance {
    SchemeSpec scheme;
    std::size_t num_replicates = 0;
    std::size_t hadamard_order = 0;
    double via_replicates = 0.0;
    double via_contrasts = 0.0;

    friend bool operator==(const SchemeVariance&, const SchemeVariance&) = default;
};

struct ReportDof {
    double naive = 0.0;
    double corrected = 0.0;
    double corrected_clamped = 0.0;
    DofBasis basis = DofBasis::Contrasts;
    DofRule rule = DofRule::Corrected;
    bool cap_at_h = false;
    /// Degrees of freedom behind the interval quantile; nullopt for the normal rule.
    std::optional<double> used;

    friend bool operator==(const ReportDof&, const ReportDof&) = default;
};

struct ReportInterval {
    double level = 0.95;
    double lower = 0.0;
    double upper = 0.0;
    double half_width = 0.0;

    friend bool operator==(const ReportInterval&, const ReportInterval&) = default;
};

/**
 * @brief Result of one estimate run.
 *
 * `variance` is the canonical sum of squared contrasts; each entry of
 * `schemes` keeps the replicate-path cross-check. `dof` is absent when every
 * contrast is zero, in which case `degenerate` is set.
 */
struct VarianceReport {
    int schema_version = kReportSchemaVersion;
    double total = 0.0;
    std::size_t num_strata = 0;
    std::vector<std::string> stratum_labels;
    std::vector<double> contrasts;
    double variance = 0.0;
    std::vector<SchemeVariance> schemes;
    std::optional<ReportDof> dof;
    ReportInterval interval;
    bool degenerate = false;
    std::vector<std::string> warnings;
    std::vector<std::string> assumptions;

    friend bool operator==(const VarianceReport&, const VarianceReport&) = default;
};

nlohmann::json to_json(const VarianceReport& report);
VarianceReport variance_report_from_json(const nlohmann::json& j);

/// Human-readable summary, numbers at 12 significant digits.
std::string summarize(const VarianceReport& report);

/// Parses a simulation config; ConfigError messages name the JSON pointer of the bad field.
sim::SimulationConfig parse_simulation_config(const nlohmann::json& j);
sim::SimulationConfig load_simulation_config(const std::filesystem::path& path);

nlohmann::json to_json(const sim::SimulationReport& report);
std::string summarize(const sim::SimulationReport& report);

} // namespace repvar::io
