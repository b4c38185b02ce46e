#include "repvar/commands.hpp"

#include "repvar/error.hpp"
#include "repvar/estimators.hpp"
#include "repvar/hadamard.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace repvar::cli {

namespace {

constexpr const char* kAssumptionZeroMean =
    "E[d_h] = 0 in every stratum (holds under simple random sampling within strata; not checkable from one sample)";

} // namespace

io::VarianceReport cmd_estimate(const StratifiedSample& sample, const EstimateOptions& options) {
    const auto d = contrasts(sample);
    const auto table = replicate_weights(sample, options.scheme);
    const auto est = replicate_estimates(sample, table);
    const auto var = estimate_variance(est);

    io::VarianceReport report;
    report.total = est.t_full;
    report.num_strata = sample.num_strata();
    for (const auto& s : sample.strata()) report.stratum_labels.push_back(s.label());
    report.contrasts = d.values;
    report.variance = var.via_contrasts;
    report.schemes.push_back({table.scheme, table.num_replicates(), table.hadamard_order, var.via_replicates,
                              var.via_contrasts});
    report.assumptions.push_back(kAssumptionZeroMean);

    // Downstream quantities use the contrast path so every scheme reports the same numbers.
    VarianceEstimate canonical = var;
    canonical.value = var.via_contrasts;

    std::optional<DofEstimate> dof;
    if (report.variance > 0.0) {
        dof = ws_corrected(d.view());
        if (options.scheme.is_paired_jk_family()) {
            std::vector<double> h1;
            for (std::size_t h = 0; h < sample.num_strata(); ++h) h1.push_back(est.deviations[2 * h]);
            const auto jk = ws_from_jk_replicates(h1, options.scheme.epsilon);
            if (std::abs(jk.corrected - dof->corrected) > 1e-8 * dof->corrected) {
                report.warnings.push_back("degrees of freedom from jackknife replicates differ from the contrast form");
            }
        }
        const auto used = dof_for_rule(*dof, options.interval.rule, options.interval.cap_at_h);
        report.dof = io::ReportDof{dof->naive,        dof->corrected,         dof->corrected_clamped, dof->basis,
                                   options.interval.rule, options.interval.cap_at_h, used};
    } else {
        report.degenerate = true;
        report.warnings.push_back(
            "all stratum contrasts are zero: variance is 0, degrees of freedom are undefined, interval is a point");
    }

    const auto ci = confidence_interval(report.total, canonical, dof, options.level, options.interval);
    report.interval = {options.level, ci.lower(), ci.upper(), ci.half_width};
    return report;
}

std::string cmd_replicates(const StratifiedSample& sample, const SchemeSpec& scheme) {
    std::ostringstream os;
    io::write_replicate_weights(os, sample, replicate_weights(sample, scheme));
    return os.str();
}

std::string cmd_hadamard(std::size_t order) {
    const auto M = construct_hadamard(order);
    std::ostringstream os;
    io::write_sign_matrix(os, M.signs());
    return os.str();
}

std::string cmd_simulate(const sim::SimulationConfig& config, sim::SimulationReport* report_out) {
    auto report = sim::run_coverage(config);
    auto text = io::to_json(report).dump(2) + "\n";
    if (report_out) *report_out = std::move(report);
    return text;
}

std::filesystem::path resolve_output_path(const std::filesystem::path& path) {
    if (path.is_absolute()) return path;
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) return std::filesystem::path(dir) / path;
    return path;
}

} // namespace repvar::cli
