#include "repvar/dof.hpp"

#include "repvar/error.hpp"
#include "repvar/tdist.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace repvar {

std::string_view to_string(DofBasis basis) noexcept {
    return basis == DofBasis::Contrasts ? "contrasts" : "jk_replicates";
}

std::string_view to_string(DofRule rule) noexcept {
    switch (rule) {
    case DofRule::Corrected: return "corrected";
    case DofRule::Naive: return "naive";
    case DofRule::FixedH: return "fixed-h";
    case DofRule::Normal: return "normal";
    }
    return "unknown";
}

DofRule parse_dof_rule(std::string_view name) {
    for (auto rule : {DofRule::Corrected, DofRule::Naive, DofRule::FixedH, DofRule::Normal}) {
        if (name == to_string(rule)) return rule;
    }
    if (name == "fixed_h") return DofRule::FixedH;
    throw Error(ErrorCode::ConfigError, "unknown dof rule '" + std::string(name) + "'");
}

double ws_naive(std::span<const double> d) {
    double scale = 0.0;
    for (double x : d) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) {
        throw Error(ErrorCode::DegenerateContrasts, "all stratum contrasts are zero; degrees of freedom undefined");
    }
    // Rescaling by max |d| keeps d^4 away from underflow and overflow.
    double s2 = 0.0;
    double s4 = 0.0;
    for (double x : d) {
        const double u = x / scale;
        const double u2 = u * u;
        s2 += u2;
        s4 += u2 * u2;
    }
    return std::clamp(s2 * s2 / s4, 1.0, static_cast<double>(d.size()));
}

DofEstimate ws_corrected(std::span<const double> d) {
    DofEstimate est;
    est.naive = ws_naive(d);
    est.corrected = 3.0 * est.naive - 2.0;
    est.corrected_clamped = std::max(est.corrected, 1.0);
    est.basis = DofBasis::Contrasts;
    est.n_components = d.size();
    return est;
}

DofEstimate ws_from_jk_replicates(std::span<const double> h1_deviations, double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
    std::vector<double> scaled(h1_deviations.begin(), h1_deviations.end());
    for (double& x : scaled) x /= epsilon;
    auto est = ws_corrected(scaled);
    est.basis = DofBasis::JkReplicates;
    return est;
}

double variance_of_variance_normal(std::span<const double> sigma2) {
    double v = 0.0;
    for (double s : sigma2) v += 2.0 * s * s;
    return v;
}

double replicate_sum_variance_normal(std::span<const double> sigma2, std::size_t num_replicates) {
    const double R = static_cast<double>(num_replicates);
    return R * R * variance_of_variance_normal(sigma2);
}

std::optional<double> dof_for_rule(const DofEstimate& dof, DofRule rule, bool cap_at_h) {
    const double H = static_cast<double>(dof.n_components);
    switch (rule) {
    case DofRule::Corrected: return cap_at_h ? std::min(dof.corrected_clamped, H) : dof.corrected_clamped;
    case DofRule::Naive: return dof.naive;
    case DofRule::FixedH: return H;
    case DofRule::Normal: return std::nullopt;
    }
    return std::nullopt;
}

ConfidenceInterval confidence_interval(double total, const VarianceEstimate& variance,
                                       const std::optional<DofEstimate>& dof, double level,
                                       const IntervalOptions& options) {
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "confidence level must lie in (0, 1), got " + std::to_string(level));
    }
    ConfidenceInterval ci;
    ci.center = total;
    ci.level = level;
    if (variance.value == 0.0) {
        ci.degenerate = true;
        return ci;
    }
    if (!dof) {
        throw Error(ErrorCode::DegenerateContrasts, "positive variance but no degrees of freedom");
    }
    const double p = 1.0 - (1.0 - level) / 2.0;
    ci.dof_used = dof_for_rule(*dof, options.rule, options.cap_at_h);
    const double q = ci.dof_used ? t_quantile(*ci.dof_used, p) : normal_quantile(p);
    ci.half_width = q * std::sqrt(variance.value);
    return ci;
}

} // namespace repvar
