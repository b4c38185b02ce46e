#include "repvar/design.hpp"

#include "repvar/error.hpp"

#include <cmath>

namespace repvar {

namespace {

void check_observation(const std::string& label, std::size_t unit, const Observation& obs) {
    if (!std::isfinite(obs.weight) || !(obs.weight > 0.0)) {
        throw Error(ErrorCode::InvalidSample,
                    "stratum '" + label + "' unit " + std::to_string(unit) + ": weight must be positive and finite");
    }
    if (!std::isfinite(obs.y)) {
        throw Error(ErrorCode::InvalidSample,
                    "stratum '" + label + "' unit " + std::to_string(unit) + ": y must be finite");
    }
}

} // namespace

Stratum::Stratum(std::string label, Observation unit1, Observation unit2)
    : label_(std::move(label)), units_{unit1, unit2} {
    check_observation(label_, 1, unit1);
    check_observation(label_, 2, unit2);
}

StratifiedSample::StratifiedSample(std::vector<Stratum> strata) : strata_(std::move(strata)) {
    if (strata_.empty()) {
        throw Error(ErrorCode::InvalidSample, "sample needs at least one stratum");
    }
}

std::vector<double> StratifiedSample::weights() const {
    std::vector<double> w;
    w.reserve(num_observations());
    for (const auto& s : strata_) {
        w.push_back(s.unit(0).weight);
        w.push_back(s.unit(1).weight);
    }
    return w;
}

double total_estimate(const StratifiedSample& sample) {
    double total = 0.0;
    for (const auto& s : sample.strata()) {
        total += s.unit(0).weight * s.unit(0).y + s.unit(1).weight * s.unit(1).y;
    }
    return total;
}

ContrastVector contrasts(const StratifiedSample& sample) {
    ContrastVector d;
    d.values.reserve(sample.num_strata());
    for (const auto& s : sample.strata()) {
        d.values.push_back(s.unit(0).weight * s.unit(0).y - s.unit(1).weight * s.unit(1).y);
    }
    return d;
}

double direct_variance(std::span<const double> contrasts) {
    double v = 0.0;
    for (double d : contrasts) v += d * d;
    return v;
}

} // namespace repvar
