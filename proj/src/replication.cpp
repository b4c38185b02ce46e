#include "repvar/replication.hpp"

#include "repvar/error.hpp"
#include "repvar/hadamard.hpp"

#include <cmath>
#include <string>

namespace repvar {

std::string_view to_string(SchemeKind kind) noexcept {
    switch (kind) {
    case SchemeKind::Brr: return "brr";
    case SchemeKind::FayBrr: return "fay-brr";
    case SchemeKind::PairedJk: return "paired-jk";
    case SchemeKind::FayJk: return "fay-jk";
    case SchemeKind::Jk1: return "jk1";
    }
    return "unknown";
}

SchemeKind parse_scheme_kind(std::string_view name) {
    for (auto kind : {SchemeKind::Brr, SchemeKind::FayBrr, SchemeKind::PairedJk, SchemeKind::FayJk, SchemeKind::Jk1}) {
        if (name == to_string(kind)) return kind;
    }
    if (name == "fay_brr") return SchemeKind::FayBrr;
    if (name == "paired_jk" || name == "jk" || name == "jrr") return SchemeKind::PairedJk;
    if (name == "fay_jk") return SchemeKind::FayJk;
    throw Error(ErrorCode::SchemeMismatch, "unknown scheme '" + std::string(name) + "'");
}

SchemeSpec SchemeSpec::brr(std::optional<std::size_t> order) { return {SchemeKind::Brr, 1.0, order}; }

SchemeSpec SchemeSpec::fay_brr(double epsilon, std::optional<std::size_t> order) {
    SchemeSpec s{SchemeKind::FayBrr, epsilon, order};
    s.validate();
    return s;
}

SchemeSpec SchemeSpec::paired_jk() { return {SchemeKind::PairedJk, 1.0, std::nullopt}; }

SchemeSpec SchemeSpec::fay_jk(double epsilon) {
    SchemeSpec s{SchemeKind::FayJk, epsilon, std::nullopt};
    s.validate();
    return s;
}

SchemeSpec SchemeSpec::jk1() { return {SchemeKind::Jk1, 1.0, std::nullopt}; }

SchemeSpec SchemeSpec::make(SchemeKind kind, double epsilon, std::optional<std::size_t> order) {
    switch (kind) {
    case SchemeKind::Brr: return brr(order);
    case SchemeKind::FayBrr: return fay_brr(epsilon, order);
    case SchemeKind::PairedJk: return paired_jk();
    case SchemeKind::FayJk: return fay_jk(epsilon);
    case SchemeKind::Jk1: return jk1();
    }
    throw Error(ErrorCode::SchemeMismatch, "unknown scheme kind");
}

void SchemeSpec::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
    const bool perturbed = kind == SchemeKind::FayBrr || kind == SchemeKind::FayJk;
    if (!perturbed && epsilon != 1.0) {
        throw Error(ErrorCode::EpsilonOutOfRange,
                    std::string(to_string(kind)) + " uses epsilon = 1; choose a Fay scheme to perturb");
    }
    if (hadamard_order && !is_brr_family()) {
        throw Error(ErrorCode::SchemeMismatch, "hadamard order only applies to the BRR family");
    }
}

namespace {

// w_h1 (1 + s eps), w_h2 (1 - s eps) for every replicate row of signs.
Matrix<double> perturbed_weights(const StratifiedSample& sample, const Matrix<int>& signs, double epsilon) {
    const std::size_t H = sample.num_strata();
    Matrix<double> w(signs.rows(), 2 * H);
    for (std::size_t r = 0; r < signs.rows(); ++r) {
        for (std::size_t h = 0; h < H; ++h) {
            const auto& s = sample.stratum(h);
            const double shift = signs(r, h) * epsilon;
            w(r, 2 * h) = s.unit(0).weight * (1.0 + shift);
            w(r, 2 * h + 1) = s.unit(1).weight * (1.0 - shift);
        }
    }
    return w;
}

double weighted_sum(std::span<const double> weights, const StratifiedSample& sample) {
    double t = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) t += weights[k] * sample.observation(k).y;
    return t;
}

} // namespace

ReplicateWeightTable brr_weights(const StratifiedSample& sample, const SchemeSpec& spec) {
    if (!spec.is_brr_family()) {
        throw Error(ErrorCode::SchemeMismatch, "brr_weights needs brr or fay-brr, got " + std::string(to_string(spec.kind)));
    }
    spec.validate();
    const std::size_t H = sample.num_strata();
    const std::size_t order = spec.hadamard_order ? *spec.hadamard_order : smallest_balanced_order(H);
    if (order < H) {
        throw Error(ErrorCode::UnconstructibleOrder,
                    "hadamard order " + std::to_string(order) + " is below the number of strata " + std::to_string(H));
    }
    const auto M = construct_hadamard(order);

    ReplicateWeightTable table;
    table.scheme = spec;
    table.scheme.hadamard_order = order;
    table.hadamard_order = order;
    table.full_weights = sample.weights();
    table.signs = balanced_columns(M, H);
    table.weights = perturbed_weights(sample, table.signs, spec.epsilon);
    return table;
}

ReplicateWeightTable paired_jk_weights(const StratifiedSample& sample, const SchemeSpec& spec) {
    if (!spec.is_paired_jk_family()) {
        throw Error(ErrorCode::SchemeMismatch,
                    "paired_jk_weights needs paired-jk or fay-jk, got " + std::string(to_string(spec.kind)));
    }
    spec.validate();
    const std::size_t H = sample.num_strata();

    ReplicateWeightTable table;
    table.scheme = spec;
    table.full_weights = sample.weights();
    table.signs = Matrix<int>(2 * H, H, 0);
    for (std::size_t h = 0; h < H; ++h) {
        table.signs(2 * h, h) = +1;
        table.signs(2 * h + 1, h) = -1;
    }
    table.weights = perturbed_weights(sample, table.signs, spec.epsilon);
    return table;
}

ReplicateWeightTable replicate_weights(const StratifiedSample& sample, const SchemeSpec& spec) {
    if (spec.is_brr_family()) return brr_weights(sample, spec);
    if (spec.is_paired_jk_family()) return paired_jk_weights(sample, spec);
    throw Error(ErrorCode::SchemeMismatch, "jk1 works on single-unit zones, not two-PSU strata");
}

void validate_zones(std::span<const Observation> zones) {
    if (zones.size() < 2) {
        throw Error(ErrorCode::TooFewZones, "jk1 needs at least 2 zones, got " + std::to_string(zones.size()));
    }
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (!std::isfinite(zones[i].weight) || !(zones[i].weight > 0.0) || !std::isfinite(zones[i].y)) {
            throw Error(ErrorCode::InvalidSample, "zone " + std::to_string(i + 1) + ": invalid weight or y");
        }
    }
}

ReplicateWeightTable jk1_weights(std::span<const Observation> zones) {
    validate_zones(zones);
    const std::size_t G = zones.size();
    const double scale = static_cast<double>(G) / static_cast<double>(G - 1);

    ReplicateWeightTable table;
    table.scheme = SchemeSpec::jk1();
    table.full_weights.reserve(G);
    for (const auto& z : zones) table.full_weights.push_back(z.weight);
    table.weights = Matrix<double>(G, G);
    for (std::size_t r = 0; r < G; ++r) {
        for (std::size_t i = 0; i < G; ++i) table.weights(r, i) = (i == r) ? 0.0 : zones[i].weight * scale;
    }
    return table;
}

ReplicateEstimates replicate_estimates(const StratifiedSample& sample, const ReplicateWeightTable& table) {
    const std::size_t H = sample.num_strata();
    if (table.scheme.kind == SchemeKind::Jk1) {
        throw Error(ErrorCode::SchemeMismatch, "jk1 tables apply to zone lists");
    }
    if (table.num_observations() != 2 * H || table.signs.cols() != H || table.signs.rows() != table.num_replicates()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "table has " + std::to_string(table.num_observations()) + " observations, sample has " +
                        std::to_string(2 * H));
    }
    ReplicateEstimates est;
    est.scheme = table.scheme;
    est.t_full = total_estimate(sample);
    est.components = contrasts(sample).values;
    est.t_rep.reserve(table.num_replicates());
    est.deviations.reserve(table.num_replicates());
    for (std::size_t r = 0; r < table.num_replicates(); ++r) {
        const double t = weighted_sum(table.weights.row(r), sample);
        est.t_rep.push_back(t);
        est.deviations.push_back(t - est.t_full);
    }
    return est;
}

ReplicateEstimates replicate_estimates(std::span<const Observation> zones, const ReplicateWeightTable& table) {
    validate_zones(zones);
    if (table.scheme.kind != SchemeKind::Jk1) {
        throw Error(ErrorCode::SchemeMismatch, "zone lists need a jk1 table");
    }
    if (table.num_observations() != zones.size() || table.num_replicates() != zones.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "table has " + std::to_string(table.num_observations()) + " zones, input has " +
                        std::to_string(zones.size()));
    }
    ReplicateEstimates est;
    est.scheme = table.scheme;
    for (const auto& z : zones) {
        est.components.push_back(z.weight * z.y);
        est.t_full += z.weight * z.y;
    }
    for (std::size_t r = 0; r < table.num_replicates(); ++r) {
        double t = 0.0;
        const auto w = table.weights.row(r);
        for (std::size_t i = 0; i < zones.size(); ++i) t += w[i] * zones[i].y;
        est.t_rep.push_back(t);
        est.deviations.push_back(t - est.t_full);
    }
    return est;
}

double replicate_mean_check(const ReplicateEstimates& est, const SchemeSpec& scheme) {
    if (!scheme.is_brr_family()) {
        throw Error(ErrorCode::SchemeMismatch, "replicate mean identity holds for the BRR family only");
    }
    if (est.t_rep.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "no replicates");
    }
    double sum = 0.0;
    for (double t : est.t_rep) sum += t;
    return sum / static_cast<double>(est.t_rep.size()) - est.t_full;
}

} // namespace repvar
