#include "repvar/estimators.hpp"

#include "repvar/error.hpp"

#include <cmath>
#include <string>

namespace repvar {

namespace {

double sum_of_squares(std::span<const double> xs) {
    double s = 0.0;
    for (double x : xs) s += x * x;
    return s;
}

VarianceEstimate finish(const ReplicateEstimates& est, double via_replicates, double via_contrasts) {
    if (std::abs(via_replicates - via_contrasts) > kIdentityTolerance * (1.0 + via_contrasts)) {
        throw Error(ErrorCode::DimensionMismatch,
                    "replicate-path variance " + std::to_string(via_replicates) +
                        " disagrees with the contrast path " + std::to_string(via_contrasts) +
                        "; were the estimates built from this sample's table?");
    }
    VarianceEstimate v;
    v.scheme = est.scheme;
    v.value = via_replicates;
    v.via_replicates = via_replicates;
    v.via_contrasts = via_contrasts;
    v.n_components = est.components.size();
    return v;
}

void check_epsilon(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorCode::EpsilonOutOfRange, "epsilon must lie in (0, 1], got " + std::to_string(epsilon));
    }
}

void check_count(const ReplicateEstimates& est, std::size_t expected) {
    if (est.deviations.size() != expected) {
        throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(expected) + " replicates, got " +
                                                      std::to_string(est.deviations.size()));
    }
}

} // namespace

VarianceEstimate variance_brr(const ReplicateEstimates& est, std::size_t num_replicates) {
    if (est.scheme.kind != SchemeKind::Brr && !(est.scheme.kind == SchemeKind::FayBrr && est.scheme.epsilon == 1.0)) {
        throw Error(ErrorCode::SchemeMismatch, "variance_brr needs unperturbed BRR estimates");
    }
    check_count(est, num_replicates);
    const double via_rep = sum_of_squares(est.deviations) / static_cast<double>(num_replicates);
    return finish(est, via_rep, sum_of_squares(est.components));
}

VarianceEstimate variance_fay_brr(const ReplicateEstimates& est, std::size_t num_replicates, double epsilon) {
    check_epsilon(epsilon);
    if (!est.scheme.is_brr_family() || est.scheme.epsilon != epsilon) {
        throw Error(ErrorCode::SchemeMismatch, "variance_fay_brr needs BRR-family estimates built with this epsilon");
    }
    check_count(est, num_replicates);
    const double via_rep =
        sum_of_squares(est.deviations) / (epsilon * epsilon * static_cast<double>(num_replicates));
    return finish(est, via_rep, sum_of_squares(est.components));
}

VarianceEstimate variance_paired_jk(const ReplicateEstimates& est, double epsilon) {
    check_epsilon(epsilon);
    if (est.deviations.size() % 2 != 0) {
        throw Error(ErrorCode::OddReplicateCount,
                    "paired jackknife needs 2H replicates, got " + std::to_string(est.deviations.size()));
    }
    if (!est.scheme.is_paired_jk_family() || est.scheme.epsilon != epsilon) {
        throw Error(ErrorCode::SchemeMismatch, "variance_paired_jk needs paired-jk estimates built with this epsilon");
    }
    check_count(est, 2 * est.components.size());
    double sum = 0.0;
    for (std::size_t h = 0; 2 * h < est.deviations.size(); ++h) {
        const double x1 = est.deviations[2 * h];
        const double x2 = est.deviations[2 * h + 1];
        sum += x1 * x1 + x2 * x2;
    }
    return finish(est, sum / (2.0 * epsilon * epsilon), sum_of_squares(est.components));
}

VarianceEstimate variance_jk1(const ReplicateEstimates& est, std::size_t num_zones) {
    if (num_zones < 2) {
        throw Error(ErrorCode::TooFewZones, "jk1 needs at least 2 zones, got " + std::to_string(num_zones));
    }
    if (est.scheme.kind != SchemeKind::Jk1) {
        throw Error(ErrorCode::SchemeMismatch, "variance_jk1 needs jk1 estimates");
    }
    check_count(est, num_zones);
    if (est.components.size() != num_zones) {
        throw Error(ErrorCode::DimensionMismatch, "zone totals do not match the zone count");
    }
    const double G = static_cast<double>(num_zones);
    const double via_rep = (G - 1.0) / G * sum_of_squares(est.deviations);

    // Closed form: G/(G-1) sum (u_i - mean u)^2 with zone totals u_i.
    double mean = 0.0;
    for (double u : est.components) mean += u;
    mean /= G;
    double ss = 0.0;
    for (double u : est.components) ss += (u - mean) * (u - mean);
    return finish(est, via_rep, G / (G - 1.0) * ss);
}

VarianceEstimate estimate_variance(const ReplicateEstimates& est) {
    switch (est.scheme.kind) {
    case SchemeKind::Brr: return variance_brr(est, est.num_replicates());
    case SchemeKind::FayBrr: return variance_fay_brr(est, est.num_replicates(), est.scheme.epsilon);
    case SchemeKind::PairedJk:
    case SchemeKind::FayJk: return variance_paired_jk(est, est.scheme.epsilon);
    case SchemeKind::Jk1: return variance_jk1(est, est.num_replicates());
    }
    throw Error(ErrorCode::SchemeMismatch, "unknown scheme");
}

Matrix<double> brr_deviation_covariance(std::span<const double> stratum_variances, const Matrix<int>& signs) {
    const std::size_t H = stratum_variances.size();
    if (signs.cols() != H) {
        throw Error(ErrorCode::DimensionMismatch, "signs have " + std::to_string(signs.cols()) +
                                                      " columns for " + std::to_string(H) + " stratum variances");
    }
    const std::size_t R = signs.rows();
    Matrix<double> cov(R, R);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t s = r; s < R; ++s) {
            double c = 0.0;
            for (std::size_t h = 0; h < H; ++h) c += signs(r, h) * signs(s, h) * stratum_variances[h];
            cov(r, s) = c;
            cov(s, r) = c;
        }
    }
    return cov;
}

} // namespace repvar
