#include "doctest.h"
#include "test_support.hpp"

#include "repvar/dof.hpp"
#include "repvar/error.hpp"
#include "repvar/tdist.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <numbers>

using namespace repvar;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

std::vector<double> d(std::initializer_list<double> xs) { return xs; }

} // namespace

TEST_CASE("ws_naive") {
    CHECK(ws_naive(d({1, 1, 1, 1})) == 4.0);
    CHECK(ws_naive(d({2, 0, 0})) == 1.0);
    CHECK(ws_naive(d({1, 2})) == doctest::Approx(25.0 / 17.0).epsilon(1e-15));
    CHECK(code_of([] { ws_naive(d({0, 0, 0})); }) == ErrorCode::DegenerateContrasts);
    CHECK(code_of([] { ws_naive(std::vector<double>{}); }) == ErrorCode::DegenerateContrasts);
}

TEST_CASE("ws_corrected") {
    const auto a = ws_corrected(d({1, 1, 1, 1}));
    CHECK(a.naive == 4.0);
    CHECK(a.corrected == 10.0);
    CHECK(a.corrected_clamped == 10.0);
    CHECK(a.basis == DofBasis::Contrasts);
    const auto b = ws_corrected(d({2, 0, 0}));
    CHECK(b.corrected == 1.0);
    CHECK(b.corrected_clamped == 1.0);
    CHECK(std::abs(ws_corrected(d({1, 2})).corrected - 41.0 / 17.0) <= 1e-12);
    CHECK(code_of([] { ws_corrected(d({0})); }) == ErrorCode::DegenerateContrasts);
}

TEST_CASE("ws_from_jk_replicates") {
    CHECK(std::abs(ws_from_jk_replicates(d({1, 2})).corrected - 41.0 / 17.0) <= 1e-12);
    CHECK(ws_from_jk_replicates(d({-1, 2})).corrected == ws_from_jk_replicates(d({1, 2})).corrected);
    const auto f = ws_from_jk_replicates(d({0.5, 1.0}), 0.5);
    CHECK(std::abs(f.corrected - 41.0 / 17.0) <= 1e-12);
    CHECK(f.basis == DofBasis::JkReplicates);
    CHECK(code_of([] { ws_from_jk_replicates(d({1, 2}), 0.0); }) == ErrorCode::EpsilonOutOfRange);
}

TEST_CASE("dof bounds, extremes and scale invariance on random contrasts") {
    std::mt19937_64 gen(31);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_int_distribution<int> pickH(1, 64);
    for (int trial = 0; trial < 500; ++trial) {
        const int H = pickH(gen);
        std::vector<double> v(H);
        for (auto& x : v) x = z(gen) * std::exp(2 * z(gen));
        const auto est = ws_corrected(v);
        CHECK(est.naive >= 1.0);
        CHECK(est.naive <= H);
        CHECK(est.corrected == 3.0 * est.naive - 2.0);
        CHECK(est.corrected >= 1.0);
        CHECK(est.corrected <= 3.0 * H - 2.0);
        for (double c : {-7.0, 1e-150, 1e150}) {
            std::vector<double> w(v);
            for (auto& x : w) x *= c;
            CHECK(ws_naive(w) == doctest::Approx(est.naive).epsilon(1e-12));
        }
        // one active stratum gives exactly 1; equal magnitudes give 3H - 2
        std::vector<double> single(H, 0.0);
        single[trial % H] = v[0] == 0 ? 1.0 : v[0];
        CHECK(ws_corrected(single).corrected == 1.0);
        std::vector<double> equal(H);
        for (int h = 0; h < H; ++h) equal[h] = (h % 2 ? -1.0 : 1.0) * 2.5;
        CHECK(ws_corrected(equal).corrected == 3.0 * H - 2.0);
    }
}

TEST_CASE("t quantile closed forms") {
    CHECK(std::abs(t_quantile(1, 0.975) - std::tan(std::numbers::pi * 0.475)) <= 1e-10);
    CHECK(std::abs(t_quantile(1, 0.975) - 12.70620474) <= 1e-7);
    const double p = 0.975;
    const double a = 2 * p - 1;
    const double q2 = a * std::sqrt(2.0 / (1.0 - a * a));
    CHECK(std::abs(t_quantile(2, p) - q2) <= 1e-10);
    CHECK(std::abs(t_quantile(2, p) - 4.302653) <= 1e-6);
    CHECK(std::abs(t_quantile(1e8, 0.975) - 1.959964) <= 1e-4);
    CHECK(t_quantile(7.3, 0.5) == 0.0);
}

TEST_CASE("t quantile against Boost") {
    for (double nu : {0.5, 1.0, 1.5, 2.0, 2.411764705882353, 5.0, 10.0, 30.0, 1000.0, 5e4, 2e5, 1e8}) {
        boost::math::students_t dist(nu);
        for (double p : {1e-6, 0.001, 0.025, 0.1, 0.3, 0.5, 0.7, 0.9, 0.975, 0.995, 0.999999}) {
            const double ref = boost::math::quantile(dist, p);
            CHECK(t_quantile(nu, p) == doctest::Approx(ref).epsilon(1e-9));
        }
        for (double x : {-30.0, -3.0, -0.5, 0.0, 0.25, 2.0, 40.0}) {
            CHECK(std::abs(t_cdf(nu, x) - boost::math::cdf(dist, x)) <= 1e-12);
        }
    }
}

TEST_CASE("t quantile round trip, symmetry and monotonicity") {
    for (double nu : {0.5, 1.0, 2.0, 5.0, 30.0, 1000.0}) {
        for (double p : {0.025, 0.5, 0.975}) {
            CHECK(std::abs(t_cdf(nu, t_quantile(nu, p)) - p) <= 1e-9);
            CHECK(t_quantile(nu, 1 - p) == doctest::Approx(-t_quantile(nu, p)).epsilon(1e-12));
        }
        double prev = -INFINITY;
        for (double p = 0.01; p < 1.0; p += 0.01) {
            const double q = t_quantile(nu, p);
            CHECK(q > prev);
            prev = q;
        }
    }
    CHECK(code_of([] { t_quantile(3, 0.0); }) == ErrorCode::InvalidProbability);
    CHECK(code_of([] { t_quantile(3, 1.0); }) == ErrorCode::InvalidProbability);
    CHECK(code_of([] { t_quantile(0, 0.5); }) == ErrorCode::InvalidProbability);
}

TEST_CASE("normal quantile against Boost") {
    boost::math::normal n;
    for (double p : {1e-300, 1e-12, 1e-4, 0.025, 0.3, 0.5, 0.8, 0.975, 1 - 1e-9}) {
        CHECK(normal_quantile(p) == doctest::Approx(boost::math::quantile(n, p)).epsilon(1e-14));
    }
    CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) <= 1e-14);
}

TEST_CASE("incomplete beta") {
    CHECK(incomplete_beta(1, 1, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    // I_x(2, 3) = 6x^2 - 8x^3 + 3x^4
    const double x = 0.37;
    CHECK(incomplete_beta(2, 3, x) == doctest::Approx(6 * x * x - 8 * x * x * x + 3 * x * x * x * x).epsilon(1e-13));
    CHECK(code_of([] { incomplete_beta(0, 1, 0.5); }) == ErrorCode::InvalidProbability);
}

TEST_CASE("variance of the variance estimator") {
    CHECK(variance_of_variance_normal(d({1, 1})) == 4.0);
    CHECK(variance_of_variance_normal(d({0, 0, 0})) == 0.0);
    CHECK(variance_of_variance_normal(d({3})) == 18.0);
    CHECK(replicate_sum_variance_normal(d({1, 1}), 4) == 64.0);
}

TEST_CASE("confidence interval") {
    VarianceEstimate v;
    v.value = 5.0;
    const auto dof = ws_corrected(d({1, 2}));
    const auto ci = confidence_interval(11.0, v, dof, 0.95);
    CHECK(ci.center == 11.0);
    CHECK(ci.dof_used.value() == doctest::Approx(41.0 / 17.0));
    CHECK(ci.half_width == doctest::Approx(t_quantile(41.0 / 17.0, 0.975) * std::sqrt(5.0)).epsilon(1e-14));
    CHECK(ci.lower() < 11.0);
    CHECK(ci.upper() > 11.0);

    const auto normal = confidence_interval(11.0, v, dof, 0.95, {DofRule::Normal, false});
    CHECK_FALSE(normal.dof_used.has_value());
    CHECK(normal.half_width == doctest::Approx(1.959963984540054 * std::sqrt(5.0)));
    const auto fixed = confidence_interval(11.0, v, dof, 0.95, {DofRule::FixedH, false});
    CHECK(*fixed.dof_used == 2.0);
    const auto naive = confidence_interval(11.0, v, dof, 0.95, {DofRule::Naive, false});
    CHECK(*naive.dof_used == doctest::Approx(25.0 / 17.0));
    const auto capped = confidence_interval(11.0, v, ws_corrected(d({1, 1})), 0.95, {DofRule::Corrected, true});
    CHECK(*capped.dof_used == 2.0);
    const auto uncapped = confidence_interval(11.0, v, ws_corrected(d({1, 1})), 0.95);
    CHECK(*uncapped.dof_used == 4.0);

    VarianceEstimate zero;
    const auto point = confidence_interval(3.0, zero, std::nullopt, 0.5);
    CHECK(point.degenerate);
    CHECK(point.half_width == 0.0);
    CHECK(point.covers(3.0));
    CHECK_FALSE(confidence_interval(3.0, v, dof, 0.5).half_width == 0.0);

    CHECK(code_of([&] { confidence_interval(1.0, v, std::nullopt, 0.95); }) == ErrorCode::DegenerateContrasts);
    CHECK(code_of([&] { confidence_interval(1.0, v, dof, 1.0); }) == ErrorCode::InvalidProbability);
}
