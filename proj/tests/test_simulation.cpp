#include "doctest.h"

#include "repvar/error.hpp"
#include "repvar/io.hpp"
#include "repvar/rng.hpp"
#include "repvar/simulation.hpp"

#include <cmath>

using namespace repvar;
using namespace repvar::sim;

namespace {

SimulationConfig base_config() {
    SimulationConfig c;
    c.num_strata = 4;
    c.sigma_profile = EqualSigma{1.0};
    c.n_reps = 400;
    c.seed = 12345;
    c.threads = 1;
    return c;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::IoError;
}

} // namespace

TEST_CASE("counter rng is a pure function of its key") {
    CounterRng a(1, 2, 3), b(1, 2, 3), c(1, 3, 3);
    for (int i = 0; i < 10; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        CHECK(x != c.next_u64());
    }
    CounterRng u(9, 0, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = u.normal();
        sum += z;
        sum2 += z * z;
    }
    CHECK(std::abs(sum / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(sum2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("sigma profiles") {
    CHECK(stratum_sigmas(EqualSigma{2.0}, 3) == std::vector<double>{2, 2, 2});
    CHECK(stratum_sigmas(LinearSigma{1.0, 3.0}, 3) == std::vector<double>{1, 2, 3});
    CHECK(stratum_sigmas(LinearSigma{1.0, 3.0}, 1) == std::vector<double>{1});
    CHECK(stratum_sigmas(OneDominantSigma{10.0}, 3) == std::vector<double>{10, 1, 1});
    CHECK(stratum_sigmas(CustomSigma{{1, 10}}, 2) == std::vector<double>{1, 10});
    CHECK(code_of([] { stratum_sigmas(CustomSigma{{1, 10}}, 3); }) == ErrorCode::ConfigError);
}

TEST_CASE("config validation") {
    auto c = base_config();
    CHECK_NOTHROW(c.validate());
    c.n_reps = 99;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
    c = base_config();
    c.sigma_profile = EqualSigma{0.0};
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
    c = base_config();
    c.scheme = SchemeSpec::jk1();
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
    c = base_config();
    c.means = {1, 2};
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
    c = base_config();
    c.level = 1.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::ConfigError);
}

TEST_CASE("draw_sample is deterministic in (seed, rep)") {
    const auto c = base_config();
    CHECK(draw_sample(c, 7) == draw_sample(c, 7));
    CHECK_FALSE(draw_sample(c, 7) == draw_sample(c, 8));
    const auto s = draw_sample(c, 0);
    CHECK(s.num_strata() == 4);
    for (std::size_t k = 0; k < s.num_observations(); ++k) CHECK(s.observation(k).weight == 1.0);
}

TEST_CASE("custom profile: contrast variances scale with sigma^2") {
    auto c = base_config();
    c.num_strata = 2;
    c.sigma_profile = CustomSigma{{1.0, 10.0}};
    c.n_reps = 20000;
    const auto m = check_chi2_approx(c);
    const double ratio = m[1].var_d / m[0].var_d;
    CHECK(std::abs(ratio / 100.0 - 1.0) <= 4.0 * 2.0 / std::sqrt(20000.0));
}

TEST_CASE("chi-square moments of the contrasts") {
    auto c = base_config();
    c.num_strata = 2;
    c.sigma_profile = CustomSigma{{1.0, 3.0}};
    c.n_reps = 200000;
    c.threads = 0;
    const auto m = check_chi2_approx(c);
    CHECK(std::abs(m[0].var_d - 2.0) < 0.05 * 2.0);
    CHECK(std::abs(m[0].var_d2 - 8.0) < 0.05 * 8.0);
    for (const auto& s : m) {
        CHECK(std::abs(s.ratio - 2.0) < 0.1);
        CHECK(std::abs(s.mean_d) < 4.0 * s.se_mean_d);
        CHECK(s.predicted_var_d2 == 2.0 * s.var_d * s.var_d);
    }
}

TEST_CASE("deviation covariance against the closed form") {
    SUBCASE("equal variances, H = R - 1: every off-diagonal is -Var(d)") {
        auto c = base_config();
        c.num_strata = 3;
        c.n_reps = 20000;
        const auto cmp = check_deviation_covariance(c);
        CHECK(cmp.max_abs_z <= 4.0);
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t s = 0; s < 4; ++s) {
                if (r == s) continue;
                CHECK(cmp.theoretical(r, s) == doctest::Approx(-2.0).epsilon(0.1));
                CHECK(std::abs(cmp.empirical(r, s) - (-2.0)) <= 4.0 * cmp.mc_se(r, s) + 0.1);
            }
        }
    }
    SUBCASE("one dominant stratum: correlated deviations") {
        auto c = base_config();
        c.num_strata = 2;
        c.sigma_profile = OneDominantSigma{10.0};
        c.n_reps = 20000;
        c.scheme = SchemeSpec::fay_brr(0.5);
        const auto cmp = check_deviation_covariance(c);
        CHECK(cmp.max_abs_z <= 4.0);
        bool nonzero_off_diagonal = false;
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t s = 0; s < 4; ++s) {
                if (r != s && std::abs(cmp.theoretical(r, s)) > 100.0) nonzero_off_diagonal = true;
            }
        }
        CHECK(nonzero_off_diagonal);
    }
    auto c = base_config();
    c.scheme = SchemeSpec::paired_jk();
    CHECK(code_of([&] { check_deviation_covariance(c); }) == ErrorCode::ConfigError);
}

TEST_CASE("dof calibration basics") {
    auto c = base_config();
    c.num_strata = 1;
    const auto one = check_dof_calibration(c);
    CHECK(one.mean_corrected == 1.0);
    CHECK(one.sd_corrected == 0.0);
    c.num_strata = 6;
    const auto six = check_dof_calibration(c);
    CHECK(six.mean_naive < six.mean_corrected);
    CHECK(six.mean_naive >= 1.0);
    CHECK(six.mean_naive <= 6.0);
    CHECK(six.n == c.n_reps);
}

TEST_CASE("run_coverage smoke and invariants") {
    auto c = base_config();
    c.n_reps = 100;
    c.means = {1, 2, 3, 4};
    const auto r = run_coverage(c);
    CHECK(r.n_reps == 100);
    CHECK(r.true_total == 20.0);
    CHECK(r.coverage.size() == 4);
    for (const auto& rc : r.coverage) {
        CHECK(rc.n == 100);
        CHECK(rc.covered <= rc.n);
        CHECK(rc.coverage >= 0.0);
        CHECK(rc.coverage <= 1.0);
        CHECK(rc.mc_se == doctest::Approx(std::sqrt(rc.coverage * (1 - rc.coverage) / 100.0)));
    }
    CHECK(r.deviation_covariance.has_value());
    CHECK(r.expected_variance == 8.0);
    CHECK(r.var_variance_normal == 4 * 2.0 * 4.0);
}

TEST_CASE("reports are bit-identical across runs and thread counts") {
    auto c = base_config();
    c.n_reps = 1000;
    c.threads = 1;
    const auto a = io::to_json(run_coverage(c)).dump();
    const auto b = io::to_json(run_coverage(c)).dump();
    c.threads = 7;
    const auto d = io::to_json(run_coverage(c)).dump();
    CHECK(a == b);
    CHECK(a == d);
    c.seed += 1;
    CHECK(a != io::to_json(run_coverage(c)).dump());
}

TEST_CASE("schemes agree rep by rep") {
    auto c = base_config();
    c.n_reps = 500;
    c.sigma_profile = LinearSigma{0.5, 4.0};
    const auto brr = run_coverage(c);
    c.scheme = SchemeSpec::fay_jk(0.3);
    const auto jk = run_coverage(c);
    CHECK_FALSE(jk.deviation_covariance.has_value());
    for (std::size_t k = 0; k < brr.coverage.size(); ++k) {
        CHECK(brr.coverage[k].covered == jk.coverage[k].covered);
        CHECK(brr.coverage[k].mean_dof == doctest::Approx(jk.coverage[k].mean_dof).epsilon(1e-12));
    }
    CHECK(brr.mean_variance == jk.mean_variance);
}
