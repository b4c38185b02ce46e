#include "repvar/simulation.hpp"

#include "repvar/error.hpp"
#include "repvar/estimators.hpp"
#include "repvar/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

namespace repvar {

double CounterRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

} // namespace repvar

namespace repvar::sim {

namespace {

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

unsigned resolve_threads(unsigned requested, std::size_t work) {
    unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(work, 1)));
}

// Runs body(i) for i in [0, n) on contiguous blocks. Each index writes only
// its own slot, so the outcome does not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    const std::size_t block = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                const std::size_t begin = t * block;
                const std::size_t end = std::min(n, begin + block);
                for (std::size_t i = begin; i < end; ++i) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

MeanSd mean_sd(std::span<const double> xs) {
    MeanSd out;
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return out;
}

// Sample covariance of replicate deviations (rows = reps) with per-entry
// MC standard errors from the spread of the centred products.
CovarianceComparison compare_covariance(const Matrix<double>& draws, Matrix<double> theoretical) {
    const std::size_t n = draws.rows();
    const std::size_t R = draws.cols();
    std::vector<double> mean(R, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < R; ++r) mean[r] += draws(i, r);
    }
    for (double& m : mean) m /= static_cast<double>(n);

    CovarianceComparison out;
    out.empirical = Matrix<double>(R, R);
    out.mc_se = Matrix<double>(R, R);
    std::vector<double> products(n);
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t s = r; s < R; ++s) {
            for (std::size_t i = 0; i < n; ++i) products[i] = (draws(i, r) - mean[r]) * (draws(i, s) - mean[s]);
            const auto ms = mean_sd(products);
            const double cov = ms.mean * static_cast<double>(n) / static_cast<double>(n - 1);
            const double se = ms.sd / std::sqrt(static_cast<double>(n));
            out.empirical(r, s) = out.empirical(s, r) = cov;
            out.mc_se(r, s) = out.mc_se(s, r) = se;
        }
    }
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t s = 0; s < R; ++s) {
            if (out.mc_se(r, s) > 0.0) {
                out.max_abs_z = std::max(out.max_abs_z,
                                         std::abs(out.empirical(r, s) - theoretical(r, s)) / out.mc_se(r, s));
            }
        }
    }
    out.theoretical = std::move(theoretical);
    return out;
}

constexpr std::size_t kMaxCovarianceReplicates = 64;

} // namespace

std::vector<double> stratum_sigmas(const SigmaProfile& profile, std::size_t num_strata) {
    return std::visit(
        overloaded{
            [&](const EqualSigma& p) { return std::vector<double>(num_strata, p.sigma); },
            [&](const LinearSigma& p) {
                std::vector<double> s(num_strata, p.min);
                for (std::size_t h = 1; h < num_strata; ++h) {
                    s[h] = p.min + (p.max - p.min) * static_cast<double>(h) / static_cast<double>(num_strata - 1);
                }
                return s;
            },
            [&](const OneDominantSigma& p) {
                std::vector<double> s(num_strata, 1.0);
                if (!s.empty()) s[0] = p.ratio;
                return s;
            },
            [&](const CustomSigma& p) {
                if (p.sigmas.size() != num_strata) {
                    throw Error(ErrorCode::ConfigError, "/sigma_profile/sigmas: expected " + std::to_string(num_strata) +
                                                            " values, got " + std::to_string(p.sigmas.size()));
                }
                return p.sigmas;
            },
        },
        profile);
}

void SimulationConfig::validate() const {
    if (num_strata < 1) throw Error(ErrorCode::ConfigError, "/strata: must be at least 1");
    if (n_reps < kMinReps) {
        throw Error(ErrorCode::ConfigError, "/n_reps: must be at least " + std::to_string(kMinReps));
    }
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::ConfigError, "/level: must lie in (0, 1)");
    for (double s : sigmas()) {
        if (!std::isfinite(s) || !(s > 0.0)) {
            throw Error(ErrorCode::ConfigError, "/sigma_profile: every sigma must be positive and finite");
        }
    }
    if (!means.empty() && means.size() != num_strata) {
        throw Error(ErrorCode::ConfigError, "/means: expected " + std::to_string(num_strata) + " values");
    }
    for (double m : means) {
        if (!std::isfinite(m)) throw Error(ErrorCode::ConfigError, "/means: values must be finite");
    }
    if (scheme.kind == SchemeKind::Jk1) {
        throw Error(ErrorCode::ConfigError, "/scheme/kind: simulation draws two-PSU strata; jk1 is not supported");
    }
    try {
        scheme.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("/scheme: ") + e.what());
    }
    if (dof_rules.empty()) throw Error(ErrorCode::ConfigError, "/dof_rules: at least one rule required");
}

std::vector<double> SimulationConfig::unit_means() const {
    return means.empty() ? std::vector<double>(num_strata, 0.0) : means;
}

double SimulationConfig::true_total() const {
    double t = 0.0;
    for (double m : unit_means()) t += 2.0 * m;
    return t;
}

StratifiedSample draw_sample(const SimulationConfig& config, std::uint64_t rep_index) {
    const auto sigma = config.sigmas();
    const auto mu = config.unit_means();
    CounterRng rng(config.seed, rep_index, 0);
    std::vector<Stratum> strata;
    strata.reserve(config.num_strata);
    for (std::size_t h = 0; h < config.num_strata; ++h) {
        const double y1 = rng.normal(mu[h], sigma[h]);
        const double y2 = rng.normal(mu[h], sigma[h]);
        strata.emplace_back("h" + std::to_string(h + 1), Observation{1.0, y1}, Observation{1.0, y2});
    }
    return StratifiedSample(std::move(strata));
}

namespace {

struct RepOutcome {
    double total = 0.0;
    double variance = 0.0;
    bool degenerate = false;
    double naive = 0.0;
    double corrected = 0.0;
    std::vector<char> covered;
    std::vector<double> dof_used;
    std::vector<double> scaled_deviations;
};

DofEstimate rep_dof(const ReplicateEstimates& est) {
    if (est.scheme.is_paired_jk_family()) {
        std::vector<double> h1;
        h1.reserve(est.components.size());
        for (std::size_t h = 0; h < est.components.size(); ++h) h1.push_back(est.deviations[2 * h]);
        return ws_from_jk_replicates(h1, est.scheme.epsilon);
    }
    return ws_corrected(est.components);
}

} // namespace

SimulationReport run_coverage(const SimulationConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::size_t H = config.num_strata;
    const double truth = config.true_total();
    const auto sigma = config.sigmas();
    const auto& rules = config.dof_rules;

    // Replicate count and signs depend only on H and the scheme.
    const auto probe = replicate_weights(draw_sample(config, 0), config.scheme);
    const std::size_t R = probe.num_replicates();
    const bool track_cov = config.scheme.is_brr_family() && R <= kMaxCovarianceReplicates;

    std::vector<RepOutcome> outcomes(config.n_reps);
    const unsigned threads = resolve_threads(config.threads, config.n_reps);
    parallel_for(config.n_reps, threads, [&](std::size_t rep) {
        const auto sample = draw_sample(config, rep);
        const auto table = replicate_weights(sample, config.scheme);
        const auto est = replicate_estimates(sample, table);
        const auto var = estimate_variance(est);
        RepOutcome& out = outcomes[rep];
        out.total = est.t_full;
        out.variance = var.via_contrasts;
        std::optional<DofEstimate> dof;
        if (var.via_contrasts > 0.0) {
            dof = rep_dof(est);
            out.naive = dof->naive;
            out.corrected = dof->corrected;
        } else {
            out.degenerate = true;
        }
        out.covered.resize(rules.size());
        out.dof_used.resize(rules.size());
        for (std::size_t k = 0; k < rules.size(); ++k) {
            const auto ci = confidence_interval(est.t_full, var, dof, config.level, {rules[k], config.cap_at_h});
            out.covered[k] = ci.covers(truth) ? 1 : 0;
            out.dof_used[k] = ci.dof_used.value_or(0.0);
        }
        if (track_cov) {
            out.scaled_deviations.resize(R);
            for (std::size_t r = 0; r < R; ++r) out.scaled_deviations[r] = est.deviations[r] / config.scheme.epsilon;
        }
    });

    SimulationReport report;
    report.n_reps = config.n_reps;
    report.num_strata = H;
    report.num_replicates = R;
    report.level = config.level;
    report.seed = config.seed;
    report.scheme = probe.scheme;
    report.true_total = truth;
    report.sigmas = sigma;
    report.threads_used = threads;

    std::vector<double> variances(config.n_reps);
    std::vector<double> naive;
    std::vector<double> corrected;
    for (std::size_t i = 0; i < config.n_reps; ++i) {
        variances[i] = outcomes[i].variance;
        if (outcomes[i].degenerate) {
            ++report.n_degenerate;
        } else {
            naive.push_back(outcomes[i].naive);
            corrected.push_back(outcomes[i].corrected);
        }
    }
    const auto v = mean_sd(variances);
    report.mean_variance = v.mean;
    report.var_variance = v.sd * v.sd;
    std::vector<double> var_d(H);
    for (std::size_t h = 0; h < H; ++h) var_d[h] = 2.0 * sigma[h] * sigma[h];
    report.expected_variance = std::accumulate(var_d.begin(), var_d.end(), 0.0);
    report.var_variance_normal = variance_of_variance_normal(var_d);
    report.mean_naive_dof = mean_sd(naive).mean;
    report.mean_corrected_dof = mean_sd(corrected).mean;

    for (std::size_t k = 0; k < rules.size(); ++k) {
        RuleCoverage rc;
        rc.rule = rules[k];
        rc.n = config.n_reps;
        std::vector<double> dofs;
        for (const auto& o : outcomes) {
            rc.covered += static_cast<std::size_t>(o.covered[k]);
            if (!o.degenerate && rules[k] != DofRule::Normal) dofs.push_back(o.dof_used[k]);
        }
        rc.coverage = static_cast<double>(rc.covered) / static_cast<double>(rc.n);
        rc.mc_se = std::sqrt(rc.coverage * (1.0 - rc.coverage) / static_cast<double>(rc.n));
        const auto d = mean_sd(dofs);
        rc.mean_dof = d.mean;
        rc.sd_dof = d.sd;
        report.coverage.push_back(rc);
    }

    if (track_cov) {
        Matrix<double> draws(config.n_reps, R);
        for (std::size_t i = 0; i < config.n_reps; ++i) {
            std::copy(outcomes[i].scaled_deviations.begin(), outcomes[i].scaled_deviations.end(), draws.row(i).begin());
        }
        report.deviation_covariance = compare_covariance(draws, brr_deviation_covariance(var_d, probe.signs));
    }
    report.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::vector<StratumMoments> check_chi2_approx(const SimulationConfig& config) {
    config.validate();
    const std::size_t H = config.num_strata;
    const auto sigma = config.sigmas();
    Matrix<double> d(config.n_reps, H);
    parallel_for(config.n_reps, resolve_threads(config.threads, config.n_reps), [&](std::size_t rep) {
        const auto sample = draw_sample(config, rep);
        const auto c = contrasts(sample);
        std::copy(c.values.begin(), c.values.end(), d.row(rep).begin());
    });

    std::vector<StratumMoments> out(H);
    std::vector<double> col(config.n_reps);
    std::vector<double> sq(config.n_reps);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t i = 0; i < config.n_reps; ++i) {
            col[i] = d(i, h);
            sq[i] = col[i] * col[i];
        }
        const auto md = mean_sd(col);
        const auto m2 = mean_sd(sq);
        StratumMoments& m = out[h];
        m.sigma = sigma[h];
        m.mean_d = md.mean;
        m.se_mean_d = md.sd / std::sqrt(static_cast<double>(config.n_reps));
        m.var_d = md.sd * md.sd;
        m.var_d2 = m2.sd * m2.sd;
        m.ratio = m.var_d2 / (m.var_d * m.var_d);
        m.predicted_var_d2 = 2.0 * m.var_d * m.var_d;
    }
    return out;
}

CovarianceComparison check_deviation_covariance(const SimulationConfig& config) {
    config.validate();
    if (!config.scheme.is_brr_family()) {
        throw Error(ErrorCode::ConfigError, "/scheme/kind: deviation covariance check needs brr or fay-brr");
    }
    const std::size_t H = config.num_strata;
    const auto probe = replicate_weights(draw_sample(config, 0), config.scheme);
    const std::size_t R = probe.num_replicates();

    Matrix<double> deviations(config.n_reps, R);
    Matrix<double> d(config.n_reps, H);
    parallel_for(config.n_reps, resolve_threads(config.threads, config.n_reps), [&](std::size_t rep) {
        const auto sample = draw_sample(config, rep);
        const auto est = replicate_estimates(sample, replicate_weights(sample, config.scheme));
        for (std::size_t r = 0; r < R; ++r) deviations(rep, r) = est.deviations[r] / config.scheme.epsilon;
        std::copy(est.components.begin(), est.components.end(), d.row(rep).begin());
    });

    std::vector<double> realized(H);
    std::vector<double> col(config.n_reps);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t i = 0; i < config.n_reps; ++i) col[i] = d(i, h);
        const auto ms = mean_sd(col);
        realized[h] = ms.sd * ms.sd;
    }
    return compare_covariance(deviations, brr_deviation_covariance(realized, probe.signs));
}

DofCalibration check_dof_calibration(const SimulationConfig& config) {
    config.validate();
    std::vector<double> naive(config.n_reps, 0.0);
    std::vector<double> corrected(config.n_reps, 0.0);
    std::vector<char> ok(config.n_reps, 0);
    parallel_for(config.n_reps, resolve_threads(config.threads, config.n_reps), [&](std::size_t rep) {
        const auto c = contrasts(draw_sample(config, rep));
        if (direct_variance(c) > 0.0) {
            const auto dof = ws_corrected(c.view());
            naive[rep] = dof.naive;
            corrected[rep] = dof.corrected;
            ok[rep] = 1;
        }
    });
    std::vector<double> n_ok;
    std::vector<double> c_ok;
    DofCalibration out;
    for (std::size_t i = 0; i < config.n_reps; ++i) {
        if (ok[i]) {
            n_ok.push_back(naive[i]);
            c_ok.push_back(corrected[i]);
        } else {
            ++out.n_degenerate;
        }
    }
    out.n = n_ok.size();
    const auto a = mean_sd(n_ok);
    const auto b = mean_sd(c_ok);
    out.mean_naive = a.mean;
    out.sd_naive = a.sd;
    out.mean_corrected = b.mean;
    out.sd_corrected = b.sd;
    return out;
}

} // namespace repvar::sim
