#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace repvar {

/// One weighted observation (a PSU total and its design weight).
struct Observation {
    double weight = 1.0;
    double y = 0.0;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// A stratum with exactly two PSUs. Input order defines unit 1 and unit 2,
/// which fixes the sign of the stratum contrast.
class Stratum {
public:
    Stratum(std::string label, Observation unit1, Observation unit2);

    const std::string& label() const noexcept { return label_; }
    const Observation& unit(std::size_t i) const { return units_.at(i); }
    const std::array<Observation, 2>& units() const noexcept { return units_; }

    friend bool operator==(const Stratum&, const Stratum&) = default;

private:
    std::string label_;
    std::array<Observation, 2> units_;
};

/**
 * @brief Stratified two-PSU-per-stratum sample.
 *
 * Validated on construction: at least one stratum, positive finite weights
 * and finite y values. Immutable afterwards.
 */
class StratifiedSample {
public:
    explicit StratifiedSample(std::vector<Stratum> strata);

    std::size_t num_strata() const noexcept { return strata_.size(); }
    std::size_t num_observations() const noexcept { return 2 * strata_.size(); }
    const std::vector<Stratum>& strata() const noexcept { return strata_; }
    const Stratum& stratum(std::size_t h) const { return strata_.at(h); }

    /// Observation by flat index 2h + i.
    const Observation& observation(std::size_t index) const {
        return strata_.at(index / 2).unit(index % 2);
    }

    /// Full-sample weights in flat observation order.
    std::vector<double> weights() const;

    friend bool operator==(const StratifiedSample&, const StratifiedSample&) = default;

private:
    std::vector<Stratum> strata_;
};

/// Within-stratum contrasts d_h = w_h1 y_h1 - w_h2 y_h2, in stratum order.
struct ContrastVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    std::span<const double> view() const noexcept { return values; }
    double operator[](std::size_t h) const { return values[h]; }
};

/// Sum over strata and units of w * y.
double total_estimate(const StratifiedSample& sample);

ContrastVector contrasts(const StratifiedSample& sample);

/// Sum of squared contrasts; the value every replicate scheme reproduces.
double direct_variance(std::span<const double> contrasts);
inline double direct_variance(const ContrastVector& d) { return direct_variance(d.view()); }

} // namespace repvar
