#include "repvar/tdist.hpp"

#include "repvar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

namespace repvar {

namespace {

// std::lgamma writes the global signgam on glibc; the reentrant variant does not.
double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

// Remainder of Stirling's series for log Gamma, x >= 30.
double stirling_remainder(double x) {
    const double x2 = x * x;
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x;
}

// log Gamma(a + b) - log Gamma(a) - log Gamma(b). Large arguments go through
// Stirling differences to avoid cancelling two huge log Gamma values.
double log_inverse_beta(double a, double b) {
    const double big = std::max(a, b);
    const double small = std::min(a, b);
    if (big < 30.0) return log_gamma(a + b) - log_gamma(a) - log_gamma(b);
    const double ratio = (big - 0.5) * std::log1p(small / big) + small * std::log(big + small) - small +
                         stirling_remainder(big + small) - stirling_remainder(big);
    return ratio - log_gamma(small);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIter = 200000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// {I_x(a, b), 1 - I_x(a, b)} with y = 1 - x supplied separately to keep precision.
std::pair<double, double> incomplete_beta_pair(double a, double b, double x, double y) {
    if (x <= 0.0) return {0.0, 1.0};
    if (y <= 0.0) return {1.0, 0.0};
    const double log_norm = log_inverse_beta(a, b);
    const double log_front = log_norm + a * std::log(x) + b * std::log1p(-x);
    const double log_front_y = log_norm + a * std::log1p(-y) + b * std::log(y);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lower = std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
        return {lower, 1.0 - lower};
    }
    const double upper = std::exp(log_front_y) * beta_continued_fraction(b, a, y) / b;
    return {1.0 - upper, upper};
}

// P(T > x) for x >= 0.
double t_upper_tail(double dof, double x) {
    const double x2 = x * x;
    const double z = dof / (dof + x2);
    const double one_minus_z = x2 / (dof + x2);
    return 0.5 * incomplete_beta_pair(0.5 * dof, 0.5, z, one_minus_z).first;
}

void check_dof(double dof) {
    if (!(dof > 0.0) || std::isnan(dof)) {
        throw Error(ErrorCode::InvalidProbability, "degrees of freedom must be positive, got " + std::to_string(dof));
    }
}

// Abramowitz & Stegun 26.7.5, terms through dof^-4.
double cornish_fisher(double dof, double z) {
    const double z2 = z * z;
    const double z3 = z2 * z;
    const double z5 = z3 * z2;
    const double z7 = z5 * z2;
    const double z9 = z7 * z2;
    const double g1 = (z3 + z) / 4.0;
    const double g2 = (5.0 * z5 + 16.0 * z3 + 3.0 * z) / 96.0;
    const double g3 = (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / 384.0;
    const double g4 = (79.0 * z9 + 776.0 * z7 + 1482.0 * z5 - 1920.0 * z3 - 945.0 * z) / 92160.0;
    return z + g1 / dof + g2 / (dof * dof) + g3 / (dof * dof * dof) + g4 / (dof * dof * dof * dof);
}

constexpr double kLargeDof = 1e5;

// For dof >= kLargeDof and moderate x the incomplete beta loses digits to
// cancellation near x = 1; invert the Cornish-Fisher map instead.
double large_dof_cdf(double dof, double x) {
    double z = x;
    for (int iter = 0; iter < 50; ++iter) {
        const double h = 1e-6 * std::max(1.0, std::abs(z));
        const double slope = (cornish_fisher(dof, z + h) - cornish_fisher(dof, z - h)) / (2.0 * h);
        const double step = (cornish_fisher(dof, z) - x) / slope;
        z -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    return normal_cdf(z);
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "incomplete_beta needs a, b > 0 and x in [0, 1]");
    }
    return incomplete_beta_pair(a, b, x, 1.0 - x).first;
}

double t_pdf(double dof, double x) {
    check_dof(dof);
    const double log_norm = log_gamma(0.5 * (dof + 1.0)) - log_gamma(0.5 * dof) - 0.5 * std::log(dof * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

double t_cdf(double dof, double x) {
    check_dof(dof);
    if (std::isnan(x)) return x;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    if (dof >= kLargeDof && std::abs(x) <= 10.0) return large_dof_cdf(dof, x);
    return x >= 0.0 ? 1.0 - t_upper_tail(dof, x) : t_upper_tail(dof, -x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "probability must lie in (0, 1), got " + std::to_string(p));
    }
    const double q = p - 0.5;
    double val;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        val = q *
              (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                   45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                133.14166789178437745) * r + 3.387132872796366608) /
              (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                   21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                42.313330701600911252) * r + 1.0);
        return val;
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                   1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                4.6303378461565452959) * r + 1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                   0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                   0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
                5.4637849111641143699) * r + 6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                   7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double t_quantile(double dof, double p) {
    check_dof(dof);
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(ErrorCode::InvalidProbability, "probability must lie in (0, 1), got " + std::to_string(p));
    }
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -t_quantile(dof, 1.0 - p);
    if (dof >= kLargeDof) return cornish_fisher(dof, normal_quantile(p));

    // Solve P(T > q) = alpha on a bracket [lo, hi].
    const double alpha = 1.0 - p;
    double lo = 0.0;
    double hi = 1.0;
    while (t_upper_tail(dof, hi) > alpha) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    }
    double q = std::clamp(normal_quantile(p), lo, hi);
    if (q <= lo || q >= hi) q = 0.5 * (lo + hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double f = t_upper_tail(dof, q) - alpha;
        if (f == 0.0) return q;
        if (f > 0.0) lo = q; else hi = q;
        const double density = t_pdf(dof, q);
        double next = density > 0.0 ? q + f / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - q) <= 1e-15 * std::max(1.0, std::abs(q)) || hi - lo <= 1e-15 * std::max(1.0, hi)) {
            return next;
        }
        q = next;
    }
    return q;
}

} // namespace repvar
