#include "gfcond/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfcond {

double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    KahanSum s;
    for (double x : v) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

double gamma_upper_log(int shape, double x) {
    if (shape < 1) throw std::invalid_argument("gamma_upper_log: shape must be >= 1");
    if (x <= 0.0) return 0.0;  // Q = 1
    if (shape == 1) return -x;
    if (shape == 2) return -x + std::log1p(x);
    // log Q = -x + log(sum_{j<k} x^j / j!)
    std::vector<double> terms(static_cast<size_t>(shape));
    double lx = std::log(x);
    double lfac = 0.0;  // log j!
    for (int j = 0; j < shape; ++j) {
        if (j > 0) lfac += std::log(static_cast<double>(j));
        terms[static_cast<size_t>(j)] = j * lx - lfac;
    }
    return -x + log_sum_exp(terms);
}

double gamma_upper(int shape, double x) { return std::exp(gamma_upper_log(shape, x)); }

double gamma_cdf(int shape, double scale, double x) {
    if (scale <= 0.0) throw std::invalid_argument("gamma_cdf: scale must be positive");
    if (x <= 0.0) return 0.0;
    return -std::expm1(gamma_upper_log(shape, x / scale));
}

double gamma_upper_inverse_log(int shape, double log_q, double x_min) {
    if (x_min < 0.0) x_min = 0.0;
    double log_q_min = gamma_upper_log(shape, x_min);
    if (log_q > log_q_min + 1e-12)
        throw std::invalid_argument("gamma_upper_inverse_log: target above tail at x_min");
    if (log_q >= log_q_min) return x_min;

    // bracket: grow hi until the tail drops below the target
    double lo = x_min;
    double hi = std::max(2.0 * (x_min + 1.0), x_min + 8.0);
    while (gamma_upper_log(shape, hi) > log_q) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e8) throw std::runtime_error("gamma_upper_inverse_log: bracket overflow");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (gamma_upper_log(shape, mid) > log_q)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    return 0.5 * (lo + hi);
}

bool distinct_rates(const std::vector<double>& means, double rel_gap) {
    for (size_t i = 0; i < means.size(); ++i)
        for (size_t j = i + 1; j < means.size(); ++j)
            if (std::abs(means[i] - means[j]) <=
                rel_gap * std::max(std::abs(means[i]), std::abs(means[j])))
                return false;
    return true;
}

double hypoexponential_tail(const std::vector<double>& means, double t) {
    if (means.empty()) throw std::invalid_argument("hypoexponential_tail: empty mean list");
    for (double m : means)
        if (m <= 0.0) throw std::invalid_argument("hypoexponential_tail: non-positive mean");
    if (!distinct_rates(means))
        throw std::invalid_argument("hypoexponential_tail: means must be pairwise distinct");
    if (t <= 0.0) return 1.0;
    // P(sum > t) = sum_i A_i exp(-t/theta_i),  A_i = prod_{j != i} theta_i/(theta_i - theta_j)
    KahanSum s;
    for (size_t i = 0; i < means.size(); ++i) {
        double log_a = 0.0;
        double sign = 1.0;
        for (size_t j = 0; j < means.size(); ++j) {
            if (j == i) continue;
            double d = means[i] - means[j];
            log_a += std::log(means[i]) - std::log(std::abs(d));
            if (d < 0.0) sign = -sign;
        }
        s.add(sign * std::exp(log_a - t / means[i]));
    }
    return std::clamp(s.value(), 0.0, 1.0);
}

}  // namespace gfcond
