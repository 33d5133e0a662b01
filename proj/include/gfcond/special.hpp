#ifndef GFCOND_SPECIAL_HPP
#define GFCOND_SPECIAL_HPP

#include <cstddef>
#include <vector>

namespace gfcond {

/// Compensated (Kahan) accumulator for long sums of small terms.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// log(sum(exp(v))) without overflow; -inf for an empty list.
double log_sum_exp(const std::vector<double>& v);

/// Upper tail Q(k, x) = P(Gamma(k,1) > x) for integer shape k >= 1,
/// i.e. exp(-x) * sum_{j<k} x^j/j!. Evaluated in log space.
double gamma_upper_log(int shape, double x);
double gamma_upper(int shape, double x);

/// Lower CDF of Gamma(shape, scale).
double gamma_cdf(int shape, double scale, double x);

/// Solve Q(shape, x) = exp(log_q) for x >= x_min, by bisection on the
/// monotone log tail. log_q must not exceed gamma_upper_log(shape, x_min).
double gamma_upper_inverse_log(int shape, double log_q, double x_min);

/// Tail P(sum_i X_i > t) for independent exponentials with distinct means,
/// via the standard partial-fraction expansion. Means must be positive and
/// pairwise distinct (relative gap > 1e-9); throws otherwise.
double hypoexponential_tail(const std::vector<double>& means, double t);

/// True if all entries are pairwise distinct at the given relative gap.
bool distinct_rates(const std::vector<double>& means, double rel_gap = 1e-9);

}  // namespace gfcond

#endif
