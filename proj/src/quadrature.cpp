#include "gfcond/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace gfcond {

QuadratureGrid build_grid(int m) {
    if (m < 2) throw std::invalid_argument("build_grid: M must be >= 2");
    if (m > 4096) throw std::invalid_argument("build_grid: M capped at 4096");

    // Gauss-Legendre on [-1,1] by Newton iteration on the Legendre recurrence,
    // then affine map to [0,1] (weights scale by 1/2, so they sum to 1).
    QuadratureGrid grid;
    grid.nodes.resize(m);
    grid.weights.resize(m);
    int half = (m + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - t * t) * dp * dp);
        // t is the i-th root from the top; nodes ascend after mapping
        grid.nodes[i] = 0.5 * (1.0 - t);
        grid.nodes[m - 1 - i] = 0.5 * (1.0 + t);
        grid.weights[i] = 0.5 * w;
        grid.weights[m - 1 - i] = 0.5 * w;
    }
    return grid;
}

Eigen::VectorXd uniform_points(int m) {
    if (m < 2) throw std::invalid_argument("uniform_points: M must be >= 2");
    Eigen::VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = static_cast<double>(i) / (m - 1);
    return x;
}

double weighted_norm_sq(const Eigen::VectorXcd& values, const Eigen::VectorXd& weights) {
    if (values.size() != weights.size())
        throw std::invalid_argument("weighted_norm_sq: size mismatch");
    return (weights.array() * values.array().abs2()).sum();
}

double sup_norm(const Eigen::VectorXcd& values) {
    return values.size() ? values.array().abs().maxCoeff() : 0.0;
}

}  // namespace gfcond
