#ifndef GFCOND_QUADRATURE_HPP
#define GFCOND_QUADRATURE_HPP

#include <Eigen/Core>

namespace gfcond {

/// Quadrature rule on [0,1]: strictly increasing nodes, positive weights
/// summing to 1.
struct QuadratureGrid {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;

    int count() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Legendre rule with M nodes mapped to [0,1]. M must be in [2, 4096].
QuadratureGrid build_grid(int m);

/// Uniform grid with M nodes spanning [0,1] inclusive (audit/interpolation
/// targets, not a quadrature rule in the build_grid sense).
Eigen::VectorXd uniform_points(int m);

/// Weighted squared L2 norm of grid samples: sum_i w_i |f_i|^2.
double weighted_norm_sq(const Eigen::VectorXcd& values, const Eigen::VectorXd& weights);

/// Max modulus over grid samples.
double sup_norm(const Eigen::VectorXcd& values);

}  // namespace gfcond

#endif
