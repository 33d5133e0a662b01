#ifndef GFCOND_SPECTRAL_HPP
#define GFCOND_SPECTRAL_HPP

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gfcond/kernel.hpp"
#include "gfcond/quadrature.hpp"

namespace gfcond {

/// One distinct eigenvalue with its multiplicity and member mode indices
/// (0-based, into the retained eigenvalue list).
struct EigenGroup {
    double kappa = 0.0;
    int multiplicity = 0;
    std::vector<int> members;
};

struct SmoothnessDiagnostics {
    double decay_slope = 0.0;  // log-log slope of mu_n vs n (negative for decay)
    int fit_lo = 0;            // 1-based fit window
    int fit_hi = 0;
    bool decay_ok = false;     // |slope| > 5, the o(1/n^5) proxy
    int sup_bound_violations = 0;
    double a_estimate = 0.0;   // max_n mu_n * ||phi_n''''||_2
    double cauchy_ratio = 0.0;
    bool series_converges = false;
};

/// Grid eigendecomposition of the covariance operator. Eigenfunctions are
/// tabulated at the grid nodes and orthonormal under the grid weights.
struct SpectralDecomposition {
    Kernel kernel;
    QuadratureGrid grid;
    Eigen::VectorXd eigenvalues;      // descending, strictly positive, size N
    Eigen::MatrixXcd eigenfunctions;  // M x N; column n is phi_n at the nodes
    std::vector<EigenGroup> groups;
    double trace = 0.0;       // sum of retained eigenvalues
    double sqrt_trace = 0.0;  // sum of sqrt(mu_n)
    Eigen::VectorXd tc_sqrt_diag;  // sum_n sqrt(mu_n) |phi_n(x_i)|^2
    double b_constant = 0.0;       // kappa_1^{-1/4} max_i sqrt(diag_i)
    double truncation_tol = 0.0;
    double discarded_mass = 0.0;  // positive mass dropped by truncation
    double degeneracy_tol = 0.0;
    std::vector<std::string> warnings;

    int retained() const { return static_cast<int>(eigenvalues.size()); }
    double kappa1() const { return groups.front().kappa; }
    int g1() const { return groups.front().multiplicity; }
};

/// Nystrom eigendecomposition: solves the symmetrized weighted eigenproblem
/// of sqrt(w_i) C(x_i,x_j) sqrt(w_j), rescales eigenvectors to
/// grid-orthonormality, clamps negative numerical eigenvalues to zero and
/// truncates so the discarded mass is at most truncation_tol * trace.
SpectralDecomposition decompose(const Kernel& kernel, const QuadratureGrid& grid,
                                double truncation_tol, double degeneracy_rel_tol = 1e-8);

/// Merges consecutive eigenvalues within rel_tol * mu_1 of each other into
/// degeneracy groups (kappa_j strictly decreasing). rel_tol in (0, 1e-3).
std::vector<EigenGroup> group_degeneracies(const Eigen::VectorXd& eigenvalues, double rel_tol);

/// Diagonal of T_C^{1/2} at the nodes plus the derived constant B.
std::pair<Eigen::VectorXd, double> tc_sqrt_profile(const SpectralDecomposition& decomp);

/// Decay-rate and regularity checks backing the sup-norm concentration
/// hypotheses. Needs at least 12 retained modes and M >= 64.
SmoothnessDiagnostics smoothness_diagnostics(const SpectralDecomposition& decomp);

/// Eigenfunction values at arbitrary points in [0,1] via the Nystrom
/// extension phi_n(x) = (1/mu_n) sum_j w_j C(x, y_j) phi_n(y_j).
Eigen::MatrixXcd extend_eigenfunctions(const SpectralDecomposition& decomp,
                                       const Eigen::VectorXd& points);

/// Barycentric Lagrange interpolation from the grid nodes to target points.
Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes);
Eigen::VectorXcd barycentric_interpolate(const Eigen::VectorXd& nodes,
                                         const Eigen::VectorXd& bary_w,
                                         const Eigen::VectorXcd& values,
                                         const Eigen::VectorXd& targets);

/// JSON export (eigenvalues, groups, B, trace, grid, eigenfunction tables).
std::string decomposition_to_json(const SpectralDecomposition& decomp);

}  // namespace gfcond

#endif
