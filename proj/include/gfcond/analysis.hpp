#ifndef GFCOND_ANALYSIS_HPP
#define GFCOND_ANALYSIS_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "gfcond/conditioning.hpp"
#include "gfcond/spectral.hpp"

namespace gfcond {

/// Derived constants of a grouped spectrum with a strict gap.
struct SpectrumSummary {
    std::vector<EigenGroup> groups;
    double kappa1 = 0.0;
    int g1 = 0;
    double tilt_normalizer = 1.0;  // Z = prod_{j>=2} (1 - kappa_j/kappa_1)^{-g_j}
    double c_infinity = 1.0;
    double rho_perp = 0.0;  // uniform-in-r cap on E(||phi_perp||^2 | event)
};

SpectrumSummary make_spectrum_summary(const std::vector<EigenGroup>& groups);

/// Upper tail of Gamma(g_1, kappa_1): exp(-r/kappa_1) sum_{k<g_1} (r/kappa_1)^k / k!.
double parallel_tail(double r, int g1, double kappa1);

/// exp(-a u) * prod_{j>=2} (1 - a kappa_j)^{-g_j}; requires 0 < a < 1/kappa_2.
double chernoff_bound(double u, double a, const std::vector<EigenGroup>& groups);

/// The bound's standard tilt point a = (1/kappa_1 + 1/kappa_2) / 2.
double default_chernoff_a(const std::vector<EigenGroup>& groups);

/// Bound on P(||phihat_perp||_2 > eps | ||phi||_2^2 > r): the exponential
/// moment of the orthogonal mass above eps^2 r, evaluated as
/// Z * P_tilted(U > eps^2 r). Closed form (se = 0) when the orthogonal groups
/// are simple with distinct tilted means; otherwise tilted Monte Carlo with
/// the given sample count.
Estimate overlap_bound(double r, double eps, const std::vector<EigenGroup>& groups,
                       int mc_n = 1'000'000, const RngStream& stream = RngStream(2718281828ULL));

enum class FieldKind { Phi, Psi };

/// Large-r tail asymptote (r/kappa_1)^{g_1-1} e^{-r/kappa_1} / (g_1-1)! times
/// prod_{j>=2} (1 - rho_j)^{-g_j}, with rho_j = kappa_j/kappa_1 for phi and
/// sqrt(kappa_j/kappa_1) for psi (psi's threshold lives on the r/kappa_1 scale).
double tail_asymptote(double r, const std::vector<EigenGroup>& groups, FieldKind field);

/// Limiting psi/phi tail ratio prod_{j>=2} [(1-kappa_j/kappa_1)/(1-sqrt(kappa_j/kappa_1))]^{g_j}.
double c_infinity(const std::vector<EigenGroup>& groups);

/// Closed-form Z * sum_{j>=2} g_j kappa_j' bounding sup_r E(||phi_perp||^2 | event).
double rho_perp_bound(const std::vector<EigenGroup>& groups);

struct AmplifierMoment {
    bool divergent = false;
    double value = 0.0;  // prod_n (1 - q lambda mu_n)^{-1} when finite
    double lambda_q = 0.0;  // 1 / (q kappa_1)
};

/// q-th moment of exp(lambda ||phi||^2) over the retained modes; divergent
/// verdict when q lambda >= 1/kappa_1.
AmplifierMoment amplifier_moment(const Eigen::VectorXd& eigenvalues, int q, double lambda);

struct CondensationRow {
    double r = 0.0;
    Estimate e_par;   // E(||phi_par||^2 | event)
    Estimate e_perp;  // E(||phi_perp||^2 | event)
    bool par_flag = false;   // e_par > r - rho_perp (3-SE slack)
    bool perp_flag = false;  // e_perp <= rho_perp (3-SE slack)
};

/// Weighted conditional means of the parallel/orthogonal squared norms per
/// ensemble, flagged against the closed-form rho_perp cap.
std::vector<CondensationRow> condensation_curves(const std::vector<ConditionalEnsemble>& ensembles,
                                                 const std::vector<EigenGroup>& groups);

}  // namespace gfcond

#endif
