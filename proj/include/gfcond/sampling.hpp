#ifndef GFCOND_SAMPLING_HPP
#define GFCOND_SAMPLING_HPP

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "gfcond/rng.hpp"
#include "gfcond/spectral.hpp"

namespace gfcond {

/// One draw of the i.i.d. standard complex Gaussian coefficients, tagged
/// with the substream that produced it.
struct CoefficientDraw {
    Eigen::VectorXcd values;
    std::uint64_t stream_id = 0;
    std::uint64_t counter = 0;
};

/// The two fields built from one coefficient draw, with every norm the
/// concentration checks need. Field tables are only retained on request;
/// they can always be rebuilt from the coefficients.
struct CoupledSample {
    CoefficientDraw coeffs;
    Eigen::VectorXcd phi;  // empty unless keep_fields
    Eigen::VectorXcd psi;  // empty unless keep_fields

    double norm2_sq = 0.0;      // ||phi||_2^2
    double psi_sq = 0.0;        // ||psi||_2^2
    double par_sq = 0.0;        // ||phi_par||_2^2
    double perp_sq = 0.0;       // ||phi_perp||_2^2
    double psi_perp_2 = 0.0;    // ||psi_perp||_2
    double sup = 0.0;           // ||phi||_inf over the nodes
    double sup_perp = 0.0;      // ||phi_perp||_inf over the nodes
    double perp_hat_2 = 0.0;    // ||phihat_perp||_2
    double sup_perp_hat = 0.0;  // ||phihat_perp||_inf
    bool profile_defined = true;
};

/// Field tables for one coefficient draw (used by audit-grid checks).
struct FieldValues {
    Eigen::VectorXcd phi, psi, phi_perp, psi_perp;
};

/// Element `index` of the coefficient substream: N independent standard
/// complex Gaussians (real/imag parts N(0,1/2), so E|s|^2=1, E s^2=0).
CoefficientDraw draw_coefficients(int n_modes, const RngStream& stream, std::uint64_t index);

/// Builds phi = sum_n s_n sqrt(mu_n) phi_n and the coupled field
/// psi = sum_n s_n (mu_n/kappa_1)^{1/4} phi_n from the same coefficients,
/// with all norms evaluated by grid quadrature. The parallel projection
/// spans exactly the top degeneracy group.
CoupledSample synthesize(const SpectralDecomposition& decomp, const CoefficientDraw& coeffs,
                         bool keep_fields = false);

/// Node tables of phi, psi and their orthogonal parts for one draw.
FieldValues synthesize_fields(const SpectralDecomposition& decomp, const CoefficientDraw& coeffs);

/// Runs `visit` over n independent unconditional samples (substream element
/// k produces sample k, so the batch is order- and partition-independent).
void unconditional_batch(const SpectralDecomposition& decomp, int n, const RngStream& stream,
                         const std::function<void(const CoupledSample&)>& visit);

/// CSV dump of per-sample norms: sample_id, norm2_sq, par_sq, perp_sq,
/// sup_perp_hat, psi_perp.
std::string batch_csv(const SpectralDecomposition& decomp, int n, const RngStream& stream);

}  // namespace gfcond

#endif
