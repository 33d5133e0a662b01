#include "gfcond/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gfcond {

CoefficientDraw draw_coefficients(int n_modes, const RngStream& stream, std::uint64_t index) {
    if (n_modes < 1) throw std::invalid_argument("draw_coefficients: need at least one mode");
    CoefficientDraw d;
    d.values.resize(n_modes);
    d.stream_id = stream.stream;
    d.counter = index;
    std::mt19937_64 eng = stream.engine_at(index);
    for (int n = 0; n < n_modes; ++n) d.values[n] = complex_normal(eng);
    return d;
}

FieldValues synthesize_fields(const SpectralDecomposition& decomp, const CoefficientDraw& coeffs) {
    const int n = decomp.retained();
    if (coeffs.values.size() != n)
        throw std::invalid_argument("synthesize: coefficient count does not match retained modes");
    const double kappa1 = decomp.kappa1();

    Eigen::VectorXcd c_phi(n), c_psi(n), c_phi_perp(n), c_psi_perp(n);
    for (int k = 0; k < n; ++k) {
        double mu = decomp.eigenvalues[k];
        c_phi[k] = coeffs.values[k] * std::sqrt(mu);
        c_psi[k] = coeffs.values[k] * std::pow(mu / kappa1, 0.25);
    }
    c_phi_perp = c_phi;
    c_psi_perp = c_psi;
    for (int idx : decomp.groups.front().members) {
        c_phi_perp[idx] = 0.0;
        c_psi_perp[idx] = 0.0;
    }

    FieldValues f;
    f.phi = decomp.eigenfunctions * c_phi;
    f.psi = decomp.eigenfunctions * c_psi;
    f.phi_perp = decomp.eigenfunctions * c_phi_perp;
    f.psi_perp = decomp.eigenfunctions * c_psi_perp;
    return f;
}

CoupledSample synthesize(const SpectralDecomposition& decomp, const CoefficientDraw& coeffs,
                         bool keep_fields) {
    FieldValues f = synthesize_fields(decomp, coeffs);
    const Eigen::VectorXd& w = decomp.grid.weights;

    CoupledSample s;
    s.coeffs = coeffs;
    s.norm2_sq = weighted_norm_sq(f.phi, w);
    s.psi_sq = weighted_norm_sq(f.psi, w);
    s.perp_sq = weighted_norm_sq(f.phi_perp, w);
    s.par_sq = weighted_norm_sq(f.phi - f.phi_perp, w);
    s.psi_perp_2 = std::sqrt(weighted_norm_sq(f.psi_perp, w));
    s.sup = sup_norm(f.phi);
    s.sup_perp = sup_norm(f.phi_perp);
    if (s.norm2_sq > 0.0) {
        double nrm = std::sqrt(s.norm2_sq);
        s.perp_hat_2 = std::sqrt(s.perp_sq) / nrm;
        s.sup_perp_hat = s.sup_perp / nrm;
        s.profile_defined = true;
    } else {
        // probability-zero event; reachable only through degenerate spectra
        s.perp_hat_2 = 0.0;
        s.sup_perp_hat = 0.0;
        s.profile_defined = false;
    }
    if (keep_fields) {
        s.phi = std::move(f.phi);
        s.psi = std::move(f.psi);
    }
    return s;
}

void unconditional_batch(const SpectralDecomposition& decomp, int n, const RngStream& stream,
                         const std::function<void(const CoupledSample&)>& visit) {
    if (n < 1) throw std::invalid_argument("unconditional_batch: n must be >= 1");
    const int modes = decomp.retained();
    for (int k = 0; k < n; ++k)
        visit(synthesize(decomp, draw_coefficients(modes, stream, static_cast<std::uint64_t>(k))));
}

std::string batch_csv(const SpectralDecomposition& decomp, int n, const RngStream& stream) {
    std::string out = "sample_id,norm2_sq,par_sq,perp_sq,sup_perp_hat,psi_perp\n";
    char buf[256];
    int id = 0;
    unconditional_batch(decomp, n, stream, [&](const CoupledSample& s) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", id++, s.norm2_sq,
                      s.par_sq, s.perp_sq, s.sup_perp_hat, s.psi_perp_2);
        out += buf;
    });
    return out;
}

}  // namespace gfcond
