#include "gfcond/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>

#include "json.hpp"

namespace gfcond {

namespace {

// Rotate each column so its largest-modulus entry is real positive. Removes
// the eigensolver's phase ambiguity and makes output deterministic.
void fix_phases(Eigen::MatrixXcd& table) {
    for (int n = 0; n < table.cols(); ++n) {
        Eigen::Index imax;
        table.col(n).cwiseAbs().maxCoeff(&imax);
        std::complex<double> v = table(imax, n);
        double mod = std::abs(v);
        if (mod > 0.0) table.col(n) *= std::conj(v) / mod;
    }
}

struct EigResult {
    Eigen::VectorXd values;   // ascending (Eigen convention)
    Eigen::MatrixXcd vectors;
};

EigResult solve_hermitian(const Kernel& kernel, const QuadratureGrid& grid) {
    const int m = grid.count();
    Eigen::VectorXd sw = grid.weights.array().sqrt();
    if (kernel.family() == KernelFamily::MercerSynthetic) {
        Eigen::MatrixXcd a(m, m);
        for (int i = 0; i < m; ++i) {
            a(i, i) = sw[i] * sw[i] * kernel.eval(grid.nodes[i], grid.nodes[i]).real();
            for (int j = i + 1; j < m; ++j) {
                std::complex<double> c = kernel.eval(grid.nodes[i], grid.nodes[j]);
                a(i, j) = sw[i] * c * sw[j];
                a(j, i) = std::conj(a(i, j));
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("decompose: eigensolver did not converge");
        return {es.eigenvalues(), es.eigenvectors()};
    }
    // stationary real families: real symmetric path
    Eigen::MatrixXd a(m, m);
    for (int i = 0; i < m; ++i) {
        a(i, i) = sw[i] * sw[i] * kernel.eval(grid.nodes[i], grid.nodes[i]).real();
        for (int j = i + 1; j < m; ++j) {
            double c = kernel.eval(grid.nodes[i], grid.nodes[j]).real();
            a(i, j) = sw[i] * c * sw[j];
            a(j, i) = a(i, j);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("decompose: eigensolver did not converge");
    return {es.eigenvalues(), es.eigenvectors().cast<std::complex<double>>()};
}

}  // namespace

std::vector<EigenGroup> group_degeneracies(const Eigen::VectorXd& eigenvalues, double rel_tol) {
    if (!(rel_tol > 0.0 && rel_tol < 1e-3))
        throw std::invalid_argument("group_degeneracies: rel_tol must lie in (0, 1e-3)");
    if (eigenvalues.size() == 0)
        throw std::invalid_argument("group_degeneracies: empty spectrum");
    const double scale = eigenvalues[0];
    std::vector<EigenGroup> groups;
    for (int n = 0; n < eigenvalues.size(); ++n) {
        // anchor comparison against the group's leading eigenvalue
        if (!groups.empty() &&
            std::abs(eigenvalues[n] - eigenvalues[groups.back().members.front()]) <=
                rel_tol * scale) {
            groups.back().members.push_back(n);
            groups.back().multiplicity++;
        } else {
            EigenGroup g;
            g.members.push_back(n);
            g.multiplicity = 1;
            groups.push_back(std::move(g));
        }
    }
    for (auto& g : groups) {
        double acc = 0.0;
        for (int idx : g.members) acc += eigenvalues[idx];
        g.kappa = acc / g.multiplicity;
    }
    return groups;
}

SpectralDecomposition decompose(const Kernel& kernel, const QuadratureGrid& grid,
                                double truncation_tol, double degeneracy_rel_tol) {
    if (!(truncation_tol > 0.0 && truncation_tol < 1.0))
        throw std::invalid_argument("decompose: truncation_tol must lie in (0,1)");

    EigResult eig = solve_hermitian(kernel, grid);
    const int m = grid.count();

    // descending order, negatives clamped to zero
    Eigen::VectorXd mu(m);
    for (int i = 0; i < m; ++i) mu[i] = std::max(eig.values[m - 1 - i], 0.0);
    double total = mu.sum();
    if (!(total > 0.0)) throw std::runtime_error("decompose: all-zero spectrum");

    // keep the smallest N with discarded mass <= tol * total
    double cutoff = truncation_tol * total;
    double tail = 0.0;
    int n_keep = m;
    while (n_keep > 1 && (tail + mu[n_keep - 1] <= cutoff || mu[n_keep - 1] <= 0.0)) {
        tail += mu[n_keep - 1];
        --n_keep;
    }

    SpectralDecomposition d;
    d.kernel = kernel;
    d.grid = grid;
    d.truncation_tol = truncation_tol;
    d.degeneracy_tol = degeneracy_rel_tol;
    d.discarded_mass = tail;
    d.eigenvalues = mu.head(n_keep);

    Eigen::VectorXd inv_sw = grid.weights.array().sqrt().inverse();
    d.eigenfunctions.resize(m, n_keep);
    for (int n = 0; n < n_keep; ++n)
        d.eigenfunctions.col(n) = eig.vectors.col(m - 1 - n).cwiseProduct(
            inv_sw.cast<std::complex<double>>());
    fix_phases(d.eigenfunctions);

    d.groups = group_degeneracies(d.eigenvalues, degeneracy_rel_tol);
    for (size_t j = 0; j + 1 < d.groups.size(); ++j) {
        double gap = d.groups[j].kappa - d.groups[j + 1].kappa;
        if (gap <= 10.0 * degeneracy_rel_tol * d.eigenvalues[0]) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "degeneracy grouping is ambiguous: gap %.3g between groups %zu and %zu "
                          "lies within 10x the tolerance",
                          gap, j + 1, j + 2);
            d.warnings.push_back(buf);
        }
    }

    d.trace = d.eigenvalues.sum();
    d.sqrt_trace = d.eigenvalues.array().sqrt().sum();
    d.tc_sqrt_diag = Eigen::VectorXd::Zero(m);
    for (int n = 0; n < n_keep; ++n)
        d.tc_sqrt_diag += std::sqrt(d.eigenvalues[n]) *
                          d.eigenfunctions.col(n).array().abs2().matrix();
    d.b_constant = std::pow(d.eigenvalues[0], -0.25) * std::sqrt(d.tc_sqrt_diag.maxCoeff());
    return d;
}

std::pair<Eigen::VectorXd, double> tc_sqrt_profile(const SpectralDecomposition& decomp) {
    return {decomp.tc_sqrt_diag, decomp.b_constant};
}

Eigen::VectorXd barycentric_weights(const Eigen::VectorXd& nodes) {
    const int m = static_cast<int>(nodes.size());
    Eigen::VectorXd logw(m), sign = Eigen::VectorXd::Ones(m);
    for (int j = 0; j < m; ++j) {
        double acc = 0.0;
        double sg = 1.0;
        for (int k = 0; k < m; ++k) {
            if (k == j) continue;
            double d = nodes[j] - nodes[k];
            acc -= std::log(std::abs(d));
            if (d < 0.0) sg = -sg;
        }
        logw[j] = acc;
        sign[j] = sg;
    }
    double shift = logw.maxCoeff();
    Eigen::VectorXd w(m);
    for (int j = 0; j < m; ++j) w[j] = sign[j] * std::exp(logw[j] - shift);
    return w;
}

Eigen::VectorXcd barycentric_interpolate(const Eigen::VectorXd& nodes,
                                         const Eigen::VectorXd& bary_w,
                                         const Eigen::VectorXcd& values,
                                         const Eigen::VectorXd& targets) {
    Eigen::VectorXcd out(targets.size());
    for (int i = 0; i < targets.size(); ++i) {
        double x = targets[i];
        std::complex<double> num(0.0, 0.0);
        double den = 0.0;
        int hit = -1;
        for (int j = 0; j < nodes.size(); ++j) {
            double d = x - nodes[j];
            if (std::abs(d) < 1e-14) {
                hit = j;
                break;
            }
            double t = bary_w[j] / d;
            num += t * values[j];
            den += t;
        }
        out[i] = (hit >= 0) ? values[hit] : num / den;
    }
    return out;
}

Eigen::MatrixXcd extend_eigenfunctions(const SpectralDecomposition& decomp,
                                       const Eigen::VectorXd& points) {
    const int m = decomp.grid.count();
    const int n = decomp.retained();
    Eigen::MatrixXcd kxy(points.size(), m);
    for (int i = 0; i < points.size(); ++i)
        for (int j = 0; j < m; ++j)
            kxy(i, j) = decomp.kernel.eval(points[i], decomp.grid.nodes[j]) *
                        decomp.grid.weights[j];
    Eigen::MatrixXcd ext = kxy * decomp.eigenfunctions;
    for (int k = 0; k < n; ++k) ext.col(k) /= decomp.eigenvalues[k];
    return ext;
}

SmoothnessDiagnostics smoothness_diagnostics(const SpectralDecomposition& decomp) {
    const int m = decomp.grid.count();
    const int n = decomp.retained();
    if (m < 64)
        throw std::invalid_argument(
            "smoothness_diagnostics: grid too coarse for 4th-order finite differences (M < 64)");
    if (n < 12) throw std::invalid_argument("smoothness_diagnostics: needs >= 12 retained modes");

    SmoothnessDiagnostics diag;

    // (a) log-log decay slope over the stable mid-range: high mode indices are
    // dominated by discretization, so the window is capped at M/4.
    int hi = std::min((4 * n) / 5, m / 4);
    int lo = std::max(2, hi / 6);
    if (hi - lo < 4) {
        hi = n;
        lo = std::max(2, n / 5);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int k = lo; k <= hi; ++k) {
        double mu = decomp.eigenvalues[k - 1];
        if (mu <= 0.0) break;
        double x = std::log(static_cast<double>(k));
        double y = std::log(mu);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt < 4) throw std::runtime_error("smoothness_diagnostics: too few usable modes for fit");
    diag.fit_lo = lo;
    diag.fit_hi = lo + cnt - 1;
    diag.decay_slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    diag.decay_ok = std::abs(diag.decay_slope) > 5.0;

    // (b) per-mode sup-norm bound via the 4th derivative. Modes are resampled
    // to a uniform grid (barycentric interpolation from the quadrature nodes),
    // where 5-point stencils with one-sided closures are well conditioned.
    Eigen::VectorXd xu = uniform_points(m);
    Eigen::VectorXd bw = barycentric_weights(decomp.grid.nodes);
    double h = xu[1] - xu[0];
    double h4 = h * h * h * h;
    diag.a_estimate = 0.0;
    diag.sup_bound_violations = 0;
    std::vector<double> d4norm(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXcd fu =
            barycentric_interpolate(decomp.grid.nodes, bw, decomp.eigenfunctions.col(k), xu);
        // ||phi''''||_2 by trapezoid on the uniform grid
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            int j = std::clamp(i - 2, 0, m - 5);
            std::complex<double> d4 =
                (fu[j] - 4.0 * fu[j + 1] + 6.0 * fu[j + 2] - 4.0 * fu[j + 3] + fu[j + 4]) / h4;
            double v = std::norm(d4);
            acc += (i == 0 || i == m - 1) ? 0.5 * h * v : h * v;
        }
        double nrm = std::sqrt(acc);
        d4norm[static_cast<size_t>(k)] = nrm;
        diag.a_estimate = std::max(diag.a_estimate, decomp.eigenvalues[k] * nrm);
        double sup2 = decomp.eigenfunctions.col(k).array().abs().maxCoeff();
        sup2 *= sup2;
        if (sup2 > 1.0 + 2.0 * std::pow(nrm, 0.25) + 1e-9) diag.sup_bound_violations++;
    }

    // (c) dyadic Cauchy check of sum_n (sqrt(mu_n) + 2 a^{1/4} mu_n^{1/4})
    double a4 = std::pow(diag.a_estimate, 0.25);
    Eigen::VectorXd partial(n);
    double run = 0.0;
    for (int k = 0; k < n; ++k) {
        run += std::sqrt(decomp.eigenvalues[k]) + 2.0 * a4 * std::pow(decomp.eigenvalues[k], 0.25);
        partial[k] = run;
    }
    double inc1 = partial[n - 1] - partial[n / 2 - 1];
    double inc2 = partial[n / 2 - 1] - partial[n / 4 - 1];
    diag.cauchy_ratio = (inc2 > 0.0) ? inc1 / inc2 : 0.0;
    diag.series_converges = (inc1 <= 1e-12 * partial[n - 1]) || (inc2 > 0.0 && inc1 <= 0.9 * inc2);
    return diag;
}

std::string decomposition_to_json(const SpectralDecomposition& decomp) {
    nlohmann::json j;
    j["eigenvalues"] = std::vector<double>(
        decomp.eigenvalues.data(), decomp.eigenvalues.data() + decomp.eigenvalues.size());
    j["groups"] = nlohmann::json::array();
    for (const auto& g : decomp.groups)
        j["groups"].push_back({{"kappa", g.kappa}, {"g", g.multiplicity}});
    j["B"] = decomp.b_constant;
    j["trace"] = decomp.trace;
    j["sqrt_trace"] = decomp.sqrt_trace;
    j["discarded_mass"] = decomp.discarded_mass;
    j["grid"]["nodes"] = std::vector<double>(decomp.grid.nodes.data(),
                                             decomp.grid.nodes.data() + decomp.grid.nodes.size());
    j["grid"]["weights"] = std::vector<double>(
        decomp.grid.weights.data(), decomp.grid.weights.data() + decomp.grid.weights.size());
    auto re = nlohmann::json::array();
    auto im = nlohmann::json::array();
    for (int n = 0; n < decomp.retained(); ++n) {
        std::vector<double> row_re(decomp.grid.count()), row_im(decomp.grid.count());
        for (int i = 0; i < decomp.grid.count(); ++i) {
            row_re[i] = decomp.eigenfunctions(i, n).real();
            row_im[i] = decomp.eigenfunctions(i, n).imag();
        }
        re.push_back(row_re);
        im.push_back(row_im);
    }
    j["eigenfunctions_re"] = re;
    j["eigenfunctions_im"] = im;
    if (!decomp.warnings.empty()) j["warnings"] = decomp.warnings;
    return j.dump(2) + "\n";
}

}  // namespace gfcond
