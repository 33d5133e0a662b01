#include "doctest.h"

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "gfcond/kernel.hpp"
#include "gfcond/quadrature.hpp"

using namespace gfcond;

namespace {

KernelSpec mercer(std::vector<double> eigs) {
    KernelSpec s;
    s.family = KernelFamily::MercerSynthetic;
    s.mercer_eigs = std::move(eigs);
    return s;
}

KernelSpec stationary(KernelFamily fam, double ell, double sigma2) {
    KernelSpec s;
    s.family = fam;
    s.ell = ell;
    s.sigma2 = sigma2;
    return s;
}

}  // namespace

TEST_CASE("make_kernel validation") {
    CHECK_THROWS_AS(make_kernel(stationary(KernelFamily::Exponential, 0.0, 1.0)), ConfigError);
    CHECK_THROWS_AS(make_kernel(stationary(KernelFamily::Exponential, 1.0, -1.0)), ConfigError);
    CHECK_THROWS_AS(make_kernel(mercer({1.0, -0.5})), ConfigError);
    CHECK_THROWS_AS(make_kernel(mercer({0.5, 1.0})), ConfigError);
    CHECK_THROWS_AS(make_kernel(mercer({})), ConfigError);
    CHECK_NOTHROW(make_kernel(mercer({1.0, 1.0, 0.25})));  // ties are fine
}

TEST_CASE("rank-one constant kernel") {
    Kernel k = make_kernel(mercer({2.0}));
    for (double x : {0.0, 0.3, 1.0})
        for (double y : {0.1, 0.77})
            CHECK(k.eval(x, y).real() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("stationary family point values") {
    Kernel e = make_kernel(stationary(KernelFamily::Exponential, 1.0, 1.0));
    CHECK(e.eval(0.25, 0.75).real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    CHECK(e.smoothness_class() == 0);

    Kernel s = make_kernel(stationary(KernelFamily::SquaredExponential, 0.5, 1.0));
    CHECK(s.eval(0.0, 1.0).real() == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(s.smoothness_class() == kSmoothnessInfinite);
}

TEST_CASE("mercer diagonal is the eigenvalue sum") {
    Kernel k = make_kernel(mercer({1.0, 0.5}));
    for (double x : {0.0, 0.2, 0.613, 1.0}) {
        std::complex<double> v = k.eval(x, x);
        CHECK(v.real() == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(std::abs(v.imag()) < 1e-12);
    }
}

TEST_CASE("hermitian symmetry") {
    Kernel k = make_kernel(mercer({1.0, 0.6, 0.25}));
    for (double x : {0.1, 0.45, 0.9}) {
        for (double y : {0.05, 0.5, 0.99}) {
            std::complex<double> a = k.eval(x, y);
            std::complex<double> b = k.eval(y, x);
            CHECK(std::abs(a - std::conj(b)) < 1e-14);
        }
    }
}

TEST_CASE("domain is enforced") {
    Kernel k = make_kernel(stationary(KernelFamily::Exponential, 1.0, 1.0));
    CHECK_THROWS_AS(k.eval(-0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(k.eval(0.5, 1.1), std::domain_error);
}

TEST_CASE("gram matrices are hermitian and positive semi-definite") {
    QuadratureGrid grid = build_grid(64);
    std::vector<Kernel> kernels = {
        make_kernel(stationary(KernelFamily::Exponential, 0.7, 2.0)),
        make_kernel(stationary(KernelFamily::SquaredExponential, 0.3, 1.5)),
        make_kernel(mercer({1.0, 1.0, 0.25})),
    };
    for (const Kernel& k : kernels) {
        Eigen::MatrixXcd g(64, 64);
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) g(i, j) = k.eval(grid.nodes[i], grid.nodes[j]);
        double herm = (g - g.adjoint()).cwiseAbs().maxCoeff();
        CHECK(herm <= 1e-14 * g.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * k.sigma2());
    }
}

TEST_CASE("mercer kernel reproduces its declared expansion") {
    std::vector<double> eigs = {1.0, 0.5, 0.5, 0.125};
    Kernel k = make_kernel(mercer(eigs));
    for (double x : {0.12, 0.7}) {
        for (double y : {0.33, 0.95}) {
            std::complex<double> direct(0.0, 0.0);
            for (size_t n = 0; n < eigs.size(); ++n)
                direct += eigs[n] * Kernel::fourier_mode(static_cast<int>(n), x) *
                          std::conj(Kernel::fourier_mode(static_cast<int>(n), y));
            CHECK(std::abs(k.eval(x, y) - direct) < 1e-12);
        }
    }
}

TEST_CASE("kernel spec json parsing") {
    KernelSpec s = kernel_spec_from_json_text(
        R"({"family":"mercer-synthetic","mercer_eigs":[1.0,0.5]})");
    CHECK(s.family == KernelFamily::MercerSynthetic);
    CHECK(s.mercer_eigs.size() == 2);

    KernelSpec e = kernel_spec_from_json_text(R"({"family":"exponential","ell":0.5,"sigma2":2})");
    CHECK(e.ell == doctest::Approx(0.5));
    CHECK(e.sigma2 == doctest::Approx(2.0));

    try {
        kernel_spec_from_json_text(R"({"family":"triangular"})");
        CHECK(false);
    } catch (const ConfigError& err) {
        CHECK(err.field() == "family");
    }
}
