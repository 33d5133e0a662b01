#include "doctest.h"

#include <cmath>

#include "gfcond/conditioning.hpp"
#include "gfcond/special.hpp"

#include "oracles.hpp"

using namespace gfcond;

namespace {

Kernel mercer_kernel(std::vector<double> eigs) {
    KernelSpec s;
    s.family = KernelFamily::MercerSynthetic;
    s.mercer_eigs = std::move(eigs);
    return make_kernel(s);
}

const SpectralDecomposition& two_mode() {
    static SpectralDecomposition d = decompose(mercer_kernel({1.0, 0.5}), build_grid(96), 1e-10);
    return d;
}

const SpectralDecomposition& rank_one() {
    static SpectralDecomposition d = decompose(mercer_kernel({2.0}), build_grid(64), 1e-10);
    return d;
}

}  // namespace

TEST_CASE("truncated gamma sampling") {
    RngStream stream(8080);
    std::mt19937_64 eng = stream.engine_at(0);

    SUBCASE("lower=0 reproduces the plain gamma law") {
        std::vector<double> v(100000);
        for (auto& x : v) x = truncated_gamma_sample(2, 1.5, 0.0, eng);
        double d = oracles::ks_distance_vs_density(
            std::move(v), [](double x) { return x / 2.25 * std::exp(-x / 1.5); });
        CHECK(d < 0.01);
    }

    SUBCASE("shape 1 is memoryless") {
        const double t = 3.0, kappa = 2.0;
        const int n = 100000;
        std::vector<double> v(n);
        for (auto& x : v) {
            x = truncated_gamma_sample(1, kappa, t, eng);
            CHECK(x >= t);
        }
        for (auto& x : v) x -= t;
        double d = oracles::ks_distance(
            std::move(v), [&](double x) { return 1.0 - std::exp(-x / kappa); });
        CHECK(d < 0.01);
    }

    SUBCASE("shape 2 conditional mean") {
        // E[V | V > 1] for Gamma(2,1) = 5e^-1 / 2e^-1 = 2.5
        const int n = 100000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = truncated_gamma_sample(2, 1.0, 1.0, eng);
            acc += x;
            acc2 += x * x;
        }
        double mean = acc / n;
        double se = std::sqrt((acc2 / n - mean * mean) / n);
        CHECK(std::abs(mean - 2.5) <= 3.0 * se);
    }

    SUBCASE("underflow region is rejected") {
        CHECK_THROWS(truncated_gamma_sample(1, 1.0, 701.0, eng));
        CHECK_THROWS(truncated_gamma_sample(1, 1.0, -1.0, eng));
    }
}

TEST_CASE("rejection sampler at r=0 is the unconditional law") {
    ConditionalEnsemble ens = sample_conditional_rejection(two_mode(), 0.0, 500, RngStream(11));
    CHECK(ens.attempts == 500);
    CHECK(ens.p_event.value == doctest::Approx(1.0));
    CHECK(ens.ess == doctest::Approx(500.0));
    for (const auto& ws : ens.samples) {
        CHECK(ws.weight == 1.0);
        CHECK(ws.sample.norm2_sq > 0.0);
    }
}

TEST_CASE("rejection sampler reproduces the exact two-mode tail") {
    ConditionalEnsemble ens = sample_conditional_rejection(two_mode(), 5.0, 1500, RngStream(12));
    const double exact = 0.013430494068408449;
    CHECK(std::abs(ens.p_event.value - exact) <= 3.0 * ens.p_event.se);
    for (const auto& ws : ens.samples) CHECK(ws.sample.norm2_sq > 5.0);
}

TEST_CASE("rejection sampler exhausts its budget on a deep threshold") {
    CHECK(kDefaultAttemptBudget == 10000000ULL);
    CHECK_THROWS_AS(
        sample_conditional_rejection(two_mode(), 50.0, 10, RngStream(13), 20000),
        std::runtime_error);
}

TEST_CASE("decomposition sampler on a rank-one spectrum") {
    // memoryless overshoot: ||phi_par||^2 - r is exponential with mean kappa1
    const double r = 10.0;
    ConditionalEnsemble ens = sample_conditional_decomposition(rank_one(), r, 4000, RngStream(14));
    CHECK(ens.p_event.se == 0.0);
    CHECK(ens.p_event.value == doctest::Approx(std::exp(-r / 2.0)).epsilon(1e-12));
    double acc = 0.0, acc2 = 0.0;
    for (const auto& ws : ens.samples) {
        CHECK(ws.weight == 1.0);
        CHECK(ws.sample.perp_sq <= 1e-12);
        double over = ws.sample.norm2_sq - r;
        CHECK(over > 0.0);
        acc += over;
        acc2 += over * over;
    }
    double n = static_cast<double>(ens.samples.size());
    double mean = acc / n;
    double se = std::sqrt((acc2 / n - mean * mean) / n);
    CHECK(std::abs(mean - 2.0) <= 3.0 * se);
}

TEST_CASE("decomposition sampler: weights bounded, event satisfied, healthy ess") {
    ConditionalEnsemble ens = sample_conditional_decomposition(two_mode(), 10.0, 10000,
                                                               RngStream(15));
    for (const auto& ws : ens.samples) {
        CHECK(ws.weight >= 0.0);
        CHECK(ws.weight <= 1.0 + 1e-12);
        CHECK(ws.sample.norm2_sq > 10.0);
    }
    CHECK(ens.ess / static_cast<double>(ens.samples.size()) >= 0.2);
    // nearly-exact tail: compare with the closed-form mixture value
    CHECK(std::abs(ens.p_event.value / 9.079779837134727e-05 - 1.0) < 1e-3);
}

TEST_CASE("methods agree where rejection is feasible") {
    const double eps = 0.3;
    std::vector<std::function<double(const CoupledSample&)>> functionals = {
        [eps](const CoupledSample& s) { return s.perp_hat_2 > eps ? 1.0 : 0.0; },
        [](const CoupledSample& s) { return s.sup_perp_hat; }};
    int stream = 16;
    for (double r : {2.0, 5.0}) {
        ConditionalEnsemble rej =
            sample_conditional_rejection(two_mode(), r, 2000, RngStream(stream++));
        ConditionalEnsemble dec =
            sample_conditional_decomposition(two_mode(), r, 20000, RngStream(stream++));
        CHECK(rej.ess <= static_cast<double>(rej.samples.size()) + 1e-9);
        CHECK(dec.ess <= static_cast<double>(dec.samples.size()) + 1e-9);
        for (const auto& f : functionals) {
            Estimate a = estimate(rej, f);
            Estimate b = estimate(dec, f);
            CHECK(std::abs(a.value - b.value) <= 3.0 * std::sqrt(a.se * a.se + b.se * b.se));
        }
    }
}

TEST_CASE("methods agree on the degenerate top group") {
    SpectralDecomposition deg = decompose(mercer_kernel({1.0, 1.0, 0.25}), build_grid(96), 1e-10);
    REQUIRE(deg.g1() == 2);
    ConditionalEnsemble rej = sample_conditional_rejection(deg, 3.0, 2000, RngStream(26));
    ConditionalEnsemble dec = sample_conditional_decomposition(deg, 3.0, 20000, RngStream(27));
    std::vector<std::function<double(const CoupledSample&)>> functionals = {
        [](const CoupledSample& s) { return s.par_sq; },
        [](const CoupledSample& s) { return s.perp_hat_2 > 0.2 ? 1.0 : 0.0; }};
    for (const auto& f : functionals) {
        Estimate a = estimate(rej, f);
        Estimate b = estimate(dec, f);
        CHECK(std::abs(a.value - b.value) <= 3.0 * std::sqrt(a.se * a.se + b.se * b.se));
    }
}

TEST_CASE("concentration trend across the sweep") {
    std::vector<double> rs = {2.0, 5.0, 10.0, 15.0};
    std::vector<Estimate> p, sup;
    for (size_t i = 0; i < rs.size(); ++i) {
        ConditionalEnsemble ens =
            sample_conditional_decomposition(two_mode(), rs[i], 5000, RngStream(18, i));
        p.push_back(estimate(ens, [](const CoupledSample& s) { return s.perp_hat_2 > 0.3 ? 1.0 : 0.0; }));
        sup.push_back(estimate(ens, [](const CoupledSample& s) { return s.sup_perp_hat; }));
    }
    for (size_t i = 0; i + 1 < rs.size(); ++i) {
        CHECK(p[i + 1].value <=
              p[i].value + 2.0 * std::sqrt(p[i].se * p[i].se + p[i + 1].se * p[i + 1].se));
        CHECK(sup[i + 1].value <=
              sup[i].value + 2.0 * std::sqrt(sup[i].se * sup[i].se + sup[i + 1].se * sup[i + 1].se));
    }
    CHECK(p.back().value < p.front().value);
    CHECK(sup.back().value < sup.front().value);
}

TEST_CASE("estimate semantics") {
    ConditionalEnsemble ens = sample_conditional_rejection(two_mode(), 0.0, 200, RngStream(19));

    // equal weights reduce to the arithmetic mean
    double direct = 0.0;
    for (const auto& ws : ens.samples) direct += ws.sample.norm2_sq;
    direct /= static_cast<double>(ens.samples.size());
    Estimate e = estimate(ens, [](const CoupledSample& s) { return s.norm2_sq; });
    CHECK(e.value == doctest::Approx(direct).epsilon(1e-12));

    Estimate one = estimate(ens, [](const CoupledSample&) { return 1.0; });
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.se <= 1e-12);

    ConditionalEnsemble r1 = sample_conditional_decomposition(rank_one(), 4.0, 100, RngStream(20));
    Estimate zero = estimate(r1, [](const CoupledSample& s) { return s.perp_hat_2 > 0.1 ? 1.0 : 0.0; });
    CHECK(zero.value == 0.0);

    ConditionalEnsemble tiny = sample_conditional_rejection(two_mode(), 0.0, 10, RngStream(21));
    CHECK_THROWS(estimate(tiny, [](const CoupledSample&) { return 1.0; }));  // ESS below floor
}

TEST_CASE("tail probability without field synthesis") {
    Estimate p = tail_probability_decomposition(two_mode().groups, 10.0, 50000, RngStream(22));
    CHECK(std::abs(p.value / 9.079779837134727e-05 - 1.0) < 1e-3);

    // single group: exact closed form
    Estimate q = tail_probability_decomposition(rank_one().groups, 6.0, 10, RngStream(23));
    CHECK(q.se == 0.0);
    CHECK(q.value == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));

    std::vector<EigenGroup> bad(2);
    bad[0].kappa = 1.0;
    bad[0].multiplicity = 1;
    bad[1].kappa = 1.0;
    bad[1].multiplicity = 1;
    CHECK_THROWS(tail_probability_decomposition(bad, 5.0, 100, RngStream(24)));
}

TEST_CASE("decomposition sampler reproduces the exact conditional laws") {
    // closed-form conditional CDFs on the two-mode spectrum given U+V > r:
    //   P(V <= v, event) = e^{-2r}(e^{min(v,r)} - 1) + [v>r](e^{-r} - e^{-v})
    //   P(U <= u, event) = 2e^{-r}(1 - e^{-min(u,r)}) + [u>r](e^{-2r} - e^{-2u})
    const double r = 5.0;
    const double denom = 2.0 * std::exp(-r) - std::exp(-2.0 * r);
    auto cdf_v = [&](double v) {
        double num = std::exp(-2.0 * r) * (std::exp(std::min(v, r)) - 1.0);
        if (v > r) num += std::exp(-r) - std::exp(-v);
        return num / denom;
    };
    auto cdf_u = [&](double u) {
        double num = 2.0 * std::exp(-r) * (1.0 - std::exp(-std::min(u, r)));
        if (u > r) num += std::exp(-2.0 * r) - std::exp(-2.0 * u);
        return num / denom;
    };

    ConditionalEnsemble ens = sample_conditional_decomposition(two_mode(), r, 20000, RngStream(28));
    auto weighted_ks = [&](auto value_of, const std::function<double(double)>& cdf) {
        std::vector<std::pair<double, double>> vw;
        double total = 0.0;
        for (const auto& ws : ens.samples) {
            vw.emplace_back(value_of(ws.sample), ws.weight);
            total += ws.weight;
        }
        std::sort(vw.begin(), vw.end());
        double acc = 0.0, d = 0.0;
        for (const auto& [v, w] : vw) {
            double f = cdf(v);
            d = std::max(d, std::abs(acc / total - f));
            acc += w;
            d = std::max(d, std::abs(acc / total - f));
        }
        return d;
    };
    double dv = weighted_ks([](const CoupledSample& s) { return s.par_sq; }, cdf_v);
    double du = weighted_ks([](const CoupledSample& s) { return s.perp_sq; }, cdf_u);
    CHECK(dv < 0.02);
    CHECK(du < 0.02);
}

TEST_CASE("psi spectrum groups") {
    auto pg = psi_groups(two_mode().groups);
    REQUIRE(pg.size() == 2);
    CHECK(pg[0].kappa == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pg[1].kappa == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
}

TEST_CASE("sampler stays exact under a narrow spectral gap") {
    // kappa_2 -> kappa_1 stress: tilted variances blow up but the weighted
    // estimates remain consistent with plain rejection
    SpectralDecomposition narrow =
        decompose(mercer_kernel({1.0, 0.97}), build_grid(96), 1e-10);
    REQUIRE(narrow.groups.size() == 2);
    ConditionalEnsemble dec = sample_conditional_decomposition(narrow, 6.0, 30000, RngStream(25));
    double exact = hypoexponential_tail({1.0, 0.97}, 6.0);
    CHECK(std::abs(dec.p_event.value - exact) <= 3.0 * dec.p_event.se + 0.03 * exact);
    CHECK(dec.ess >= kEssFloor);
}
