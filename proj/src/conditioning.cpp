#include "gfcond/conditioning.hpp"

#include <cmath>
#include <stdexcept>

#include "gfcond/special.hpp"

namespace gfcond {

namespace {

void require_strict_gap(const std::vector<EigenGroup>& groups) {
    if (groups.empty()) throw std::invalid_argument("conditional sampler: empty spectrum");
    if (groups.size() >= 2 && !(groups[1].kappa < groups[0].kappa))
        throw std::invalid_argument("conditional sampler: no spectral gap (kappa_2 >= kappa_1)");
}

// log of the tilt normalizer Z = prod_{j>=2} (1 - kappa_j/kappa_1)^{-g_j}
double log_tilt_normalizer(const std::vector<EigenGroup>& groups) {
    KahanSum acc;
    for (size_t j = 1; j < groups.size(); ++j)
        acc.add(-groups[j].multiplicity * std::log1p(-groups[j].kappa / groups[0].kappa));
    return acc.value();
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& v) {
    KahanSum s;
    for (double x : v) s.add(x);
    double m = s.value() / static_cast<double>(v.size());
    KahanSum q;
    for (double x : v) q.add((x - m) * (x - m));
    double var = v.size() > 1 ? q.value() / (static_cast<double>(v.size()) - 1.0) : 0.0;
    return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

}  // namespace

std::string method_name(ConditionalMethod m) {
    return m == ConditionalMethod::Rejection ? "rejection" : "decomposition";
}

double effective_sample_size(const std::vector<WeightedSample>& samples) {
    double sw = 0.0, sw2 = 0.0;
    for (const auto& ws : samples) {
        sw += ws.weight;
        sw2 += ws.weight * ws.weight;
    }
    return sw2 > 0.0 ? sw * sw / sw2 : 0.0;
}

double truncated_gamma_sample(int shape, double scale, double lower, std::mt19937_64& eng) {
    if (shape < 1) throw std::invalid_argument("truncated_gamma_sample: shape must be >= 1");
    if (scale <= 0.0) throw std::invalid_argument("truncated_gamma_sample: scale must be positive");
    if (lower < 0.0) throw std::invalid_argument("truncated_gamma_sample: lower must be >= 0");
    double t0 = lower / scale;
    if (t0 > 700.0)
        throw std::domain_error("truncated_gamma_sample: lower/scale > 700 (underflow region)");
    double log_q0 = gamma_upper_log(shape, t0);
    double u = uniform_pos(eng);
    double x = gamma_upper_inverse_log(shape, log_q0 + std::log(u), t0);
    return scale * x;
}

ConditionalEnsemble sample_conditional_rejection(const SpectralDecomposition& decomp, double r,
                                                 int n_target, const RngStream& stream,
                                                 std::uint64_t attempt_budget, bool keep_fields) {
    if (r < 0.0) throw std::invalid_argument("sample_conditional_rejection: r must be >= 0");
    if (n_target < 1) throw std::invalid_argument("sample_conditional_rejection: n_target >= 1");

    ConditionalEnsemble ens;
    ens.threshold_r = r;
    ens.method = ConditionalMethod::Rejection;
    ens.samples.reserve(static_cast<size_t>(n_target));

    // rejection is a sequential scan by nature, so one engine serves the
    // whole run (still fully seed-deterministic)
    const int modes = decomp.retained();
    std::mt19937_64 eng = stream.engine_at(0);
    std::uint64_t attempts = 0;
    CoefficientDraw d;
    d.values.resize(modes);
    d.stream_id = stream.stream;
    while (ens.samples.size() < static_cast<size_t>(n_target)) {
        if (attempts >= attempt_budget)
            throw std::runtime_error(
                "sample_conditional_rejection: attempt budget exhausted before n_target "
                "acceptances (threshold too deep; use the decomposition sampler)");
        d.counter = attempts++;
        double coef_norm = 0.0;
        for (int k = 0; k < modes; ++k) {
            d.values[k] = complex_normal(eng);
            coef_norm += decomp.eigenvalues[k] * std::norm(d.values[k]);
        }
        // cheap coefficient-space screen before synthesizing the fields
        if (coef_norm <= r * (1.0 - 1e-12)) continue;
        CoupledSample s = synthesize(decomp, d, keep_fields);
        if (s.norm2_sq > r) ens.samples.push_back({std::move(s), 1.0});
    }
    ens.attempts = attempts;
    ens.ess = static_cast<double>(ens.samples.size());
    double p = static_cast<double>(n_target) / static_cast<double>(attempts);
    ens.p_event.value = p;
    ens.p_event.se = std::sqrt(p * (1.0 - p) / static_cast<double>(attempts));
    return ens;
}

ConditionalEnsemble sample_conditional_decomposition(const SpectralDecomposition& decomp, double r,
                                                     int n, const RngStream& stream,
                                                     bool keep_fields) {
    if (!(r > 0.0)) throw std::invalid_argument("sample_conditional_decomposition: r must be > 0");
    if (n < 1) throw std::invalid_argument("sample_conditional_decomposition: n must be >= 1");
    require_strict_gap(decomp.groups);

    const auto& groups = decomp.groups;
    const double kappa1 = groups[0].kappa;
    const int g1 = groups[0].multiplicity;
    const int modes = decomp.retained();
    const bool has_ortho = groups.size() >= 2;
    const double log_z = log_tilt_normalizer(groups);

    ConditionalEnsemble ens;
    ens.threshold_r = r;
    ens.method = ConditionalMethod::Decomposition;
    ens.samples.reserve(static_cast<size_t>(n));

    std::vector<double> weights(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        std::mt19937_64 eng = stream.engine_at(static_cast<std::uint64_t>(k));
        CoefficientDraw d;
        d.values = Eigen::VectorXcd::Zero(modes);
        d.stream_id = stream.stream;
        d.counter = static_cast<std::uint64_t>(k);

        // (1) tilted orthogonal coefficients
        double u_group = 0.0;  // sum kappa_j |s|^2 (the proposal's own scale)
        double u_phys = 0.0;   // sum mu_n |s|^2
        for (size_t j = 1; j < groups.size(); ++j) {
            double scale = 1.0 / std::sqrt(1.0 - groups[j].kappa / kappa1);
            for (int idx : groups[j].members) {
                std::complex<double> s = complex_normal(eng) * scale;
                d.values[idx] = s;
                u_group += groups[j].kappa * std::norm(s);
                u_phys += decomp.eigenvalues[idx] * std::norm(s);
            }
        }

        // (2) bounded importance weight
        double lower = std::max(0.0, r - u_phys);
        double w = has_ortho ? std::exp(-u_group / kappa1 + gamma_upper_log(g1, lower / kappa1))
                             : 1.0;

        // (3)-(4) truncated parallel norm, direction uniform on the sphere;
        // redraw on the measure-zero boundary ties so stored samples always
        // satisfy the event on their quadrature norm
        CoupledSample sample;
        for (int tries = 0; tries < 100; ++tries) {
            double v = truncated_gamma_sample(g1, kappa1, lower, eng);
            Eigen::VectorXcd z(g1);
            double z2 = 0.0;
            for (int i = 0; i < g1; ++i) {
                z[i] = complex_normal(eng);
                z2 += std::norm(z[i]);
            }
            double amp = std::sqrt(v / (kappa1 * z2));
            for (int i = 0; i < g1; ++i) d.values[groups[0].members[static_cast<size_t>(i)]] = amp * z[i];
            sample = synthesize(decomp, d, keep_fields);
            if (sample.norm2_sq > r) break;
        }
        if (!(sample.norm2_sq > r))
            throw std::runtime_error("sample_conditional_decomposition: could not clear threshold");

        weights[static_cast<size_t>(k)] = w;
        ens.samples.push_back({std::move(sample), w});
    }

    ens.ess = effective_sample_size(ens.samples);
    if (has_ortho) {
        MeanSe ms = mean_and_se(weights);
        double z = std::exp(log_z);
        ens.p_event.value = z * ms.mean;
        ens.p_event.se = z * ms.se;
    } else {
        ens.p_event.value = gamma_upper(g1, r / kappa1);
        ens.p_event.se = 0.0;
    }
    return ens;
}

Estimate estimate(const ConditionalEnsemble& ensemble,
                  const std::function<double(const CoupledSample&)>& functional) {
    if (ensemble.ess < kEssFloor)
        throw std::runtime_error("estimate: effective sample size " +
                                 std::to_string(ensemble.ess) + " is below the floor of 30; "
                                 "increase the sample count or use the decomposition sampler");
    KahanSum sw, swf;
    for (const auto& ws : ensemble.samples) {
        sw.add(ws.weight);
        swf.add(ws.weight * functional(ws.sample));
    }
    double ratio = swf.value() / sw.value();
    KahanSum dev;
    for (const auto& ws : ensemble.samples) {
        double d = ws.weight * (functional(ws.sample) - ratio);
        dev.add(d * d);
    }
    return {ratio, std::sqrt(dev.value()) / sw.value()};
}

std::vector<EigenGroup> psi_groups(const std::vector<EigenGroup>& groups) {
    require_strict_gap(groups);
    std::vector<EigenGroup> out = groups;
    double kappa1 = groups[0].kappa;
    for (auto& g : out) g.kappa = std::sqrt(g.kappa / kappa1);
    return out;
}

Estimate tail_probability_decomposition(const std::vector<EigenGroup>& groups, double r, int n,
                                        const RngStream& stream) {
    if (!(r > 0.0)) throw std::invalid_argument("tail_probability_decomposition: r must be > 0");
    if (n < 1) throw std::invalid_argument("tail_probability_decomposition: n must be >= 1");
    require_strict_gap(groups);
    const double kappa1 = groups[0].kappa;
    const int g1 = groups[0].multiplicity;
    if (groups.size() == 1) return {gamma_upper(g1, r / kappa1), 0.0};

    // tilted means kappa_j' per orthogonal mode
    std::vector<double> tilted;
    for (size_t j = 1; j < groups.size(); ++j) {
        double kp = groups[j].kappa / (1.0 - groups[j].kappa / kappa1);
        for (int i = 0; i < groups[j].multiplicity; ++i) tilted.push_back(kp);
    }
    std::vector<double> w(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        std::mt19937_64 eng = stream.engine_at(static_cast<std::uint64_t>(k));
        double u = 0.0;
        for (double kp : tilted) u += kp * exponential(eng);
        w[static_cast<size_t>(k)] =
            std::exp(-u / kappa1 + gamma_upper_log(g1, std::max(0.0, r - u) / kappa1));
    }
    MeanSe ms = mean_and_se(w);
    double z = std::exp(log_tilt_normalizer(groups));
    return {z * ms.mean, z * ms.se};
}

}  // namespace gfcond
