#include "gfcond/kernel.hpp"

#include <cmath>

#include "json.hpp"

namespace gfcond {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

int fourier_frequency(int index) {
    // 0, +1, -1, +2, -2, ...
    if (index == 0) return 0;
    int k = (index + 1) / 2;
    return (index % 2 == 1) ? k : -k;
}
}  // namespace

std::complex<double> Kernel::fourier_mode(int index, double x) {
    double th = kTwoPi * fourier_frequency(index) * x;
    return {std::cos(th), std::sin(th)};
}

std::complex<double> Kernel::eval(double x, double y) const {
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
        throw std::domain_error("Kernel::eval: point outside [0,1]");
    switch (family_) {
        case KernelFamily::Exponential:
            return sigma2_ * std::exp(-std::abs(x - y) / ell_);
        case KernelFamily::SquaredExponential: {
            double d = x - y;
            return sigma2_ * std::exp(-d * d / (2.0 * ell_ * ell_));
        }
        case KernelFamily::MercerSynthetic: {
            std::complex<double> acc(0.0, 0.0);
            for (size_t n = 0; n < mercer_eigs_.size(); ++n)
                acc += mercer_eigs_[n] * fourier_mode(static_cast<int>(n), x) *
                       std::conj(fourier_mode(static_cast<int>(n), y));
            return acc;
        }
    }
    throw std::logic_error("Kernel::eval: unknown family");
}

std::string Kernel::family_name() const {
    switch (family_) {
        case KernelFamily::Exponential: return "exponential";
        case KernelFamily::SquaredExponential: return "squared-exponential";
        case KernelFamily::MercerSynthetic: return "mercer-synthetic";
    }
    return "?";
}

Kernel make_kernel(const KernelSpec& spec) {
    if (!(spec.ell > 0.0)) throw ConfigError("ell", "length-scale must be strictly positive");
    if (!(spec.sigma2 > 0.0)) throw ConfigError("sigma2", "variance must be strictly positive");
    if (spec.family == KernelFamily::MercerSynthetic) {
        if (spec.mercer_eigs.empty())
            throw ConfigError("mercer_eigs", "mercer-synthetic needs a non-empty eigenvalue list");
        for (size_t n = 0; n < spec.mercer_eigs.size(); ++n) {
            if (spec.mercer_eigs[n] < 0.0)
                throw ConfigError("mercer_eigs", "negative entry at position " + std::to_string(n));
            if (n > 0 && spec.mercer_eigs[n] > spec.mercer_eigs[n - 1])
                throw ConfigError("mercer_eigs", "increasing entry at position " + std::to_string(n));
        }
    }
    Kernel k;
    k.family_ = spec.family;
    k.ell_ = spec.ell;
    k.sigma2_ = spec.sigma2;
    k.mercer_eigs_ = spec.mercer_eigs;
    switch (spec.family) {
        case KernelFamily::Exponential: k.smoothness_ = 0; break;
        case KernelFamily::SquaredExponential: k.smoothness_ = kSmoothnessInfinite; break;
        case KernelFamily::MercerSynthetic: k.smoothness_ = kSmoothnessInfinite; break;
    }
    return k;
}

std::complex<double> eval_kernel(const Kernel& kernel, double x, double y) {
    return kernel.eval(x, y);
}

KernelFamily parse_kernel_family(const std::string& name) {
    if (name == "exponential") return KernelFamily::Exponential;
    if (name == "squared-exponential") return KernelFamily::SquaredExponential;
    if (name == "mercer-synthetic" || name == "mercer") return KernelFamily::MercerSynthetic;
    throw ConfigError("family", "unknown kernel family '" + name + "'");
}

KernelSpec kernel_spec_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("kernel", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("kernel", "kernel spec must be a JSON object");
    KernelSpec spec;
    if (!j.contains("family") || !j["family"].is_string())
        throw ConfigError("family", "missing or non-string");
    spec.family = parse_kernel_family(j["family"].get<std::string>());
    if (j.contains("ell")) {
        if (!j["ell"].is_number()) throw ConfigError("ell", "must be a number");
        spec.ell = j["ell"].get<double>();
    }
    if (j.contains("sigma2")) {
        if (!j["sigma2"].is_number()) throw ConfigError("sigma2", "must be a number");
        spec.sigma2 = j["sigma2"].get<double>();
    }
    if (j.contains("mercer_eigs")) {
        if (!j["mercer_eigs"].is_array()) throw ConfigError("mercer_eigs", "must be an array");
        for (const auto& e : j["mercer_eigs"]) {
            if (!e.is_number()) throw ConfigError("mercer_eigs", "entries must be numbers");
            spec.mercer_eigs.push_back(e.get<double>());
        }
    }
    return spec;
}

}  // namespace gfcond
