#ifndef GFCOND_KERNEL_HPP
#define GFCOND_KERNEL_HPP

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfcond {

/// Config/validation error that names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error("config error: field '" + field + "': " + what),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class KernelFamily { Exponential, SquaredExponential, MercerSynthetic };

constexpr int kSmoothnessInfinite = std::numeric_limits<int>::max();

/// Parameters for make_kernel. mercer_eigs is used only by the
/// mercer-synthetic family and must be non-negative and non-increasing.
struct KernelSpec {
    KernelFamily family = KernelFamily::Exponential;
    double ell = 1.0;
    double sigma2 = 1.0;
    std::vector<double> mercer_eigs;
};

/// Hermitian covariance function C(x,y) on [0,1]^2. Immutable after
/// construction; safe to share across threads.
class Kernel {
public:
    Kernel() = default;  // unit-variance exponential with unit length-scale

    KernelFamily family() const { return family_; }
    double ell() const { return ell_; }
    double sigma2() const { return sigma2_; }
    const std::vector<double>& mercer_eigs() const { return mercer_eigs_; }

    /// Times continuously differentiable in x (kSmoothnessInfinite for the
    /// analytic families).
    int smoothness_class() const { return smoothness_; }

    /// C(x,y); Hermitian, real on the diagonal. Rejects points outside [0,1].
    std::complex<double> eval(double x, double y) const;

    /// Orthonormal complex Fourier mode used by the mercer-synthetic family:
    /// e_1 = 1, then exp(+-2 pi i k x) interleaved (index is 0-based).
    static std::complex<double> fourier_mode(int index, double x);

    std::string family_name() const;

private:
    friend Kernel make_kernel(const KernelSpec&);

    KernelFamily family_ = KernelFamily::Exponential;
    double ell_ = 1.0;
    double sigma2_ = 1.0;
    std::vector<double> mercer_eigs_;
    int smoothness_ = 0;
};

/// Validates the spec and constructs the kernel. Throws ConfigError on
/// non-positive parameters or a negative/increasing mercer eigenvalue list.
Kernel make_kernel(const KernelSpec& spec);

std::complex<double> eval_kernel(const Kernel& kernel, double x, double y);

KernelFamily parse_kernel_family(const std::string& name);

/// Parses {"family": ..., "ell": ..., "sigma2": ..., "mercer_eigs": [...]}.
KernelSpec kernel_spec_from_json_text(const std::string& text);

}  // namespace gfcond

#endif
