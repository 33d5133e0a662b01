#ifndef GFCOND_CONDITIONING_HPP
#define GFCOND_CONDITIONING_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gfcond/sampling.hpp"

namespace gfcond {

enum class ConditionalMethod { Rejection, Decomposition };

struct WeightedSample {
    CoupledSample sample;
    double weight = 1.0;
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

/// Weighted samples from the law of phi given ||phi||_2^2 > r. Every stored
/// sample satisfies the conditioning event; weights are non-negative (and
/// all equal for the rejection method).
struct ConditionalEnsemble {
    double threshold_r = 0.0;
    ConditionalMethod method = ConditionalMethod::Rejection;
    std::vector<WeightedSample> samples;
    double ess = 0.0;
    Estimate p_event;             // P(||phi||_2^2 > r)
    std::uint64_t attempts = 0;   // rejection only
};

constexpr std::uint64_t kDefaultAttemptBudget = 10'000'000;
constexpr double kEssFloor = 30.0;

/// Plain rejection: synthesize unconditionally, keep samples with
/// ||phi||_2^2 > r until n_target acceptances. Throws if the attempt budget
/// runs out first (the threshold is too deep for rejection; switch methods).
ConditionalEnsemble sample_conditional_rejection(const SpectralDecomposition& decomp, double r,
                                                 int n_target, const RngStream& stream,
                                                 std::uint64_t attempt_budget = kDefaultAttemptBudget,
                                                 bool keep_fields = false);

/// Exact weighted sampler built on the independence split of the parallel
/// and orthogonal components:
///   1. orthogonal coefficients from the exponentially tilted law (mode in
///      group j >= 2 gets variance kappa_j' = kappa_j / (1 - kappa_j/kappa_1)),
///   2. bounded importance weight w(U) = exp(-U/kappa_1) * Gbar(max(0, r-U)),
///   3. parallel squared norm from Gamma(g_1, kappa_1) truncated to exceed
///      max(0, r - U) by inverse CDF,
///   4. parallel direction uniform on the complex g_1-sphere,
///   5. full synthesis; self-normalized estimates target the conditional law.
/// Cost per effective sample is O(1) in r.
ConditionalEnsemble sample_conditional_decomposition(const SpectralDecomposition& decomp, double r,
                                                     int n, const RngStream& stream,
                                                     bool keep_fields = false);

/// Gamma(shape, scale) conditioned to exceed `lower`, by inverse CDF on the
/// regularized upper tail. Rejects the underflow region lower/scale > 700.
double truncated_gamma_sample(int shape, double scale, double lower, std::mt19937_64& eng);

/// Self-normalized weighted mean with delta-method standard error.
/// Refuses ensembles with ESS below 30.
Estimate estimate(const ConditionalEnsemble& ensemble,
                  const std::function<double(const CoupledSample&)>& functional);

/// P(||field||_2^2 > r) for the spectrum given by degeneracy groups, using
/// steps 1-2 of the decomposition sampler only (no field synthesis). Exact
/// closed form (se = 0) when there are no orthogonal modes.
Estimate tail_probability_decomposition(const std::vector<EigenGroup>& groups, double r, int n,
                                        const RngStream& stream);

/// Groups of the coupled field psi: kappa_j -> sqrt(kappa_j/kappa_1), whose
/// norm threshold lives on the r/kappa_1 scale.
std::vector<EigenGroup> psi_groups(const std::vector<EigenGroup>& groups);

double effective_sample_size(const std::vector<WeightedSample>& samples);

std::string method_name(ConditionalMethod m);

}  // namespace gfcond

#endif
