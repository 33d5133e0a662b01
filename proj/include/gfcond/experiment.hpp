#ifndef GFCOND_EXPERIMENT_HPP
#define GFCOND_EXPERIMENT_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gfcond/analysis.hpp"
#include "gfcond/conditioning.hpp"
#include "gfcond/kernel.hpp"

namespace gfcond {

constexpr const char* kVersion = "gfcond 0.1.0";

/// Everything one end-to-end run needs, from a single JSON file. The seed is
/// mandatory: runs never pull implicit entropy.
struct ExperimentConfig {
    KernelSpec kernel;
    int grid_m = 256;
    double truncation_tol = 1e-10;
    double degeneracy_tol = 1e-8;
    std::vector<double> r_sweep;      // strictly increasing
    std::vector<double> epsilons;     // overlap thresholds
    int samples_per_r = 10000;        // >= 1000
    std::string method = "auto";      // auto | rejection | decomposition
    std::uint64_t seed = 0;
    std::string out_dir = "out";
};

/// Parses a config object, or a manifest ({"config": {...}}) for re-runs.
/// Throws ConfigError naming the offending field.
ExperimentConfig config_from_json_text(const std::string& text);

std::string config_to_canonical_json(const ExperimentConfig& config);

/// FNV-1a 64-bit hash, hex-encoded (config fingerprint for the manifest).
std::string fnv1a_hex(const std::string& data);

/// Conditional results at one threshold.
struct SweepPoint {
    double r = 0.0;
    ConditionalMethod method = ConditionalMethod::Rejection;
    int n = 0;
    double ess = 0.0;
    Estimate p_event;
    std::vector<Estimate> p_overlap;   // one per epsilon
    std::vector<Estimate> bound_overlap;  // closed-form bounds, one per epsilon
    Estimate e_sup_perp;
    Estimate e_par_sq;
    Estimate e_perp_sq;
};

/// One closed-form-vs-Monte-Carlo comparison in the analysis report.
struct ReportRow {
    std::string id;
    std::string label;
    std::string kind;  // "bound" | "match" | "info"
    double r = std::numeric_limits<double>::quiet_NaN();  // NaN for global rows
    double closed_form = std::numeric_limits<double>::quiet_NaN();
    double mc = std::numeric_limits<double>::quiet_NaN();
    double mc_se = std::numeric_limits<double>::quiet_NaN();
    bool has_verdict = false;
    bool pass = true;
};

struct ExperimentResult {
    std::vector<SweepPoint> points;
    std::vector<ReportRow> rows;
    bool all_verdicts_pass = true;
    std::vector<std::string> files_written;
};

/// Full pipeline: spectrum -> per-r conditional ensembles -> analysis report
/// and concentration tables, all written under config.out_dir. Partial
/// outputs are removed if the run fails. Method "auto" picks rejection when
/// the (closed-form or pilot) event probability is at least 1e-3, otherwise
/// the decomposition sampler.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Concentration-decay table: CSV plus a gnuplot-style whitespace file.
/// Needs at least two r values.
std::pair<std::string, std::string> emit_concentration_table(
    const std::vector<SweepPoint>& points, const std::vector<double>& epsilons);

/// Formats the analysis rows as JSON / aligned text.
std::string report_to_json(const std::vector<ReportRow>& rows, const SpectrumSummary& summary,
                           bool all_pass);
std::string report_to_text(const std::vector<ReportRow>& rows, const SpectrumSummary& summary,
                           bool all_pass);

}  // namespace gfcond

#endif
