#include "gfcond/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

#include "gfcond/special.hpp"

namespace fs = std::filesystem;

namespace gfcond {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fmt_r(double r) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

void write_file(const fs::path& path, const std::string& content,
                std::vector<std::string>& written) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    out.close();
    written.push_back(path.string());
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json k;
    switch (c.kernel.family) {
        case KernelFamily::Exponential: k["family"] = "exponential"; break;
        case KernelFamily::SquaredExponential: k["family"] = "squared-exponential"; break;
        case KernelFamily::MercerSynthetic: k["family"] = "mercer-synthetic"; break;
    }
    k["ell"] = c.kernel.ell;
    k["sigma2"] = c.kernel.sigma2;
    if (!c.kernel.mercer_eigs.empty()) k["mercer_eigs"] = c.kernel.mercer_eigs;
    nlohmann::json j;
    j["kernel"] = k;
    j["grid_m"] = c.grid_m;
    j["truncation_tol"] = c.truncation_tol;
    j["degeneracy_tol"] = c.degeneracy_tol;
    j["r_sweep"] = c.r_sweep;
    j["epsilons"] = c.epsilons;
    j["samples_per_r"] = c.samples_per_r;
    j["method"] = c.method;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    return j;
}

double json_number(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw ConfigError(field, "missing or non-numeric");
    return j[field].get<double>();
}

}  // namespace

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ExperimentConfig config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
    if (j.contains("config")) j = j["config"];  // manifest round-trip
    if (!j.is_object()) throw ConfigError("config", "must be a JSON object");

    ExperimentConfig c;
    if (!j.contains("kernel") || !j["kernel"].is_object())
        throw ConfigError("kernel", "missing or not an object");
    c.kernel = kernel_spec_from_json_text(j["kernel"].dump());
    make_kernel(c.kernel);  // validate eagerly so errors carry field names

    if (j.contains("grid_m")) c.grid_m = static_cast<int>(json_number(j, "grid_m"));
    if (c.grid_m < 2 || c.grid_m > 4096) throw ConfigError("grid_m", "must lie in [2, 4096]");
    if (j.contains("truncation_tol")) c.truncation_tol = json_number(j, "truncation_tol");
    if (!(c.truncation_tol > 0.0 && c.truncation_tol < 1.0))
        throw ConfigError("truncation_tol", "must lie in (0, 1)");
    if (j.contains("degeneracy_tol")) c.degeneracy_tol = json_number(j, "degeneracy_tol");
    if (!(c.degeneracy_tol > 0.0 && c.degeneracy_tol < 1e-3))
        throw ConfigError("degeneracy_tol", "must lie in (0, 1e-3)");

    if (!j.contains("r_sweep") || !j["r_sweep"].is_array() || j["r_sweep"].empty())
        throw ConfigError("r_sweep", "missing or empty");
    for (const auto& e : j["r_sweep"]) {
        if (!e.is_number()) throw ConfigError("r_sweep", "entries must be numbers");
        c.r_sweep.push_back(e.get<double>());
    }
    for (size_t i = 0; i < c.r_sweep.size(); ++i) {
        if (!(c.r_sweep[i] > 0.0)) throw ConfigError("r_sweep", "thresholds must be positive");
        if (i > 0 && !(c.r_sweep[i] > c.r_sweep[i - 1]))
            throw ConfigError("r_sweep", "must be strictly increasing");
    }

    if (!j.contains("epsilons") || !j["epsilons"].is_array() || j["epsilons"].empty())
        throw ConfigError("epsilons", "missing or empty");
    for (const auto& e : j["epsilons"]) {
        if (!e.is_number() || e.get<double>() < 0.0)
            throw ConfigError("epsilons", "entries must be non-negative numbers");
        c.epsilons.push_back(e.get<double>());
    }

    if (j.contains("samples_per_r")) c.samples_per_r = static_cast<int>(json_number(j, "samples_per_r"));
    if (c.samples_per_r < 1000) throw ConfigError("samples_per_r", "must be at least 1000");

    if (j.contains("method")) {
        if (!j["method"].is_string()) throw ConfigError("method", "must be a string");
        c.method = j["method"].get<std::string>();
    }
    if (c.method != "auto" && c.method != "rejection" && c.method != "decomposition")
        throw ConfigError("method", "must be auto, rejection or decomposition");

    if (!j.contains("seed")) throw ConfigError("seed", "mandatory; runs take no implicit entropy");
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
        throw ConfigError("seed", "must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();

    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string()) throw ConfigError("out_dir", "must be a string");
        c.out_dir = j["out_dir"].get<std::string>();
    }
    if (c.out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
    return c;
}

std::string config_to_canonical_json(const ExperimentConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

std::pair<std::string, std::string> emit_concentration_table(
    const std::vector<SweepPoint>& points, const std::vector<double>& epsilons) {
    if (points.size() < 2)
        throw std::invalid_argument("emit_concentration_table: needs at least two r values");

    std::string header = "r";
    for (double eps : epsilons) {
        std::string tag = fmt_r(eps);
        header += ",p_overlap_eps" + tag + ",p_overlap_se_eps" + tag + ",bound_eps" + tag;
    }
    header += ",e_sup_perp,e_sup_perp_se\n";

    std::string csv = header;
    std::string dat = "# " + header;
    for (auto& ch : dat)
        if (ch == ',') ch = ' ';
    for (const auto& p : points) {
        std::string row = fmt(p.r);
        for (size_t e = 0; e < epsilons.size(); ++e)
            row += "," + fmt(p.p_overlap[e].value) + "," + fmt(p.p_overlap[e].se) + "," +
                   fmt(p.bound_overlap[e].value);
        row += "," + fmt(p.e_sup_perp.value) + "," + fmt(p.e_sup_perp.se) + "\n";
        csv += row;
        for (auto& ch : row)
            if (ch == ',') ch = ' ';
        dat += row;
    }
    return {csv, dat};
}

namespace {

std::string ensemble_csv(const SweepPoint& p, const std::vector<double>& epsilons) {
    std::string out =
        "r,method,n,ess,p_event,p_event_se,eps,p_overlap,p_overlap_se,"
        "e_sup_perp,e_sup_perp_se,e_par_sq,e_par_sq_se,e_perp_sq,e_perp_sq_se\n";
    for (size_t e = 0; e < epsilons.size(); ++e) {
        out += fmt(p.r) + "," + method_name(p.method) + "," + std::to_string(p.n) + "," +
               fmt(p.ess) + "," + fmt(p.p_event.value) + "," + fmt(p.p_event.se) + "," +
               fmt(epsilons[e]) + "," + fmt(p.p_overlap[e].value) + "," + fmt(p.p_overlap[e].se) +
               "," + fmt(p.e_sup_perp.value) + "," + fmt(p.e_sup_perp.se) + "," +
               fmt(p.e_par_sq.value) + "," + fmt(p.e_par_sq.se) + "," + fmt(p.e_perp_sq.value) +
               "," + fmt(p.e_perp_sq.se) + "\n";
    }
    return out;
}

nlohmann::json row_to_json(const ReportRow& row) {
    auto num_or_null = [](double x) {
        return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x);
    };
    nlohmann::json j;
    j["id"] = row.id;
    j["label"] = row.label;
    j["kind"] = row.kind;
    j["r"] = num_or_null(row.r);
    j["closed_form"] = num_or_null(row.closed_form);
    j["mc"] = num_or_null(row.mc);
    j["mc_se"] = num_or_null(row.mc_se);
    if (row.has_verdict)
        j["pass"] = row.pass;
    else
        j["pass"] = nullptr;
    return j;
}

}  // namespace

std::string report_to_json(const std::vector<ReportRow>& rows, const SpectrumSummary& summary,
                           bool all_pass) {
    nlohmann::json j;
    j["summary"]["kappa1"] = summary.kappa1;
    j["summary"]["g1"] = summary.g1;
    j["summary"]["tilt_normalizer"] = summary.tilt_normalizer;
    j["summary"]["c_infinity"] = summary.c_infinity;
    j["summary"]["rho_perp_bound"] = summary.rho_perp;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : rows) j["rows"].push_back(row_to_json(row));
    j["all_pass"] = all_pass;
    return j.dump(2) + "\n";
}

std::string report_to_text(const std::vector<ReportRow>& rows, const SpectrumSummary& summary,
                           bool all_pass) {
    char buf[512];
    std::string out;
    std::snprintf(buf, sizeof(buf),
                  "spectrum: kappa1=%.10g g1=%d Z=%.10g C_inf=%.10g rho_perp<=%.10g\n\n",
                  summary.kappa1, summary.g1, summary.tilt_normalizer, summary.c_infinity,
                  summary.rho_perp);
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-22s %8s %14s %14s %12s %-7s %s\n", "formula", "r",
                  "closed_form", "mc", "mc_se", "verdict", "label");
    out += buf;
    for (const auto& row : rows) {
        auto cell = [](double x) {
            if (std::isnan(x)) return std::string("-");
            char b[40];
            std::snprintf(b, sizeof(b), "%.6g", x);
            return std::string(b);
        };
        std::snprintf(buf, sizeof(buf), "%-22s %8s %14s %14s %12s %-7s %s\n", row.id.c_str(),
                      cell(row.r).c_str(), cell(row.closed_form).c_str(), cell(row.mc).c_str(),
                      cell(row.mc_se).c_str(),
                      row.has_verdict ? (row.pass ? "pass" : "FAIL") : "-", row.label.c_str());
        out += buf;
    }
    out += all_pass ? "\nall verdicts pass\n" : "\nSOME VERDICTS FAILED\n";
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    fs::path dir(config.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir))
        throw std::runtime_error("run_experiment: cannot create output directory " + dir.string());

    ExperimentResult result;
    try {
        Kernel kernel = make_kernel(config.kernel);
        QuadratureGrid grid = build_grid(config.grid_m);
        SpectralDecomposition decomp =
            decompose(kernel, grid, config.truncation_tol, config.degeneracy_tol);
        write_file(dir / "spectrum.json", decomposition_to_json(decomp), result.files_written);

        SpectrumSummary summary = make_spectrum_summary(decomp.groups);
        RngStream root(config.seed);
        const bool has_ortho = decomp.groups.size() >= 2;

        // spectrum is "simple" when the mode-level tail has a closed form
        std::vector<double> mode_means(decomp.eigenvalues.data(),
                                       decomp.eigenvalues.data() + decomp.retained());
        const bool simple_modes = distinct_rates(mode_means);

        for (size_t i = 0; i < config.r_sweep.size(); ++i) {
            double r = config.r_sweep[i];
            std::string choice = config.method;
            if (choice == "auto") {
                double p_pilot;
                if (simple_modes) {
                    p_pilot = hypoexponential_tail(mode_means, r);
                } else {
                    RngStream pilot = root.substream(500 + i);
                    int hits = 0;
                    const int n_pilot = 20000;
                    for (int k = 0; k < n_pilot; ++k) {
                        std::mt19937_64 eng = pilot.engine_at(static_cast<std::uint64_t>(k));
                        double s = 0.0;
                        for (double mu : mode_means) s += mu * exponential(eng);
                        if (s > r) ++hits;
                    }
                    p_pilot = static_cast<double>(hits) / n_pilot;
                }
                choice = (p_pilot >= 1e-3) ? "rejection" : "decomposition";
            }

            RngStream stream = root.substream(1000 + i);
            ConditionalEnsemble ens =
                (choice == "rejection")
                    ? sample_conditional_rejection(decomp, r, config.samples_per_r, stream)
                    : sample_conditional_decomposition(decomp, r, config.samples_per_r, stream);

            SweepPoint point;
            point.r = r;
            point.method = ens.method;
            point.n = static_cast<int>(ens.samples.size());
            point.ess = ens.ess;
            point.p_event = ens.p_event;
            for (double eps : config.epsilons) {
                point.p_overlap.push_back(estimate(
                    ens, [eps](const CoupledSample& s) { return s.perp_hat_2 > eps ? 1.0 : 0.0; }));
                point.bound_overlap.push_back(overlap_bound(r, eps, decomp.groups));
            }
            point.e_sup_perp = estimate(ens, [](const CoupledSample& s) { return s.sup_perp_hat; });
            point.e_par_sq = estimate(ens, [](const CoupledSample& s) { return s.par_sq; });
            point.e_perp_sq = estimate(ens, [](const CoupledSample& s) { return s.perp_sq; });
            result.points.push_back(point);

            write_file(dir / ("ensemble_r" + std::string(fmt_r(r)) + ".csv"),
                       ensemble_csv(point, config.epsilons), result.files_written);
        }

        // ---- analysis rows ----
        auto add_row = [&result](ReportRow row) {
            if (row.has_verdict && !row.pass) result.all_verdicts_pass = false;
            result.rows.push_back(std::move(row));
        };

        for (const auto& p : result.points) {
            ReportRow tail;
            tail.id = "tail_probability";
            tail.r = p.r;
            tail.mc = p.p_event.value;
            tail.mc_se = p.p_event.se;
            if (simple_modes) {
                tail.label = "P(||phi||^2>r), exact mixture tail";
                tail.kind = "match";
                tail.closed_form = hypoexponential_tail(mode_means, p.r);
                tail.has_verdict = true;
                // decomposition weights are blind to the U > r region until a
                // sample lands there, which caps the unseen relative mass at
                // exp(-r/kappa1); the verdict carries that floor explicitly
                double floor = 1e-12 * tail.closed_form;
                if (p.method == ConditionalMethod::Decomposition)
                    floor += tail.closed_form * std::exp(-p.r / summary.kappa1);
                tail.pass = std::abs(tail.mc - tail.closed_form) <= 3.0 * tail.mc_se + floor;
            } else {
                tail.label = "P(||phi||^2>r) vs large-r asymptote";
                tail.kind = "info";
                tail.closed_form = tail_asymptote(p.r, decomp.groups, FieldKind::Phi);
            }
            add_row(tail);

            for (size_t e = 0; e < config.epsilons.size(); ++e) {
                ReportRow row;
                row.id = "overlap_bound";
                row.label = "P(||phihat_perp||>" + std::string(fmt_r(config.epsilons[e])) +
                            " | event) <= tilted tail bound";
                row.kind = "bound";
                row.r = p.r;
                row.closed_form = p.bound_overlap[e].value;
                row.mc = p.p_overlap[e].value;
                row.mc_se = p.p_overlap[e].se;
                row.has_verdict = true;
                row.pass = row.mc <= row.closed_form + 3.0 * row.mc_se + 3.0 * p.bound_overlap[e].se;
                add_row(row);
            }

            ReportRow sup;
            sup.id = "sup_perp_mean";
            sup.label = "E(||phihat_perp||_inf | event)";
            sup.kind = "info";
            sup.r = p.r;
            sup.mc = p.e_sup_perp.value;
            sup.mc_se = p.e_sup_perp.se;
            add_row(sup);

            ReportRow cpar;
            cpar.id = "condensation_par";
            cpar.label = "E(||phi_par||^2 | event) > r - rho_perp";
            cpar.kind = "bound";
            cpar.r = p.r;
            cpar.closed_form = p.r - summary.rho_perp;
            cpar.mc = p.e_par_sq.value;
            cpar.mc_se = p.e_par_sq.se;
            cpar.has_verdict = true;
            cpar.pass = cpar.mc > cpar.closed_form - 3.0 * cpar.mc_se;
            add_row(cpar);

            ReportRow cperp;
            cperp.id = "condensation_perp";
            cperp.label = "E(||phi_perp||^2 | event) <= rho_perp";
            cperp.kind = "bound";
            cperp.r = p.r;
            cperp.closed_form = summary.rho_perp;
            cperp.mc = p.e_perp_sq.value;
            cperp.mc_se = p.e_perp_sq.se;
            cperp.has_verdict = true;
            cperp.pass = cperp.mc <= cperp.closed_form + 3.0 * cperp.mc_se;
            add_row(cperp);
        }

        // unconditional Chernoff dominance at u = {0.5, 1, 2} * kappa1
        if (has_ortho) {
            double a = default_chernoff_a(decomp.groups);
            RngStream cstream = root.substream(42);
            const int n_mc = 100000;
            std::vector<double> us = {0.5 * summary.kappa1, 1.0 * summary.kappa1,
                                      2.0 * summary.kappa1};
            std::vector<int> ortho_modes;
            for (size_t j = 1; j < decomp.groups.size(); ++j)
                for (int idx : decomp.groups[j].members) ortho_modes.push_back(idx);
            std::vector<int> hits(us.size(), 0);
            for (int k = 0; k < n_mc; ++k) {
                std::mt19937_64 eng = cstream.engine_at(static_cast<std::uint64_t>(k));
                double u_mass = 0.0;
                for (int idx : ortho_modes) u_mass += decomp.eigenvalues[idx] * exponential(eng);
                for (size_t t = 0; t < us.size(); ++t)
                    if (u_mass > us[t]) hits[t]++;
            }
            for (size_t t = 0; t < us.size(); ++t) {
                ReportRow row;
                row.id = "chernoff_bound";
                row.label = "P(||phi_perp||^2>u) <= exp-Markov bound, u=" +
                            std::string(fmt_r(us[t]));
                row.kind = "bound";
                row.closed_form = chernoff_bound(us[t], a, decomp.groups);
                row.mc = static_cast<double>(hits[t]) / n_mc;
                row.mc_se = std::sqrt(row.mc * (1.0 - row.mc) / n_mc);
                row.has_verdict = true;
                row.pass = row.mc <= row.closed_form + 3.0 * row.mc_se;
                add_row(row);
            }
        }

        // global constants
        ReportRow zr;
        zr.id = "tilt_normalizer";
        zr.label = "Z, exponential moment of the orthogonal mass";
        zr.kind = "info";
        zr.closed_form = summary.tilt_normalizer;
        add_row(zr);
        ReportRow ci;
        ci.id = "c_infinity";
        ci.label = "limiting psi/phi tail ratio";
        ci.kind = "info";
        ci.closed_form = summary.c_infinity;
        add_row(ci);
        ReportRow rp;
        rp.id = "rho_perp_bound";
        rp.label = "uniform cap on E(||phi_perp||^2 | event)";
        rp.kind = "info";
        rp.closed_form = summary.rho_perp;
        add_row(rp);
        AmplifierMoment am = amplifier_moment(decomp.eigenvalues, 2, 0.0);
        ReportRow lam;
        lam.id = "lambda_q";
        lam.label = "divergence threshold of the 2nd amplifier moment";
        lam.kind = "info";
        lam.closed_form = am.lambda_q;
        add_row(lam);

        write_file(dir / "analysis.json",
                   report_to_json(result.rows, summary, result.all_verdicts_pass),
                   result.files_written);
        write_file(dir / "analysis.txt",
                   report_to_text(result.rows, summary, result.all_verdicts_pass),
                   result.files_written);

        if (result.points.size() >= 2) {
            auto [csv, dat] = emit_concentration_table(result.points, config.epsilons);
            write_file(dir / "concentration.csv", csv, result.files_written);
            write_file(dir / "concentration.dat", dat, result.files_written);
        }

        std::string canonical = config_to_canonical_json(config);
        nlohmann::json manifest;
        manifest["config"] = config_to_json(config);
        manifest["config_hash"] = fnv1a_hex(canonical);
        manifest["version"] = kVersion;
        manifest["outputs"] = nlohmann::json::array();
        for (const auto& f : result.files_written)
            manifest["outputs"].push_back(fs::path(f).filename().string());
        write_file(dir / "manifest.json", manifest.dump(2) + "\n", result.files_written);
    } catch (...) {
        for (const auto& f : result.files_written) {
            std::error_code rm_ec;
            fs::remove(f, rm_ec);
        }
        throw;
    }
    return result;
}

}  // namespace gfcond
