// gfcond: spectral decomposition, Karhunen-Loeve sampling and rare-event
// conditioning of Gaussian fields on [0,1], driven by a single JSON config.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gfcond/experiment.hpp"
#include "gfcond/verify.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

gfcond::ExperimentConfig load_config(const std::string& path, const std::string& out_override,
                                     bool seed_set, std::uint64_t seed_override) {
    gfcond::ExperimentConfig cfg = gfcond::config_from_json_text(slurp(path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_set) cfg.seed = seed_override;
    return cfg;
}

void print_warnings(const gfcond::SpectralDecomposition& decomp) {
    for (const auto& w : decomp.warnings) std::cerr << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian fields conditioned on a large squared norm: spectra, sampling, "
                 "rare-event conditioning and closed-form verification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* sub, bool config_required = true) {
        auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (config_required) opt->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--seed", seed, "RNG seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* cmd_spectrum = app.add_subcommand("spectrum", "decompose the kernel, write spectrum.json");
    add_common(cmd_spectrum);

    auto* cmd_sample = app.add_subcommand("sample", "unconditional coupled-sample batch (CSV)");
    add_common(cmd_sample);
    int sample_n = 10000;
    cmd_sample->add_option("--n", sample_n, "sample count");

    auto* cmd_condition = app.add_subcommand("condition", "conditional ensemble at one threshold");
    add_common(cmd_condition);
    double condition_r = 0.0;
    cmd_condition->add_option("--r", condition_r, "threshold on ||phi||_2^2")->required();

    auto* cmd_report = app.add_subcommand("report", "full sweep: ensembles + analysis report");
    add_common(cmd_report);

    auto* cmd_verify = app.add_subcommand("verify", "run the verification suite");
    std::string verify_out = "verify_out";
    std::uint64_t verify_seed = gfcond::kDefaultVerifySeed;
    cmd_verify->add_option("--out", verify_out, "output directory");
    cmd_verify->add_option("--seed", verify_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_verify->parsed()) {
            gfcond::VerifyReport rep = gfcond::run_verification(verify_seed, verify_out);
            std::cout << gfcond::verify_report_text(rep);
            double total = 0.0;
            for (const auto& c : rep.criteria) {
                std::printf("criterion %2d: %6.2f s\n", c.id, c.seconds);
                total += c.seconds;
            }
            std::printf("total: %.2f s; reports in %s\n", total, verify_out.c_str());
            return rep.all_pass ? 0 : 1;
        }

        gfcond::ExperimentConfig cfg = load_config(config_path, out_dir, seed_set, seed);

        if (cmd_spectrum->parsed()) {
            gfcond::Kernel kernel = gfcond::make_kernel(cfg.kernel);
            gfcond::QuadratureGrid grid = gfcond::build_grid(cfg.grid_m);
            gfcond::SpectralDecomposition decomp =
                gfcond::decompose(kernel, grid, cfg.truncation_tol, cfg.degeneracy_tol);
            print_warnings(decomp);
            fs::create_directories(cfg.out_dir);
            std::ofstream(fs::path(cfg.out_dir) / "spectrum.json", std::ios::binary)
                << gfcond::decomposition_to_json(decomp);
            std::printf("%s kernel: %d nodes, %d retained modes, kappa1=%.10g (g1=%d), B=%.10g\n",
                        kernel.family_name().c_str(), cfg.grid_m, decomp.retained(),
                        decomp.kappa1(), decomp.g1(), decomp.b_constant);
            std::printf("wrote %s/spectrum.json\n", cfg.out_dir.c_str());
            return 0;
        }

        if (cmd_sample->parsed()) {
            gfcond::Kernel kernel = gfcond::make_kernel(cfg.kernel);
            gfcond::SpectralDecomposition decomp = gfcond::decompose(
                kernel, gfcond::build_grid(cfg.grid_m), cfg.truncation_tol, cfg.degeneracy_tol);
            print_warnings(decomp);
            fs::create_directories(cfg.out_dir);
            std::ofstream(fs::path(cfg.out_dir) / "samples.csv", std::ios::binary)
                << gfcond::batch_csv(decomp, sample_n, gfcond::RngStream(cfg.seed));
            std::printf("wrote %s/samples.csv (%d samples)\n", cfg.out_dir.c_str(), sample_n);
            return 0;
        }

        if (cmd_condition->parsed()) {
            gfcond::ExperimentConfig one = cfg;
            one.r_sweep = {condition_r};
            gfcond::ExperimentResult res = gfcond::run_experiment(one);
            const auto& p = res.points.front();
            std::printf("r=%g method=%s n=%d ess=%.1f p_event=%.6g (se %.2g)\n", p.r,
                        gfcond::method_name(p.method).c_str(), p.n, p.ess, p.p_event.value,
                        p.p_event.se);
            return res.all_verdicts_pass ? 0 : 1;
        }

        if (cmd_report->parsed()) {
            gfcond::ExperimentResult res = gfcond::run_experiment(cfg);
            std::printf("wrote %zu files to %s\n", res.files_written.size(), cfg.out_dir.c_str());
            for (const auto& row : res.rows)
                if (row.has_verdict && !row.pass)
                    std::printf("FAILED verdict: %s (r=%g)\n", row.id.c_str(), row.r);
            std::printf(res.all_verdicts_pass ? "all verdicts pass\n" : "SOME VERDICTS FAILED\n");
            return res.all_verdicts_pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
