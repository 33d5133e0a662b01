#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "gfcond/experiment.hpp"

#include "json.hpp"

using namespace gfcond;
namespace fs = std::filesystem;

namespace {

const char* kDemoConfig = R"({
  "kernel": {"family": "mercer-synthetic", "mercer_eigs": [1.0, 0.5]},
  "grid_m": 64,
  "r_sweep": [2, 10],
  "epsilons": [0.3],
  "samples_per_r": 1000,
  "method": "auto",
  "seed": 4711,
  "out_dir": "unused"
})";

std::map<std::string, std::string> slurp_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[entry.path().filename().string()] = ss.str();
    }
    return files;
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / "gfcond_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("config parsing and validation") {
    ExperimentConfig c = config_from_json_text(kDemoConfig);
    CHECK(c.kernel.family == KernelFamily::MercerSynthetic);
    CHECK(c.grid_m == 64);
    CHECK(c.r_sweep == std::vector<double>{2.0, 10.0});
    CHECK(c.samples_per_r == 1000);
    CHECK(c.seed == 4711);

    auto expect_field = [](const std::string& text, const std::string& field) {
        try {
            config_from_json_text(text);
            CHECK(false);
        } catch (const ConfigError& e) {
            CHECK(e.field() == field);
        }
    };
    expect_field(R"({"kernel":{"family":"nope"},"r_sweep":[1],"epsilons":[0.3],"seed":1})",
                 "family");
    expect_field(R"({"kernel":{"family":"exponential"},"r_sweep":[1],"epsilons":[0.3]})", "seed");
    expect_field(R"({"kernel":{"family":"exponential"},"r_sweep":[2,1],"epsilons":[0.3],"seed":1})",
                 "r_sweep");
    expect_field(R"({"kernel":{"family":"exponential"},"r_sweep":[1,2],"epsilons":[0.3],)"
                 R"("samples_per_r":10,"seed":1})",
                 "samples_per_r");
    expect_field(R"({"kernel":{"family":"exponential"},"r_sweep":[1,2],"seed":1})", "epsilons");
    expect_field(R"({"kernel":{"family":"exponential"},"r_sweep":[1,2],"epsilons":[0.3],)"
                 R"("seed":1,"grid_m":8192})",
                 "grid_m");
}

TEST_CASE("config hash is stable") {
    ExperimentConfig c = config_from_json_text(kDemoConfig);
    std::string h1 = fnv1a_hex(config_to_canonical_json(c));
    std::string h2 = fnv1a_hex(config_to_canonical_json(c));
    CHECK(h1 == h2);
    CHECK(h1.size() == 16);
    c.seed = 4712;
    CHECK(fnv1a_hex(config_to_canonical_json(c)) != h1);
}

TEST_CASE("run_experiment writes the full artifact set deterministically") {
    ExperimentConfig cfg = config_from_json_text(kDemoConfig);
    fs::path dir = fresh_dir("run");
    cfg.out_dir = dir.string();

    ExperimentResult res = run_experiment(cfg);
    CHECK(res.all_verdicts_pass);
    CHECK(res.points.size() == 2);
    CHECK(res.points[0].method == ConditionalMethod::Rejection);      // p ~ 0.25
    CHECK(res.points[1].method == ConditionalMethod::Decomposition);  // p ~ 9e-5

    auto first = slurp_dir(dir);
    CHECK(first.count("spectrum.json") == 1);
    CHECK(first.count("ensemble_r2.csv") == 1);
    CHECK(first.count("ensemble_r10.csv") == 1);
    CHECK(first.count("analysis.json") == 1);
    CHECK(first.count("analysis.txt") == 1);
    CHECK(first.count("concentration.csv") == 1);
    CHECK(first.count("concentration.dat") == 1);
    CHECK(first.count("manifest.json") == 1);

    run_experiment(cfg);
    CHECK(slurp_dir(dir) == first);  // byte-identical rerun

    // ensemble CSV interface shape
    std::istringstream csv(first["ensemble_r2.csv"]);
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "r,method,n,ess,p_event,p_event_se,eps,p_overlap,p_overlap_se,"
          "e_sup_perp,e_sup_perp_se,e_par_sq,e_par_sq_se,e_perp_sq,e_perp_sq_se");

    // concentration table: bound column dominates the estimate at every row
    // and the overlap probability decreases along the sweep (2-SE slack)
    std::istringstream conc(first["concentration.csv"]);
    std::getline(conc, header);
    std::string line;
    double prev_p = 2.0, prev_se = 0.0;
    while (std::getline(conc, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double r, p, se, bound;
        row >> r >> p >> se >> bound;
        CHECK(p <= bound + 3.0 * se);
        CHECK(p <= prev_p + 2.0 * std::sqrt(se * se + prev_se * prev_se));
        prev_p = p;
        prev_se = se;
    }

    // gnuplot file mirrors the CSV numerically
    CHECK(first["concentration.dat"].substr(0, 2) == "# ");

    // manifest carries the config hash and output list
    nlohmann::json manifest = nlohmann::json::parse(first["manifest.json"]);
    CHECK(manifest["config_hash"] == fnv1a_hex(config_to_canonical_json(cfg)));
    CHECK(manifest["outputs"].size() == 7);
}

TEST_CASE("manifest round-trip reproduces the run") {
    ExperimentConfig cfg = config_from_json_text(kDemoConfig);
    fs::path dir_a = fresh_dir("mana");
    cfg.out_dir = dir_a.string();
    run_experiment(cfg);
    auto first = slurp_dir(dir_a);

    std::ifstream in(dir_a / "manifest.json", std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig replay = config_from_json_text(ss.str());
    fs::path dir_b = fresh_dir("manb");
    replay.out_dir = dir_b.string();
    run_experiment(replay);
    auto second = slurp_dir(dir_b);

    for (const auto& [name, bytes] : first) {
        if (name == "manifest.json") continue;  // embeds out_dir
        CHECK(second.at(name) == bytes);
    }
}

TEST_CASE("failed runs clean up partial outputs") {
    ExperimentConfig cfg = config_from_json_text(kDemoConfig);
    fs::path dir = fresh_dir("cleanup");
    cfg.out_dir = dir.string();
    cfg.method = "rejection";
    cfg.r_sweep = {80.0};  // hopeless for rejection: budget exhausts
    CHECK_THROWS(run_experiment(cfg));
    CHECK_FALSE(fs::exists(dir / "spectrum.json"));
    CHECK(fs::is_directory(dir));
}

TEST_CASE("concentration table needs at least two thresholds") {
    std::vector<SweepPoint> one(1);
    CHECK_THROWS(emit_concentration_table(one, {0.3}));
}

TEST_CASE("rank-one spectrum yields identically zero concentration columns") {
    ExperimentConfig cfg = config_from_json_text(kDemoConfig);
    cfg.kernel.mercer_eigs = {2.0};
    cfg.r_sweep = {4.0, 8.0};
    fs::path dir = fresh_dir("rankone");
    cfg.out_dir = dir.string();
    ExperimentResult res = run_experiment(cfg);
    CHECK(res.all_verdicts_pass);
    for (const auto& p : res.points) {
        for (const auto& e : p.p_overlap) CHECK(e.value == 0.0);
        CHECK(p.e_sup_perp.value == 0.0);
        CHECK(p.e_perp_sq.value == 0.0);
    }
}
