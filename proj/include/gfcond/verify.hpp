#ifndef GFCOND_VERIFY_HPP
#define GFCOND_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace gfcond {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::vector<std::string> details;  // one line per sub-check
    double seconds = 0.0;              // stdout only, never serialized
};

struct VerifyReport {
    std::vector<CriterionResult> criteria;
    bool all_pass = false;
};

constexpr std::uint64_t kDefaultVerifySeed = 20250607;

/// Runs the full verification suite and writes verify_report.json and
/// verify_report.txt under out_dir. Report files carry no timings or
/// absolute paths, so a rerun with the same seed reproduces them byte for
/// byte.
VerifyReport run_verification(std::uint64_t seed, const std::string& out_dir);

std::string verify_report_json(const VerifyReport& report);
std::string verify_report_text(const VerifyReport& report);

}  // namespace gfcond

#endif
