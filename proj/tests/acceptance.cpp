// Acceptance gate: one line per criterion, full-profile parameters.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "whf/scenarios.hpp"
#include "whf/verify.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every preset run twice into separate directories must produce the same
// files byte for byte; summary.json is compared without the wall-clock field.
bool presets_reproducible(const fs::path& root, std::string& detail) {
  std::size_t compared = 0;
  for (const auto& name : whf::scenario_names()) {
    std::vector<fs::path> files[2];
    whf::Json summaries[2];
    for (int rep = 0; rep < 2; ++rep) {
      whf::ScenarioConfig c = whf::preset(name);
      c.output_dir = (root / (rep == 0 ? "a" : "b") / name).string();
      const whf::RunReport r = whf::run(c);
      files[rep] = r.files;
      summaries[rep] = whf::deterministic_part(r.summary);
    }
    if (files[0].size() != files[1].size() || summaries[0] != summaries[1]) {
      detail = name + ": summaries or file lists differ";
      return false;
    }
    for (std::size_t i = 0; i < files[0].size(); ++i) {
      if (files[0][i].filename() == "summary.json") continue;
      if (slurp(files[0][i]) != slurp(files[1][i])) {
        detail = name + ": " + files[0][i].filename().string() + " differs";
        return false;
      }
      ++compared;
    }
  }
  detail = std::to_string(compared) + " files identical across reruns of all presets";
  return true;
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](const whf::CheckResult& r) {
    if (!r.passed) ++failed;
    std::printf("%s criterion %s (%s): %s [%.1fs]\n", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.title.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
  };

  std::vector<std::string> numbered;
  for (const auto& c : whf::checks()) {
    if (c.id[0] != 'M') numbered.push_back(c.id);
  }
  whf::run_checks(whf::Profile::Full, numbered, report);

  // Criterion 12: determinism of verify output and of preset runs.
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> lines[2];
  for (int rep = 0; rep < 2; ++rep) {
    for (const auto& r : whf::run_checks(whf::Profile::Quick)) lines[rep].push_back(whf::format_result(r));
  }
  const fs::path root = fs::temp_directory_path() / "whf_acceptance";
  fs::remove_all(root);
  std::string detail;
  const bool files_ok = presets_reproducible(root, detail);
  fs::remove_all(root);
  whf::CheckResult det{"12", "determinism", lines[0] == lines[1] && files_ok,
                       std::string("verify output ") + (lines[0] == lines[1] ? "identical" : "differs") + " across " +
                           "two runs; " + detail};
  det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(det);

  std::printf("%s: %d criterion(s) failed\n", failed == 0 ? "ACCEPTED" : "REJECTED", failed);
  return failed == 0 ? 0 : 1;
}
