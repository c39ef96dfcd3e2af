#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace shield::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs every acceptance criterion in order. `scenario_dir` holds the shipped
// scenario files. `on_result` fires as each criterion finishes.
std::vector<CriterionResult> run_acceptance(const std::filesystem::path& scenario_dir,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// Default location of the shipped scenarios, fixed at build time.
std::filesystem::path default_scenario_dir();

// "PASS [3] name: detail"
std::string format(const CriterionResult& r);

}  // namespace shield::verify
