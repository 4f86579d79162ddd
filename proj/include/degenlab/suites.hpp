#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "degenlab/report.hpp"

namespace degenlab {

struct SuiteOptions {
  double grid_h = 0.0;  // > 0 overrides the per-instance default spacing
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  bool quick = false;
  int n = 0;            // > 0 restricts dimension-parameterized instances
  double alpha = -1.0;  // in (0,1) restricts alpha-parameterized instances
  std::string builtin;  // movingplane: run this field only, without expectations
};

// examples kyfan superaffine barrier slopes abp distfield movingplane
const std::vector<std::string>& suite_names();
bool is_suite(const std::string& name);

// Runs one suite, or every suite for "all". Each report carries
// params.suite and params.case; instances that must be rejected have
// `expected` set. `sink`, when given, sees each report as it finishes.
std::vector<CheckReport> run_suite(const std::string& name, const SuiteOptions& opt,
                                   const std::function<void(const CheckReport&)>& sink = {});

// 0 all ok, 1 any failure, 3 only inconclusive reports fall short.
int suite_exit_code(const std::vector<CheckReport>& reports);

}  // namespace degenlab
