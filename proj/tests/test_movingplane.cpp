#include <cmath>
#include <sstream>

#include "degenlab/error.hpp"
#include "degenlab/movingplane.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

SolutionSample pucci_sample(int n, double alpha, double h) {
  const double rb = pucci_root(n, alpha);
  ScalarField f = scaled_argument(builtin("pucci_radial", {{"n", n}, {"alpha", alpha}}), rb);
  return SolutionSample::from_field(f, h);
}

}  // namespace

TEST_CASE("reflection of the paraboloid") {
  const auto u = SolutionSample::from_field(builtin("paraboloid", {{"n", 2}}), 1.0 / 16);
  const double lam = 0.25;
  const auto r = reflect_and_diff(u, lam, {1.0, 0.0});
  REQUIRE(!r.nodes.empty());
  for (std::size_t k = 0; k < r.nodes.size(); ++k) {
    const Vec x = u.grid.point(r.nodes[k]);
    CHECK(r.w[k] == doctest::Approx(4.0 * lam * (x[0] - lam)).epsilon(1e-12));
  }
  // Even in x1: w vanishes at lambda = 0.
  for (double w : reflect_and_diff(u, 0.0, {1.0, 0.0}).w) CHECK(std::abs(w) <= 1e-15);
  // Off-axis: interpolation error stays within the reported tolerance.
  const auto d = reflect_and_diff(u, 0.3, {std::cos(0.4), std::sin(0.4)});
  for (std::size_t k = 0; k < d.nodes.size(); ++k) CHECK(d.w[k] + d.tol[k] >= 0.0);
}

TEST_CASE("reflection masks the mirrored puncture") {
  const auto u = SolutionSample::from_field(builtin("example5_sin", {{"n", 1}}), 1.0 / 64);
  const auto r = reflect_and_diff(u, 0.25, {1.0});
  CHECK(r.masked > 0);
  for (std::size_t i : r.nodes) CHECK(std::abs(2 * 0.25 - u.grid.point(i)[0]) > u.puncture);
}

TEST_CASE("paraboloid is symmetric and monotone") {
  for (int n : {1, 2, 3}) {
    CAPTURE(n);
    const double h = n == 3 ? 1.0 / 8 : 1.0 / 32;
    const auto u = SolutionSample::from_field(builtin("paraboloid", {{"n", n}}), h);
    const auto dirs = scan_directions(n, 10, 3);
    const auto rep = radial_symmetry_report(u, dirs);
    CHECK(rep.metrics["classification"] == "SYMMETRIC+MONOTONE");
    CHECK(rep.status == Status::Pass);
    for (double lb : rep.metrics["lambda_bars"].get<Vec>()) CHECK(lb <= 2 * h);
    CHECK(rep.metrics["boundary_max_abs"].get<double>() <= 2 * h);
    CHECK(monotonicity_check(u, dirs[0]).status == Status::Pass);
  }
}

TEST_CASE("example4_1d is asymmetric") {
  const auto u = SolutionSample::from_field(builtin("example4_1d"), 1.0 / 256);
  const auto rep = radial_symmetry_report(u, scan_directions(1));
  CHECK(rep.metrics["classification"] == "ASYMMETRIC");
  CHECK(rep.status == Status::Fail);
  CHECK(lambda_bar_scan(u, {1.0}).lambda_bar <= 2.0 / 256);
  // Reflecting towards the steep side fails up to lambda = 1/4.
  CHECK(lambda_bar_scan(u, {-1.0}).lambda_bar == doctest::Approx(0.25).epsilon(0.05));
  const auto r = reflect_and_diff(u, 0.125, {-1.0});
  CHECK(*std::min_element(r.w.begin(), r.w.end()) < 0.0);
}

TEST_CASE("example5_sin is not monotone") {
  const auto u = SolutionSample::from_field(builtin("example5_sin", {{"n", 1}}), 1.0 / 256);
  const auto m = monotonicity_check(u, {1.0});
  CHECK(m.status == Status::Fail);
  CHECK(m.metrics["violation_r_max"].get<double>() < 0.5);
  CHECK(lambda_bar_scan(u, {1.0}).lambda_bar > 0.1);
  const auto rep = radial_symmetry_report(u, scan_directions(1));
  CHECK(rep.metrics["classification"] == "SYMMETRIC+NONMONOTONE");
}

TEST_CASE("pucci radial solution is shell-symmetric but not monotone") {
  const double h = 1.0 / 64;
  const auto u = pucci_sample(2, 0.5, h);
  CHECK(u.boundary_max_abs() <= 0.05);
  CHECK(u.interior_min() > 0.0);
  const auto m = monotonicity_check(u, {1.0, 0.0});
  CHECK(m.status == Status::Fail);
  // Rising part: |x| < 1 / r_bar.
  CHECK(m.metrics["violation_r_max"].get<double>() < 1.0 / pucci_root(2, 0.5) + 2 * h);
  const auto rep = radial_symmetry_report(u, scan_directions(2));
  CHECK(rep.metrics["shell_spread"].get<double>() <= rep.tolerances.at("shell_spread"));
  CHECK(rep.metrics["classification"] == "SYMMETRIC+NONMONOTONE");
  CHECK(rep.metrics["lambda_bar_max"].get<double>() > 2 * h);
}

TEST_CASE("nonnegative w forces a nonpositive derivative") {
  const auto u = SolutionSample::from_field(builtin("paraboloid", {{"n", 2}}), 1.0 / 32);
  const auto s = lambda_bar_scan(u, {1.0, 0.0});
  for (double m : s.min_margin) CHECK(m >= 0.0);
  CHECK(monotonicity_check(u, {1.0, 0.0}).metrics["max_derivative"].get<double>() <= 0.0);
}

TEST_CASE("scan inputs and export") {
  const Vec l = default_lambdas(0.125);
  CHECK(l.size() == 7);
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(l[i] > l[i - 1]);
  CHECK(scan_directions(2).size() == 16);
  CHECK(scan_directions(3, 50).size() == 126);
  const auto u = SolutionSample::from_field(builtin("paraboloid", {{"n", 1}}), 0.125);
  CHECK_THROWS_AS(lambda_bar_scan(u, {1.0}, {0.5, 0.25}), Error);
  CHECK_THROWS_AS(lambda_bar_scan(u, {1.0}, {1.5}), Error);
  CHECK_THROWS_AS(reflect_and_diff(u, 0.5, {0.0}), Error);
  std::ostringstream os;
  write_scan_csv(os, lambda_bar_scan(u, {1.0}));
  CHECK(os.str().rfind("lambda,min_w,min_margin\n", 0) == 0);
}
