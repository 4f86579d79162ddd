#include <cmath>
#include <sstream>

#include "degenlab/error.hpp"
#include "degenlab/fields.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

Vec random_point(Rng& rng, int n, double rmin, double rmax) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(rmin, rmax);
  Vec x(n);
  for (double& t : x) t = g(rng);
  const double s = u(rng) / norm(x);
  for (double& t : x) t *= s;
  return x;
}

double max_abs_diff(const SymMat& a, const SymMat& b) {
  double m = 0.0;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace

TEST_CASE("finite differences on polynomials") {
  ScalarField lin = builtin("quadratic", {{"n", 3}, {"c", 0.0}, {"b", {1.0, 0.0, 0.0}}});
  for (double h : {1e-1, 1e-3}) {
    const Vec g = fd_gradient(lin, {0.3, -2.0, 5.0}, h);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(std::abs(g[1]) < 1e-12);
  }
  ScalarField sq = builtin("quadratic", {{"n", 2}, {"c", 1.0}});
  const Vec g = fd_gradient(sq, {1.0, 0.0}, 1e-3);
  CHECK(std::abs(g[0] - 2.0) <= 1e-8);
  CHECK(std::abs(g[1]) <= 1e-8);

  // 0.5 x^T A x is reproduced exactly by the second-difference stencil.
  const SymMat a = SymMat::from_rows({{2, 1, 0}, {1, 3, -1}, {0, -1, 1}});
  ScalarField q;
  q.dim = 3;
  q.eval = [a](const Vec& x) { return 0.5 * a.quad(x); };
  CHECK(max_abs_diff(fd_hessian(q, {0.2, 0.1, -0.4}, 1e-2), a) <= 1e-9);
}

TEST_CASE("FD Hessian of |x| matches the radial closed form") {
  ScalarField r = builtin("pow_alpha", {{"n", 3}, {"alpha", 0.999999}});
  ScalarField abs_x;
  abs_x.dim = 3;
  abs_x.singular = ManifoldSpec::origin(3);
  abs_x.eval = [](const Vec& x) { return norm(x); };
  const Vec ev = eigenvalues(fd_hessian(abs_x, {1, 0, 0}, 1e-4));
  CHECK(std::abs(ev[0]) <= 1e-5);
  CHECK(ev[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(ev[2] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("FD errors converge at second order") {
  ScalarField f = builtin("trig", {{"n", 2}});
  const Vec x{0.7, -0.4};
  auto err_h = [&](double h) { return max_abs_diff(fd_hessian(f, x, h), f.hess(x)); };
  const double ratio = err_h(1e-2) / err_h(5e-3);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));

  ScalarField p = builtin("pow_alpha", {{"n", 2}, {"alpha", 0.5}});
  Rng rng(17);
  for (int t = 0; t < 20; ++t) {
    const Vec y = random_point(rng, 2, 0.2, 1.0);
    auto gerr = [&](double h) {
      const Vec a = fd_gradient(p, y, h), b = p.grad(y);
      return std::hypot(a[0] - b[0], a[1] - b[1]);
    };
    CHECK(gerr(4e-3) / gerr(2e-3) == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("stencils refuse to straddle the singular set") {
  ScalarField p = builtin("pow_alpha", {{"n", 2}, {"alpha", 0.5}});
  try {
    fd_hessian(p, {1e-3, 0.0}, 1e-2);
    FAIL("expected a stencil error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Stencil);
  }
  CHECK_THROWS_AS(fd_gradient(p, {1e-3, 0.0}, 1e-2), Error);
}

TEST_CASE("analytic derivatives of builtins agree with FD") {
  struct Case {
    const char* name;
    Json params;
    double rmin;
  };
  const std::vector<Case> cases = {
      {"pow_alpha", {{"n", 3}, {"alpha", 0.5}}, 0.2},
      {"pucci_radial", {{"n", 3}, {"alpha", 0.5}}, 0.2},
      {"example5_sin", {{"n", 2}}, 0.2},
      {"appD_pow", {{"n", 2}, {"a", 0.3}}, 0.2},
      {"neg_log", {{"n", 2}}, 0.2},
      {"fundamental", {{"n", 3}}, 0.3},
      {"paraboloid", {{"n", 3}}, 0.0},
      {"harmonic_poly", {{"n", 2}}, 0.0},
      {"trig", {{"n", 3}}, 0.0},
  };
  Rng rng(100);
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const ScalarField f = builtin(c.name, c.params);
    for (int t = 0; t < 100; ++t) {
      Vec x = random_point(rng, f.dim, c.rmin, 1.0);
      // Keep clear of the radial breakpoint of the two-branch profile.
      if (std::abs(norm(x) - 1.0) < 1e-2) continue;
      const double scale = 1.0 + hessian(f, x).frobenius();
      CHECK(max_abs_diff(fd_hessian(f, x), f.hess(x)) <= 1e-4 * scale);
      const Vec a = fd_gradient(f, x), b = f.grad(x);
      for (int i = 0; i < f.dim; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-6 * (1.0 + norm(b)));
    }
  }
  const ScalarField split = builtin("appD_split", {{"n", 4}, {"k", 2}, {"a", 0.4}, {"eps", 0.05}});
  for (int t = 0; t < 100; ++t) {
    Vec x = random_point(rng, 4, 0.3, 1.0);
    if (std::hypot(x[0], x[1]) < 0.1) continue;
    const double scale = 1.0 + split.hess(x).frobenius();
    CHECK(max_abs_diff(fd_hessian(split, x), split.hess(x)) <= 1e-4 * scale);
  }
}

TEST_CASE("radial Hessian eigenvalues") {
  RadialProfile sq;
  sq.value = [](double r) { return r * r; };
  sq.d1 = [](double r) { return 2 * r; };
  sq.d2 = [](double) { return 2.0; };
  for (double v : radial_hessian_eigs(sq, 0.3, 4).values) CHECK(v == doctest::Approx(2.0));

  const auto e = radial_hessian_eigs(power_profile(0.5), 1.0, 3);
  CHECK(e.values[0] == doctest::Approx(-0.25));
  CHECK(e.values[1] == doctest::Approx(0.5));
  CHECK(e.values[2] == doctest::Approx(0.5));

  const double alpha = 0.5;
  const auto p = pucci_profile(3, alpha);
  for (double r : {0.1, 0.5, 0.9}) {
    const auto ev = radial_hessian_eigs(p, r, 3);
    const double d2 = -alpha * (1 - alpha) * std::pow(r, alpha - 2) - alpha;
    const double t = alpha * std::pow(r, alpha - 2) - alpha;
    CHECK(ev.values[0] == doctest::Approx(d2));
    CHECK(ev.values[1] == doctest::Approx(t));
    CHECK_FALSE(ev.at_breakpoint);
  }
  CHECK(radial_hessian_eigs(p, 1.0, 3).at_breakpoint);
}

TEST_CASE("two-branch profile is C^{2,1} at r = 1 with a root beyond 1") {
  for (int n = 2; n <= 5; ++n)
    for (double alpha : {0.25, 0.5, 0.75}) {
      const auto p = pucci_profile(n, alpha);
      const double below = std::nextafter(1.0, 0.0), above = std::nextafter(1.0, 2.0);
      CHECK(std::abs(p.value(below) - p.value(above)) <= 1e-10);
      CHECK(std::abs(p.d1(below) - p.d1(above)) <= 1e-10);
      CHECK(std::abs(p.d2(below) - p.d2(above)) <= 1e-10);
      CHECK(p.root > 1.0);
      CHECK(std::abs(p.value(p.root)) <= 1e-12);
      for (int i = 1; i < 50; ++i) CHECK(p.value(p.root * i / 50.0) > 0.0);
    }
}

TEST_CASE("piecewise builtins") {
  const auto s = builtin("step_e1");
  CHECK(s({0.5}) == 1.0);
  CHECK(s({-0.5}) == 4.0);
  const auto e4 = builtin("example4_1d");
  CHECK(e4({-0.5}) == doctest::Approx(0.5));
  CHECK(e4({0.5}) == doctest::Approx(0.25));
  CHECK(e4({1.0}) == doctest::Approx(0.0));
  CHECK(e4({-1.0}) == doctest::Approx(0.0));
  const auto m = builtin("max_coords", {{"n", 2}, {"k", 1}});
  CHECK(m({0.3, -1.0}) == doctest::Approx(0.3));
  CHECK_FALSE(m.smooth);
  CHECK_THROWS_AS(builtin("no_such_field"), Error);
  CHECK_THROWS_AS(builtin("pow_alpha", {{"n", 2}, {"alpha", 1.5}}), Error);
}

TEST_CASE("grid indexing and masks") {
  Grid g({-1, -1}, {1, 1}, 0.5);
  CHECK(g.counts() == std::vector<int>{5, 5});
  CHECK(g.size() == 25);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.flat_index(g.multi_index(i)) == i);
  const std::size_t centre = g.flat_index({2, 2});
  CHECK(norm(g.point(centre)) == doctest::Approx(0.0));
  CHECK(g.neighbor(centre, 0, 1).value() == g.flat_index({3, 2}));
  CHECK_FALSE(g.neighbor(g.flat_index({4, 2}), 0, 1).has_value());

  Grid b = Grid::ball(2, 1.0, 0.25);
  b.exclude(ManifoldSpec::origin(2), 0.3);
  CHECK_FALSE(b.active(b.flat_index({4, 4})));
  CHECK_FALSE(b.active(b.flat_index({0, 0})));
  CHECK(b.active(b.flat_index({0, 4})));
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b.active(i)) {
      CHECK(norm(b.point(i)) <= 1.0 + 1e-12);
      CHECK(norm(b.point(i)) > 0.3);
    }
}

TEST_CASE("CSV dump") {
  Grid g({0.5}, {1.0}, 0.25);
  std::ostringstream os;
  write_field_csv(os, builtin("pow_alpha", {{"n", 1}, {"alpha", 0.5}}), g, true, true);
  const std::string s = os.str();
  CHECK(s.rfind("x1,value,g1,h11\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}
