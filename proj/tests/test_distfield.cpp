#include <cmath>
#include <numbers>

#include "degenlab/distfield.hpp"
#include "degenlab/error.hpp"
#include "doctest.h"

using namespace degenlab;

namespace {

// Brute-force distance to a circle by dense angular sampling plus golden-section polish.
double circle_dist_sampled(const Vec& c, double r, const Vec& x) {
  auto f = [&](double t) {
    const double px = c[0] + r * std::cos(t), py = c[1] + r * std::sin(t), pz = c[2];
    return std::sqrt((x[0] - px) * (x[0] - px) + (x[1] - py) * (x[1] - py) + (x[2] - pz) * (x[2] - pz));
  };
  const int m = 20000;
  int best = 0;
  for (int i = 1; i < m; ++i)
    if (f(2 * std::numbers::pi * i / m) < f(2 * std::numbers::pi * best / m)) best = i;
  double a = 2 * std::numbers::pi * (best - 1) / m, b = 2 * std::numbers::pi * (best + 1) / m;
  for (int it = 0; it < 200; ++it) {
    const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
    (f(m1) < f(m2) ? b : a) = f(m1) < f(m2) ? m2 : m1;
  }
  return f(0.5 * (a + b));
}

}  // namespace

TEST_CASE("closed-form distances") {
  CHECK(dist(ManifoldSpec::sphere({0, 0, 0}, 1.0), {2, 0, 0}) == doctest::Approx(1.0));
  CHECK(dist(ManifoldSpec::origin(3), {1, 2, 2}) == doctest::Approx(3.0));
  const auto c = ManifoldSpec::circle_xy(1.5);
  Rng rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 40; ++t) {
    const Vec x{u(rng), u(rng), u(rng)};
    const double closed = std::sqrt(std::pow(std::hypot(x[0], x[1]) - 1.5, 2) + x[2] * x[2]);
    CHECK(dist(c, x) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(dist(c, x) == doctest::Approx(circle_dist_sampled({0, 0, 0}, 1.5, x)).epsilon(1e-9));
  }
  const auto slice = ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}});
  CHECK(dist(slice, {3, 4, 7}) == doctest::Approx(5.0));
  const auto patch = ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}}, 1.0);
  CHECK(dist(patch, {0, 0, 3}) == doctest::Approx(2.0));
}

TEST_CASE("parametric curve distance matches the closed-form circle") {
  const double r = 1.2;
  const auto curve = ManifoldSpec::parametric(3, [r](double t) {
    const double a = 2 * std::numbers::pi * t;
    return Vec{r * std::cos(a), r * std::sin(a), 0.0};
  });
  const auto circ = ManifoldSpec::circle_xy(r);
  Rng rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    const Vec x{u(rng), u(rng), u(rng)};
    CHECK(dist(curve, x) == doctest::Approx(dist(circ, x)).epsilon(1e-9));
  }
  // The axis is equidistant from the whole curve: no unique foot point.
  CHECK_FALSE(nearest_point(curve, {0, 0, 0.5}).nearest.has_value());
}

TEST_CASE("distance is 1-Lipschitz") {
  const std::vector<ManifoldSpec> specs = {ManifoldSpec::origin(3), ManifoldSpec::sphere({0, 0, 0}, 1.0),
                                           ManifoldSpec::circle_xy(1.0), tangent_circle(1.0)};
  Rng rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& e : specs)
    for (int t = 0; t < 200; ++t) {
      const Vec x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)};
      CHECK(std::abs(dist(e, x) - dist(e, y)) <= norm({x[0] - y[0], x[1] - y[1], x[2] - y[2]}) + 1e-12);
    }
}

TEST_CASE("squared distance is smooth through E") {
  for (const auto& e : {ManifoldSpec::sphere({0, 0, 0}, 1.0), ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}})}) {
    ScalarField d2;
    d2.dim = 3;
    d2.eval = [e](const Vec& x) { return dist(e, x) * dist(e, x); };
    for (double s : {1e-1, 1e-2, 1e-3}) {
      const Vec x = e.kind == ManifoldSpec::Kind::Sphere ? Vec{1.0 + s, 0.0, 0.0} : Vec{s, 0.0, 0.3};
      const SymMat h = fd_hessian(d2, x, 1e-4);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::abs(h(i, j)) <= 4.0);
    }
  }
}

TEST_CASE("expansion on a point is exact") {
  const auto e = ManifoldSpec::origin(3);
  const auto rep = hessian_expansion_check(e, profile_identity(), tube_points(e, 0.05, 20, 1), 1e-6);
  CHECK(rep.status == Status::Pass);
  CHECK(rep.metrics["required_tol_factor"].get<double>() <= 1e-6);
}

TEST_CASE("expansion on a circle needs a curvature-sized factor") {
  const auto e = ManifoldSpec::circle_xy(1.0);
  const auto rep = hessian_expansion_check(e, profile_identity(), tube_points(e, 0.01, 64, 2), 2.0);
  CHECK(rep.status == Status::Pass);
  const double tf = rep.metrics["required_tol_factor"].get<double>();
  CHECK(tf == doctest::Approx(1.0 / (1.0 - 0.01)).epsilon(1e-4));

  const auto sq = hessian_expansion_check(e, profile_square(), tube_points(e, 0.01, 64, 2), 2.0);
  CHECK(sq.status == Status::Pass);
  CHECK(sq.metrics["required_tol_factor"].get<double>() <= 1.0);
}

TEST_CASE("required factor is nonincreasing as the tube shrinks") {
  const std::vector<ManifoldSpec> specs = {ManifoldSpec::origin(3), ManifoldSpec::circle_xy(1.0),
                                           ManifoldSpec::sphere({0, 0, 0}, 1.0)};
  for (const auto& e : specs)
    for (const std::string g : {"t", "t2", "neglog"}) {
      CAPTURE(e.name());
      CAPTURE(g);
      const auto rep = hessian_expansion_stability(e, profile_by_name(g, 1.0), 0.04, 3, 48, 2.0, 5);
      CHECK(rep.status == Status::Pass);
    }
}

TEST_CASE("cluster matching flags ambiguity") {
  CHECK_FALSE(match_clusters({0, 10}, {0.1, 9.9}).ambiguous);
  CHECK(match_clusters({0, 10}, {4.9, 5.1}).ambiguous);
  CHECK(match_clusters({0, 10}, {9.0, 10.0}).ambiguous);
}

TEST_CASE("normal coordinates reproduce the distance") {
  CHECK(local_coordinates_check(ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}}), {0.3, -0.2, 5}).status == Status::Pass);
  CHECK(local_coordinates_check(ManifoldSpec::circle_xy(1.0), {1.1, 0.2, 0.05}).status == Status::Pass);
  CHECK(local_coordinates_check(ManifoldSpec::origin(3), {0.1, 0.2, 0.3}).status == Status::Pass);
  CHECK(local_coordinates_check(ManifoldSpec::sphere({0, 0, 0}, 1.0), {0.1, 0.9, 0.1}).status == Status::Pass);
  const Vec phi = normal_coordinates(ManifoldSpec::circle_xy(2.0), {2.1, 0.0, 0.3});
  CHECK(phi[0] == doctest::Approx(0.1));
  CHECK(phi[1] == doctest::Approx(0.3));
  try {
    normal_coordinates(ManifoldSpec::circle_xy(1.0), {0, 0, 0.2});
    FAIL("expected domain error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("sandwich bounds") {
  const auto flat = ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}});
  const auto fit = sandwich_fit(flat, tube_points(flat, 0.1, 50, 1), -1.0);
  CHECK(fit.c <= 1e-12);
  CHECK(sandwich_check(flat, 0.2, 400, -1.0, 1).status == Status::Pass);

  const auto circ = tangent_circle(1.0);
  const auto lin = sandwich_check(circ, 0.2, 2000, -1.0, 3);
  CHECK(lin.status == Status::Pass);
  const double c = lin.metrics["C"].get<double>();
  CHECK(c > 0.1);
  CHECK(c < 2.0);
  CHECK(sandwich_check(circ, 0.2, 2000, 0.5, 3).status == Status::Pass);

  CHECK_THROWS_AS(sandwich_check(ManifoldSpec::circle_xy(1.0), 0.2, 10, -1.0, 1), Error);
}
