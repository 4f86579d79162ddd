#include "degenlab/distfield.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

constexpr double kPi = std::numbers::pi;

Vec cross3(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec random_unit(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Vec v(n);
  do {
    for (double& t : v) t = g(rng);
  } while (norm(v) < 1e-8);
  const double s = norm(v);
  for (double& t : v) t /= s;
  return v;
}

// Orthonormal completion of `basis` in R^n.
std::vector<Vec> complement(const std::vector<Vec>& basis, int n) {
  std::vector<Vec> all = basis, out;
  for (int i = 0; i < n && static_cast<int>(out.size()) < n - static_cast<int>(basis.size()); ++i) {
    Vec v(n, 0.0);
    v[i] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : all) {
        const double c = dot(v, b);
        for (int j = 0; j < n; ++j) v[j] -= c * b[j];
      }
    const double s = norm(v);
    if (s < 1e-6) continue;
    for (double& t : v) t /= s;
    all.push_back(v);
    out.push_back(v);
  }
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Profile1D profile_identity() {
  return {"t", [](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
}

Profile1D profile_square() {
  return {"t2", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }, [](double) { return 2.0; }};
}

Profile1D profile_neglog(double r_bar) {
  return {"neglog", [r_bar](double t) { return -std::log(t / r_bar); }, [](double t) { return -1.0 / t; },
          [](double t) { return 1.0 / (t * t); }};
}

Profile1D profile_by_name(const std::string& name, double r_bar) {
  if (name == "t") return profile_identity();
  if (name == "t2") return profile_square();
  if (name == "neglog") return profile_neglog(r_bar);
  fail(ErrorKind::Input, "unknown profile '" + name + "'");
}

ScalarField distance_profile_field(const ManifoldSpec& e, const Profile1D& g) {
  ScalarField f;
  f.name = g.name + "(d_" + e.name() + ")";
  f.dim = e.n;
  f.singular = e;
  f.eval = [e, g](const Vec& x) { return g.g(dist(e, x)); };
  return f;
}

std::vector<Vec> tube_points(const ManifoldSpec& e, double d, int count, std::uint64_t seed) {
  require(d > 0.0 && count > 0, ErrorKind::Input, "tube_points needs d > 0 and count > 0");
  Rng rng(seed);
  std::vector<Vec> pts;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  switch (e.kind) {
    case ManifoldSpec::Kind::PointSet:
      for (int i = 0; i < count; ++i) {
        const Vec& p = e.points[i % e.points.size()];
        const Vec u = random_unit(e.n, rng);
        Vec x(p);
        for (int j = 0; j < e.n; ++j) x[j] += d * u[j];
        pts.push_back(x);
      }
      break;
    case ManifoldSpec::Kind::Sphere:
      for (int i = 0; i < count; ++i) {
        const Vec u = random_unit(e.n, rng);
        const double r = e.radius + (i % 2 == 0 ? d : -d);
        Vec x(e.center);
        for (int j = 0; j < e.n; ++j) x[j] += r * u[j];
        pts.push_back(x);
      }
      break;
    case ManifoldSpec::Kind::Circle: {
      const Vec w = cross3(e.basis[0], e.basis[1]);
      for (int i = 0; i < count; ++i) {
        const double th = 2.0 * kPi * i / count;
        const double ph = 2.0 * kPi * std::fmod(i * golden, 1.0);
        Vec x(e.center);
        const double rho = e.radius + d * std::cos(th);
        for (int j = 0; j < 3; ++j)
          x[j] += rho * (std::cos(ph) * e.basis[0][j] + std::sin(ph) * e.basis[1][j]) + d * std::sin(th) * w[j];
        pts.push_back(x);
      }
      break;
    }
    case ManifoldSpec::Kind::AffineSlice: {
      const auto normals = complement(e.basis, e.n);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (int i = 0; i < count; ++i) {
        Vec x(e.center);
        for (const Vec& t : e.basis) {
          const double c = u(rng) * (e.radius > 0.0 ? 0.5 * e.radius : 1.0);
          for (int j = 0; j < e.n; ++j) x[j] += c * t[j];
        }
        Vec nv(e.n, 0.0);
        std::normal_distribution<double> g;
        for (const Vec& m : normals) {
          const double c = g(rng);
          for (int j = 0; j < e.n; ++j) nv[j] += c * m[j];
        }
        const double s = norm(nv);
        for (int j = 0; j < e.n; ++j) x[j] += d * nv[j] / s;
        pts.push_back(x);
      }
      break;
    }
    case ManifoldSpec::Kind::Curve:
      fail(ErrorKind::Input, "tube_points does not support sampled curves");
  }
  return pts;
}

Vec expansion_spectrum(int n, int k, const Profile1D& g, double d) {
  Vec ev(k, 0.0);
  ev.push_back(g.g2(d));
  for (int i = 0; i < n - k - 1; ++i) ev.push_back(g.g1(d) / d);
  std::sort(ev.begin(), ev.end());
  return ev;
}

ClusterMatch match_clusters(const Vec& expected, const Vec& computed) {
  ClusterMatch m;
  m.expected = expected;
  m.computed = computed;
  std::sort(m.expected.begin(), m.expected.end());
  std::sort(m.computed.begin(), m.computed.end());
  double spread = 0.0;
  for (double v : m.expected) spread = std::max(spread, std::abs(v));
  Vec centers;
  for (double v : m.expected)
    if (centers.empty() || v - centers.back() > 1e-12 * (1.0 + spread)) centers.push_back(v);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < centers.size(); ++i) gap = std::min(gap, centers[i] - centers[i - 1]);
  for (std::size_t i = 0; i < m.expected.size(); ++i) {
    const double lam = m.computed[i];
    const double own = std::abs(lam - m.expected[i]);
    m.max_deviation = std::max(m.max_deviation, own);
    for (double c : centers) {
      if (std::abs(c - m.expected[i]) <= 1e-12 * (1.0 + spread)) continue;
      // Nearly equidistant from two clusters, or closer to a different one.
      if (std::abs(lam - c) < own + 0.1 * gap) m.ambiguous = true;
    }
  }
  return m;
}

CheckReport hessian_expansion_check(const ManifoldSpec& e, const Profile1D& g, const std::vector<Vec>& points,
                                    double tol_factor) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckReport rep;
  rep.check = "hessian_expansion";
  rep.params = {{"manifold", e.name()}, {"n", e.n}, {"k", e.k}, {"profile", g.name},
                {"points", points.size()}};
  rep.tolerances["tol_factor"] = tol_factor;
  rep.tolerances["fd_step_rel"] = 2e-4;
  rep.tolerances["ambiguity_gap_fraction"] = 0.1;
  const ScalarField f = distance_profile_field(e, g);
  double required = 0.0;
  int ambiguous = 0, skipped = 0;
  for (const Vec& x : points) {
    const FootPoint fp = nearest_point(e, x);
    if (!fp.nearest) {
      ++skipped;  // medial axis: no unique foot point
      continue;
    }
    const double d = fp.distance;
    const SymMat h = fd_hessian(f, x, 2e-4 * d);
    const ClusterMatch m = match_clusters(expansion_spectrum(e.n, e.k, g, d), eigenvalues(h));
    const double scale = d * std::abs(g.g2(d)) + std::abs(g.g1(d));
    const double ratio = m.max_deviation / scale;
    required = std::max(required, ratio);
    if (m.ambiguous) ++ambiguous;
    rep.observe(ratio - tol_factor, x);
  }
  rep.metrics = {{"required_tol_factor", required}, {"ambiguous", ambiguous}, {"skipped_non_unique", skipped}};
  if (ambiguous > 0) {
    rep.status = Status::Inconclusive;
    rep.notes.push_back("cluster matching ambiguous at some points");
  } else {
    rep.status = required <= tol_factor ? Status::Pass : Status::Fail;
  }
  rep.elapsed_ms = elapsed_ms(t0);
  return rep;
}

CheckReport hessian_expansion_stability(const ManifoldSpec& e, const Profile1D& g, double d0, int levels,
                                        int samples, double tol_factor, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckReport rep;
  rep.check = "hessian_expansion_stability";
  rep.params = {{"manifold", e.name()}, {"n", e.n}, {"k", e.k}, {"profile", g.name}, {"d0", d0},
                {"levels", levels}, {"samples", samples}};
  rep.seed = seed;
  rep.tolerances["tol_factor"] = tol_factor;
  rep.tolerances["monotone_rel_slack"] = 1e-3;
  rep.tolerances["monotone_abs_slack"] = 1e-4;
  Json per_level = Json::array();
  Vec factors;
  bool inconclusive = false, exceeded = false;
  for (int j = 0; j < levels; ++j) {
    const double d = d0 / std::pow(2.0, j);
    const CheckReport r = hessian_expansion_check(e, g, tube_points(e, d, samples, seed), tol_factor);
    const double tf = r.metrics["required_tol_factor"].get<double>();
    factors.push_back(tf);
    per_level.push_back({{"d", d}, {"required_tol_factor", tf}, {"status", std::string(to_string(r.status))}});
    inconclusive = inconclusive || r.status == Status::Inconclusive;
    exceeded = exceeded || r.status == Status::Fail;
  }
  bool monotone = true;
  for (std::size_t j = 1; j < factors.size(); ++j) {
    const double excess = factors[j] - (factors[j - 1] * (1.0 + 1e-3) + 1e-4);
    rep.observe(excess, {d0 / std::pow(2.0, static_cast<double>(j))});
    if (excess > 0.0) monotone = false;
  }
  rep.metrics = {{"levels", per_level}, {"nonincreasing", monotone}};
  if (inconclusive) rep.status = Status::Inconclusive;
  else rep.status = monotone && !exceeded ? Status::Pass : Status::Fail;
  rep.elapsed_ms = elapsed_ms(t0);
  return rep;
}

Vec normal_coordinates(const ManifoldSpec& e, const Vec& x) {
  require(static_cast<int>(x.size()) == e.n, ErrorKind::Input, "point dimension does not match manifold");
  switch (e.kind) {
    case ManifoldSpec::Kind::PointSet: {
      require(e.points.size() == 1, ErrorKind::Input, "normal coordinates need a single point");
      Vec phi(x);
      for (int i = 0; i < e.n; ++i) phi[i] -= e.points[0][i];
      return phi;
    }
    case ManifoldSpec::Kind::Sphere: {
      Vec r(x);
      for (int i = 0; i < e.n; ++i) r[i] -= e.center[i];
      const double nr = norm(r);
      if (nr == 0.0 || std::abs(nr - e.radius) >= e.radius)
        fail(ErrorKind::Domain, "point outside the tubular neighbourhood of the sphere");
      return {nr - e.radius};
    }
    case ManifoldSpec::Kind::Circle: {
      Vec r(x);
      for (int i = 0; i < 3; ++i) r[i] -= e.center[i];
      const double a = dot(r, e.basis[0]), b = dot(r, e.basis[1]);
      const double rho = std::hypot(a, b);
      const Vec w = cross3(e.basis[0], e.basis[1]);
      const Vec phi{rho - e.radius, dot(r, w)};
      if (rho == 0.0 || norm(phi) >= e.radius)
        fail(ErrorKind::Domain, "point outside the tubular neighbourhood of the circle");
      return phi;
    }
    case ManifoldSpec::Kind::AffineSlice: {
      Vec r(x);
      for (int i = 0; i < e.n; ++i) r[i] -= e.center[i];
      if (e.radius > 0.0) {
        double t2 = 0.0;
        for (const Vec& t : e.basis) t2 += dot(r, t) * dot(r, t);
        if (std::sqrt(t2) > e.radius) fail(ErrorKind::Domain, "point projects outside the affine patch");
      }
      Vec phi;
      for (const Vec& m : complement(e.basis, e.n)) phi.push_back(dot(r, m));
      return phi;
    }
    case ManifoldSpec::Kind::Curve:
      break;
  }
  fail(ErrorKind::Input, "no explicit normal coordinates for this manifold");
}

CheckReport local_coordinates_check(const ManifoldSpec& e, const Vec& x) {
  CheckReport rep;
  rep.check = "local_coordinates";
  rep.params = {{"manifold", e.name()}, {"n", e.n}, {"k", e.k}, {"x", x}};
  rep.tolerances["distance_abs"] = 1e-10;
  rep.tolerances["jacobian_abs"] = 1e-6;
  const Vec phi = normal_coordinates(e, x);
  const double d_phi = norm(phi);
  const double d = dist(e, x);
  const double err_d = std::abs(d_phi - d);
  rep.observe(err_d - 1e-10, x);

  // phi vanishes at the foot point and its Jacobian there is an orthonormal
  // set of normals.
  const FootPoint fp = nearest_point(e, x);
  double err_zero = 0.0, err_jac = 0.0;
  if (fp.nearest) {
    const Vec& y = *fp.nearest;
    err_zero = norm(normal_coordinates(e, y));
    const double h = 1e-6;
    const int m = static_cast<int>(phi.size());
    std::vector<Vec> jac(m, Vec(e.n));
    for (int j = 0; j < e.n; ++j) {
      Vec yp(y), ym(y);
      yp[j] += h;
      ym[j] -= h;
      const Vec a = normal_coordinates(e, yp), b = normal_coordinates(e, ym);
      for (int q = 0; q < m; ++q) jac[q][j] = (a[q] - b[q]) / (2 * h);
    }
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q) err_jac = std::max(err_jac, std::abs(dot(jac[p], jac[q]) - (p == q ? 1.0 : 0.0)));
  }
  rep.metrics = {{"phi", phi}, {"distance", d}, {"distance_from_phi", d_phi}, {"abs_error", err_d},
                 {"phi_at_foot", err_zero}, {"jacobian_orthonormality_error", err_jac}};
  rep.status = err_d <= 1e-10 && err_zero <= 1e-10 && err_jac <= 1e-6 ? Status::Pass : Status::Fail;
  return rep;
}

namespace {

void require_aligned(const ManifoldSpec& e) {
  const int n = e.n, k = e.k;
  require(dist(e, Vec(n, 0.0)) <= 1e-12, ErrorKind::Input, "sandwich check needs 0 in E");
  const double t = 1e-3;
  for (int j = 0; j < n; ++j) {
    Vec x(n, 0.0);
    x[j] = t;
    const double d = dist(e, x);
    if (j >= n - k) require(d <= 0.01 * t, ErrorKind::Input, "tangent space at 0 must be spanned by the last k axes");
    else require(d >= 0.99 * t, ErrorKind::Input, "normal space at 0 must be spanned by the first n-k axes");
  }
}

}  // namespace

SandwichFit sandwich_fit(const ManifoldSpec& e, const std::vector<Vec>& points, double alpha) {
  const int n = e.n, m = n - e.k;
  const double p = alpha > 0.0 ? 1.0 + alpha : 1.0;
  SandwichFit fit;
  double max_xp = 0.0;
  for (const Vec& x : points) {
    double a2 = 0.0, b2 = 0.0;
    for (int i = 0; i < m; ++i) a2 += x[i] * x[i];
    for (int i = m; i < n; ++i) b2 += x[i] * x[i];
    const double xp = std::sqrt(a2), x2 = a2 + b2;
    const double d = dist(e, x);
    max_xp = std::max(max_xp, xp);
    const double dp = std::pow(d, p), xpp = std::pow(xp, p);
    auto need = [&](double excess, double denom) {
      // Smallest C with excess <= C * denom.
      if (excess <= 0.0) return;
      if (denom <= 0.0) {
        fit.finite = false;
        return;
      }
      fit.c = std::max(fit.c, excess / denom);
    };
    need(0.75 * xpp - dp, b2);
    need(dp - 1.25 * xpp, b2);
    if (alpha <= 0.0) {
      need(xp - d, x2);
      need(d - xp, x2);
    }
  }
  if (alpha <= 0.0) fit.chain_ok = fit.c * max_xp <= 0.25;
  return fit;
}

ManifoldSpec tangent_circle(double radius) {
  return ManifoldSpec::circle({-radius, 0.0, 0.0}, radius, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0});
}

CheckReport sandwich_check(const ManifoldSpec& e, double tube_radius, int samples, double alpha,
                           std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  require_aligned(e);
  CheckReport rep;
  rep.check = alpha > 0.0 ? "sandwich_power" : "sandwich";
  rep.params = {{"manifold", e.name()}, {"n", e.n}, {"k", e.k}, {"tube_radius", tube_radius},
                {"samples", samples}, {"alpha", alpha > 0.0 ? Json(alpha) : Json(nullptr)}};
  rep.seed = seed;
  rep.tolerances["stability_factor"] = 1.1;
  // Unit-ball template, rescaled to each tube so the samples are nested.
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec> unit;
  for (int i = 0; i < samples; ++i) {
    const Vec dir = random_unit(e.n, rng);
    const double r = std::pow(u(rng), 1.0 / e.n);
    Vec x(dir);
    for (double& t : x) t *= r;
    unit.push_back(x);
  }
  for (int j = 0; j < e.n; ++j)
    for (double s : {-1.0, -0.5, 0.5, 1.0}) {
      Vec x(e.n, 0.0);
      x[j] = s;
      unit.push_back(x);
    }
  Json levels = Json::array();
  Vec cs;
  bool finite = true, chain = true;
  for (int lv = 0; lv < 3; ++lv) {
    const double r = tube_radius / std::pow(2.0, lv);
    std::vector<Vec> pts;
    for (const Vec& x : unit) {
      Vec y(x);
      for (double& t : y) t *= r;
      pts.push_back(y);
    }
    const SandwichFit fit = sandwich_fit(e, pts, alpha);
    finite = finite && fit.finite;
    chain = chain && fit.chain_ok;
    cs.push_back(fit.c);
    levels.push_back({{"tube_radius", r}, {"C", fit.c}, {"finite", fit.finite}, {"chain_ok", fit.chain_ok}});
  }
  bool stable = true;
  for (std::size_t j = 1; j < cs.size(); ++j) {
    const double excess = cs[j] - (1.1 * cs[0] + 1e-9);
    rep.observe(excess, {});
    if (excess > 0.0) stable = false;
  }
  rep.metrics = {{"levels", levels}, {"C", cs.front()}, {"stable", stable}};
  rep.status = finite && chain && stable ? Status::Pass : Status::Fail;
  rep.elapsed_ms = elapsed_ms(t0);
  return rep;
}

}  // namespace degenlab
