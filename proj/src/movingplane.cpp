#include "degenlab/movingplane.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec unit(const Vec& d) {
  const double nd = norm(d);
  require(nd > 0.0, ErrorKind::Input, "direction must be nonzero");
  Vec e = d;
  for (double& v : e) v /= nd;
  return e;
}

// Multilinear interpolation at y; false when a corner with nonzero weight is
// inactive. Coordinates within 1e-9 of a node snap to it.
bool interpolate(const SolutionSample& u, const Vec& y, double& value, double& scale) {
  const Grid& g = u.grid;
  const int n = g.dim();
  std::vector<int> base(n);
  Vec frac(n);
  for (int i = 0; i < n; ++i) {
    const double t = (y[i] - g.lower()[i]) / g.h();
    const double r = std::round(t);
    int k;
    double f;
    if (std::abs(t - r) < 1e-9) {
      k = static_cast<int>(r);
      f = 0.0;
    } else {
      k = static_cast<int>(std::floor(t));
      f = t - k;
    }
    if (k >= g.counts()[i] - 1 && f == 0.0) k = g.counts()[i] - 1;
    if (k < 0 || k >= g.counts()[i] || (f > 0.0 && k + 1 >= g.counts()[i])) return false;
    base[i] = k;
    frac[i] = f;
  }
  value = 0.0;
  scale = 0.0;
  for (int c = 0; c < (1 << n); ++c) {
    double w = 1.0;
    std::vector<int> mi = base;
    for (int i = 0; i < n; ++i) {
      if (c & (1 << i)) {
        w *= frac[i];
        mi[i] += 1;
      } else {
        w *= 1.0 - frac[i];
      }
    }
    if (w == 0.0) continue;
    const std::size_t j = g.flat_index(mi);
    if (!g.active(j)) return false;
    value += w * u.values[j];
    scale = std::max(scale, u.hess_scale[j]);
  }
  return true;
}

}  // namespace

SolutionSample SolutionSample::from_field(const ScalarField& f, double h, double puncture) {
  const int n = f.dim;
  require(n >= 1 && n <= 3, ErrorKind::Input, "moving plane samples support n = 1, 2, 3");
  require(h > 0.0 && h <= 0.25, ErrorKind::Input, "grid spacing must lie in (0, 1/4]");
  SolutionSample s;
  s.name = f.name;
  s.grid = Grid(Vec(n, -1.0), Vec(n, 1.0), h);
  s.puncture = puncture >= 0.0 ? puncture : 3.0 * h;
  Grid& g = s.grid;
  s.values.assign(g.size(), 0.0);
  s.in_ball.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    const double r = norm(x);
    s.in_ball[i] = r < 1.0 - 1e-12;
    if (r <= s.puncture) {
      g.set_active(i, false);
      continue;
    }
    double v = std::numeric_limits<double>::quiet_NaN();
    try {
      v = f(x);
    } catch (const Error&) {
    }
    if (!std::isfinite(v)) {
      g.set_active(i, false);
      continue;
    }
    s.values[i] = v;
  }
  s.hess_scale.assign(g.size(), 0.0);
  std::vector<char> have(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    bool ok = true;
    double m = 0.0;
    for (int a = 0; a < n && ok; ++a) {
      const auto p = g.neighbor(i, a, 1), q = g.neighbor(i, a, -1);
      if (!p || !q || !g.active(*p) || !g.active(*q)) {
        ok = false;
        break;
      }
      m = std::max(m, std::abs(s.values[*p] - 2.0 * s.values[i] + s.values[*q]) / (h * h));
    }
    if (ok) {
      s.hess_scale[i] = m;
      have[i] = 1;
    }
  }
  // Nodes without a full stencil borrow the largest neighbouring scale.
  const Vec own = s.hess_scale;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i) || have[i]) continue;
    double m = 0.0;
    for (int a = 0; a < n; ++a)
      for (int st : {-1, 1})
        if (const auto p = g.neighbor(i, a, st); p && have[*p]) m = std::max(m, own[*p]);
    s.hess_scale[i] = m;
  }
  return s;
}

double SolutionSample::boundary_max_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.active(i) && std::abs(norm(grid.point(i)) - 1.0) <= 0.5 * grid.h()) m = std::max(m, std::abs(values[i]));
  return m;
}

double SolutionSample::interior_min() const {
  double m = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid.active(i) && norm(grid.point(i)) < 1.0 - grid.h()) m = std::min(m, values[i]);
  return m;
}

Reflection reflect_and_diff(const SolutionSample& u, double lambda, const Vec& direction) {
  const int n = u.dim();
  require(static_cast<int>(direction.size()) == n, ErrorKind::Input, "direction has the wrong dimension");
  require(lambda >= 0.0 && lambda < 1.0, ErrorKind::Input, "lambda must lie in [0, 1)");
  Reflection r;
  r.direction = unit(direction);
  r.lambda = lambda;
  const Vec& e = r.direction;
  const double h = u.h();
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    if (!u.grid.active(i) || !u.in_ball[i]) continue;
    const Vec x = u.grid.point(i);
    const double s = dot(x, e) - lambda;
    if (s <= 1e-12) continue;
    Vec y = x;
    for (int a = 0; a < n; ++a) y[a] -= 2.0 * s * e[a];
    double v = 0.0, scale = 0.0;
    if (norm(y) <= u.puncture || !interpolate(u, y, v, scale)) {
      ++r.masked;
      continue;
    }
    r.nodes.push_back(i);
    r.w.push_back(v - u.values[i]);
    r.tol.push_back(5.0 * h * h * std::max(scale, u.hess_scale[i]) + 1e-12 * (1.0 + std::abs(u.values[i])));
  }
  return r;
}

Vec default_lambdas(double h) {
  Vec l;
  for (int j = 1; j * h < 1.0 - 0.5 * h; ++j) l.push_back(j * h);
  return l;
}

PlaneScan lambda_bar_scan(const SolutionSample& u, const Vec& direction, const Vec& lambdas) {
  PlaneScan s;
  s.direction = unit(direction);
  s.lambdas = lambdas.empty() ? default_lambdas(u.h()) : lambdas;
  for (std::size_t i = 0; i < s.lambdas.size(); ++i) {
    require(s.lambdas[i] > 0.0 && s.lambdas[i] < 1.0, ErrorKind::Input, "lambdas must lie in (0, 1)");
    if (i > 0) require(s.lambdas[i] > s.lambdas[i - 1], ErrorKind::Input, "lambdas must increase");
  }
  for (double lam : s.lambdas) {
    const Reflection r = reflect_and_diff(u, lam, s.direction);
    double mw = 0.0, mm = 0.0;
    for (std::size_t k = 0; k < r.w.size(); ++k) {
      mw = k == 0 ? r.w[k] : std::min(mw, r.w[k]);
      mm = k == 0 ? r.w[k] + r.tol[k] : std::min(mm, r.w[k] + r.tol[k]);
    }
    s.min_w.push_back(mw);
    s.min_margin.push_back(mm);
  }
  for (std::size_t i = s.lambdas.size(); i-- > 0;)
    if (s.min_margin[i] < 0.0) {
      s.lambda_bar = s.lambdas[i];
      break;
    }
  return s;
}

CheckReport monotonicity_check(const SolutionSample& u, const Vec& direction) {
  const int n = u.dim();
  const Vec e = unit(direction);
  require(static_cast<int>(e.size()) == n, ErrorKind::Input, "direction has the wrong dimension");
  const Grid& g = u.grid;
  const double h = g.h();
  CheckReport rep;
  rep.check = "monotonicity";
  rep.params = {{"field", u.name}, {"direction", e}};
  rep.grid = g.info();
  std::size_t tested = 0, skipped = 0, violations = 0;
  double dmax = -kInf, rmin = kInf, rmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i) || !u.in_ball[i]) continue;
    const Vec x = g.point(i);
    if (dot(x, e) <= 2.0 * h) continue;
    double d = 0.0;
    bool ok = true;
    for (int a = 0; a < n && ok; ++a) {
      if (std::abs(e[a]) < 1e-15) continue;
      const auto p = g.neighbor(i, a, 1), q = g.neighbor(i, a, -1);
      if (!p || !q || !g.active(*p) || !g.active(*q)) {
        ok = false;
        break;
      }
      d += e[a] * (u.values[*p] - u.values[*q]) / (2.0 * h);
    }
    if (!ok) {
      ++skipped;
      continue;
    }
    ++tested;
    const double tol = 5.0 * h * h * u.hess_scale[i] + 1e-12;
    dmax = std::max(dmax, d);
    if (d > tol) {
      ++violations;
      const double r = norm(x);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      rep.observe(d - tol, x);
    } else {
      rep.observe(d - tol, {});
    }
  }
  rep.tolerances["derivative"] = 5.0 * h * h;
  rep.notes.push_back("derivative tolerance is 5 h^2 times the local second-difference scale");
  rep.metrics["tested_nodes"] = tested;
  rep.metrics["skipped_nodes"] = skipped;
  rep.metrics["violations"] = violations;
  rep.metrics["max_derivative"] = tested ? dmax : 0.0;
  if (violations) {
    rep.metrics["violation_r_min"] = rmin;
    rep.metrics["violation_r_max"] = rmax;
  }
  rep.status = tested == 0 ? Status::Inconclusive : (violations ? Status::Fail : Status::Pass);
  return rep;
}

std::vector<Vec> scan_directions(int n, int random_dirs, std::uint64_t seed) {
  std::vector<Vec> out;
  if (n == 1) return {{1.0}, {-1.0}};
  if (n == 2) {
    for (int k = 0; k < 16; ++k) {
      const double t = 2.0 * std::numbers::pi * k / 16;
      out.push_back({std::cos(t), std::sin(t)});
    }
    return out;
  }
  require(n == 3, ErrorKind::Input, "scan directions support n = 1, 2, 3");
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int c = -1; c <= 1; ++c)
        if (a || b || c) out.push_back(unit({double(a), double(b), double(c)}));
  Rng rng(seed);
  std::normal_distribution<double> nd;
  for (int k = 0; k < random_dirs; ++k) {
    Vec d{nd(rng), nd(rng), nd(rng)};
    d = unit(d);
    out.push_back(d);
    out.push_back({-d[0], -d[1], -d[2]});
  }
  return out;
}

CheckReport radial_symmetry_report(const SolutionSample& u, const std::vector<Vec>& directions, const Vec& lambdas) {
  require(!directions.empty(), ErrorKind::Input, "no scan directions");
  const Grid& g = u.grid;
  const double h = g.h();
  CheckReport rep;
  rep.check = "radial_symmetry";
  rep.params = {{"field", u.name}, {"directions", directions.size()}};
  rep.grid = g.info();

  double lbar_max = 0.0;
  Vec lbar_at;
  bool monotone = true;
  std::size_t mono_viol = 0;
  Json bars = Json::array();
  for (const Vec& d : directions) {
    const PlaneScan s = lambda_bar_scan(u, d, lambdas);
    bars.push_back(s.lambda_bar);
    if (s.lambda_bar > lbar_max) {
      lbar_max = s.lambda_bar;
      lbar_at = s.direction;
    }
    const CheckReport m = monotonicity_check(u, d);
    if (m.status != Status::Pass) monotone = false;
    mono_viol += m.metrics["violations"].get<std::size_t>();
  }

  // Spread of u over nodes at exactly equal radius.
  std::map<long, std::pair<double, double>> shells;
  double umax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i) || !u.in_ball[i]) continue;
    const auto mi = g.multi_index(i);
    long key = 0;
    for (int a = 0; a < g.dim(); ++a) {
      const long c = 2L * mi[a] - (g.counts()[a] - 1);
      key += c * c;
    }
    const double v = u.values[i];
    umax = std::max(umax, std::abs(v));
    auto [it, fresh] = shells.try_emplace(key, v, v);
    if (!fresh) {
      it->second.first = std::min(it->second.first, v);
      it->second.second = std::max(it->second.second, v);
    }
  }
  double spread = 0.0;
  for (const auto& [k, mm] : shells) spread = std::max(spread, mm.second - mm.first);
  const double shell_tol = 1e-10 * (1.0 + umax);
  const double lambda_tol = 2.0 * h;

  std::string cls;
  if (spread > shell_tol) cls = "ASYMMETRIC";
  else if (lbar_max <= lambda_tol && monotone) cls = "SYMMETRIC+MONOTONE";
  else cls = "SYMMETRIC+NONMONOTONE";

  rep.metrics["classification"] = cls;
  rep.metrics["lambda_bar_max"] = lbar_max;
  if (!lbar_at.empty()) rep.metrics["lambda_bar_direction"] = lbar_at;
  rep.metrics["lambda_bars"] = bars;
  rep.metrics["monotone"] = monotone;
  rep.metrics["monotonicity_violations"] = mono_viol;
  rep.metrics["shell_spread"] = spread;
  rep.metrics["shells"] = shells.size();
  rep.metrics["boundary_max_abs"] = u.boundary_max_abs();
  rep.metrics["interior_min"] = u.interior_min();
  rep.tolerances = {{"lambda_bar", lambda_tol}, {"shell_spread", shell_tol}, {"w_lambda_factor", 5.0 * h * h}};
  rep.worst_violation = std::max(lbar_max - lambda_tol, spread - shell_tol);
  if (!lbar_at.empty()) rep.witness = lbar_at;
  if (!(u.interior_min() > 0.0)) rep.notes.push_back("sample is not positive inside the ball");
  rep.notes.push_back("classification of the sample, not a certificate for the underlying function");
  rep.status = cls == "SYMMETRIC+MONOTONE" ? Status::Pass : Status::Fail;
  return rep;
}

void write_scan_csv(std::ostream& os, const PlaneScan& s) {
  os << "lambda,min_w,min_margin\n" << std::setprecision(17);
  for (std::size_t i = 0; i < s.lambdas.size(); ++i)
    os << s.lambdas[i] << ',' << s.min_w[i] << ',' << s.min_margin[i] << '\n';
}

}  // namespace degenlab
