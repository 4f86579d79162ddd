#include "degenlab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vec axpy(const Vec& x, double s, const Vec& d) {
  Vec r(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += s * d[i];
  return r;
}

constexpr int kCurveSamples = 2048;

}  // namespace

ManifoldSpec ManifoldSpec::point(const Vec& p) { return point_set({p}); }

ManifoldSpec ManifoldSpec::point_set(const std::vector<Vec>& pts) {
  require(!pts.empty(), ErrorKind::Input, "point set must be nonempty");
  ManifoldSpec e;
  e.kind = Kind::PointSet;
  e.n = static_cast<int>(pts[0].size());
  e.k = 0;
  e.points = pts;
  return e;
}

ManifoldSpec ManifoldSpec::sphere(const Vec& c, double r) {
  require(r > 0.0, ErrorKind::Input, "sphere radius must be positive");
  ManifoldSpec e;
  e.kind = Kind::Sphere;
  e.n = static_cast<int>(c.size());
  e.k = e.n - 1;
  e.center = c;
  e.radius = r;
  return e;
}

ManifoldSpec ManifoldSpec::circle(const Vec& c, double r, const Vec& u, const Vec& v) {
  require(c.size() == 3 && u.size() == 3 && v.size() == 3, ErrorKind::Input, "circle lives in R^3");
  require(r > 0.0, ErrorKind::Input, "circle radius must be positive");
  require(is_orthonormal({u, v}), ErrorKind::Input, "circle plane vectors must be orthonormal");
  ManifoldSpec e;
  e.kind = Kind::Circle;
  e.n = 3;
  e.k = 1;
  e.center = c;
  e.radius = r;
  e.basis = {u, v};
  return e;
}

ManifoldSpec ManifoldSpec::affine(const Vec& origin, const std::vector<Vec>& tangent, double patch) {
  require(is_orthonormal(tangent), ErrorKind::Input, "affine slice basis must be orthonormal");
  ManifoldSpec e;
  e.kind = Kind::AffineSlice;
  e.n = static_cast<int>(origin.size());
  e.k = static_cast<int>(tangent.size());
  e.center = origin;
  e.basis = tangent;
  e.radius = patch;
  return e;
}

ManifoldSpec ManifoldSpec::parametric(int n, std::function<Vec(double)> c, bool closed) {
  ManifoldSpec e;
  e.kind = Kind::Curve;
  e.n = n;
  e.k = 1;
  e.curve = std::move(c);
  e.closed = closed;
  return e;
}

std::string ManifoldSpec::name() const {
  switch (kind) {
    case Kind::PointSet: return points.size() == 1 ? "point" : "point_set";
    case Kind::Sphere: return "sphere";
    case Kind::Circle: return "circle";
    case Kind::AffineSlice: return "affine";
    case Kind::Curve: return "curve";
  }
  return "unknown";
}

namespace {

FootPoint curve_foot(const ManifoldSpec& e, const Vec& x) {
  const int m = kCurveSamples;
  const double span = e.closed ? 1.0 : 1.0 / (m - 1);
  auto param = [&](int i) { return e.closed ? static_cast<double>(i) / m : i * span; };
  std::vector<double> d2(m);
  for (int i = 0; i < m; ++i) {
    const Vec r = sub(e.curve(param(i)), x);
    d2[i] = dot(r, r);
  }
  // Candidate local minima of the sampled distance.
  std::vector<int> cands;
  for (int i = 0; i < m; ++i) {
    const int ip = e.closed ? (i + 1) % m : std::min(i + 1, m - 1);
    const int im = e.closed ? (i + m - 1) % m : std::max(i - 1, 0);
    if (d2[i] <= d2[ip] && d2[i] <= d2[im]) cands.push_back(i);
  }
  const double fd = 1e-5;
  auto polish = [&](double t) {
    for (int it = 0; it < 5; ++it) {
      const Vec c0 = e.curve(t);
      const Vec cp = e.curve(t + fd);
      const Vec cm = e.curve(t - fd);
      Vec d1(c0.size()), dd(c0.size());
      for (std::size_t j = 0; j < c0.size(); ++j) {
        d1[j] = (cp[j] - cm[j]) / (2 * fd);
        dd[j] = (cp[j] - 2 * c0[j] + cm[j]) / (fd * fd);
      }
      const Vec r = sub(c0, x);
      const double g = dot(r, d1);
      const double hh = dot(d1, d1) + dot(r, dd);
      if (hh <= 0.0) break;
      double step = g / hh;
      step = std::clamp(step, -2.0 / m, 2.0 / m);
      t -= step;
      if (!e.closed) t = std::clamp(t, 0.0, 1.0);
    }
    return t;
  };
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  Vec best_pt;
  double best_t = 0.0;
  for (int i : cands) {
    const double t = polish(param(i));
    const Vec p = e.curve(t);
    const double d = norm(sub(p, x));
    if (d < best) {
      // Same minimum reached from a neighbouring sample is not a tie.
      if (std::abs(t - best_t) > 4.0 / m || best_pt.empty()) second = best;
      best = d;
      best_pt = p;
      best_t = t;
    } else if (d < second && std::abs(t - best_t) > 4.0 / m) {
      second = d;
    }
  }
  FootPoint fp;
  fp.distance = best;
  if (!(second - best <= 1e-9 * (1.0 + best))) fp.nearest = best_pt;
  return fp;
}

}  // namespace

FootPoint nearest_point(const ManifoldSpec& e, const Vec& x) {
  require(static_cast<int>(x.size()) == e.n, ErrorKind::Input, "point dimension does not match manifold");
  FootPoint fp;
  switch (e.kind) {
    case ManifoldSpec::Kind::PointSet: {
      double best = std::numeric_limits<double>::infinity(), second = best;
      const Vec* arg = nullptr;
      for (const Vec& p : e.points) {
        const double d = norm(sub(x, p));
        if (d < best) {
          second = best;
          best = d;
          arg = &p;
        } else if (d < second) {
          second = d;
        }
      }
      fp.distance = best;
      if (second - best > 1e-12) fp.nearest = *arg;
      return fp;
    }
    case ManifoldSpec::Kind::Sphere: {
      const Vec r = sub(x, e.center);
      const double nr = norm(r);
      fp.distance = std::abs(nr - e.radius);
      if (nr > 0.0) fp.nearest = axpy(e.center, e.radius / nr, r);
      return fp;
    }
    case ManifoldSpec::Kind::Circle: {
      const Vec r = sub(x, e.center);
      const double a = dot(r, e.basis[0]);
      const double b = dot(r, e.basis[1]);
      const double rho = std::hypot(a, b);
      const double z2 = std::max(0.0, dot(r, r) - a * a - b * b);
      fp.distance = std::sqrt((rho - e.radius) * (rho - e.radius) + z2);
      if (rho > 0.0) {
        Vec p = e.center;
        for (int i = 0; i < 3; ++i) p[i] += e.radius * (a * e.basis[0][i] + b * e.basis[1][i]) / rho;
        fp.nearest = p;
      }
      return fp;
    }
    case ManifoldSpec::Kind::AffineSlice: {
      const Vec r = sub(x, e.center);
      Vec t(e.k);
      Vec proj(e.n, 0.0);
      for (int j = 0; j < e.k; ++j) {
        t[j] = dot(r, e.basis[j]);
        for (int i = 0; i < e.n; ++i) proj[i] += t[j] * e.basis[j][i];
      }
      const Vec normal = sub(r, proj);
      const double dn = norm(normal);
      const double tn = norm(t);
      if (e.radius > 0.0 && tn > e.radius) {
        fp.distance = std::hypot(dn, tn - e.radius);
        fp.nearest = axpy(e.center, e.radius / tn, proj);
      } else {
        fp.distance = dn;
        Vec p = e.center;
        for (int i = 0; i < e.n; ++i) p[i] += proj[i];
        fp.nearest = p;
      }
      return fp;
    }
    case ManifoldSpec::Kind::Curve:
      return curve_foot(e, x);
  }
  fail(ErrorKind::Internal, "unknown manifold kind");
}

double dist(const ManifoldSpec& e, const Vec& x) {
  switch (e.kind) {
    case ManifoldSpec::Kind::PointSet: {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& p : e.points) best = std::min(best, norm(sub(x, p)));
      return best;
    }
    default:
      return nearest_point(e, x).distance;
  }
}

}  // namespace degenlab
