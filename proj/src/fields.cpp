#include "degenlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

constexpr double kPi = std::numbers::pi;

double sqnorm(const Vec& x) { return dot(x, x); }

double param(const Json& p, const char* key, double fallback) {
  return p.contains(key) ? p.at(key).get<double>() : fallback;
}

int iparam(const Json& p, const char* key, int fallback) {
  return p.contains(key) ? p.at(key).get<int>() : fallback;
}

}  // namespace

double ScalarField::dist_to_singular(const Vec& x) const {
  return singular ? dist(*singular, x) : std::numeric_limits<double>::infinity();
}

double default_fd_step1(const Vec& x) { return std::max(1e-5, 1e-4 * norm(x)); }
double default_fd_step2(const Vec& x) { return std::max(1e-4, 1e-3 * norm(x)); }

Vec fd_gradient(const ScalarField& f, const Vec& x, double h) {
  require(h > 0.0, ErrorKind::Input, "fd step must be positive");
  if (f.dist_to_singular(x) <= h) fail(ErrorKind::Stencil, "gradient stencil touches the singular set");
  const int n = f.dim;
  Vec g(n);
  Vec y = x;
  for (int i = 0; i < n; ++i) {
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

SymMat fd_hessian(const ScalarField& f, const Vec& x, double h) {
  require(h > 0.0, ErrorKind::Input, "fd step must be positive");
  const int n = f.dim;
  if (f.dist_to_singular(x) <= (n > 1 ? std::sqrt(2.0) : 1.0) * h)
    fail(ErrorKind::Stencil, "Hessian stencil touches the singular set");
  SymMat hm(n);
  const double f0 = f(x);
  Vec y = x;
  for (int i = 0; i < n; ++i) {
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    hm(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      double s = 0.0;
      for (int si : {1, -1})
        for (int sj : {1, -1}) {
          y[i] = x[i] + si * h;
          y[j] = x[j] + sj * h;
          s += si * sj * f(y);
        }
      y[i] = x[i];
      y[j] = x[j];
      // Packed storage is symmetric by construction, so this is the average of both orders.
      hm(i, j) = s / (4.0 * h * h);
    }
  return hm;
}

Vec fd_gradient(const ScalarField& f, const Vec& x) { return fd_gradient(f, x, default_fd_step1(x)); }
SymMat fd_hessian(const ScalarField& f, const Vec& x) { return fd_hessian(f, x, default_fd_step2(x)); }

Vec gradient(const ScalarField& f, const Vec& x) { return f.has_grad() ? f.grad(x) : fd_gradient(f, x); }
SymMat hessian(const ScalarField& f, const Vec& x) { return f.has_hess() ? f.hess(x) : fd_hessian(f, x); }

RadialEigs radial_hessian_eigs(const RadialProfile& p, double r, int n) {
  require(r > 0.0, ErrorKind::Domain, "radial eigenvalues need r > 0");
  require(n >= 1, ErrorKind::Input, "dimension must be positive");
  RadialEigs out;
  for (double b : p.breakpoints)
    if (std::abs(r - b) <= 1e-14 * std::max(1.0, b)) out.at_breakpoint = true;
  out.values.push_back(p.d2(r));
  const double t = p.d1(r) / r;
  for (int i = 1; i < n; ++i) out.values.push_back(t);
  std::sort(out.values.begin(), out.values.end());
  return out;
}

ScalarField radial_field(const RadialProfile& p, int n) {
  ScalarField f;
  f.name = p.name;
  f.dim = n;
  f.singular = ManifoldSpec::origin(n);
  f.eval = [p](const Vec& x) { return p.value(norm(x)); };
  f.grad = [p](const Vec& x) {
    const double r = norm(x);
    if (r == 0.0) fail(ErrorKind::Singularity, "radial gradient at the origin");
    Vec g(x);
    const double s = p.d1(r) / r;
    for (double& v : g) v *= s;
    return g;
  };
  f.hess = [p, n](const Vec& x) {
    const double r = norm(x);
    if (r == 0.0) fail(ErrorKind::Singularity, "radial Hessian at the origin");
    const double a = p.d2(r);
    const double b = p.d1(r) / r;
    SymMat h(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) {
        const double xx = x[i] * x[j] / (r * r);
        h(i, j) = (a - b) * xx + (i == j ? b : 0.0);
      }
    return h;
  };
  return f;
}

RadialProfile power_profile(double alpha) {
  RadialProfile p;
  p.name = "pow_alpha";
  p.value = [alpha](double r) { return std::pow(r, alpha); };
  p.d1 = [alpha](double r) { return alpha * std::pow(r, alpha - 1.0); };
  p.d2 = [alpha](double r) { return alpha * (alpha - 1.0) * std::pow(r, alpha - 2.0); };
  return p;
}

namespace {

// Outer-branch term (r^(2-n) - 1)/(n-2), continued by -log r at n = 2.
double outer_kernel(int n, double r) {
  return n == 2 ? -std::log(r) : (std::pow(r, 2.0 - n) - 1.0) / (n - 2.0);
}

}  // namespace

RadialProfile pucci_profile(int n, double alpha) {
  require(n >= 2, ErrorKind::Input, "pucci profile needs n >= 2");
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Input, "pucci profile needs alpha in (0,1)");
  const double c = alpha * (2.0 - alpha) / n;
  const double top = (2.0 - alpha) / 2.0 * (1.0 + alpha / n);
  RadialProfile p;
  p.name = "pucci_radial";
  p.breakpoints = {1.0};
  p.value = [=](double r) {
    if (r <= 1.0) return std::pow(r, alpha) - 0.5 * alpha * r * r;
    return -c * (0.5 * r * r + outer_kernel(n, r)) + top;
  };
  p.d1 = [=](double r) {
    if (r <= 1.0) return alpha * std::pow(r, alpha - 1.0) - alpha * r;
    return -c * (r - std::pow(r, 1.0 - n));
  };
  p.d2 = [=](double r) {
    if (r <= 1.0) return -alpha * (1.0 - alpha) * std::pow(r, alpha - 2.0) - alpha;
    return -c * (1.0 + (n - 1.0) * std::pow(r, -static_cast<double>(n)));
  };
  p.root = pucci_root(n, alpha);
  return p;
}

double pucci_root(int n, double alpha) {
  const double c = alpha * (2.0 - alpha) / n;
  const double top = (2.0 - alpha) / 2.0 * (1.0 + alpha / n);
  auto u = [&](double r) { return -c * (0.5 * r * r + outer_kernel(n, r)) + top; };
  double lo = 1.0, hi = 2.0;
  while (u(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (u(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::string> builtin_names() {
  return {"pow_alpha", "pucci_radial", "step_e1",    "example4_1d", "example5_sin",
          "appD_pow",  "appD_split",   "max_coords", "neg_log",     "fundamental",
          "quadratic", "paraboloid",   "harmonic_poly", "trig",        "newton",
          "ring_potential"};
}

namespace {

ScalarField from_profile(RadialProfile p, int n, const std::string& name, const Json& params) {
  ScalarField f = radial_field(p, n);
  f.name = name;
  f.params = params;
  return f;
}

ScalarField appd_split(int n, int k, double a, double eps) {
  require(n >= 3 && k >= 1 && k <= n - 2, ErrorKind::Input, "appD_split needs n >= 3 and 1 <= k <= n-2");
  require(a > 0.0 && a < 1.0 && eps > 0.0 && a + eps < 1.0, ErrorKind::Input,
          "appD_split needs 0 < a, eps and a + eps < 1");
  const int m = n - k;  // normal directions
  const double p = 1.0 - a - eps;
  const double e2 = eps * eps;
  ScalarField f;
  f.name = "appD_split";
  f.dim = n;
  std::vector<Vec> tangent;
  for (int j = m; j < n; ++j) {
    Vec t(n, 0.0);
    t[j] = 1.0;
    tangent.push_back(t);
  }
  f.singular = ManifoldSpec::affine(Vec(n, 0.0), tangent);
  auto rho = [m](const Vec& x) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += x[i] * x[i];
    return std::sqrt(s);
  };
  f.eval = [=](const Vec& x) {
    double s = 0.0;
    for (int i = m; i < n; ++i) s += x[i] * x[i];
    return std::pow(rho(x), p) + e2 * s;
  };
  f.grad = [=](const Vec& x) {
    const double r = rho(x);
    if (r == 0.0) fail(ErrorKind::Singularity, "appD_split gradient on E");
    Vec g(n);
    for (int i = 0; i < m; ++i) g[i] = p * std::pow(r, p - 2.0) * x[i];
    for (int i = m; i < n; ++i) g[i] = 2.0 * e2 * x[i];
    return g;
  };
  f.hess = [=](const Vec& x) {
    const double r = rho(x);
    if (r == 0.0) fail(ErrorKind::Singularity, "appD_split Hessian on E");
    SymMat h(n);
    const double s = p * std::pow(r, p - 2.0);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = s * ((p - 2.0) * x[i] * x[j] / (r * r) + (i == j ? 1.0 : 0.0));
    for (int i = m; i < n; ++i) h(i, i) = 2.0 * e2;
    return h;
  };
  f.params = {{"n", n}, {"k", k}, {"a", a}, {"eps", eps}};
  return f;
}

}  // namespace

ScalarField builtin(const std::string& name, const Json& params) {
  const int n = iparam(params, "n", 2);
  require(n >= 1 && n <= kMaxDim, ErrorKind::Input, "builtin dimension must be in 1..8");
  if (name == "pow_alpha" || name == "appD_pow") {
    const double alpha = name == "pow_alpha" ? param(params, "alpha", 0.5) : 1.0 - param(params, "a", 0.5);
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::Input, name + ": exponent must lie in (0,1)");
    Json p = params;
    p["n"] = n;
    auto f = from_profile(power_profile(alpha), n, name, p);
    return f;
  }
  if (name == "pucci_radial") {
    const double alpha = param(params, "alpha", 0.5);
    const int nn = std::max(n, 2);
    return from_profile(pucci_profile(nn, alpha), nn, name, {{"n", nn}, {"alpha", alpha}});
  }
  if (name == "example5_sin") {
    RadialProfile p;
    p.value = [](double r) { return std::sin(kPi * r); };
    p.d1 = [](double r) { return kPi * std::cos(kPi * r); };
    p.d2 = [](double r) { return -kPi * kPi * std::sin(kPi * r); };
    return from_profile(p, n, name, {{"n", n}});
  }
  if (name == "neg_log") {
    RadialProfile p;
    p.value = [](double r) { return -std::log(r); };
    p.d1 = [](double r) { return -1.0 / r; };
    p.d2 = [](double r) { return 1.0 / (r * r); };
    return from_profile(p, n, name, {{"n", n}});
  }
  if (name == "fundamental") {
    require(n >= 3, ErrorKind::Input, "fundamental needs n >= 3");
    RadialProfile p;
    const double q = 2.0 - n;
    p.value = [q](double r) { return -std::pow(r, q); };
    p.d1 = [q](double r) { return -q * std::pow(r, q - 1.0); };
    p.d2 = [q](double r) { return -q * (q - 1.0) * std::pow(r, q - 2.0); };
    return from_profile(p, n, name, {{"n", n}});
  }
  if (name == "newton") {
    require(n >= 3, ErrorKind::Input, "newton needs n >= 3");
    RadialProfile p;
    const double q = 2.0 - n;
    p.value = [q](double r) { return std::pow(r, q); };
    p.d1 = [q](double r) { return q * std::pow(r, q - 1.0); };
    p.d2 = [q](double r) { return q * (q - 1.0) * std::pow(r, q - 2.0); };
    return from_profile(p, n, name, {{"n", n}});
  }
  if (name == "ring_potential") {
    const double rr = param(params, "R", 0.5);
    require(rr > 0.0, ErrorKind::Input, "ring_potential needs R > 0");
    ScalarField f;
    f.name = name;
    f.dim = 3;
    f.params = {{"n", 3}, {"R", rr}};
    f.singular = ManifoldSpec::circle_xy(rr);
    // Integral of R / |x - y| over the circle, via the complete elliptic integral.
    f.eval = [rr](const Vec& x) {
      require(x.size() == 3, ErrorKind::Input, "ring_potential is three-dimensional");
      const double rho = std::hypot(x[0], x[1]);
      const double q = (rho + rr) * (rho + rr) + x[2] * x[2];
      // K(k) = pi / (2 AGM(1, k')), with k'^2 = ((rho - R)^2 + z^2) / q formed
      // directly so it stays accurate next to the ring.
      const double kp2 = ((rho - rr) * (rho - rr) + x[2] * x[2]) / q;
      if (!(kp2 > 0.0)) fail(ErrorKind::Singularity, "ring_potential evaluated on the ring");
      double a = 1.0, b = std::sqrt(kp2);
      for (int it = 0; it < 64 && std::abs(a - b) > 1e-16 * a; ++it) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
      }
      return 4.0 * rr * (kPi / (2.0 * a)) / std::sqrt(q);
    };
    return f;
  }
  if (name == "step_e1" || name == "example4_1d") {
    ScalarField f;
    f.name = name;
    f.dim = 1;
    f.singular = ManifoldSpec::origin(1);
    if (name == "step_e1") {
      f.eval = [](const Vec& x) { return x[0] < 0.0 ? 4.0 : 1.0; };
      f.grad = [](const Vec&) { return Vec{0.0}; };
    } else {
      f.eval = [](const Vec& x) { return x[0] <= 0.0 ? 1.0 + x[0] : 0.5 - 0.5 * x[0]; };
      f.grad = [](const Vec& x) { return Vec{x[0] <= 0.0 ? 1.0 : -0.5}; };
    }
    f.hess = [](const Vec&) { return SymMat(1); };
    return f;
  }
  if (name == "appD_split") {
    return appd_split(n, iparam(params, "k", 1), param(params, "a", 0.5), param(params, "eps", 0.05));
  }
  if (name == "max_coords") {
    const int k = iparam(params, "k", 1);
    require(k >= 1 && k <= n, ErrorKind::Input, "max_coords needs 1 <= k <= n");
    ScalarField f;
    f.name = name;
    f.dim = n;
    f.smooth = false;
    f.params = {{"n", n}, {"k", k}};
    f.eval = [k](const Vec& x) {
      double m = 0.0;
      for (int i = 0; i < k; ++i) m = std::max(m, x[i]);
      return m;
    };
    return f;
  }
  if (name == "quadratic" || name == "paraboloid") {
    const double c = name == "paraboloid" ? -1.0 : param(params, "c", 1.0);
    const double c0 = name == "paraboloid" ? 1.0 : param(params, "c0", 0.0);
    Vec b = params.contains("b") ? params.at("b").get<Vec>() : Vec(n, 0.0);
    require(static_cast<int>(b.size()) == n, ErrorKind::Input, "quadratic: b has wrong length");
    ScalarField f;
    f.name = name;
    f.dim = n;
    f.params = {{"n", n}, {"c", c}, {"c0", c0}, {"b", b}};
    f.eval = [=](const Vec& x) { return c0 + c * sqnorm(x) + dot(b, x); };
    f.grad = [=](const Vec& x) {
      Vec g(n);
      for (int i = 0; i < n; ++i) g[i] = 2.0 * c * x[i] + b[i];
      return g;
    };
    f.hess = [=](const Vec&) { return SymMat::identity(n, 2.0 * c); };
    return f;
  }
  if (name == "harmonic_poly") {
    require(n >= 2, ErrorKind::Input, "harmonic_poly needs n >= 2");
    ScalarField f;
    f.name = name;
    f.dim = n;
    f.params = {{"n", n}};
    f.eval = [](const Vec& x) { return x[0] * x[0] - x[1] * x[1] + x[0] * x[1] + x[0]; };
    f.grad = [n](const Vec& x) {
      Vec g(n, 0.0);
      g[0] = 2.0 * x[0] + x[1] + 1.0;
      g[1] = -2.0 * x[1] + x[0];
      return g;
    };
    f.hess = [n](const Vec&) {
      SymMat h(n);
      h(0, 0) = 2.0;
      h(1, 1) = -2.0;
      h(1, 0) = 1.0;
      return h;
    };
    return f;
  }
  if (name == "trig") {
    require(n >= 2, ErrorKind::Input, "trig needs n >= 2");
    ScalarField f;
    f.name = name;
    f.dim = n;
    f.params = {{"n", n}};
    f.eval = [](const Vec& x) { return std::sin(x[0]) * std::cos(x[1]); };
    f.grad = [n](const Vec& x) {
      Vec g(n, 0.0);
      g[0] = std::cos(x[0]) * std::cos(x[1]);
      g[1] = -std::sin(x[0]) * std::sin(x[1]);
      return g;
    };
    f.hess = [n](const Vec& x) {
      SymMat h(n);
      h(0, 0) = -std::sin(x[0]) * std::cos(x[1]);
      h(1, 1) = -std::sin(x[0]) * std::cos(x[1]);
      h(1, 0) = -std::cos(x[0]) * std::sin(x[1]);
      return h;
    };
    return f;
  }
  fail(ErrorKind::Input, "unknown builtin '" + name + "'");
}

ScalarField add_linear(const ScalarField& f, const Vec& v, double c) {
  ScalarField g = f;
  g.name = f.name + "+linear";
  g.eval = [f, v, c](const Vec& x) { return f(x) + dot(v, x) + c; };
  if (f.grad) {
    g.grad = [f, v](const Vec& x) {
      Vec d = f.grad(x);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += v[i];
      return d;
    };
  }
  return g;
}

ScalarField scaled_argument(const ScalarField& f, double s) {
  ScalarField g = f;
  g.name = f.name;
  g.eval = [f, s](const Vec& x) {
    Vec y(x);
    for (double& t : y) t *= s;
    return f(y);
  };
  g.grad = nullptr;
  g.hess = nullptr;
  if (f.grad) {
    g.grad = [f, s](const Vec& x) {
      Vec y(x);
      for (double& t : y) t *= s;
      Vec d = f.grad(y);
      for (double& t : d) t *= s;
      return d;
    };
  }
  if (f.hess) {
    g.hess = [f, s](const Vec& x) {
      Vec y(x);
      for (double& t : y) t *= s;
      return (s * s) * f.hess(y);
    };
  }
  if (f.singular && f.singular->kind == ManifoldSpec::Kind::PointSet) {
    std::vector<Vec> pts = f.singular->points;
    for (Vec& p : pts)
      for (double& t : p) t /= s;
    g.singular = ManifoldSpec::point_set(pts);
  }
  return g;
}

ScalarField difference(const ScalarField& u, const ScalarField& v) {
  ScalarField g = u;
  g.name = u.name + "-" + v.name;
  g.smooth = u.smooth && v.smooth;
  g.eval = [u, v](const Vec& x) { return u(x) - v(x); };
  g.grad = nullptr;
  g.hess = nullptr;
  if (u.grad && v.grad) {
    g.grad = [u, v](const Vec& x) {
      Vec a = u.grad(x);
      const Vec b = v.grad(x);
      for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
      return a;
    };
  }
  if (u.hess && v.hess) g.hess = [u, v](const Vec& x) { return u.hess(x) - v.hess(x); };
  if (!g.singular) g.singular = v.singular;
  return g;
}

Grid::Grid(const Vec& lower, const Vec& upper, double h) : lower_(lower), h_(h) {
  require(h > 0.0, ErrorKind::Input, "grid spacing must be positive");
  require(lower.size() == upper.size() && !lower.empty() && lower.size() <= 3, ErrorKind::Input,
          "grid dimension must be 1, 2 or 3");
  std::size_t total = 1;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    require(upper[i] > lower[i], ErrorKind::Input, "grid extent must be positive");
    const int c = static_cast<int>(std::llround((upper[i] - lower[i]) / h)) + 1;
    counts_.push_back(c);
    strides_.push_back(total);
    total *= static_cast<std::size_t>(c);
  }
  require(total <= 50'000'000, ErrorKind::Resolution, "grid too large");
  mask_.assign(total, 1);
}

Grid Grid::ball(int n, double radius, double h, const Vec& center) {
  Vec c = center.empty() ? Vec(n, 0.0) : center;
  Vec lo(n), hi(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = c[i] - radius;
    hi[i] = c[i] + radius;
  }
  Grid g(lo, hi, h);
  g.restrict_to_ball(c, radius);
  return g;
}

Vec Grid::upper() const {
  Vec u(lower_);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] += (counts_[i] - 1) * h_;
  return u;
}

Vec Grid::point(std::size_t idx) const {
  Vec x(lower_.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = static_cast<int>((idx / strides_[i]) % counts_[i]);
    x[i] = lower_[i] + c * h_;
  }
  return x;
}

std::vector<int> Grid::multi_index(std::size_t idx) const {
  std::vector<int> mi(lower_.size());
  for (std::size_t i = 0; i < mi.size(); ++i) mi[i] = static_cast<int>((idx / strides_[i]) % counts_[i]);
  return mi;
}

std::size_t Grid::flat_index(const std::vector<int>& mi) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < mi.size(); ++i) idx += static_cast<std::size_t>(mi[i]) * strides_[i];
  return idx;
}

std::optional<std::size_t> Grid::neighbor(std::size_t idx, int axis, int step) const {
  const int c = static_cast<int>((idx / strides_[axis]) % counts_[axis]) + step;
  if (c < 0 || c >= counts_[axis]) return std::nullopt;
  return idx + static_cast<std::ptrdiff_t>(step) * static_cast<std::ptrdiff_t>(strides_[axis]);
}

bool Grid::on_box_boundary(std::size_t idx) const {
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    const int c = static_cast<int>((idx / strides_[i]) % counts_[i]);
    if (c == 0 || c == counts_[i] - 1) return true;
  }
  return false;
}

std::size_t Grid::active_count() const { return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1)); }

void Grid::restrict_to_ball(const Vec& center, double radius) {
  const double r2 = radius * radius * (1.0 + 1e-12);
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec x = point(i);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - center[j]) * (x[j] - center[j]);
    if (s > r2) mask_[i] = 0;
  }
}

void Grid::exclude(const ManifoldSpec& e, double radius) {
  for (std::size_t i = 0; i < size(); ++i)
    if (mask_[i] && dist(e, point(i)) <= radius) mask_[i] = 0;
}

GridInfo Grid::info() const { return GridInfo{h_, lower_, upper()}; }

void write_field_csv(std::ostream& os, const ScalarField& f, const Grid& g, bool with_grad, bool with_hess) {
  const int n = g.dim();
  for (int i = 0; i < n; ++i) os << "x" << i + 1 << ",";
  os << "value";
  if (with_grad)
    for (int i = 0; i < n; ++i) os << ",g" << i + 1;
  if (with_hess)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) os << ",h" << i + 1 << j + 1;
  os << "\n" << std::setprecision(17);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (!g.active(idx)) continue;
    const Vec x = g.point(idx);
    for (double v : x) os << v << ",";
    os << f(x);
    if (with_grad) {
      const Vec gr = gradient(f, x);
      for (double v : gr) os << "," << v;
    }
    if (with_hess) {
      const SymMat hm = hessian(f, x);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) os << "," << hm(i, j);
    }
    os << "\n";
  }
}

}  // namespace degenlab

namespace degenlab {

std::vector<Vec> sphere_lattice(int n, int count) {
  require(n >= 1 && count >= 1, ErrorKind::Input, "sphere_lattice needs n >= 1 and count >= 1");
  std::vector<Vec> dirs;
  if (n == 1) return {{-1.0}, {1.0}};
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      const double t = 2.0 * kPi * i / count;
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  if (n == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
    }
    return dirs;
  }
  Rng rng(0x5eedULL + n);
  std::normal_distribution<double> g;
  for (int i = 0; i < count; ++i) {
    Vec v(n);
    double s = 0.0;
    do {
      s = 0.0;
      for (double& t : v) {
        t = g(rng);
        s += t * t;
      }
    } while (s < 1e-20);
    for (double& t : v) t /= std::sqrt(s);
    dirs.push_back(v);
  }
  return dirs;
}

SphereMin sphere_minimum(const std::function<double(const Vec&)>& f, const Vec& center, double r,
                         const std::vector<Vec>& lattice, int refine) {
  require(r > 0.0 && !lattice.empty(), ErrorKind::Input, "sphere_minimum needs r > 0 and directions");
  const int n = static_cast<int>(center.size());
  auto at = [&](const Vec& dir) {
    Vec x(center);
    for (int i = 0; i < n; ++i) x[i] += r * dir[i];
    return x;
  };
  std::vector<std::pair<double, std::size_t>> vals;
  vals.reserve(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) vals.emplace_back(f(at(lattice[i])), i);
  const std::size_t keep = std::min<std::size_t>(std::max(refine, 1), vals.size());
  std::partial_sort(vals.begin(), vals.begin() + keep, vals.end());
  SphereMin best{vals[0].first, at(lattice[vals[0].second])};
  if (n == 1) return best;
  const double spacing = n == 2 ? 2.0 * kPi / lattice.size() : std::sqrt(4.0 * kPi / lattice.size());
  for (std::size_t c = 0; c < keep; ++c) {
    Vec dir = lattice[vals[c].second];
    double fv = vals[c].first;
    double step = spacing;
    for (int it = 0; it < 400 && step > 1e-11; ++it) {
      // Tangent basis at dir by Gram-Schmidt on the coordinate axes.
      std::vector<Vec> tang;
      for (int a = 0; a < n && static_cast<int>(tang.size()) < n - 1; ++a) {
        Vec t(n, 0.0);
        t[a] = 1.0;
        const double pd = dot(t, dir);
        for (int i = 0; i < n; ++i) t[i] -= pd * dir[i];
        for (const Vec& q : tang) {
          const double pq = dot(t, q);
          for (int i = 0; i < n; ++i) t[i] -= pq * q[i];
        }
        const double nt = norm(t);
        if (nt < 0.3) continue;
        for (double& v : t) v /= nt;
        tang.push_back(t);
      }
      bool moved = false;
      for (const Vec& t : tang)
        for (double sgn : {1.0, -1.0}) {
          Vec cand(n);
          for (int i = 0; i < n; ++i) cand[i] = dir[i] + sgn * step * t[i];
          const double nc = norm(cand);
          for (double& v : cand) v /= nc;
          const double fc = f(at(cand));
          if (fc < fv) {
            fv = fc;
            dir = cand;
            moved = true;
          }
        }
      if (!moved) step *= 0.5;
    }
    if (fv < best.value) best = {fv, at(dir)};
  }
  return best;
}

}  // namespace degenlab
