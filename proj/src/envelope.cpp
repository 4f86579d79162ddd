#include "degenlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "degenlab/error.hpp"
#include "degenlab/manifold.hpp"

namespace degenlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dist_between(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Lattice directions up to sign: axes and diagonals.
std::vector<std::vector<int>> lattice_dirs(int n) {
  std::vector<std::vector<int>> out;
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int c = 0; c < total; ++c) {
    std::vector<int> d(n);
    int t = c;
    for (int i = 0; i < n; ++i) {
      d[i] = t % 3 - 1;
      t /= 3;
    }
    const auto first = std::find_if(d.begin(), d.end(), [](int v) { return v != 0; });
    if (first != d.end() && *first > 0) out.push_back(d);
  }
  return out;
}

std::optional<std::size_t> offset_node(const Grid& g, const std::vector<int>& mi, const std::vector<int>& off,
                                       int sign = 1) {
  std::vector<int> m = mi;
  for (int i = 0; i < g.dim(); ++i) {
    m[i] += sign * off[i];
    if (m[i] < 0 || m[i] >= g.counts()[i]) return std::nullopt;
  }
  const std::size_t j = g.flat_index(m);
  if (!g.active(j)) return std::nullopt;
  return j;
}

// Active nodes whose value is not below the midpoint of two lattice
// neighbours. Dropping the others leaves the envelope unchanged.
std::vector<std::size_t> undominated(const Grid& g, const Vec& v) {
  const auto dirs = lattice_dirs(g.dim());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const auto mi = g.multi_index(i);
    bool dom = false;
    for (const auto& d : dirs) {
      const auto a = offset_node(g, mi, d, 1), b = offset_node(g, mi, d, -1);
      if (a && b && v[i] >= 0.5 * (v[*a] + v[*b])) {
        dom = true;
        break;
      }
    }
    if (!dom) out.push_back(i);
  }
  return out;
}

void envelope_1d(const Grid& g, const Vec& f, Vec& gamma) {
  std::vector<std::size_t> hull;
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    const double ox = static_cast<double>(o), ax = static_cast<double>(a), bx = static_cast<double>(b);
    return (ax - ox) * (f[b] - f[o]) - (f[a] - f[o]) * (bx - ox);
  };
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), i) <= 0.0) hull.pop_back();
    hull.push_back(i);
  }
  std::size_t s = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    while (s + 1 < hull.size() && hull[s + 1] < i) ++s;
    if (hull[s] == i || s + 1 >= hull.size()) {
      gamma[i] = f[i];
      continue;
    }
    const std::size_t a = hull[s], b = hull[s + 1];
    if (b == i) {
      gamma[i] = f[i];
      continue;
    }
    const double t = static_cast<double>(i - a) / static_cast<double>(b - a);
    gamma[i] = std::min(f[i], (1.0 - t) * f[a] + t * f[b]);
  }
}

// Inverse of a small dense matrix by Gauss-Jordan; false when singular.
bool invert(std::vector<Vec>& a, std::vector<Vec>& inv) {
  const int m = static_cast<int>(a.size());
  inv.assign(m, Vec(m, 0.0));
  for (int i = 0; i < m; ++i) inv[i][i] = 1.0;
  for (int c = 0; c < m; ++c) {
    int p = c;
    for (int r = c + 1; r < m; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    if (std::abs(a[p][c]) < 1e-13) return false;
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double d = a[c][c];
    for (int j = 0; j < m; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (int r = 0; r < m; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (int j = 0; j < m; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return true;
}

// min sum lambda_j f_j subject to sum lambda_j (1, z_j) = (1, x), lambda >= 0,
// by the revised simplex method. Coordinates are lattice indices.
class NodeLp {
 public:
  NodeLp(const Grid& g, const Vec& f, std::vector<std::size_t> cand, double tol)
      : g_(g), f_(f), cand_(std::move(cand)), tol_(tol), n_(g.dim()) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.active(i)) active_.push_back(i);
    for (std::size_t j : cand_) {
      const auto mj = g.multi_index(j);
      for (int i = 0; i < n_; ++i) cand_mi_.push_back(mj[i]);
    }
    // Offsets for the starting simplex, nearest first.
    const int r = 2;
    std::vector<int> off(n_, -r);
    while (true) {
      if (std::any_of(off.begin(), off.end(), [](int v) { return v != 0; })) offsets_.push_back(off);
      int i = 0;
      while (i < n_ && off[i] == r) off[i++] = -r;
      if (i == n_) break;
      ++off[i];
    }
    std::stable_sort(offsets_.begin(), offsets_.end(), [](const auto& a, const auto& b) {
      return std::inner_product(a.begin(), a.end(), a.begin(), 0) < std::inner_product(b.begin(), b.end(), b.begin(), 0);
    });
  }

  long pivots() const { return pivots_; }

  double solve(std::size_t node) {
    const int m = n_ + 1;
    const auto t = g_.multi_index(node);
    auto column = [&](std::size_t j) {
      const auto mj = g_.multi_index(j);
      Vec c(m, 1.0);
      for (int i = 0; i < n_; ++i) c[i + 1] = mj[i] - t[i];
      return c;
    };
    std::vector<std::size_t> basis = start_basis(node, t);
    std::vector<Vec> binv;
    auto refactor = [&]() {
      std::vector<Vec> b(m, Vec(m));
      for (int r = 0; r < m; ++r) {
        const Vec c = column(basis[r]);
        for (int i = 0; i < m; ++i) b[i][r] = c[i];
      }
      if (!invert(b, binv)) fail(ErrorKind::Internal, "envelope LP basis became singular");
    };
    refactor();

    int degenerate = 0;
    bool bland = false;
    for (int iter = 0;; ++iter) {
      if (iter > 100000) fail(ErrorKind::Internal, "envelope LP did not terminate");
      Vec y(m, 0.0);
      for (int r = 0; r < m; ++r)
        for (int i = 0; i < m; ++i) y[i] += f_[basis[r]] * binv[r][i];
      std::ptrdiff_t enter = -1;
      double best = -tol_;
      for (std::size_t q = 0; q < cand_.size(); ++q) {
        double rc = f_[cand_[q]] - y[0];
        for (int i = 0; i < n_; ++i) rc -= y[i + 1] * (cand_mi_[q * n_ + i] - t[i]);
        if (rc < best) {
          best = rc;
          enter = static_cast<std::ptrdiff_t>(q);
          if (bland) break;
        }
      }
      if (enter < 0) return y[0];
      const Vec a = column(cand_[enter]);
      int leave = -1;
      double theta = kInf;
      for (int r = 0; r < m; ++r) {
        double d = 0.0;
        for (int i = 0; i < m; ++i) d += binv[r][i] * a[i];
        if (d <= 1e-12) continue;
        const double ratio = std::max(binv[r][0], 0.0) / d;
        if (ratio < theta - 1e-15 || (std::abs(ratio - theta) <= 1e-15 && basis[r] < basis[leave])) {
          theta = ratio;
          leave = r;
        }
      }
      if (leave < 0) fail(ErrorKind::Internal, "envelope LP ratio test failed");
      basis[leave] = cand_[enter];
      ++pivots_;
      refactor();
      degenerate = theta <= 1e-15 ? degenerate + 1 : 0;
      if (degenerate > 50) bland = true;
    }
  }

 private:
  std::vector<std::size_t> start_basis(std::size_t node, const std::vector<int>& t) {
    std::vector<std::size_t> basis{node};
    std::vector<Vec> q;
    auto try_add = [&](std::size_t j) {
      const auto mj = g_.multi_index(j);
      Vec d(n_);
      for (int i = 0; i < n_; ++i) d[i] = mj[i] - t[i];
      for (const Vec& e : q) {
        const double s = dot(d, e);
        for (int i = 0; i < n_; ++i) d[i] -= s * e[i];
      }
      const double nd = norm(d);
      if (nd < 1e-9) return;
      for (double& v : d) v /= nd;
      q.push_back(d);
      basis.push_back(j);
    };
    for (const auto& off : offsets_) {
      if (static_cast<int>(q.size()) == n_) break;
      if (const auto j = offset_node(g_, t, off)) try_add(*j);
    }
    for (std::size_t j : active_) {
      if (static_cast<int>(q.size()) == n_) break;
      if (j != node) try_add(j);
    }
    require(static_cast<int>(q.size()) == n_, ErrorKind::Input, "active nodes do not span the grid dimension");
    return basis;
  }

  const Grid& g_;
  const Vec& f_;
  std::vector<std::size_t> cand_;
  double tol_;
  int n_;
  std::vector<int> cand_mi_;
  std::vector<std::size_t> active_;
  std::vector<std::vector<int>> offsets_;
  long pivots_ = 0;
};

std::optional<Vec> seidel(const std::vector<Vec>& a, const Vec& c, const std::vector<std::size_t>& order,
                          std::size_t upto, const Vec& p0, const std::vector<Vec>& dirs, double tol) {
  const std::size_t n = p0.size();
  Vec p = p0;
  for (std::size_t t = 0; t < upto; ++t) {
    const std::size_t i = order[t];
    if (dot(a[i], p) <= c[i] + tol) continue;
    Vec ap(n, 0.0);
    for (const Vec& u : dirs) {
      const double s = dot(a[i], u);
      for (std::size_t j = 0; j < n; ++j) ap[j] += s * u[j];
    }
    const double na = norm(ap);
    if (na <= 1e-12 * std::max(1.0, norm(a[i]))) return std::nullopt;
    for (double& v : ap) v /= na;
    const double alpha = (c[i] - dot(a[i], p0)) / na;
    Vec p1 = p0;
    for (std::size_t j = 0; j < n; ++j) p1[j] += alpha * ap[j];
    std::vector<Vec> nd;
    for (const Vec& u : dirs) {
      Vec w = u;
      const double s = dot(w, ap);
      for (std::size_t j = 0; j < n; ++j) w[j] -= s * ap[j];
      for (const Vec& e : nd) {
        const double r = dot(w, e);
        for (std::size_t j = 0; j < n; ++j) w[j] -= r * e[j];
      }
      const double nw = norm(w);
      if (nw > 1e-8) {
        for (double& v : w) v /= nw;
        nd.push_back(w);
      }
    }
    const auto r = seidel(a, c, order, t, p1, nd, tol);
    if (!r) return std::nullopt;
    p = *r;
  }
  return p;
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int m, Vec& x, Vec& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= m; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (m == 1) p0 = 1.0;
      dp = m * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// Average of f over the sphere |y - x| = r.
double sphere_average(const std::function<double(const Vec&)>& f, const Vec& x, double r, int q) {
  const int n = static_cast<int>(x.size());
  if (n == 1) return 0.5 * (f({x[0] - r}) + f({x[0] + r}));
  if (n == 2) {
    const int m = 4 * q;
    double s = 0.0;
    for (int k = 0; k < m; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / m;
      s += f({x[0] + r * std::cos(t), x[1] + r * std::sin(t)});
    }
    return s / m;
  }
  const int m = std::max(4, q / 2);
  Vec z, w;
  gauss_legendre(m, z, w);
  const int az = 2 * m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double rho = std::sqrt(1.0 - z[i] * z[i]);
    double ring = 0.0;
    for (int k = 0; k < az; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / az;
      ring += f({x[0] + r * rho * std::cos(t), x[1] + r * rho * std::sin(t), x[2] + r * z[i]});
    }
    s += 0.5 * w[i] * ring / az;
  }
  return s;
}

double ball_average(const std::function<double(const Vec&)>& f, const Vec& x, double r, int q) {
  const int n = static_cast<int>(x.size());
  Vec xi, wi;
  gauss_legendre(20, xi, wi);
  double s = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double rho = 0.5 * r * (1.0 + xi[i]);
    s += 0.5 * r * wi[i] * std::pow(rho, n - 1) * sphere_average(f, x, rho, q);
  }
  return n * s / std::pow(r, n);
}

std::vector<std::size_t> interior_grid_nodes(const Grid& g, const PuncturedDomain& dom, double excl) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    bool ok = true;
    for (int a = 0; a < g.dim() && ok; ++a)
      for (int s : {-1, 1}) {
        const auto nb = g.neighbor(i, a, s);
        if (!nb || !g.active(*nb)) ok = false;
      }
    if (!ok) continue;
    const Vec x = g.point(i);
    if (!dom.contains(x) || dist(dom.singular, x) <= excl) continue;
    out.push_back(i);
  }
  return out;
}

}  // namespace

void SampledFunction::validate() const {
  require(values.size() == grid.size(), ErrorKind::Input, "one value per grid node is required");
  require(grid.dim() >= 1 && grid.dim() <= 3, ErrorKind::Input, "envelope dimension must be 1, 2 or 3");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (grid.active(i) && !std::isfinite(values[i])) fail(ErrorKind::Input, "non-finite sample at an active node");
}

SampledFunction SampledFunction::sample(const ScalarField& f, const Grid& g) {
  SampledFunction s{g, Vec(g.size(), 0.0)};
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.active(i)) s.values[i] = f(g.point(i));
  s.validate();
  return s;
}

std::size_t EnvelopeResult::contact_count() const {
  return static_cast<std::size_t>(std::count(contact_mask.begin(), contact_mask.end(), 1));
}

EnvelopeResult convex_envelope(const SampledFunction& f, const EnvelopeOptions& opt) {
  f.validate();
  const Grid& g = f.grid;
  require(g.active_count() > 0, ErrorKind::Input, "no active nodes");
  double scale = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.active(i)) scale = std::max(scale, 1.0 + std::abs(f.values[i]));

  EnvelopeResult env;
  env.grid = g;
  env.gamma.assign(g.size(), kNaN);
  if (g.dim() == 1) {
    envelope_1d(g, f.values, env.gamma);
  } else {
    NodeLp lp(g, f.values, undominated(g, f.values), 1e-13 * scale);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.active(i)) env.gamma[i] = std::min(f.values[i], lp.solve(i));
    env.lp_pivots = lp.pivots();
  }

  // Discrete convexity along every lattice direction.
  const double ctol = 1e-9 * scale;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const auto mi = g.multi_index(i);
    for (const auto& d : lattice_dirs(g.dim())) {
      const auto a = offset_node(g, mi, d, 1), b = offset_node(g, mi, d, -1);
      if (a && b && env.gamma[*a] + env.gamma[*b] - 2.0 * env.gamma[i] < -ctol)
        fail(ErrorKind::Internal, "envelope is not discretely convex");
    }
  }

  env.contact_tol = opt.contact_tol >= 0.0 ? opt.contact_tol : 1e-11 * scale;
  env.contact_mask = contact_set(f, env, env.contact_tol);
  env.vertices = undominated(g, env.gamma);
  env.slopes.assign(g.size(), Vec{});
  if (!opt.slopes) return env;

  const double h = g.h();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (env.contact_mask[i]) env.slopes[i] = supporting_slope(env, i);
  // Quadratic upper bound and slope differences near each contact node.
  std::vector<std::vector<int>> near;
  {
    const int n = g.dim();
    std::vector<int> off(n, -2);
    while (true) {
      if (std::any_of(off.begin(), off.end(), [](int v) { return v != 0; })) near.push_back(off);
      int i = 0;
      while (i < n && off[i] == 2) off[i++] = -2;
      if (i == n) break;
      ++off[i];
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!env.contact_mask[i]) continue;
    const auto mi = g.multi_index(i);
    const Vec& p = env.slopes[i];
    for (const auto& off : near) {
      const auto j = offset_node(g, mi, off);
      if (!j) continue;
      double lin = 0.0, r2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        lin += p[a] * off[a] * h;
        r2 += off[a] * off[a] * h * h;
      }
      env.K_estimate = std::max(env.K_estimate, (env.gamma[*j] - env.gamma[i] - lin) / r2);
      const bool axis = std::count(off.begin(), off.end(), 0) == g.dim() - 1 &&
                        std::all_of(off.begin(), off.end(), [](int v) { return std::abs(v) <= 1; });
      if (axis && env.contact_mask[*j]) {
        Vec dq(p.size());
        for (std::size_t a = 0; a < p.size(); ++a) dq[a] = p[a] - env.slopes[*j][a];
        env.slope_lipschitz = std::max(env.slope_lipschitz, norm(dq) / h);
      }
    }
  }
  return env;
}

std::vector<char> contact_set(const SampledFunction& f, const EnvelopeResult& env, double tol) {
  std::vector<char> mask(f.grid.size(), 0);
  for (std::size_t i = 0; i < f.grid.size(); ++i)
    if (f.grid.active(i) && f.values[i] - env.gamma[i] <= tol) mask[i] = 1;
  return mask;
}

std::optional<Vec> min_norm_point(const std::vector<Vec>& a, const Vec& c, double tol) {
  require(a.size() == c.size(), ErrorKind::Input, "one bound per constraint is required");
  if (a.empty()) return Vec{};
  const std::size_t n = a[0].size();
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(0x5eed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Vec> dirs(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;
  return seidel(a, c, order, order.size(), Vec(n, 0.0), dirs, tol);
}

Vec supporting_slope(const EnvelopeResult& env, std::size_t node) {
  const Grid& g = env.grid;
  require(node < g.size() && node < env.contact_mask.size() && env.contact_mask[node], ErrorKind::Input,
          "supporting slope needs a contact node");
  const int n = g.dim();
  const double h = g.h();
  const auto mi = g.multi_index(node);
  const double g0 = env.gamma[node];
  std::vector<Vec> a;
  Vec c;
  double cmax = 1.0;
  for (std::size_t j : env.vertices) {
    if (j == node) continue;
    const auto mj = g.multi_index(j);
    Vec d(n);
    double len = 0.0;
    for (int i = 0; i < n; ++i) {
      d[i] = mj[i] - mi[i];
      len += d[i] * d[i];
    }
    len = std::sqrt(len);
    for (double& v : d) v /= len;
    a.push_back(d);
    c.push_back((env.gamma[j] - g0) / (h * len));
    cmax = std::max(cmax, std::abs(c.back()));
  }
  const auto p = min_norm_point(a, c, 1e-10 * cmax);
  if (!p) fail(ErrorKind::Internal, "no supporting plane at a contact node");
  Vec slope = p->empty() ? Vec(n, 0.0) : *p;
  double scale = 1.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    if (g.active(j)) scale = std::max(scale, std::abs(env.gamma[j]));
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!g.active(j)) continue;
    const auto mj = g.multi_index(j);
    double plane = g0;
    for (int i = 0; i < n; ++i) plane += slope[i] * (mj[i] - mi[i]) * h;
    if (plane > env.gamma[j] + 1e-8 * scale) fail(ErrorKind::Internal, "supporting plane rises above the envelope");
  }
  return slope;
}

SymMat grid_hessian(const Grid& g, const Vec& v, std::size_t node) {
  const int n = g.dim();
  const double h = g.h();
  const auto mi = g.multi_index(node);
  auto at = [&](std::vector<int> off) -> std::optional<double> {
    const auto j = offset_node(g, mi, off);
    if (!j) return std::nullopt;
    return v[*j];
  };
  SymMat H(n);
  const double f0 = v[node];
  for (int i = 0; i < n; ++i) {
    std::vector<int> e(n, 0);
    e[i] = 1;
    auto scaled = [&](int s) {
      std::vector<int> o(e);
      for (int& c : o) c *= s;
      return at(o);
    };
    const auto p1 = scaled(1), m1 = scaled(-1);
    if (p1 && m1) {
      H(i, i) = (*p1 - 2.0 * f0 + *m1) / (h * h);
    } else if (const auto p2 = scaled(2); p1 && p2) {
      H(i, i) = (*p2 - 2.0 * *p1 + f0) / (h * h);
    } else if (const auto m2 = scaled(-2); m1 && m2) {
      H(i, i) = (*m2 - 2.0 * *m1 + f0) / (h * h);
    } else {
      fail(ErrorKind::Stencil, "no second difference available at node");
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      auto d = [&](int si, int sj) {
        std::vector<int> o(n, 0);
        o[i] = si;
        o[j] = sj;
        return at(o);
      };
      const auto pp = d(1, 1), pm = d(1, -1), mp = d(-1, 1), mm = d(-1, -1);
      if (pp && pm && mp && mm) {
        H(i, j) = (*pp - *pm - *mp + *mm) / (4.0 * h * h);
        continue;
      }
      bool done = false;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          const auto c = d(si, sj), a = d(si, 0), b = d(0, sj);
          if (c && a && b) {
            H(i, j) = si * sj * (*c - *a - *b + f0) / (h * h);
            done = true;
            break;
          }
        }
        if (done) break;
      }
      if (!done) fail(ErrorKind::Stencil, "no mixed difference available at node");
    }
  return H;
}

CheckReport abp_check(const ScalarField& u, const ScalarField& v, double eps, const PuncturedDomain& domain, double h,
                      const AbpOptions& opt) {
  const int n = u.dim;
  require(v.dim == n && domain.dim() == n, ErrorKind::Input, "fields and domain must share the dimension");
  require(n >= 1 && n <= 3, ErrorKind::Input, "ABP check supports n = 1, 2, 3");
  require(eps > 0.0 && h > 0.0, ErrorKind::Input, "eps and h must be positive");
  domain.validate();
  const double rb = domain.r_bar;
  const double d = 2.0 * rb;
  const double R = 2.0 * d;
  const double delta2 = opt.delta2 >= 0.0 ? opt.delta2 : 0.25 * rb;
  const Vec c = domain.center.empty() ? Vec(n, 0.0) : domain.center;
  require(rb / h >= 4.0, ErrorKind::Resolution, "grid too coarse for the domain");

  CheckReport rep;
  rep.check = "abp";
  rep.params = {{"u", u.name}, {"v", v.name}, {"eps", eps}, {"r_bar", rb}, {"singular", domain.singular.name()},
                {"diam", d}, {"envelope_radius", R}};
  rep.tolerances = {{"slack", opt.slack}, {"delta2", delta2}};

  SampledFunction w{Grid::ball(n, R, h, c), {}};
  Grid& g = w.grid;
  rep.grid = g.info();
  w.values.assign(g.size(), 0.0);
  double min_diff = kInf, delta1 = kInf;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const Vec x = g.point(i);
    const double rx = dist_between(x, c);
    if (rx >= rb) continue;
    double diff = kNaN;
    try {
      diff = u(x) - v(x);
    } catch (const Error&) {
    }
    if (!std::isfinite(diff)) {
      g.set_active(i, false);
      ++dropped;
      continue;
    }
    if (dist(domain.singular, x) >= 0.5 * h) min_diff = std::min(min_diff, diff);
    if (rb - rx <= delta2) delta1 = std::min(delta1, diff);
    w.values[i] = std::min(diff - eps, 0.0);
  }
  const double wmin = *std::min_element(w.values.begin(), w.values.end());
  rep.metrics["min_u_minus_v"] = min_diff;
  rep.metrics["delta1"] = delta1;
  rep.metrics["inf_w"] = wmin;
  rep.metrics["dropped_nodes"] = dropped;

  std::vector<std::string> hyp;
  if (!(min_diff > 0.0)) hyp.push_back("u > v fails on the punctured domain");
  if (!(eps < delta1)) hyp.push_back("eps is not below the boundary gap delta1");
  if (wmin >= 0.0) {
    rep.status = Status::Degenerate;
    rep.notes.push_back("w_eps vanishes identically: u - v never drops below eps");
    for (auto& s : hyp) rep.notes.push_back(s);
    return rep;
  }

  const EnvelopeResult env = convex_envelope(w);
  const double m = -wmin;
  double integral = 0.0, integral_off_e = 0.0, max_neg = 0.0, max_slope = 0.0, K = 0.0;
  std::size_t contact_inner = 0, g2_fail = 0, clamped_large = 0;
  Vec g2_witness;
  const std::vector<std::vector<int>> unit = [&] {
    std::vector<std::vector<int>> o;
    for (int a = 0; a < n; ++a)
      for (int s : {-1, 1}) {
        std::vector<int> e(n, 0);
        e[a] = s;
        o.push_back(e);
      }
    return o;
  }();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!env.contact_mask[i]) continue;
    const Vec x = g.point(i);
    const double rx = dist_between(x, c);
    if (rx >= R - 1.5 * h) continue;  // the rim of B_2d, where gamma = w = 0
    ++contact_inner;
    if (!(rx < rb - delta2)) {
      ++g2_fail;
      if (g2_witness.empty()) g2_witness = x;
    }
    const SymMat H = grid_hessian(g, env.gamma, i);
    const EigenDecomp ed = eigh(H);
    double det = 1.0;
    const double hn = std::max(1.0, H.frobenius());
    for (double l : ed.values) {
      if (l < 0.0) {
        max_neg = std::max(max_neg, -l / hn);
        if (l < -1e-8 * hn) ++clamped_large;
      }
      det *= std::max(l, 0.0);
    }
    const double cell = det * std::pow(h, n);
    integral += cell;
    if (dist(domain.singular, x) > h) integral_off_e += cell;
    max_slope = std::max(max_slope, norm(env.slopes[i]));
    const auto mi = g.multi_index(i);
    for (const auto& off : unit) {
      const auto j = offset_node(g, mi, off);
      if (!j) continue;
      double lin = 0.0;
      for (int a = 0; a < n; ++a) lin += env.slopes[i][a] * off[a] * h;
      K = std::max(K, (env.gamma[*j] - env.gamma[i] - lin) / (h * h));
    }
  }
  const double lhs = std::pow(m, n);
  const double rhs = integral * (1.0 + opt.slack);
  rep.metrics["eps_n"] = std::pow(eps, n);
  rep.metrics["inf_w_n"] = lhs;
  rep.metrics["det_integral"] = integral;
  rep.metrics["det_integral_excluding_E"] = integral_off_e;
  rep.metrics["ratio"] = integral > 0.0 ? lhs / integral : kInf;
  rep.metrics["contact_nodes"] = contact_inner;
  rep.metrics["contact_outside_collar"] = g2_fail;
  rep.metrics["G2_holds"] = g2_fail == 0;
  rep.metrics["K_estimate"] = K;
  rep.metrics["max_contact_slope"] = max_slope;
  rep.metrics["slope_bound"] = m / d;
  rep.metrics["max_negative_eig_rel"] = max_neg;
  rep.metrics["negative_eigs_clamped"] = clamped_large;
  rep.metrics["lp_pivots"] = env.lp_pivots;
  rep.metrics["min_gamma"] = envelope_summary(env)["min_gamma"];
  rep.observe(lhs - rhs, {});
  if (!g2_witness.empty()) rep.witness = g2_witness;
  if (clamped_large > 0)
    rep.notes.push_back("difference Hessian of gamma had negative eigenvalues beyond 1e-8, clamped to 0");
  if (integral_off_e < integral)
    rep.notes.push_back("part of the det mass sits on nodes within h of E; it is counted");
  rep.notes.push_back("K is fitted from data and does not see lower semicontinuity subtleties");

  if (!hyp.empty()) {
    rep.status = Status::HypothesisViolation;
    for (auto& s : hyp) rep.notes.push_back(s);
  } else {
    rep.status = lhs <= rhs && g2_fail == 0 ? Status::Pass : Status::Fail;
  }
  return rep;
}

Vec discrete_support_slope(const ScalarField& u, const Vec& x, const Modulus& omega, const PuncturedDomain& domain,
                           double h) {
  const Grid g = domain.grid(h);
  const double ux = u(x);
  require(std::isfinite(ux), ErrorKind::Domain, "field is not finite at the base point");
  std::vector<Vec> a;
  Vec c;
  double cmax = 1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const Vec z = g.point(i);
    const double r = dist_between(z, x);
    if (r < 1e-12 || dist(domain.singular, z) < 0.5 * h) continue;
    double uz = kNaN;
    try {
      uz = u(z);
    } catch (const Error&) {
    }
    if (!std::isfinite(uz)) continue;
    Vec d(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) d[k] = (z[k] - x[k]) / r;
    a.push_back(d);
    c.push_back((uz - ux) / r + omega(r));
    cmax = std::max(cmax, std::abs(c.back()));
  }
  const auto p = min_norm_point(a, c, 1e-12 * cmax);
  if (!p) fail(ErrorKind::Hypothesis, "no slope satisfies the support inequality at the grid nodes");
  return *p;
}

CheckReport slope_stability_check(const ScalarField& u, double C, const std::vector<SlopePair>& pairs,
                                  const Modulus& omega, const PuncturedDomain& domain, double h) {
  const int n = u.dim;
  require(domain.dim() == n, ErrorKind::Input, "domain must match the field");
  require(!pairs.empty(), ErrorKind::Input, "no slope pairs given");
  domain.validate();
  CheckReport rep;
  rep.check = "slope_stability";
  rep.params = {{"field", u.name}, {"C", C}, {"omega", omega.name}, {"pairs", pairs.size()}};
  const Grid g = domain.grid(h);
  rep.grid = g.info();

  // Laplacian <= C off the exclusion zone.
  double lap_excess = -kInf;
  std::size_t lap_nodes = 0;
  for (std::size_t i : interior_grid_nodes(g, domain, domain.exclusion_radius(h))) {
    const Vec x = g.point(i);
    const SymMat H = check_hessian(u, x, Derivatives::FiniteDifference);
    lap_excess = std::max(lap_excess, H.trace() - C - n * check_tolerance(H, false, 1.0));
    ++lap_nodes;
  }
  rep.metrics["laplacian_nodes"] = lap_nodes;
  rep.metrics["laplacian_excess"] = lap_excess;

  // Support inequalities on the grid.
  double sup_excess = -kInf;
  auto support = [&](const Vec& xb, const Vec& p) {
    const double ub = u(xb);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g.active(i)) continue;
      const Vec z = g.point(i);
      if (dist(domain.singular, z) < 0.5 * h) continue;
      double uz = kNaN;
      try {
        uz = u(z);
      } catch (const Error&) {
      }
      if (!std::isfinite(uz)) continue;
      const double r = dist_between(z, xb);
      double lin = ub;
      for (int k = 0; k < n; ++k) lin += p[k] * (z[k] - xb[k]);
      sup_excess = std::max(sup_excess, lin - r * omega(r) - uz - 1e-9 * (1.0 + std::abs(uz)));
    }
  };
  Json ratios = Json::array();
  double max_ratio = 0.0;
  for (const auto& pr : pairs) {
    support(pr.x, pr.p);
    support(pr.y, pr.q);
    Vec dp(n);
    for (int k = 0; k < n; ++k) dp[k] = pr.p[k] - pr.q[k];
    const double r = dist_between(pr.x, pr.y);
    const double denom = omega(2.0 * r) + r;
    double ratio = 0.0;
    if (denom > 0.0) ratio = norm(dp) / denom;
    else if (norm(dp) > 1e-12) ratio = kInf;
    ratios.push_back(ratio);
    max_ratio = std::max(max_ratio, ratio);
  }
  rep.metrics["support_excess"] = sup_excess;
  rep.metrics["ratios"] = ratios;
  rep.metrics["max_ratio"] = max_ratio;
  rep.worst_violation = std::max(lap_excess, sup_excess);
  if (lap_excess > 0.0 || sup_excess > 0.0) {
    rep.status = Status::HypothesisViolation;
    if (lap_excess > 0.0) rep.notes.push_back("Laplacian exceeds C at a grid node");
    if (sup_excess > 0.0) rep.notes.push_back("a support inequality fails at a grid node");
  } else {
    rep.status = std::isfinite(max_ratio) ? Status::Pass : Status::Fail;
  }
  return rep;
}

CheckReport slope_stability_refinement(const ScalarField& u, double C, const std::vector<std::pair<Vec, Vec>>& points,
                                       const Modulus& omega, const PuncturedDomain& domain, double h) {
  CheckReport rep;
  rep.check = "slope_stability_refinement";
  rep.params = {{"field", u.name}, {"C", C}, {"omega", omega.name}, {"pairs", points.size()}, {"h", h}};
  Vec maxr;
  bool hyp_ok = true;
  for (double hh : {h, 0.5 * h}) {
    std::vector<SlopePair> pairs;
    for (const auto& [x, y] : points)
      pairs.push_back({x, discrete_support_slope(u, x, omega, domain, hh), y,
                       discrete_support_slope(u, y, omega, domain, hh)});
    const CheckReport sub = slope_stability_check(u, C, pairs, omega, domain, hh);
    hyp_ok = hyp_ok && sub.status == Status::Pass;
    rep.metrics[hh == h ? "coarse" : "fine"] = sub.metrics;
    maxr.push_back(sub.metrics["max_ratio"].get<double>());
  }
  rep.grid = domain.grid(0.5 * h).info();
  const double change = maxr[0] > 0.0 ? std::abs(maxr[1] - maxr[0]) / maxr[0] : (maxr[1] > 0.0 ? kInf : 0.0);
  rep.metrics["ratio_h"] = maxr[0];
  rep.metrics["ratio_h2"] = maxr[1];
  rep.metrics["relative_change"] = change;
  rep.tolerances["relative_change"] = 0.2;
  rep.worst_violation = change - 0.2;
  if (!hyp_ok) rep.status = Status::HypothesisViolation;
  else rep.status = change < 0.2 ? Status::Pass : Status::Fail;
  return rep;
}

CheckReport mean_value_monotonicity_check(const ScalarField& u, double C, const Vec& x, const Vec& radii,
                                          const MeanValueOptions& opt) {
  const int n = u.dim;
  require(static_cast<int>(x.size()) == n && n >= 1 && n <= 3, ErrorKind::Input, "point must match a 1-3 dim field");
  require(!radii.empty(), ErrorKind::Input, "no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, ErrorKind::Input, "radii must be positive");
    if (i > 0) require(radii[i] > radii[i - 1], ErrorKind::Input, "radii must increase");
  }
  const double rmax = radii.back();
  if (u.singular) require(rmax < dist(*u.singular, x), ErrorKind::Input, "radii reach the singular set");
  if (opt.max_radius > 0.0) require(rmax <= opt.max_radius, ErrorKind::Input, "radii exceed the domain");

  const double s = (opt.shift_factor >= 0.0 ? opt.shift_factor : 1.0 / (2.0 * n)) * C;
  auto phi = [&](const Vec& y) { return u(y) - s * dot(y, y); };

  CheckReport rep;
  rep.check = "mean_value_monotonicity";
  rep.params = {{"field", u.name}, {"C", C}, {"x", x}, {"radii", radii}, {"shift", s}};

  // Laplacian <= C at the centre and on each sphere.
  double lap_excess = -kInf;
  const auto dirs = sphere_lattice(n, 16);
  auto lap = [&](const Vec& y) {
    const SymMat H = check_hessian(u, y, Derivatives::FiniteDifference);
    lap_excess = std::max(lap_excess, H.trace() - C - n * check_tolerance(H, false, 1.0));
  };
  lap(x);
  for (double r : radii)
    for (const Vec& d : dirs) {
      Vec y = x;
      for (int k = 0; k < n; ++k) y[k] += r * d[k];
      lap(y);
    }

  Vec sph, ball;
  for (double r : radii) {
    sph.push_back(sphere_average(phi, x, r, opt.quadrature));
    ball.push_back(ball_average(phi, x, r, opt.quadrature));
  }
  int failures = 0;
  double worst = -kInf;
  for (std::size_t i = 1; i < radii.size(); ++i)
    for (const Vec* a : {&sph, &ball}) {
      const double rise = (*a)[i] - (*a)[i - 1] - 1e-9 * (1.0 + std::abs((*a)[i - 1]));
      worst = std::max(worst, rise);
      if (rise > 0.0) ++failures;
    }
  const double r0 = radii.front();
  const double b2 = ball_average(phi, x, 0.5 * r0, opt.quadrature);
  const double b4 = ball_average(phi, x, 0.25 * r0, opt.quadrature);
  const double ustar = (4.0 * b4 - b2) / 3.0 + s * dot(x, x);
  rep.metrics["sphere_averages"] = sph;
  rep.metrics["ball_averages"] = ball;
  rep.metrics["failures"] = failures;
  rep.metrics["u_star"] = ustar;
  try {
    const double ux = u(x);
    if (std::isfinite(ux)) {
      rep.metrics["u_at_x"] = ux;
      rep.metrics["u_star_error"] = std::abs(ustar - ux);
    }
  } catch (const Error&) {
  }
  rep.metrics["laplacian_excess"] = lap_excess;
  rep.tolerances["quadrature_slack_rel"] = 1e-9;
  rep.worst_violation = worst;
  if (lap_excess > 0.0) {
    rep.status = Status::HypothesisViolation;
    rep.notes.push_back("Laplacian exceeds C on the ball");
  } else {
    rep.status = failures == 0 ? Status::Pass : Status::Fail;
  }
  return rep;
}

void write_envelope_csv(std::ostream& os, const SampledFunction& f, const EnvelopeResult& env) {
  const int n = f.grid.dim();
  for (int i = 0; i < n; ++i) os << 'x' << i + 1 << ',';
  os << "f,gamma,contact";
  for (int i = 0; i < n; ++i) os << ",p" << i + 1;
  os << '\n' << std::setprecision(17);
  for (std::size_t j = 0; j < f.grid.size(); ++j) {
    if (!f.grid.active(j)) continue;
    for (double v : f.grid.point(j)) os << v << ',';
    os << f.values[j] << ',' << env.gamma[j] << ',' << (env.contact_mask[j] ? 1 : 0);
    for (int i = 0; i < n; ++i) {
      os << ',';
      if (j < env.slopes.size() && !env.slopes[j].empty()) os << env.slopes[j][i];
    }
    os << '\n';
  }
}

Json envelope_summary(const EnvelopeResult& env) {
  double gmin = kInf;
  for (std::size_t i = 0; i < env.gamma.size(); ++i)
    if (env.grid.active(i)) gmin = std::min(gmin, env.gamma[i]);
  return {{"nodes", env.grid.active_count()},   {"contact_nodes", env.contact_count()},
          {"vertices", env.vertices.size()},     {"min_gamma", gmin},
          {"K_estimate", env.K_estimate},        {"slope_lipschitz", env.slope_lipschitz},
          {"contact_tol", env.contact_tol},      {"lp_pivots", env.lp_pivots}};
}

}  // namespace degenlab
