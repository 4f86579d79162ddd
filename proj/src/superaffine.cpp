#include "degenlab/superaffine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "degenlab/distfield.hpp"
#include "degenlab/error.hpp"

namespace degenlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dist_between(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

bool axis_neighbors_active(const Grid& g, std::size_t idx) {
  for (int a = 0; a < g.dim(); ++a)
    for (int s : {-1, 1}) {
      const auto nb = g.neighbor(idx, a, s);
      if (!nb || !g.active(*nb)) return false;
    }
  return true;
}

// Offsets of the 3^n - 1 box neighbours; empty when one is missing or masked.
std::vector<std::size_t> box_neighbors(const Grid& g, std::size_t idx, std::vector<std::vector<int>>* offsets) {
  const int n = g.dim();
  const auto mi = g.multi_index(idx);
  std::vector<std::size_t> out;
  offsets->clear();
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (int c = 0; c < total; ++c) {
    std::vector<int> off(n);
    int t = c;
    bool zero = true;
    for (int i = 0; i < n; ++i) {
      off[i] = t % 3 - 1;
      t /= 3;
      zero = zero && off[i] == 0;
    }
    if (zero) continue;
    std::vector<int> m = mi;
    for (int i = 0; i < n; ++i) {
      m[i] += off[i];
      if (m[i] < 0 || m[i] >= g.counts()[i]) return {};
    }
    const std::size_t j = g.flat_index(m);
    if (!g.active(j)) return {};
    out.push_back(j);
    offsets->push_back(off);
  }
  return out;
}

GridInfo grid_info(const Grid& g) { return g.info(); }

// Nodes of the grid that the FD tiers test.
std::vector<std::size_t> interior_nodes(const Grid& g, const PuncturedDomain& dom) {
  std::vector<std::size_t> out;
  const double excl = dom.exclusion_radius(g.h());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i) || !axis_neighbors_active(g, i)) continue;
    const Vec x = g.point(i);
    if (!dom.contains(x) || dist(dom.singular, x) <= excl) continue;
    out.push_back(i);
  }
  return out;
}

Json vec_json(const Vec& v) { return Json(v); }

}  // namespace

PuncturedDomain::PuncturedDomain(ManifoldSpec e, double r, Vec c)
    : r_bar(r), center(c.empty() ? Vec(e.n, 0.0) : std::move(c)), singular(std::move(e)) {
  require(r_bar > 0.0, ErrorKind::Input, "domain radius must be positive");
  require(static_cast<int>(center.size()) == singular.n, ErrorKind::Input, "domain center has wrong dimension");
}

PuncturedDomain PuncturedDomain::punctured_ball(int n, double r) { return {ManifoldSpec::origin(n), r}; }

void PuncturedDomain::validate() const {
  using K = ManifoldSpec::Kind;
  const auto& e = singular;
  double reach = 0.0;
  switch (e.kind) {
    case K::PointSet:
      for (const Vec& p : e.points) reach = std::max(reach, dist_between(p, center));
      break;
    case K::Sphere:
    case K::Circle:
      reach = dist_between(e.center, center) + e.radius;
      break;
    case K::AffineSlice:
      require(e.radius > 0.0, ErrorKind::Input, "an unbounded affine slice is not inside a ball");
      reach = dist_between(e.center, center) + e.radius;
      break;
    case K::Curve:
      for (int i = 0; i < 512; ++i) reach = std::max(reach, dist_between(e.curve(i / 512.0), center));
      break;
  }
  require(reach < r_bar, ErrorKind::Input, "singular set must lie strictly inside the ball");
}

Grid PuncturedDomain::grid(double h) const { return Grid::ball(dim(), r_bar, h, center); }

bool PuncturedDomain::contains(const Vec& x) const { return dist_between(x, center) <= r_bar * (1.0 + 1e-12); }

// ---------------------------------------------------------------------------

CheckReport check_condition_superaffine(const ScalarField& u, double r_bar, int v_samples, int r_samples,
                                        std::uint64_t seed, const SuperaffineOptions& opt) {
  const int n = u.dim;
  require(n >= 1 && n <= 3, ErrorKind::Input, "condition check runs on grids of dimension 1..3");
  require(r_bar > 0.0 && r_samples >= 1 && v_samples >= 0, ErrorKind::Input, "bad radius or sample counts");
  const double h = opt.h;
  require(r_bar / r_samples >= 4.0 * h, ErrorKind::Resolution, "grid too coarse for the smallest radius");

  CheckReport rep;
  rep.check = "condition_superaffine";
  rep.params = {{"field", u.name},  {"field_params", u.params},   {"n", n},
                {"r_bar", r_bar},   {"v_samples", v_samples},     {"r_samples", r_samples},
                {"v_max", opt.v_max}, {"sphere_samples", opt.sphere_samples}};
  rep.seed = seed;

  const Grid g = Grid::ball(n, r_bar, h);
  rep.grid = grid_info(g);
  // Interior nodes sorted by radius; the puncture itself is skipped.
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.active(i)) continue;
    const double r = norm(g.point(i));
    if (r < 1e-12 * h) continue;
    order.emplace_back(r, i);
  }
  std::sort(order.begin(), order.end());
  std::vector<Vec> pts(order.size());
  Vec uval(order.size()), rad(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    pts[j] = g.point(order[j].second);
    uval[j] = u(pts[j]);
    rad[j] = order[j].first;
    if (!std::isfinite(uval[j])) fail(ErrorKind::Domain, "field is not finite at a grid node");
  }

  Vec radii;
  for (int j = 1; j <= r_samples; ++j) radii.push_back(r_bar * j / r_samples);
  // Cached sphere values per radius; V enters linearly.
  const auto lattice = sphere_lattice(n, opt.sphere_samples);
  std::vector<Vec> sphere_u(radii.size());
  for (std::size_t j = 0; j < radii.size(); ++j)
    for (const Vec& d : lattice) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = radii[j] * d[i];
      sphere_u[j].push_back(u(x));
    }

  std::vector<Vec> vs{Vec(n, 0.0)};
  for (const Vec& v : opt.v_list) {
    require(static_cast<int>(v.size()) == n, ErrorKind::Input, "V has wrong dimension");
    vs.push_back(v);
  }
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int s = 0; s < v_samples; ++s) {
    Vec v(n);
    double nv = 0.0;
    do {
      nv = 0.0;
      for (double& t : v) {
        t = gauss(rng);
        nv += t * t;
      }
    } while (nv < 1e-20);
    const double mag = opt.v_max * unif(rng);
    for (double& t : v) t *= mag / std::sqrt(nv);
    vs.push_back(v);
  }

  Json worst = nullptr;
  double worst_gap = -kInf;
  int violations = 0;
  double max_tol = 0.0;
  for (const Vec& v : vs) {
    Vec w(pts.size());
    for (std::size_t j = 0; j < pts.size(); ++j) w[j] = uval[j] + dot(v, pts[j]);
    // Prefix minima along increasing radius.
    Vec pmin(w.size());
    std::vector<std::size_t> parg(w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (j == 0 || w[j] < pmin[j - 1]) {
        pmin[j] = w[j];
        parg[j] = j;
      } else {
        pmin[j] = pmin[j - 1];
        parg[j] = parg[j - 1];
      }
    }
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double r = radii[j];
      const auto cnt = std::lower_bound(rad.begin(), rad.end(), r * (1.0 - 1e-12)) - rad.begin();
      if (cnt == 0) continue;
      const double inf_int = pmin[cnt - 1];
      // Sphere minimum of u + V.x: start from the cached lattice values.
      std::size_t best = 0;
      double bv = kInf;
      for (std::size_t q = 0; q < lattice.size(); ++q) {
        double val = sphere_u[j][q];
        for (int i = 0; i < n; ++i) val += v[i] * r * lattice[q][i];
        if (val < bv) {
          bv = val;
          best = q;
        }
      }
      double min_bd = bv;
      if (n > 1) {
        const auto wf = [&](const Vec& x) { return u(x) + dot(v, x); };
        std::vector<Vec> seeds{lattice[best]};
        min_bd = std::min(min_bd, sphere_minimum(wf, Vec(n, 0.0), r, seeds, 1).value);
      }
      const double tol = opt.tol_scale * (1e-8 + 1e-6 * std::abs(min_bd));
      max_tol = std::max(max_tol, tol);
      const double gap = min_bd - inf_int;
      if (gap > tol) ++violations;
      if (gap - tol > worst_gap) {
        worst_gap = gap - tol;
        rep.worst_violation = gap - tol;
        rep.witness = pts[parg[cnt - 1]];
        worst = {{"V", vec_json(v)}, {"r", r}, {"inf_interior", inf_int}, {"min_boundary", min_bd}, {"gap", gap}};
      }
    }
  }
  rep.tolerances = {{"abs", 1e-8 * opt.tol_scale}, {"rel_boundary", 1e-6 * opt.tol_scale}, {"max_used", max_tol}};
  rep.metrics = {{"worst", worst}, {"violations", violations}, {"pairs", vs.size() * radii.size()},
                 {"interior_nodes", pts.size()}};
  rep.status = violations > 0 ? Status::Fail : Status::Pass;
  rep.notes.push_back("interior infimum is a grid minimum; sphere minimum by lattice scan plus pattern search");
  return rep;
}

// ---------------------------------------------------------------------------

SymMat check_hessian(const ScalarField& u, const Vec& x, Derivatives d) {
  if (d == Derivatives::Analytic && u.has_hess()) return u.hess(x);
  const double ds = u.dist_to_singular(x);
  double step = default_fd_step2(x);
  if (std::isfinite(ds)) step = std::min(step, 1e-3 * ds);
  // Richardson extrapolation: fourth-order truncation, so nearly cancelling
  // Hessians are still resolved against the relative tolerance.
  SymMat fine = fd_hessian(u, x, 0.5 * step);
  const SymMat coarse = fd_hessian(u, x, step);
  fine = (4.0 / 3.0) * fine;
  fine -= (1.0 / 3.0) * coarse;
  return fine;
}

double check_tolerance(const SymMat& h, bool analytic, double tol_scale) {
  return analytic ? tol_scale * (1e-10 * h.frobenius() + 1e-12) : tol_scale * (1e-5 * h.frobenius() + 1e-8);
}

namespace {

// Shared sweep of the Hessian tier with a generic eigenvalue functional.
template <class Functional>
void hessian_tier(CheckReport& rep, const ScalarField& u, const PuncturedDomain& dom, const Grid& g,
                  const GridCheckOptions& opt, Functional fn, std::size_t* tested, double* max_value,
                  double* max_tol) {
  const bool analytic = opt.derivatives == Derivatives::Analytic && u.has_hess();
  for (std::size_t idx : interior_nodes(g, dom)) {
    const Vec x = g.point(idx);
    const SymMat hm = check_hessian(u, x, opt.derivatives);
    const double val = fn(hm);
    const double tol = check_tolerance(hm, analytic, opt.tol_scale);
    *max_tol = std::max(*max_tol, tol);
    *max_value = std::max(*max_value, val);
    rep.observe(val - tol, x);
    ++*tested;
  }
}

// Probe quadratics c + p.(y - x) + (1/2)(y - x)^T H (y - x) with
// H = c diag(s), s in {-1, 1}^n, touching u from below on the 3^n box.
void touching_tier(CheckReport& rep, const ScalarField& u, int k, const PuncturedDomain& dom, const Grid& g,
                   double tol_scale, std::size_t* tested, std::size_t* touched) {
  const int n = g.dim();
  const double h = g.h();
  std::vector<std::vector<int>> offs;
  for (std::size_t idx : interior_nodes(g, dom)) {
    const auto nbs = box_neighbors(g, idx, &offs);
    if (nbs.empty()) continue;
    const Vec x = g.point(idx);
    const double u0 = u(x);
    Vec un(nbs.size());
    for (std::size_t j = 0; j < nbs.size(); ++j) un[j] = u(g.point(nbs[j]));
    // One-sided and central difference quotients per axis.
    std::vector<std::array<double, 3>> cand(n);
    for (int a = 0; a < n; ++a) {
      const double fp = u(g.point(*g.neighbor(idx, a, 1)));
      const double fm = u(g.point(*g.neighbor(idx, a, -1)));
      cand[a] = {(u0 - fm) / h, 0.5 * (fp - fm) / h, (fp - u0) / h};
    }
    ++*tested;
    const double ttol = 1e-12 * (1.0 + std::abs(u0));
    const double vtol = tol_scale * 1e-8;
    int combos = 1;
    for (int a = 0; a < n; ++a) combos *= 3;
    for (int pc = 0; pc < combos; ++pc) {
      Vec p(n);
      int t = pc;
      for (int a = 0; a < n; ++a) {
        p[a] = cand[a][t % 3];
        t /= 3;
      }
      for (int sm = 0; sm < (1 << n); ++sm) {
        Vec s(n);
        for (int a = 0; a < n; ++a) s[a] = (sm >> a) & 1 ? 1.0 : -1.0;
        Vec sorted = s;
        std::sort(sorted.begin(), sorted.end());
        const double sigma = std::accumulate(sorted.begin(), sorted.begin() + k, 0.0);
        if (sigma <= 0.0) continue;
        // Largest c > 0 with the quadratic below u at every neighbour.
        double c_hi = kInf, c_lo = 0.0;
        bool ok = true;
        for (std::size_t j = 0; j < nbs.size() && ok; ++j) {
          double lin = 0.0, q = 0.0;
          for (int a = 0; a < n; ++a) {
            const double d = offs[j][a] * h;
            lin += p[a] * d;
            q += 0.5 * s[a] * d * d;
          }
          const double r = un[j] - u0 - lin + ttol;
          if (q > 0.0)
            c_hi = std::min(c_hi, r / q);
          else if (q < 0.0)
            c_lo = std::max(c_lo, r / q);
          else if (r < 0.0)
            ok = false;
        }
        if (!ok || c_hi <= 0.0 || c_hi < c_lo) continue;
        ++*touched;
        const double viol = sigma * std::min(c_hi, 4.0 / (h * h)) - vtol;
        rep.observe(viol, x);
      }
    }
  }
}

}  // namespace

CheckReport check_k_superaffine_grid(const ScalarField& u, int k, const PuncturedDomain& domain, const Grid& grid,
                                     const GridCheckOptions& opt) {
  const int n = u.dim;
  require(k >= 1 && k <= n, ErrorKind::Input, "k must lie in 1..n");
  require(grid.dim() == n && domain.dim() == n, ErrorKind::Input, "grid and domain must match the field");
  CheckReport rep;
  rep.check = "k_superaffine_grid";
  rep.params = {{"field", u.name}, {"field_params", u.params}, {"k", k}, {"r_bar", domain.r_bar},
                {"singular", domain.singular.name()}};
  rep.grid = grid_info(grid);
  rep.tolerances = {{"exclusion", domain.exclusion_radius(grid.h())}};
  std::size_t tested = 0, probes = 0, touched = 0;
  double max_sum = -kInf, max_tol = 0.0;
  const bool smooth_tier = u.smooth || opt.both_tiers;
  const bool touch_tier = !u.smooth || opt.both_tiers;
  if (smooth_tier) {
    hessian_tier(rep, u, domain, grid, opt, [k](const SymMat& m) { return partial_sum(m, k); }, &tested, &max_sum,
                 &max_tol);
    rep.tolerances["hessian_rel"] = (u.has_hess() && opt.derivatives == Derivatives::Analytic ? 1e-10 : 1e-5) *
                                    opt.tol_scale;
    rep.tolerances["hessian_max_used"] = max_tol;
  }
  if (touch_tier) {
    touching_tier(rep, u, k, domain, grid, opt.tol_scale, &probes, &touched);
    rep.tolerances["touching_contact"] = 1e-12;
    rep.tolerances["touching_sum"] = 1e-8 * opt.tol_scale;
    rep.notes.push_back("touching tier is a necessary-condition checker over a finite probe dictionary");
  }
  rep.metrics = {{"hessian_nodes", tested},
                 {"max_partial_sum", tested ? Json(max_sum) : Json(nullptr)},
                 {"touching_nodes", probes},
                 {"touching_probes", touched},
                 {"tiers", Json::array()}};
  if (smooth_tier) rep.metrics["tiers"].push_back("hessian");
  if (touch_tier) rep.metrics["tiers"].push_back("touching");
  if (tested + probes == 0) fail(ErrorKind::Resolution, "no interior nodes to test");
  rep.status = rep.worst_violation > 0.0 ? Status::Fail : Status::Pass;
  return rep;
}

CheckReport check_Ak1a(const ScalarField& u, int k, double a, const PuncturedDomain& domain, const Grid& grid,
                       const GridCheckOptions& opt) {
  const int n = u.dim;
  require(a >= 0.0 && a <= 1.0, ErrorKind::Input, "a must lie in [0,1]");
  require(k >= 0 && k + 2 <= n, ErrorKind::Input, "A_{k+1,a} needs 0 <= k <= n-2");
  require(grid.dim() == n && domain.dim() == n, ErrorKind::Input, "grid and domain must match the field");
  CheckReport rep;
  rep.check = "A_k1a";
  rep.params = {{"field", u.name}, {"field_params", u.params}, {"k", k}, {"a", a}, {"r_bar", domain.r_bar},
                {"singular", domain.singular.name()}};
  rep.grid = grid_info(grid);
  std::size_t tested = 0;
  double max_sum = -kInf, max_tol = 0.0;
  double min_sum = kInf, max_abs = 0.0;
  hessian_tier(
      rep, u, domain, grid, opt,
      [&](const SymMat& m) {
        const double v = weighted_partial_sum(m, k + 1, a);
        min_sum = std::min(min_sum, v);
        max_abs = std::max(max_abs, std::abs(v));
        return v;
      },
      &tested, &max_sum, &max_tol);
  if (tested == 0) fail(ErrorKind::Resolution, "no interior nodes to test");
  const bool analytic = opt.derivatives == Derivatives::Analytic && u.has_hess();
  rep.tolerances = {{"exclusion", domain.exclusion_radius(grid.h())},
                    {"hessian_rel", (analytic ? 1e-10 : 1e-5) * opt.tol_scale},
                    {"hessian_max_used", max_tol}};
  rep.metrics = {{"nodes", tested},     {"max_weighted_sum", max_sum}, {"min_weighted_sum", min_sum},
                 {"max_abs_weighted_sum", max_abs}, {"derivatives", analytic ? "analytic" : "fd"}};
  rep.status = rep.worst_violation > 0.0 ? Status::Fail : Status::Pass;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

void check_h_domain(double r, double eps, double r_bar) {
  require(eps > 0.0 && eps < r_bar, ErrorKind::Input, "h_eps needs 0 < eps < r_bar");
  const double slack = 1e-14 * r_bar;
  if (!(r >= eps - slack && r <= r_bar + slack)) fail(ErrorKind::Domain, "h_eps is defined on [eps, r_bar]");
}

}  // namespace

double barrier_h_eps(double r, double eps, double r_bar) {
  check_h_domain(r, eps, r_bar);
  return 1.0 - std::log(r / r_bar) / std::log(eps / r_bar);
}

double barrier_h_eps_d1(double r, double eps, double r_bar) {
  check_h_domain(r, eps, r_bar);
  return -1.0 / (r * std::log(eps / r_bar));
}

double barrier_h_eps_d2(double r, double eps, double r_bar) {
  check_h_domain(r, eps, r_bar);
  return 1.0 / (r * r * std::log(eps / r_bar));
}

ScalarField barrier_h_field(int n, double eps, double r_bar) {
  RadialProfile p;
  p.name = "h_eps";
  p.value = [=](double r) { return barrier_h_eps(r, eps, r_bar); };
  p.d1 = [=](double r) { return barrier_h_eps_d1(r, eps, r_bar); };
  p.d2 = [=](double r) { return barrier_h_eps_d2(r, eps, r_bar); };
  ScalarField f = radial_field(p, n);
  f.name = "h_eps";
  f.params = {{"n", n}, {"eps", eps}, {"r_bar", r_bar}};
  return f;
}

namespace {

void check_s(double s, BarrierVariant v) {
  if (s <= 0.0) fail(ErrorKind::Singularity, "barrier g at s = 0");
  if (v == BarrierVariant::KPos && !(s < 1.0)) fail(ErrorKind::Domain, "loglog barrier needs 0 < s < 1");
  if (v == BarrierVariant::K0 && !std::isfinite(s)) fail(ErrorKind::Domain, "barrier argument not finite");
}

}  // namespace

double barrier_g(double s, BarrierVariant v) {
  check_s(s, v);
  const double l = std::log(s);
  return v == BarrierVariant::K0 ? -l : -l + std::log(-l);
}

double barrier_g_d1(double s, BarrierVariant v) {
  check_s(s, v);
  const double l = std::log(s);
  return v == BarrierVariant::K0 ? -1.0 / s : -1.0 / s + 1.0 / (s * l);
}

double barrier_g_d2(double s, BarrierVariant v) {
  check_s(s, v);
  const double l = std::log(s);
  const double s2 = s * s;
  return v == BarrierVariant::K0 ? 1.0 / s2 : 1.0 / s2 - 1.0 / (s2 * l) - 1.0 / (s2 * l * l);
}

double barrier_g_hat(const Vec& x, const ManifoldSpec& e, double r_bar, BarrierVariant v) {
  require(r_bar > 0.0, ErrorKind::Input, "r_bar must be positive");
  return barrier_g(dist(e, x) / r_bar, v);
}

ScalarField barrier_g_field(const ManifoldSpec& e, double r_bar, BarrierVariant v) {
  ScalarField f;
  f.name = v == BarrierVariant::K0 ? "g_hat_k0" : "g_hat_loglog";
  f.dim = e.n;
  f.singular = e;
  f.params = {{"r_bar", r_bar}, {"E", e.name()}};
  f.eval = [e, r_bar, v](const Vec& x) { return barrier_g_hat(x, e, r_bar, v); };
  return f;
}

CheckReport barrier_AAB2_check(const ManifoldSpec& e, int k, double r_bar, const Grid& grid,
                               const BarrierOptions& opt) {
  const int n = e.n;
  require(k >= 0 && k <= n - 2 && k == e.k, ErrorKind::Input, "AAB2 needs 0 <= k = dim E <= n-2");
  require(grid.dim() == n, ErrorKind::Input, "grid dimension must match E");
  require(opt.d_tilde_max > 0.0 && opt.d_tilde_max < 1.0 / std::exp(1.0), ErrorKind::Input,
          "d_tilde_max must lie in (0, 1/e)");
  const BarrierVariant variant = BarrierVariant::KPos;
  const ScalarField gh = barrier_g_field(e, r_bar, variant);
  CheckReport rep;
  rep.check = "barrier_AAB2";
  rep.params = {{"E", e.name()}, {"n", n}, {"k", k}, {"r_bar", r_bar}, {"d_tilde_max", opt.d_tilde_max},
                {"variant", "loglog"}};
  rep.grid = grid_info(grid);
  rep.seed = opt.seed;

  // -Hess g_hat by central differences with a step proportional to d.
  auto neg_sum = [&](const Vec& x, double d) {
    SymMat hm = fd_hessian(gh, x, 1e-3 * d);
    hm = -1.0 * hm;
    return partial_sum(hm, k + 2);
  };
  auto leading = [&](double d) {
    const double l = std::log(d / r_bar);
    return 1.0 / (d * d * l * l);
  };

  const double dmax = opt.d_tilde_max * r_bar;
  const double dmin = 3.0 * grid.h();
  std::size_t tested = 0;
  double min_margin = kInf, min_normalized = kInf, smallest_dt = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.active(i)) continue;
    const Vec x = grid.point(i);
    const double d = dist(e, x);
    if (d >= dmax || d < dmin) continue;
    const double s = neg_sum(x, d);
    ++tested;
    min_margin = std::min(min_margin, s);
    min_normalized = std::min(min_normalized, s / leading(d));
    smallest_dt = std::min(smallest_dt, d / r_bar);
    // Positivity: the violation is the negated sum.
    rep.observe(-s, x);
  }
  if (tested == 0) fail(ErrorKind::Resolution, "no grid nodes in the tube 3h <= d < d_tilde_max r_bar");

  // Shell ratio test at d~ = 0.8 d_tilde_max and half of it.
  const double d1 = 0.8 * dmax, d2 = 0.5 * d1;
  auto shell_min = [&](double d) {
    double m = kInf;
    for (const Vec& x : tube_points(e, d, opt.shell_samples, opt.seed)) m = std::min(m, neg_sum(x, d));
    return m;
  };
  const double m1 = shell_min(d1), m2 = shell_min(d2);
  const double measured = m2 / m1;
  const double predicted = leading(d2) / leading(d1);
  const double rr = measured / predicted;
  const bool ratio_ok = m1 > 0.0 && m2 > 0.0 && rr >= 0.5 && rr <= 2.0;

  rep.metrics = {{"nodes", tested},
                 {"min_margin", min_margin},
                 {"min_normalized_margin", min_normalized},
                 {"smallest_d_tilde", smallest_dt},
                 {"shell_d_tilde", {d1 / r_bar, d2 / r_bar}},
                 {"shell_min", {m1, m2}},
                 {"ratio_measured", measured},
                 {"ratio_predicted", predicted},
                 {"ratio_quotient", rr},
                 {"ratio_ok", ratio_ok}};
  rep.tolerances = {{"positivity", 0.0}, {"ratio_factor", 2.0}, {"fd_step_rel", 1e-3}, {"stencil_exclusion", dmin}};

  if (k == 0 && n == 2) {
    // h_eps identity: lambda_1 + lambda_2 of Hess h_eps vanishes.
    const double eps = 0.5 * smallest_dt * r_bar;
    double worst = 0.0, worst_fd = 0.0;
    const ScalarField hf = barrier_h_field(n, eps, r_bar);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!grid.active(i)) continue;
      const Vec x = grid.point(i);
      const double r = dist(e, x);
      if (r >= dmax || r < dmin) continue;
      Vec xr = x;
      for (int j = 0; j < n; ++j) xr[j] -= e.points[0][j];
      const double rn = norm(xr);
      const RadialEigs ev = radial_hessian_eigs(
          {"h", [&](double t) { return barrier_h_eps(t, eps, r_bar); },
           [&](double t) { return barrier_h_eps_d1(t, eps, r_bar); },
           [&](double t) { return barrier_h_eps_d2(t, eps, r_bar); }, {}, 0.0},
          rn, n);
      const double scale = std::abs(barrier_h_eps_d2(rn, eps, r_bar));
      worst = std::max(worst, std::abs(ev.values[0] + ev.values[1]) / scale);
      const SymMat hm = fd_hessian(hf, xr, 1e-3 * rn);
      worst_fd = std::max(worst_fd, std::abs(partial_sum(hm, 2)) / scale);
    }
    rep.metrics["h_eps_identity_rel"] = worst;
    rep.metrics["h_eps_identity_rel_fd"] = worst_fd;
    rep.tolerances["h_eps_identity_rel"] = 1e-12;
    rep.tolerances["h_eps_identity_rel_fd"] = 1e-5;
    if (worst > 1e-12 || worst_fd > 1e-5) rep.observe(std::max(worst - 1e-12, worst_fd - 1e-5), {});
    rep.notes.push_back("positivity uses the loglog barrier; -ln s gives lambda_1 + lambda_2 = 0 exactly");
  }
  rep.status = rep.worst_violation > 0.0 || !ratio_ok ? Status::Fail : Status::Pass;
  return rep;
}

// ---------------------------------------------------------------------------

bool bounded_below_near(const ScalarField& u, const ManifoldSpec& e, double scale, std::uint64_t seed, Json* trace) {
  Vec mins;
  for (int j = 1; j <= 30; ++j) {
    const double d = scale * std::ldexp(1.0, -j);
    double m = kInf;
    for (const Vec& x : tube_points(e, d, 32, seed + j)) {
      double v = kInf;
      try {
        v = u(x);
      } catch (const Error&) {
        continue;
      }
      if (std::isfinite(v)) m = std::min(m, v);
    }
    if (!std::isfinite(m)) break;
    mins.push_back(m);
  }
  if (trace) *trace = mins;
  if (mins.size() < 12) return true;
  // Unbounded when the last ten drops are positive and do not shrink
  // geometrically.
  const std::size_t s = mins.size();
  for (std::size_t j = s - 10; j < s; ++j) {
    const double drop = mins[j - 1] - mins[j];
    const double prev = mins[j - 2] - mins[j - 1];
    if (!(drop > 0.0) || !(prev > 0.0) || drop < 0.9 * prev) return true;
  }
  return false;
}

CheckReport minimum_principle_check(const ScalarField& u, const PuncturedDomain& domain, int k, const Grid& grid,
                                    const MinimumPrincipleOptions& opt) {
  const int n = u.dim;
  require(k >= -1 && k + 2 <= n, ErrorKind::Input, "minimum principle needs -1 <= k <= n-2");
  require(grid.dim() == n && domain.dim() == n, ErrorKind::Input, "grid and domain must match the field");
  domain.validate();
  const double h = grid.h();
  const double slack = opt.slack >= 0.0 ? opt.slack : 10.0 * h;
  CheckReport rep;
  rep.check = "minimum_principle";
  rep.params = {{"field", u.name}, {"field_params", u.params}, {"k", k}, {"r_bar", domain.r_bar},
                {"singular", domain.singular.name()}};
  rep.grid = grid_info(grid);
  rep.seed = opt.seed;

  // Values: every node of the ball off E; the boundary shell is the last
  // 1.5h of radius.
  double int_min = kInf, bd_min = kInf;
  Vec int_arg;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.active(i)) continue;
    const Vec x = grid.point(i);
    if (!domain.contains(x) || dist(domain.singular, x) < 0.5 * h) continue;
    const double v = u(x);
    if (!std::isfinite(v)) fail(ErrorKind::Domain, "field is not finite at a grid node");
    if (dist_between(x, domain.center) > domain.r_bar - 1.5 * h) {
      bd_min = std::min(bd_min, v);
    } else if (v < int_min) {
      int_min = v;
      int_arg = x;
    }
  }
  if (!std::isfinite(int_min) || !std::isfinite(bd_min)) fail(ErrorKind::Resolution, "grid has no interior or shell");

  Json trace;
  const bool bounded = bounded_below_near(u, domain.singular, 0.5 * domain.r_bar, opt.seed, &trace);

  // Hypothesis on the FD-safe interior.
  std::size_t tested = 0;
  double hyp_max = -kInf, hyp_excess = -kInf;
  Vec hyp_arg;
  const bool analytic = opt.derivatives == Derivatives::Analytic && u.has_hess();
  for (std::size_t idx : interior_nodes(grid, domain)) {
    const Vec x = grid.point(idx);
    const SymMat hm = check_hessian(u, x, opt.derivatives);
    const double s = partial_sum(hm, k + 2);
    const double ex = s - check_tolerance(hm, analytic, opt.tol_scale);
    ++tested;
    hyp_max = std::max(hyp_max, s);
    if (ex > hyp_excess) {
      hyp_excess = ex;
      hyp_arg = x;
    }
  }
  if (tested == 0) fail(ErrorKind::Resolution, "no interior nodes for the hypothesis");
  const bool hyp_ok = hyp_excess <= 0.0;
  const double gap = bd_min - int_min;
  const bool conclusion = int_min >= bd_min - slack;

  rep.metrics = {{"interior_min", int_min},      {"boundary_min", bd_min},
                 {"gap", gap},                   {"conclusion_holds", conclusion},
                 {"hypothesis_nodes", tested},   {"hypothesis_max_sum", hyp_max},
                 {"hypothesis_holds", hyp_ok},   {"bounded_below", bounded},
                 {"shell_minima", trace}};
  rep.tolerances = {{"slack", slack},
                    {"hessian_rel", (analytic ? 1e-10 : 1e-5) * opt.tol_scale},
                    {"exclusion", domain.exclusion_radius(h)},
                    {"boundary_shell", 1.5 * h}};
  if (!bounded) {
    rep.status = Status::HypothesisViolation;
    rep.notes.push_back("field is not bounded below near E");
    rep.observe(gap - slack, int_arg);
  } else if (!hyp_ok) {
    rep.status = Status::HypothesisViolation;
    rep.notes.push_back("partial eigenvalue sum hypothesis fails; the conclusion is not expected");
    rep.observe(hyp_excess, hyp_arg);
  } else {
    rep.observe(gap - slack, int_arg);
    rep.status = conclusion ? Status::Pass : Status::Fail;
  }
  return rep;
}

// ---------------------------------------------------------------------------

Modulus Modulus::power(double c, double exponent) {
  Modulus m;
  m.name = std::to_string(c) + "*r^" + std::to_string(exponent);
  m.f = [c, exponent](double r) { return c * std::pow(r, exponent); };
  return m;
}

int affine_hull_dimension(const std::vector<Vec>& pts, double tol) {
  if (pts.empty()) return -1;
  std::vector<Vec> basis;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    Vec v(pts[i].size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = pts[i][j] - pts[0][j];
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : basis) {
        const double c = dot(v, b);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] -= c * b[j];
      }
    const double nv = norm(v);
    if (nv > tol) {
      for (double& t : v) t /= nv;
      basis.push_back(v);
    }
  }
  return static_cast<int>(basis.size());
}

SlopeSet support_slope_set(const ScalarField& u, const std::vector<Vec>& candidates, const Vec& radii,
                           const Modulus& omega, int sphere_samples) {
  const int n = u.dim;
  require(!radii.empty(), ErrorKind::Input, "support_slope_set needs radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    require(radii[i] > 0.0, ErrorKind::Input, "radii must be positive");
    if (i > 0) require(radii[i] < radii[i - 1], ErrorKind::Input, "radii must be strictly decreasing");
  }
  SlopeSet out;
  out.radii = radii;
  out.omega = omega.name;
  const auto lattice = sphere_lattice(n, sphere_samples);
  const Vec zero(n, 0.0);
  for (const Vec& p : candidates) {
    require(static_cast<int>(p.size()) == n, ErrorKind::Input, "slope has wrong dimension");
    const auto w = [&](const Vec& x) { return u(x) - dot(p, x); };
    double margin = kInf;
    for (double r : radii) margin = std::min(margin, (sphere_minimum(w, zero, r, lattice).value + r * omega(r)) / r);
    out.margins.push_back(margin);
    (margin >= 0.0 ? out.slopes : out.rejected).push_back(p);
  }
  out.hull_dimension = affine_hull_dimension(out.slopes);
  return out;
}

CheckReport slope_set_report(const SlopeSet& s, int n) {
  CheckReport rep;
  rep.check = "support_slope_set";
  rep.params = {{"n", n}, {"radii", s.radii}, {"omega", s.omega}};
  rep.metrics = {{"retained", s.slopes}, {"rejected", s.rejected}, {"margins", s.margins},
                 {"hull_dimension", s.hull_dimension}};
  rep.tolerances = {{"max_hull_dimension", n - 1.0}};
  rep.observe(s.hull_dimension - (n - 1.0), {});
  rep.status = s.hull_dimension <= n - 1 ? Status::Pass : Status::Fail;
  return rep;
}

CheckReport difference_tier_check(const ScalarField& u, const ScalarField& v, int k, const PuncturedDomain& domain,
                           const Grid& grid) {
  const int n = u.dim;
  require(v.dim == n, ErrorKind::Input, "u and v must share a dimension");
  CheckReport rep;
  rep.check = "difference_tier";
  rep.params = {{"u", u.name}, {"v", v.name}, {"k", k}};
  rep.grid = grid_info(grid);
  const CheckReport ku = check_k_superaffine_grid(u, k, domain, grid);
  double vmin = kInf;
  for (std::size_t idx : interior_nodes(grid, domain)) {
    const SymMat hm = check_hessian(v, grid.point(idx), Derivatives::Analytic);
    vmin = std::min(vmin, partial_sum(hm, k) + check_tolerance(hm, v.has_hess(), 1.0));
  }
  const ScalarField diff = difference(u, v);
  const CheckReport d1 = check_k_superaffine_grid(diff, 1, domain, grid);
  rep.metrics = {{"u_in_Ak", ku.status == Status::Pass}, {"v_min_partial_sum", vmin},
                 {"u_minus_v_in_A1", d1.status == Status::Pass}, {"u_minus_v_worst", d1.worst_violation}};
  rep.worst_violation = d1.worst_violation;
  rep.witness = d1.witness;
  if (ku.status != Status::Pass || vmin < 0.0) {
    rep.status = Status::HypothesisViolation;
    rep.notes.push_back("hypotheses on u or v fail");
  } else {
    rep.status = d1.status;
  }
  return rep;
}

}  // namespace degenlab
