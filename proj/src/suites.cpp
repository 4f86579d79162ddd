#include "degenlab/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>

#include "degenlab/distfield.hpp"
#include "degenlab/envelope.hpp"
#include "degenlab/error.hpp"
#include "degenlab/movingplane.hpp"
#include "degenlab/operators.hpp"
#include "degenlab/superaffine.hpp"
#include "degenlab/symmat.hpp"

namespace degenlab {

namespace {

using Clock = std::chrono::steady_clock;

Status status_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Hypothesis: return Status::HypothesisViolation;
    case ErrorKind::Degenerate: return Status::Degenerate;
    case ErrorKind::Resolution: return Status::Inconclusive;
    default: return Status::Fail;
  }
}

void settle(CheckReport& r) { r.status = r.worst_violation > 0.0 ? Status::Fail : Status::Pass; }

class Ctx {
 public:
  Ctx(const SuiteOptions& opt, std::vector<CheckReport>& out, const std::function<void(const CheckReport&)>& sink)
      : opt(opt), out_(out), sink_(sink) {}

  const SuiteOptions& opt;
  std::string suite;

  std::uint64_t seed(std::uint64_t salt) const { return opt.seed * 1000003ULL + salt; }
  double h(double def) const { return opt.grid_h > 0.0 ? opt.grid_h : def; }
  double tol(double t) const { return t * opt.tol_scale; }
  bool dim_ok(int n) const { return opt.n <= 0 || opt.n == n; }
  bool alpha_set() const { return opt.alpha > 0.0 && opt.alpha < 1.0; }
  std::vector<double> alphas(std::vector<double> def) const {
    return alpha_set() ? std::vector<double>{opt.alpha} : def;
  }

  // Runs one instance; library errors become the matching status.
  void run(const std::string& name, const std::string& case_id, Json params, const std::function<CheckReport()>& fn,
           std::optional<Status> expected = std::nullopt) {
    const auto t0 = Clock::now();
    CheckReport r;
    try {
      r = fn();
    } catch (const Error& e) {
      r = CheckReport{};
      r.status = status_for(e.kind());
      r.notes.push_back(e.what());
    } catch (const std::exception& e) {
      r = CheckReport{};
      r.status = Status::Fail;
      r.notes.push_back(std::string("internal error: ") + e.what());
    }
    if (r.check.empty()) r.check = name;
    if (!r.params.is_object()) r.params = Json::object();
    for (auto it = params.begin(); it != params.end(); ++it) r.params[it.key()] = it.value();
    r.params["suite"] = suite;
    r.params["case"] = case_id;
    if (expected) r.expected = expected;
    r.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    out_.push_back(r);
    if (sink_) sink_(out_.back());
  }

 private:
  std::vector<CheckReport>& out_;
  const std::function<void(const CheckReport&)>& sink_;
};

Vec annulus_point(Rng& rng, int n, double rmin = 0.05, double rmax = 1.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(rmin, rmax);
  Vec x(n);
  do {
    for (double& t : x) t = g(rng);
  } while (norm(x) == 0.0);
  const double s = u(rng) / norm(x);
  for (double& t : x) t *= s;
  return x;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// ---------------------------------------------------------------- examples

void examples_suite(Ctx& c) {
  const int points = 100;
  const double ta = c.tol(1e-8), tf = c.tol(1e-4);

  for (int n = 1; n <= 3; ++n) {
    if (!c.dim_ok(n)) continue;
    for (int l : {2, 3}) {
      const std::uint64_t sd = c.seed(100 + 10 * n + l);
      c.run("example1_residual", "example1_n" + std::to_string(n) + "_l" + std::to_string(l),
            {{"n", n}, {"l", l}, {"alpha", example1_alpha(l)}, {"points", points}}, [&] {
              CheckReport r;
              r.check = "example1_residual";
              r.seed = sd;
              r.tolerances = {{"analytic", ta}, {"finite_difference", tf}};
              Rng rng(sd);
              double ma = 0.0, mf = 0.0;
              for (int t = 0; t < points; ++t) {
                const Vec x = annulus_point(rng, n);
                const double ra = std::abs(example1_residual(x, l));
                const double rf = std::abs(example1_residual(x, l, Derivatives::FiniteDifference));
                ma = std::max(ma, ra);
                mf = std::max(mf, rf);
                r.observe(ra - ta, x);
                r.observe(rf - tf, x);
              }
              r.metrics = {{"max_analytic", ma}, {"max_fd", mf}};
              settle(r);
              return r;
            });
    }
  }

  if (c.dim_ok(2)) {
    for (double alpha : c.alphas({0.5, 0.81})) {
      const std::uint64_t sd = c.seed(200 + static_cast<int>(alpha * 100));
      c.run("example2_residual", "example2_alpha" + fmt(alpha), {{"n", 2}, {"alpha", alpha}, {"points", points}}, [&] {
        CheckReport r;
        r.check = "example2_residual";
        r.seed = sd;
        r.tolerances = {{"analytic", ta}, {"finite_difference", tf}, {"min_coefficient_eigenvalue", 0.0}};
        Rng rng(sd);
        const double eps = example2_eps(alpha);
        double ma = 0.0, mf = 0.0, emin = INFINITY, emax = -INFINITY;
        for (int t = 0; t < points; ++t) {
          const Vec x = annulus_point(rng, 2);
          const double ra = std::abs(example2_residual(x, alpha));
          const double rf = std::abs(example2_residual(x, alpha, -1.0, Derivatives::FiniteDifference));
          const Vec ev = eigenvalues(example2_coeffs(x, eps));
          ma = std::max(ma, ra);
          mf = std::max(mf, rf);
          emin = std::min(emin, ev.front());
          emax = std::max(emax, ev.back());
          r.observe(ra - ta, x);
          r.observe(rf - tf, x);
          r.observe(-ev.front(), x);
        }
        r.metrics = {{"max_analytic", ma},    {"max_fd", mf},   {"eps", eps},
                     {"min_eigenvalue", emin}, {"max_eigenvalue", emax}, {"expected_min_eigenvalue", eps * (2 - eps)}};
        settle(r);
        return r;
      });
    }

    // With eps halved the residual is -(alpha - (1-eps')^2) alpha |x|^(alpha-2): the
    // checker must see it.
    const double alpha = c.alpha_set() ? c.opt.alpha : 0.5;
    const std::uint64_t sd = c.seed(250);
    c.run("example2_perturbed_eps", "example2_half_eps", {{"alpha", alpha}}, [&] {
      CheckReport r;
      r.check = "example2_perturbed_eps";
      r.seed = sd;
      r.tolerances = {{"formula_rel", c.tol(1e-8)}, {"detect_min", 1e-3}};
      Rng rng(sd);
      const double ew = example2_eps(alpha) / 2;
      double mind = INFINITY;
      for (int t = 0; t < 20; ++t) {
        const Vec x = annulus_point(rng, 2);
        const double res = example2_residual(x, alpha, ew);
        const double expect = -(alpha - (1 - ew) * (1 - ew)) * alpha * std::pow(norm(x), alpha - 2);
        mind = std::min(mind, std::abs(res));
        r.observe(std::abs(res - expect) - c.tol(1e-8) * (1 + std::abs(expect)), x);
        r.observe(1e-3 - std::abs(res), x);
      }
      r.metrics = {{"eps_used", ew}, {"min_abs_residual", mind}};
      settle(r);
      return r;
    });
  }

  for (int n = 2; n <= 5; ++n) {
    if (!c.dim_ok(n)) continue;
    for (double alpha : c.alphas({0.3, 0.5})) {
      const std::uint64_t sd = c.seed(300 + 10 * n + static_cast<int>(alpha * 10));
      c.run("example3_residual", "example3_n" + std::to_string(n) + "_alpha" + fmt(alpha),
            {{"n", n}, {"alpha", alpha}, {"points", points}}, [&] {
              CheckReport r;
              r.check = "example3_residual";
              r.seed = sd;
              r.tolerances = {{"analytic", ta}, {"finite_difference", tf}, {"min_coefficient_eigenvalue", 0.0}};
              Rng rng(sd);
              double ma = 0.0, mf = 0.0, emin = INFINITY;
              for (int t = 0; t < points; ++t) {
                const Vec x = annulus_point(rng, n);
                const double ra = std::abs(example3_residual(x, alpha));
                const double rf = std::abs(example3_residual(x, alpha, Derivatives::FiniteDifference));
                const double e0 = eigenvalues(example3_coeffs(x, alpha)).front();
                ma = std::max(ma, ra);
                mf = std::max(mf, rf);
                emin = std::min(emin, e0);
                r.observe(ra - ta, x);
                r.observe(rf - tf, x);
                r.observe(-e0, x);
              }
              r.metrics = {{"max_analytic", ma},
                           {"max_fd", mf},
                           {"min_eigenvalue", emin},
                           {"expected_min_eigenvalue", (1 - alpha) / (n - 1)}};
              settle(r);
              return r;
            });
    }
  }

  for (int n = 2; n <= 5; ++n) {
    if (!c.dim_ok(n)) continue;
    for (double alpha : c.alphas({0.25, 0.5, 0.75})) {
      c.run("pucci_example_residual", "pucci_n" + std::to_string(n) + "_alpha" + fmt(alpha),
            {{"n", n}, {"alpha", alpha}, {"radii", 20}}, [&] {
              CheckReport r;
              r.check = "pucci_example_residual";
              const double tr = ta, tj = c.tol(1e-10), tz = c.tol(1e-12);
              r.tolerances = {{"residual", tr}, {"junction", tj}, {"root_value", tz}};
              const auto p = pucci_profile(n, alpha);
              int inner = 0, outer = 0, sign_errors = 0;
              double mr = 0.0;
              for (int i = 1; i <= 20; ++i) {
                double rr = p.root * i / 21.0;
                if (std::abs(rr - 1.0) < 1e-9) rr = p.root * (i + 0.5) / 21.0;
                const double res = std::abs(pucci_example_residual(n, alpha, rr));
                mr = std::max(mr, res);
                r.observe(res - tr, {rr});
                (rr < 1.0 ? inner : outer)++;
                if (p.d2(rr) >= 0.0 || (rr < 1.0 && p.d1(rr) <= 0.0) || (rr > 1.0 && p.d1(rr) >= 0.0)) ++sign_errors;
              }
              const double up = std::nextafter(1.0, 2.0);
              const double j0 = std::abs(p.value(1.0) - p.value(up));
              const double j1 = std::abs(p.d1(1.0) - p.d1(up));
              const double j2 = std::abs(p.d2(1.0) - p.d2(up));
              r.observe(std::max({j0, j1, j2}) - tj, {1.0});
              const double ur = p.value(p.root);
              r.observe(std::abs(ur) - tz, {p.root});
              if (!(p.root > 1.0)) r.observe(1.0 - p.root, {p.root});
              if (inner == 0 || outer == 0) r.observe(1.0, {});
              if (sign_errors) r.observe(static_cast<double>(sign_errors), {});
              r.metrics = {{"max_residual", mr},   {"junction_jump_value", j0}, {"junction_jump_d1", j1},
                           {"junction_jump_d2", j2}, {"root", p.root},          {"u_at_root", ur},
                           {"inner_radii", inner}, {"outer_radii", outer},      {"sign_errors", sign_errors},
                           {"constant", pucci_example_constant(n, alpha)}};
              settle(r);
              return r;
            });
    }
  }

  if (c.dim_ok(4)) {
    const std::uint64_t sd = c.seed(400);
    c.run("conformal_identity", "conformal_n4", {{"n", 4}, {"points", 30}}, [&] {
      CheckReport r;
      r.check = "conformal_identity";
      r.seed = sd;
      const double tol = c.tol(1e-10);
      r.tolerances = {{"relative", tol}};
      const ScalarField u = builtin("quadratic", {{"n", 4}, {"c", 0.7}, {"c0", 1.5}, {"b", {0.2, -0.1, 0.3, 0.0}}});
      const ScalarField w = conformal_w(u);
      Rng rng(sd);
      double md = 0.0;
      for (int t = 0; t < 30; ++t) {
        const Vec x = annulus_point(rng, 4, 0.1, 0.9);
        const SymMat au = conformal_hessian(u, x, ConformalForm::Au);
        const SymMat aw = conformal_hessian(w, x, ConformalForm::Aw);
        const double d = (au - aw).frobenius() / (1.0 + au.frobenius());
        md = std::max(md, d);
        r.observe(d - tol, x);
      }
      r.metrics = {{"max_rel_difference", md}};
      settle(r);
      return r;
    });
  }
}

// ------------------------------------------------------------------- kyfan

void kyfan_suite(Ctx& c) {
  const int count = 200;
  const std::uint64_t trials = c.opt.quick ? 200 : 1000;
  const std::uint64_t sd = c.seed(500);
  c.run("kyfan_sampled", "kyfan_200", {{"matrices", count}, {"frames_per_k", trials}}, [&] {
    CheckReport r;
    r.check = "kyfan_sampled";
    r.seed = sd;
    const double tol = c.tol(1e-9);
    r.tolerances = {{"lower_bound", tol}, {"eigenframe", tol}};
    Rng rng(sd);
    double min_gap = INFINITY, max_dev = 0.0;
    int cases = 0;
    for (int t = 0; t < count; ++t) {
      const int n = c.opt.n >= 2 && c.opt.n <= 6 ? c.opt.n : 2 + t % 5;
      const SymMat m = random_symmat(n, rng);
      for (int k = 1; k <= n; ++k) {
        const auto res = kyfan_sampled(m, k, trials, sd + t);
        const double dev = std::abs(res.eigenframe_value - res.exact);
        min_gap = std::min(min_gap, res.sampled_min - res.exact);
        max_dev = std::max(max_dev, dev);
        r.observe(res.exact - res.min_value - tol, {double(t), double(k)});
        r.observe(res.exact - res.sampled_min - tol, {double(t), double(k)});
        r.observe(dev - tol, {double(t), double(k)});
        ++cases;
      }
    }
    r.metrics = {{"cases", cases}, {"min_sampled_gap", min_gap}, {"max_eigenframe_deviation", max_dev}};
    r.notes.push_back("witness is (matrix index, k)");
    settle(r);
    return r;
  });

  const int instances = 500;
  const std::uint64_t sd2 = c.seed(510);
  c.run("perturbation_inequality", "perturbation_500", {{"instances", instances}}, [&] {
    CheckReport r;
    r.check = "perturbation_inequality";
    r.seed = sd2;
    r.tolerances = {{"inequality", c.tol(1e-9)}};
    Rng rng(sd2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int failures = 0, at_cap = 0;
    double worst = -INFINITY;
    for (int t = 0; t < instances; ++t) {
      const int n = c.opt.n >= 2 && c.opt.n <= 6 ? c.opt.n : 2 + t % 5;
      const int l = 2 + static_cast<int>(unif(rng) * (n - 1));
      const int k = 1 + static_cast<int>(unif(rng) * (l - 1));
      const double cap = static_cast<double>(l - k) / k;
      Vec deltas(k);
      const bool cap_case = t % 4 == 0;
      for (double& d : deltas) d = cap_case ? cap : cap * (1e-3 + unif(rng) * (1 - 1e-3));
      at_cap += cap_case;
      const SymMat m = random_symmat(n, rng, 1.0 + 3.0 * unif(rng));
      const auto rep = perturbation_inequality_check(m, deltas, l);
      worst = std::max(worst, rep.worst_violation);
      r.observe(rep.worst_violation, {double(t)});
      if (rep.status != Status::Pass) ++failures;
    }
    r.metrics = {{"instances", instances}, {"failures", failures}, {"instances_at_cap", at_cap},
                 {"worst_lhs_minus_rhs", worst}};
    r.status = failures == 0 && !(r.worst_violation > 0.0) ? Status::Pass : Status::Fail;
    return r;
  });
}

// ------------------------------------------------------------- superaffine

void superaffine_suite(Ctx& c) {
  const bool q = c.opt.quick;
  if (c.dim_ok(1)) {
    c.run("condition_superaffine", "condition_step_e1_V1", {{"field", "step_e1"}, {"V", 1.0}}, [&] {
      SuperaffineOptions o;
      o.h = c.h(1.0 / 256);
      o.v_list = {{1.0}};
      o.tol_scale = c.opt.tol_scale;
      return check_condition_superaffine(builtin("step_e1"), 2.0, 0, 4, c.seed(600), o);
    }, Status::Fail);
  }
  for (double a : c.alphas({0.25, 0.5, 0.75})) {
    for (int n : {1, 2}) {
      if (!c.dim_ok(n)) continue;
      c.run("condition_superaffine", "condition_pow_alpha_n" + std::to_string(n) + "_a" + fmt(a),
            {{"field", "pow_alpha"}, {"n", n}, {"alpha", a}}, [&] {
              SuperaffineOptions o;
              o.h = c.h(n == 1 ? 1.0 / 256 : 1.0 / 128);
              o.sphere_samples = n == 1 ? 2 : (q ? 1000 : 2000);
              o.tol_scale = c.opt.tol_scale;
              return check_condition_superaffine(builtin("pow_alpha", {{"n", n}, {"alpha", a}}), 1.0, n == 1 ? 8 : 4,
                                                 4, c.seed(610 + n), o);
            }, Status::Fail);
    }
  }
  if (c.dim_ok(2)) {
    c.run("condition_superaffine", "condition_neg_log_n2", {{"field", "neg_log"}, {"n", 2}}, [&] {
      SuperaffineOptions o;
      o.h = c.h(1.0 / 128);
      o.sphere_samples = q ? 1000 : 2000;
      o.tol_scale = c.opt.tol_scale;
      return check_condition_superaffine(builtin("neg_log", {{"n", 2}}), 1.0, q ? 8 : 16, 4, c.seed(620), o);
    });

    const auto dom = PuncturedDomain::punctured_ball(2, 1.0);
    const Grid g = dom.grid(c.h(1.0 / 32));
    GridCheckOptions go;
    go.tol_scale = c.opt.tol_scale;
    for (int k : {1, 2})
      c.run("k_superaffine_grid", "ksuper_neg_log_k" + std::to_string(k), {{"field", "neg_log"}, {"k", k}},
            [&] { return check_k_superaffine_grid(builtin("neg_log", {{"n", 2}}), k, dom, g, go); });
    c.run("k_superaffine_grid", "ksuper_convex_quadratic_k1", {{"field", "quadratic"}, {"c", 1.0}, {"k", 1}},
          [&] { return check_k_superaffine_grid(builtin("quadratic", {{"n", 2}, {"c", 1.0}}), 1, dom, g, go); },
          Status::Fail);
    c.run("k_superaffine_grid", "ksuper_max_coords_k1", {{"field", "max_coords"}, {"k", 1}}, [&] {
      return check_k_superaffine_grid(builtin("max_coords", {{"n", 2}, {"k", 1}}), 1, dom, dom.grid(c.h(1.0 / 16)), go);
    });

    for (double a : c.alphas({0.25, 0.5, 0.75})) {
      const std::uint64_t sd = c.seed(630);
      c.run("weighted_identity", "appD_pow_identity_a" + fmt(a), {{"field", "appD_pow"}, {"n", 2}, {"a", a}}, [&] {
        CheckReport r;
        r.check = "weighted_identity";
        r.seed = sd;
        const double tol = c.tol(1e-8);
        r.tolerances = {{"pointwise", tol}};
        const ScalarField u = builtin("appD_pow", {{"n", 2}, {"a", a}});
        Rng rng(sd);
        double m = 0.0;
        for (int t = 0; t < 100; ++t) {
          const Vec x = annulus_point(rng, 2);
          const double s = std::abs(weighted_partial_sum(u.hess(x), 1, a));
          m = std::max(m, s);
          r.observe(s - tol, x);
        }
        r.metrics = {{"max_abs_weighted_sum", m}, {"points", 100}};
        settle(r);
        return r;
      });
      c.run("Ak1a_grid", "appD_pow_Ak1a_a" + fmt(a), {{"field", "appD_pow"}, {"n", 2}, {"a", a}, {"k", 0}},
            [&] { return check_Ak1a(builtin("appD_pow", {{"n", 2}, {"a", a}}), 0, a, dom, g); });
    }
  }

  if (c.dim_ok(3)) {
    const int n = 3, k = 1;
    const double a = 0.5, eps = 0.1;
    const Json fp = {{"n", n}, {"k", k}, {"a", a}, {"eps", eps}};
    const PuncturedDomain dom(ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}}, 0.5), 1.0);
    const Grid g = dom.grid(c.h(1.0 / 8));
    c.run("Ak1a_grid", "appD_split_weighted", {{"field", "appD_split"}, {"field_params", fp}}, [&] {
      auto r = check_Ak1a(builtin("appD_split", fp), k, a, dom, g);
      const double bound = -eps * (1 - a - eps) / 2 + 2 * k * eps * eps;
      r.tolerances["strict_margin_bound"] = bound;
      const double mw = r.metrics["max_weighted_sum"].get<double>();
      r.metrics["margin_to_bound"] = bound - mw;
      if (!(mw < bound)) {
        r.status = Status::Fail;
        r.notes.push_back("weighted sum does not clear the strict margin");
      }
      return r;
    });
    c.run("k_superaffine_grid", "appD_split_k2_sum", {{"field", "appD_split"}, {"field_params", fp}, {"k", k + 2}},
          [&] { return check_k_superaffine_grid(builtin("appD_split", fp), k + 2, dom, g); }, Status::Fail);
  }

  if (c.dim_ok(2)) {
    const auto dom = PuncturedDomain::punctured_ball(2, 1.0);
    const Grid g = dom.grid(c.h(1.0 / 32));
    c.run("difference_tier", "difference_tier_neg_log_quadratic", {{"u", "neg_log"}, {"v", "quadratic"}, {"k", 2}}, [&] {
      return difference_tier_check(builtin("neg_log", {{"n", 2}}),
                            builtin("quadratic", {{"n", 2}, {"c", 0.5}, {"b", Vec{0.2, -0.3}}}), 2, dom, g);
    });
  }
}

// ----------------------------------------------------------------- barrier

void barrier_suite(Ctx& c) {
  c.run("h_eps_identities", "h_eps", {{"eps", 1e-3}, {"r_bar", 2.0}}, [&] {
    CheckReport r;
    r.check = "h_eps_identities";
    const double eps = 1e-3, rb = 2.0, tol = c.tol(1e-12);
    r.tolerances = {{"identity", tol}};
    r.observe(std::abs(barrier_h_eps(eps, eps, rb)) - tol, {eps});
    r.observe(std::abs(barrier_h_eps(rb, eps, rb) - 1.0) - tol, {rb});
    int samples = 0, monotone_errors = 0;
    double prev = -INFINITY, rel = 0.0;
    for (double x = eps; x <= rb; x *= 1.05) {
      const double v = barrier_h_eps(x, eps, rb), d1 = barrier_h_eps_d1(x, eps, rb), d2 = barrier_h_eps_d2(x, eps, rb);
      if (!(v > prev) || !(d1 > 0.0) || !(d2 < 0.0)) ++monotone_errors;
      prev = v;
      const double e = std::abs(d1 / x + d2) / std::abs(d2);
      rel = std::max(rel, e);
      r.observe(e - tol, {x});
      ++samples;
    }
    if (monotone_errors) r.observe(static_cast<double>(monotone_errors), {});
    r.metrics = {{"samples", samples}, {"monotone_errors", monotone_errors}, {"max_rel_d1_over_r_plus_d2", rel}};
    settle(r);
    return r;
  });

  if (c.dim_ok(2)) {
    c.run("barrier_AAB2", "AAB2_point_n2_k0", {{"E", "point"}, {"n", 2}, {"k", 0}}, [&] {
      const double h = c.h(c.opt.quick ? 0.004 : 0.002);
      const Grid g({-0.06, -0.06}, {0.06, 0.06}, h);
      BarrierOptions o;
      o.seed = c.seed(700);
      return barrier_AAB2_check(ManifoldSpec::origin(2), 0, 1.0, g, o);
    });
  }
  if (c.dim_ok(3)) {
    c.run("barrier_AAB2", "AAB2_circle_n3_k1", {{"E", "circle"}, {"n", 3}, {"k", 1}}, [&] {
      const double h = c.h(0.01);
      const Grid g({-1.06, -1.06, -0.06}, {1.06, 1.06, 0.06}, h);
      BarrierOptions o;
      o.seed = c.seed(701);
      return barrier_AAB2_check(ManifoldSpec::circle_xy(1.0), 1, 1.0, g, o);
    });
  }

  MinimumPrincipleOptions mo;
  mo.tol_scale = c.opt.tol_scale;
  mo.seed = c.seed(710);
  const auto d2 = PuncturedDomain::punctured_ball(2, 1.0);
  const auto d3 = PuncturedDomain::punctured_ball(3, 1.0);
  if (c.dim_ok(2)) {
    const Grid g2 = d2.grid(c.h(1.0 / 64));
    c.run("minimum_principle", "minprin_neg_log", {{"field", "neg_log"}, {"n", 2}, {"k", 0}},
          [&] { return minimum_principle_check(builtin("neg_log", {{"n", 2}}), d2, 0, g2, mo); });
    c.run("minimum_principle", "minprin_neg_log_minus_harmonic", {{"field", "neg_log - harmonic_poly"}, {"n", 2}, {"k", 0}},
          [&] {
            return minimum_principle_check(
                difference(builtin("neg_log", {{"n", 2}}), builtin("harmonic_poly", {{"n", 2}})), d2, 0, g2, mo);
          });
    c.run("minimum_principle", "minprin_concave_quadratic", {{"field", "quadratic"}, {"c", -1.0}, {"n", 2}, {"k", 0}},
          [&] { return minimum_principle_check(builtin("quadratic", {{"n", 2}, {"c", -1.0}}), d2, 0, g2, mo); });
  }
  if (c.dim_ok(3)) {
    const Grid g3 = d3.grid(c.h(1.0 / 16));
    c.run("minimum_principle", "minprin_newton", {{"field", "newton"}, {"n", 3}, {"k", 0}},
          [&] { return minimum_principle_check(builtin("newton", {{"n", 3}}), d3, 0, g3, mo); });
    const PuncturedDomain dr(ManifoldSpec::circle_xy(0.5), 1.0);
    c.run("minimum_principle", "minprin_ring_potential", {{"field", "ring_potential"}, {"R", 0.5}, {"k", 1}},
          [&] { return minimum_principle_check(builtin("ring_potential", {{"R", 0.5}}), dr, 1, dr.grid(c.h(1.0 / 16)), mo); });
    c.run("minimum_principle", "minprin_reject_fundamental", {{"field", "fundamental"}, {"n", 3}, {"k", 0}},
          [&] { return minimum_principle_check(builtin("fundamental", {{"n", 3}}), d3, 0, g3, mo); },
          Status::HypothesisViolation);
  }
  if (c.dim_ok(2)) {
    c.run("minimum_principle", "minprin_reject_appD_pow", {{"field", "appD_pow"}, {"n", 2}, {"a", 0.5}, {"k", 0}},
          [&] {
            auto r = minimum_principle_check(builtin("appD_pow", {{"n", 2}, {"a", 0.5}}), d2, 0,
                                             d2.grid(c.h(1.0 / 128)), mo);
            const double gap = r.metrics["boundary_min"].get<double>() - r.metrics["interior_min"].get<double>();
            r.metrics["conclusion_gap"] = gap;
            r.tolerances["conclusion_gap_min"] = 0.9;
            if (!(gap >= 0.9)) {
              r.status = Status::Fail;
              r.notes.push_back("interior minimum is not below the boundary minimum by 0.9");
            }
            return r;
          },
          Status::HypothesisViolation);
  }
}

// ------------------------------------------------------------------ slopes

void slopes_suite(Ctx& c) {
  Vec radii;
  for (int j = 1; j <= 12; ++j) radii.push_back(std::ldexp(1.0, -j));
  auto contains = [](const std::vector<Vec>& s, const Vec& p) { return std::find(s.begin(), s.end(), p) != s.end(); };

  if (c.dim_ok(2)) {
    c.run("support_slope_set", "slopes_max_coords_k1", {{"field", "max_coords"}, {"n", 2}, {"k", 1}}, [&] {
      const auto s = support_slope_set(builtin("max_coords", {{"n", 2}, {"k", 1}}),
                                       {{0, 0}, {0.5, 0}, {1, 0}, {0, 1}, {1.2, 0}, {-0.1, 0}}, radii);
      auto r = slope_set_report(s, 2);
      const bool kept = s.slopes.size() == 3 && contains(s.slopes, {0, 0}) && contains(s.slopes, {0.5, 0}) &&
                        contains(s.slopes, {1, 0});
      const bool e2_rejected = contains(s.rejected, {0, 1});
      r.metrics["expected_slopes_retained"] = kept;
      r.metrics["e2_rejected"] = e2_rejected;
      if (!kept || !e2_rejected || s.hull_dimension != 1) {
        r.status = Status::Fail;
        r.notes.push_back("slope set differs from {0, e1/2, e1} with hull dimension 1");
      }
      return r;
    });
    c.run("support_slope_set", "slopes_concave_single", {{"field", "quadratic"}, {"c", -1.0}, {"n", 2}}, [&] {
      const auto s = support_slope_set(builtin("quadratic", {{"n", 2}, {"c", -1.0}}),
                                       {{0, 0}, {0.1, 0}, {0, -0.1}, {1, 1}}, radii);
      auto r = slope_set_report(s, 2);
      if (s.slopes.size() != 1 || s.hull_dimension != 0) {
        r.status = Status::Fail;
        r.notes.push_back("expected a single slope");
      }
      return r;
    });
  }
  if (c.dim_ok(3)) {
    c.run("support_slope_set", "slopes_max_coords_k2", {{"field", "max_coords"}, {"n", 3}, {"k", 2}}, [&] {
      std::vector<Vec> cand;
      for (double a : {0.0, 0.5, 1.0})
        for (double b : {0.0, 0.5, 1.0}) cand.push_back({a, b, 0.0});
      cand.push_back({0, 0, 1});
      const auto s = support_slope_set(builtin("max_coords", {{"n", 3}, {"k", 2}}), cand, radii,
                                       Modulus::power(1.0, 0.5), c.opt.quick ? 1000 : 2000);
      auto r = slope_set_report(s, 3);
      if (s.hull_dimension != 2) {
        r.status = Status::Fail;
        r.notes.push_back("hull dimension is not 2");
      }
      return r;
    });
  }

  if (c.dim_ok(2)) {
    const auto dom = PuncturedDomain::punctured_ball(2, 1.0);
    const double h = c.h(1.0 / 32);
    const auto q = builtin("quadratic", {{"n", 2}, {"c", 0.5}, {"b", Vec{1.0, 0.0}}});
    const Modulus zero = Modulus::power(0.0, 1.0);
    c.run("slope_stability", "stability_quadratic_exact", {{"field", "quadratic"}, {"C", 2.0}}, [&] {
      std::vector<SlopePair> pairs;
      for (auto [x, y] : {std::pair<Vec, Vec>{{0.1, 0.2}, {0.3, -0.1}}, {{-0.4, 0.0}, {-0.2, 0.1}}})
        pairs.push_back({x, {x[0] + 1.0, x[1]}, y, {y[0] + 1.0, y[1]}});
      return slope_stability_check(q, 2.0, pairs, zero, dom, h);
    });
    c.run("slope_stability_refinement", "refinement_quadratic", {{"field", "quadratic"}, {"C", 2.0}}, [&] {
      const std::vector<std::pair<Vec, Vec>> pts = {
          {{0.1, 0.2}, {0.3, -0.1}}, {{-0.4, 0.0}, {-0.2, 0.1}}, {{0.0, -0.5}, {0.05, -0.45}}};
      return slope_stability_refinement(q, 2.0, pts, zero, dom, h);
    });
    c.run("slope_stability_refinement", "refinement_neg_log", {{"field", "neg_log"}, {"C", 0.0}, {"omega", "8r"}}, [&] {
      const std::vector<std::pair<Vec, Vec>> far = {
          {{0.5, 0.0}, {0.6, 0.1}}, {{0.0, 0.6}, {-0.1, 0.5}}, {{-0.5, -0.3}, {-0.45, -0.3}}};
      return slope_stability_refinement(builtin("neg_log", {{"n", 2}}), 0.0, far, Modulus::power(8.0, 1.0), dom, h);
    });
    c.run("slope_sequence", "sequence_sqrt_modulus", {{"field", "quadratic"}, {"omega", "r^0.5"}}, [&] {
      CheckReport r;
      r.check = "slope_sequence";
      r.tolerances = {{"final_difference", 0.1}, {"monotone", 1e-12}};
      const Modulus root = Modulus::power(1.0, 0.5);
      const Vec x{0.2, 0.1};
      const Vec p = discrete_support_slope(q, x, root, dom, h);
      double last = INFINITY;
      Vec diffs;
      for (double s : {0.4, 0.2, 0.1, 0.05}) {
        const Vec qy = discrete_support_slope(q, {x[0] + s, x[1]}, root, dom, h);
        const double d = std::hypot(p[0] - qy[0], p[1] - qy[1]);
        r.observe(d - last - 1e-12, {x[0] + s, x[1]});
        last = d;
        diffs.push_back(d);
      }
      r.observe(last - 0.1, x);
      r.metrics = {{"differences", diffs}, {"distances", Vec{0.4, 0.2, 0.1, 0.05}}};
      settle(r);
      return r;
    });
  }

  struct MV {
    std::string id, field;
    int n;
    double C;
    Vec x, radii;
  };
  const std::vector<MV> mv = {
      {"mean_value_harmonic_n2", "harmonic_poly", 2, 0.0, {0.3, -0.2}, {0.1, 0.2, 0.4, 0.8}},
      {"mean_value_harmonic_n3", "harmonic_poly", 3, 0.0, {0.1, 0.2, 0.3}, {0.1, 0.3, 0.5}},
      {"mean_value_neg_log_n2", "neg_log", 2, 0.0, {0.5, 0.0}, {0.05, 0.1, 0.2, 0.3, 0.45}},
      {"mean_value_newton_n3", "newton", 3, 0.0, {0.5, 0.0, 0.0}, {0.05, 0.1, 0.2, 0.3, 0.45}},
      {"mean_value_concave_n2", "quadratic", 2, -4.0, {0.1, 0.1}, {0.1, 0.2, 0.3}},
      {"mean_value_concave_n3", "quadratic", 3, -6.0, {0.1, 0.1, 0.1}, {0.1, 0.2, 0.3}},
  };
  for (const auto& m : mv) {
    if (!c.dim_ok(m.n)) continue;
    Json fp = {{"n", m.n}};
    if (m.field == "quadratic") fp["c"] = -1.0;
    c.run("mean_value_monotonicity", m.id, {{"field", m.field}, {"field_params", fp}, {"C", m.C}}, [&] {
      MeanValueOptions o;
      if (c.opt.quick) o.quadrature = 32;
      return mean_value_monotonicity_check(builtin(m.field, fp), m.C, m.x, m.radii, o);
    });
  }
  if (c.dim_ok(2)) {
    c.run("mean_value_monotonicity", "mean_value_subharmonic_rejected", {{"field", "quadratic"}, {"c", 1.0}, {"C", 0.0}},
          [&] {
            return mean_value_monotonicity_check(builtin("quadratic", {{"n", 2}, {"c", 1.0}}), 0.0, {0.0, 0.0},
                                                 {0.1, 0.2});
          },
          Status::HypothesisViolation);
  }
}

// --------------------------------------------------------------------- abp

ScalarField norm_field(int n) {
  ScalarField f;
  f.name = "norm";
  f.dim = n;
  f.smooth = false;
  f.eval = [](const Vec& x) { return norm(x); };
  return f;
}

ScalarField zero_field(int n) { return builtin("quadratic", {{"n", n}, {"c", 0.0}}); }

void abp_suite(Ctx& c) {
  for (int n : {1, 2}) {
    if (!c.dim_ok(n)) continue;
    const auto dom = PuncturedDomain::punctured_ball(n, 0.25);
    const double h = c.h(n == 1 ? (c.opt.quick ? 1.0 / 256 : 1.0 / 512) : (c.opt.quick ? 1.0 / 32 : 1.0 / 64));
    for (double eps : {0.02, 0.05, 0.1}) {
      c.run("abp", std::string(n == 1 ? "abp_vee" : "abp_cone") + "_eps" + fmt(eps),
            {{"u", "|x|"}, {"v", "0"}, {"n", n}, {"eps", eps}, {"r_bar", 0.25}},
            [&] { return abp_check(norm_field(n), zero_field(n), eps, dom, h); });
    }
  }
  if (c.dim_ok(2)) {
    const auto dom = PuncturedDomain::punctured_ball(2, 0.25);
    c.run("abp", "abp_degenerate_shift", {{"u", "|x| + 1"}, {"v", "0"}, {"n", 2}, {"eps", 0.1}}, [&] {
      ScalarField s = norm_field(2);
      s.eval = [](const Vec& x) { return norm(x) + 1.0; };
      return abp_check(s, zero_field(2), 0.1, dom, 1.0 / 32);
    }, Status::Degenerate);
    c.run("abp", "abp_reject_large_eps", {{"u", "|x|"}, {"v", "0"}, {"n", 2}, {"eps", 0.3}},
          [&] { return abp_check(norm_field(2), zero_field(2), 0.3, dom, 1.0 / 32); }, Status::HypothesisViolation);
  }

  // Envelope properties on random 2D data.
  const int pairs = 50;
  const std::uint64_t sd = c.seed(800);
  c.run("envelope_properties", "envelope_idempotent_monotone", {{"pairs", pairs}, {"grid", "9x9"}}, [&] {
    CheckReport r;
    r.check = "envelope_properties";
    r.seed = sd;
    const double tol = c.tol(1e-12);
    r.tolerances = {{"relative", tol}};
    Rng rng(sd);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 0.5);
    const Grid g({-1, -1}, {1, 1}, 0.25);
    int idem_fail = 0, mono_fail = 0, below_fail = 0;
    for (int t = 0; t < pairs; ++t) {
      SampledFunction f{g, Vec(g.size())}, fg{g, Vec(g.size())};
      for (std::size_t i = 0; i < g.size(); ++i) {
        f.values[i] = u(rng);
        fg.values[i] = f.values[i] + pos(rng);
      }
      const auto ef = convex_envelope(f, {-1.0, false});
      const auto eg = convex_envelope(fg, {-1.0, false});
      const auto ee = convex_envelope(SampledFunction{g, ef.gamma}, {-1.0, false});
      bool idem = true, mono = true, below = true;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double s = tol * (1.0 + std::abs(f.values[i]));
        if (std::abs(ee.gamma[i] - ef.gamma[i]) > s) idem = false;
        if (ef.gamma[i] > eg.gamma[i] + s) mono = false;
        if (ef.gamma[i] > f.values[i] + s) below = false;
        r.observe(std::abs(ee.gamma[i] - ef.gamma[i]) - s, g.point(i));
        r.observe(ef.gamma[i] - eg.gamma[i] - s, g.point(i));
        r.observe(ef.gamma[i] - f.values[i] - s, g.point(i));
      }
      idem_fail += !idem;
      mono_fail += !mono;
      below_fail += !below;
    }
    r.metrics = {{"idempotence_failures", idem_fail}, {"monotonicity_failures", mono_fail},
                 {"below_failures", below_fail}};
    settle(r);
    return r;
  });
}

// --------------------------------------------------------------- distfield

void distfield_suite(Ctx& c) {
  const int samples = c.opt.quick ? 24 : 48;
  const std::vector<std::pair<std::string, ManifoldSpec>> specs = {
      {"point", ManifoldSpec::origin(3)},
      {"circle", ManifoldSpec::circle_xy(1.0)},
      {"sphere", ManifoldSpec::sphere({0, 0, 0}, 1.0)}};
  int salt = 0;
  for (const auto& [ename, e] : specs) {
    for (const std::string g : {"t", "t2", "neglog"}) {
      const std::uint64_t sd = c.seed(900 + salt++);
      c.run("hessian_expansion_stability", "expansion_" + ename + "_" + g,
            {{"E", ename}, {"G", g}, {"d0", 0.04}, {"levels", 3}, {"samples", samples}},
            [&] { return hessian_expansion_stability(e, profile_by_name(g, 1.0), 0.04, 3, samples, 2.0 * c.opt.tol_scale, sd); });
    }
  }
  const std::vector<std::tuple<std::string, ManifoldSpec, Vec>> lc = {
      {"affine_line", ManifoldSpec::affine({0, 0, 0}, {{0, 0, 1}}), {0.3, -0.2, 5}},
      {"circle", ManifoldSpec::circle_xy(1.0), {1.1, 0.2, 0.05}},
      {"point", ManifoldSpec::origin(3), {0.1, 0.2, 0.3}},
      {"sphere", ManifoldSpec::sphere({0, 0, 0}, 1.0), {0.1, 0.9, 0.1}}};
  for (const auto& [name, e, x] : lc)
    c.run("local_coordinates", "local_coordinates_" + name, {{"E", name}, {"x", x}},
          [&] { return local_coordinates_check(e, x); });
  c.run("sandwich", "sandwich_tangent_circle_linear", {{"E", "tangent_circle"}, {"alpha", -1.0}},
        [&] { return sandwich_check(tangent_circle(1.0), 0.2, c.opt.quick ? 500 : 2000, -1.0, c.seed(950)); });
  c.run("sandwich", "sandwich_tangent_circle_holder", {{"E", "tangent_circle"}, {"alpha", 0.5}},
        [&] { return sandwich_check(tangent_circle(1.0), 0.2, c.opt.quick ? 500 : 2000, 0.5, c.seed(951)); });
}

// ------------------------------------------------------------- movingplane

SolutionSample sample_builtin(const std::string& name, int n, double alpha, double h) {
  if (name == "pucci_radial") {
    const double rb = pucci_root(n, alpha);
    return SolutionSample::from_field(scaled_argument(builtin(name, {{"n", n}, {"alpha", alpha}}), rb), h);
  }
  Json p = {{"n", n}};
  if (name == "pow_alpha") p["alpha"] = alpha;
  return SolutionSample::from_field(builtin(name, p), h);
}

// Classification match as its own report, so the raw report keeps its status.
void expect_class(Ctx& c, const std::string& case_id, const CheckReport& raw, const std::string& want) {
  c.run("classification_match", case_id + "_classification", {{"expected_classification", want}}, [&] {
    CheckReport r;
    r.check = "classification_match";
    const std::string got = raw.metrics.value("classification", std::string("none"));
    r.metrics = {{"classification", got}};
    r.status = got == want ? Status::Pass : Status::Fail;
    if (got != want) r.notes.push_back("classification " + got);
    return r;
  });
}

void movingplane_suite(Ctx& c) {
  const int rand_dirs = c.opt.quick ? 10 : 50;
  if (!c.opt.builtin.empty()) {
    const std::string name = c.opt.builtin;
    const int n = c.opt.n > 0 ? c.opt.n : (name == "example4_1d" || name == "example5_sin" ? 1 : 2);
    const double alpha = c.alpha_set() ? c.opt.alpha : 0.5;
    const double h = c.h(n == 1 ? 1.0 / 256 : (n == 2 ? 1.0 / 64 : 1.0 / 16));
    const Json params = {{"field", name}, {"n", n}, {"alpha", alpha}, {"h", h}};
    std::optional<SolutionSample> u;
    c.run("solution_sample", name + "_sample", params, [&] {
      u = sample_builtin(name, n, alpha, h);
      CheckReport r;
      r.check = "solution_sample";
      r.grid = u->grid.info();
      r.metrics = {{"boundary_max_abs", u->boundary_max_abs()}, {"interior_min", u->interior_min()}};
      return r;
    });
    if (!u) return;
    Vec e1(n, 0.0);
    e1[0] = 1.0;
    c.run("monotonicity", name + "_monotonicity", params, [&] { return monotonicity_check(*u, e1); });
    c.run("radial_symmetry", name + "_radial", params,
          [&] { return radial_symmetry_report(*u, scan_directions(n, rand_dirs, c.seed(1000))); });
    return;
  }

  for (int n : {1, 2, 3}) {
    if (!c.dim_ok(n)) continue;
    const double h = c.h(n == 3 ? 1.0 / 8 : (c.opt.quick ? 1.0 / 16 : 1.0 / 32));
    const std::string id = "paraboloid_n" + std::to_string(n);
    CheckReport raw;
    c.run("radial_symmetry", id, {{"field", "paraboloid"}, {"n", n}, {"h", h}}, [&] {
      raw = radial_symmetry_report(sample_builtin("paraboloid", n, 0.5, h), scan_directions(n, rand_dirs, c.seed(1001)));
      return raw;
    });
    expect_class(c, id, raw, "SYMMETRIC+MONOTONE");
  }

  if (c.dim_ok(1)) {
    const double h = c.h(1.0 / 256);
    {
      CheckReport raw;
      c.run("radial_symmetry", "example4_1d", {{"field", "example4_1d"}, {"n", 1}, {"h", h}}, [&] {
        const auto u = sample_builtin("example4_1d", 1, 0.5, h);
        raw = radial_symmetry_report(u, scan_directions(1));
        raw.metrics["lambda_bar_minus_e1"] = lambda_bar_scan(u, {-1.0}).lambda_bar;
        return raw;
      }, Status::Fail);
      expect_class(c, "example4_1d", raw, "ASYMMETRIC");
    }
    {
      CheckReport raw;
      const auto u = sample_builtin("example5_sin", 1, 0.5, h);
      c.run("monotonicity", "example5_sin_monotonicity", {{"field", "example5_sin"}, {"n", 1}, {"h", h}},
            [&] { return monotonicity_check(u, {1.0}); }, Status::Fail);
      c.run("radial_symmetry", "example5_sin", {{"field", "example5_sin"}, {"n", 1}, {"h", h}}, [&] {
        raw = radial_symmetry_report(u, scan_directions(1));
        return raw;
      }, Status::Fail);
      expect_class(c, "example5_sin", raw, "SYMMETRIC+NONMONOTONE");
    }
  }

  const int pn = c.opt.n == 3 ? 3 : 2;
  if (c.dim_ok(pn)) {
    const double alpha = c.alpha_set() ? c.opt.alpha : 0.5;
    const double h = c.h(pn == 2 ? (c.opt.quick ? 1.0 / 32 : 1.0 / 64) : 1.0 / 16);
    const Json params = {{"field", "pucci_radial"}, {"n", pn}, {"alpha", alpha}, {"h", h}};
    const auto u = sample_builtin("pucci_radial", pn, alpha, h);
    Vec e1(pn, 0.0);
    e1[0] = 1.0;
    c.run("monotonicity", "pucci_radial_monotonicity", params, [&] { return monotonicity_check(u, e1); },
          Status::Fail);
    CheckReport raw;
    c.run("radial_symmetry", "pucci_radial", params, [&] {
      raw = radial_symmetry_report(u, scan_directions(pn, rand_dirs, c.seed(1002)));
      return raw;
    }, Status::Fail);
    expect_class(c, "pucci_radial", raw, "SYMMETRIC+NONMONOTONE");
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"examples", "kyfan", "superaffine", "barrier",
                                                 "slopes",   "abp",   "distfield",   "movingplane"};
  return names;
}

bool is_suite(const std::string& name) {
  const auto& s = suite_names();
  return name == "all" || std::find(s.begin(), s.end(), name) != s.end();
}

std::vector<CheckReport> run_suite(const std::string& name, const SuiteOptions& opt,
                                   const std::function<void(const CheckReport&)>& sink) {
  require(is_suite(name), ErrorKind::Input, "unknown suite: " + name);
  require(opt.tol_scale > 0.0, ErrorKind::Input, "tol_scale must be positive");
  require(opt.grid_h >= 0.0, ErrorKind::Input, "grid_h must be nonnegative");
  require(opt.builtin.empty() || name == "movingplane", ErrorKind::Input, "--builtin applies to movingplane only");
  std::vector<CheckReport> out;
  Ctx c(opt, out, sink);
  const std::vector<std::pair<std::string, void (*)(Ctx&)>> table = {
      {"examples", examples_suite}, {"kyfan", kyfan_suite}, {"superaffine", superaffine_suite},
      {"barrier", barrier_suite},   {"slopes", slopes_suite}, {"abp", abp_suite},
      {"distfield", distfield_suite}, {"movingplane", movingplane_suite}};
  for (const auto& [s, fn] : table) {
    if (name != "all" && name != s) continue;
    c.suite = s;
    fn(c);
  }
  return out;
}

int suite_exit_code(const std::vector<CheckReport>& reports) {
  bool fail = false, inconclusive = false;
  for (const auto& r : reports) {
    if (r.ok()) continue;
    (r.status == Status::Inconclusive ? inconclusive : fail) = true;
  }
  return fail ? 1 : (inconclusive ? 3 : 0);
}

}  // namespace degenlab
