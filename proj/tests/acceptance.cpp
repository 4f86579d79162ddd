// Acceptance battery: one PASS/FAIL line per criterion.
//   acceptance [--cli <path to degenlab>]
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "degenlab/envelope.hpp"
#include "degenlab/suites.hpp"
#include "oracles.hpp"

using namespace degenlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
  bool ok = true;
  std::vector<std::string> why;

  void need(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      why.push_back(what);
    }
  }
};

class Reports {
 public:
  explicit Reports(std::vector<CheckReport> rs) : rs_(std::move(rs)) {
    for (const auto& r : rs_)
      index_[r.params["suite"].get<std::string>() + "/" + r.params["case"].get<std::string>()] = &r;
  }
  const CheckReport* get(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? nullptr : it->second;
  }

 private:
  std::vector<CheckReport> rs_;
  std::map<std::string, const CheckReport*> index_;
};

double metric(const CheckReport* r, const char* k) {
  if (!r || !r->metrics.contains(k) || !r->metrics[k].is_number()) return NAN;
  return r->metrics[k].get<double>();
}

// The report exists and its status matches.
void need_status(Criterion& c, const Reports& rs, const std::string& key, Status s) {
  const CheckReport* r = rs.get(key);
  if (!r) {
    c.need(false, key + " missing");
    return;
  }
  c.need(r->status == s, key + " is " + std::string(to_string(r->status)) + ", wanted " + std::string(to_string(s)));
}

void need_le(Criterion& c, const Reports& rs, const std::string& key, const char* m, double bound) {
  const double v = metric(rs.get(key), m);
  std::ostringstream os;
  os << key << "." << m << " = " << v << " > " << bound;
  c.need(v <= bound, os.str());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int failures = 0;

void print(int id, const std::string& title, const Criterion& c, const std::string& detail = "") {
  std::cout << (c.ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << title;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << "\n";
  for (const auto& w : c.why) std::cout << "        " << w << "\n";
  failures += !c.ok;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

struct CliRun {
  int code = -1;
  double seconds = 0.0;
  std::string output;
};

CliRun run_cli(const std::string& cli, const std::string& args, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string cmd = "\"" + cli + "\" " + args + " --out \"" + dir.string() + "\" 2>\"" +
                          (dir / "stderr.txt").string() + "\"";
  const auto t0 = Clock::now();
  const int st = std::system(cmd.c_str());
  CliRun r;
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  r.output = slurp(dir / "all.jsonl");
  return r;
}

std::vector<std::array<double, 2>> points_2d(const Grid& g) {
  std::vector<std::array<double, 2>> p;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = g.point(i);
    p.push_back({x[0], x[1]});
  }
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

  SuiteOptions opt;
  const auto t0 = Clock::now();
  const Reports rs(run_suite("all", opt));
  const double battery_s = std::chrono::duration<double>(Clock::now() - t0).count();

  {
    Criterion c;
    const std::string k = "kyfan/kyfan_200";
    const CheckReport* r = rs.get(k);
    need_status(c, rs, k, Status::Pass);
    need_le(c, rs, k, "max_eigenframe_deviation", 1e-9);
    c.need(metric(r, "cases") == 800.0, "expected 800 (matrix, k) cases");
    c.need(r && r->elapsed_ms < 5000.0, "runtime over 5 s");
    print(1, "sampled-frame minimum of partial sums, 200 matrices, n = 2..6, all k", c,
          r ? "min gap " + fmt(metric(r, "min_sampled_gap")) + ", " + fmt(r->elapsed_ms / 1000) + " s" : "");
  }
  {
    Criterion c;
    const std::string k = "kyfan/perturbation_500";
    need_status(c, rs, k, Status::Pass);
    c.need(metric(rs.get(k), "failures") == 0.0, "failures");
    c.need(metric(rs.get(k), "instances") == 500.0, "instance count");
    print(2, "perturbation inequality on 500 instances", c, "worst lhs-rhs " + fmt(metric(rs.get(k), "worst_lhs_minus_rhs")));
  }
  {
    Criterion c;
    double ma = 0, mf = 0;
    for (int n = 1; n <= 3; ++n)
      for (int l : {2, 3}) {
        const std::string k = "examples/example1_n" + std::to_string(n) + "_l" + std::to_string(l);
        need_status(c, rs, k, Status::Pass);
        need_le(c, rs, k, "max_analytic", 1e-8);
        need_le(c, rs, k, "max_fd", 1e-4);
        ma = std::max(ma, metric(rs.get(k), "max_analytic"));
        mf = std::max(mf, metric(rs.get(k), "max_fd"));
      }
    print(3, "example1_residual, n in {1,2,3}, l in {2,3}", c, "analytic " + fmt(ma) + ", fd " + fmt(mf));
  }
  {
    Criterion c;
    std::vector<std::string> keys = {"examples/example2_alpha0.5", "examples/example2_alpha0.81"};
    for (int n = 2; n <= 5; ++n)
      for (const char* a : {"0.3", "0.5"}) keys.push_back("examples/example3_n" + std::to_string(n) + "_alpha" + a);
    double minev = INFINITY;
    for (const auto& k : keys) {
      need_status(c, rs, k, Status::Pass);
      need_le(c, rs, k, "max_analytic", 1e-8);
      need_le(c, rs, k, "max_fd", 1e-4);
      const double e = metric(rs.get(k), "min_eigenvalue");
      c.need(e > 0.0, k + " coefficients not positive definite");
      minev = std::min(minev, e);
    }
    need_status(c, rs, "examples/example2_half_eps", Status::Pass);
    print(4, "example2/example3 residuals and coefficient ellipticity", c, "min coefficient eigenvalue " + fmt(minev));
  }
  {
    Criterion c;
    double mr = 0, mj = 0;
    for (int n = 2; n <= 5; ++n)
      for (const char* a : {"0.25", "0.5", "0.75"}) {
        const std::string k = "examples/pucci_n" + std::to_string(n) + "_alpha" + a;
        need_status(c, rs, k, Status::Pass);
        need_le(c, rs, k, "max_residual", 1e-8);
        for (const char* j : {"junction_jump_value", "junction_jump_d1", "junction_jump_d2"}) {
          need_le(c, rs, k, j, 1e-10);
          mj = std::max(mj, metric(rs.get(k), j));
        }
        c.need(metric(rs.get(k), "root") > 1.0, k + " root not above 1");
        c.need(std::abs(metric(rs.get(k), "u_at_root")) <= 1e-12, k + " u(root) too large");
        c.need(metric(rs.get(k), "inner_radii") > 0 && metric(rs.get(k), "outer_radii") > 0, k + " branch unsampled");
        mr = std::max(mr, metric(rs.get(k), "max_residual"));
      }
    print(5, "pucci_radial residual on both branches, 12 (n, alpha) pairs", c, "residual " + fmt(mr) + ", jump " + fmt(mj));
  }
  {
    Criterion c;
    auto grid_h_at_most = [&](const std::string& k, double hmax) {
      const CheckReport* r = rs.get(k);
      c.need(r && r->grid && r->grid->h <= hmax, k + " grid spacing above " + fmt(hmax));
    };
    need_status(c, rs, "superaffine/condition_step_e1_V1", Status::Fail);
    grid_h_at_most("superaffine/condition_step_e1_V1", 1.0 / 256);
    for (const char* a : {"0.25", "0.5", "0.75"}) {
      need_status(c, rs, std::string("superaffine/condition_pow_alpha_n1_a") + a, Status::Fail);
      grid_h_at_most(std::string("superaffine/condition_pow_alpha_n1_a") + a, 1.0 / 256);
      need_status(c, rs, std::string("superaffine/condition_pow_alpha_n2_a") + a, Status::Fail);
      grid_h_at_most(std::string("superaffine/condition_pow_alpha_n2_a") + a, 1.0 / 128);
    }
    need_status(c, rs, "superaffine/condition_neg_log_n2", Status::Pass);
    grid_h_at_most("superaffine/condition_neg_log_n2", 1.0 / 128);
    print(6, "punctured-ball condition: step and |x|^a violate, -log|x| passes", c);
  }
  {
    Criterion c;
    for (const char* a : {"0.25", "0.5", "0.75"}) {
      const std::string k = std::string("superaffine/appD_pow_identity_a") + a;
      need_status(c, rs, k, Status::Pass);
      need_le(c, rs, k, "max_abs_weighted_sum", 1e-8);
    }
    const std::string mp = "barrier/minprin_reject_appD_pow";
    need_status(c, rs, mp, Status::HypothesisViolation);
    c.need(metric(rs.get(mp), "conclusion_gap") >= 0.9, "interior value not 0.9 below the boundary minimum");
    need_status(c, rs, "superaffine/appD_split_weighted", Status::Pass);
    need_status(c, rs, "superaffine/appD_split_k2_sum", Status::Fail);
    print(7, "weighted identity, its minimum-principle failure, split field", c,
          "gap " + fmt(metric(rs.get(mp), "conclusion_gap")) + ", split margin " +
              fmt(metric(rs.get("superaffine/appD_split_weighted"), "margin_to_bound")));
  }
  {
    Criterion c;
    need_status(c, rs, "barrier/h_eps", Status::Pass);
    for (const char* k : {"barrier/AAB2_point_n2_k0", "barrier/AAB2_circle_n3_k1"}) {
      need_status(c, rs, k, Status::Pass);
      c.need(metric(rs.get(k), "min_margin") > 0.0, std::string(k) + " margin not positive");
      const double q = metric(rs.get(k), "ratio_quotient");
      c.need(q >= 0.5 && q <= 2.0, std::string(k) + " shell ratio off by more than 2");
    }
    print(8, "barrier identities and positivity near a point and a circle", c,
          "ratio quotients " + fmt(metric(rs.get("barrier/AAB2_point_n2_k0"), "ratio_quotient")) + ", " +
              fmt(metric(rs.get("barrier/AAB2_circle_n3_k1"), "ratio_quotient")));
  }
  {
    Criterion c;
    for (const char* k : {"minprin_neg_log", "minprin_neg_log_minus_harmonic", "minprin_concave_quadratic",
                          "minprin_newton", "minprin_ring_potential"})
      need_status(c, rs, std::string("barrier/") + k, Status::Pass);
    need_status(c, rs, "barrier/minprin_reject_fundamental", Status::HypothesisViolation);
    need_status(c, rs, "barrier/minprin_reject_appD_pow", Status::HypothesisViolation);
    print(9, "minimum principle: 5 instances pass, 2 counterexamples rejected", c);
  }
  {
    Criterion c;
    for (const char* e : {"point", "circle", "sphere"})
      for (const char* g : {"t", "t2", "neglog"})
        need_status(c, rs, std::string("distfield/expansion_") + e + "_" + g, Status::Pass);
    print(10, "distance-function expansion on 9 (E, G) pairs, factors nonincreasing", c);
  }
  {
    Criterion c;
    for (const char* s : {"abp_vee", "abp_cone"})
      for (const char* e : {"0.02", "0.05", "0.1"}) {
        const std::string k = std::string("abp/") + s + "_eps" + e;
        need_status(c, rs, k, Status::Pass);
        const double n = s == std::string("abp_vee") ? 1 : 2;
        c.need(std::pow(std::stod(e), n) <= 1.1 * metric(rs.get(k), "det_integral"), k + " eps^n above 1.1 integral");
      }
    need_status(c, rs, "abp/envelope_idempotent_monotone", Status::Pass);
    // Brute-force plane oracle on 17 x 17 grids.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 3; ++t) {
      const Grid g({0.0, 0.0}, {1.0, 1.0}, 1.0 / 16);
      SampledFunction f{g, Vec(g.size())};
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec x = g.point(i);
        f.values[i] = t == 2 ? std::sin(6 * x[0]) * std::cos(4 * x[1]) + 0.4 * x[0] * x[1] : u(rng);
      }
      const Vec env = convex_envelope(f).gamma;
      const auto ref = oracle::envelope_2d_planes(points_2d(g), f.values);
      for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(env[i] - ref[i]));
    }
    c.need(worst <= 1e-9, "envelope differs from the plane oracle by " + fmt(worst));
    print(11, "ABP on the vee and cone, envelope properties, plane oracle", c, "oracle deviation " + fmt(worst));
  }
  {
    Criterion c;
    need_status(c, rs, "slopes/slopes_max_coords_k1", Status::Pass);
    need_status(c, rs, "slopes/slopes_max_coords_k2", Status::Pass);
    for (const char* k : {"slopes/refinement_quadratic", "slopes/refinement_neg_log"}) {
      need_status(c, rs, k, Status::Pass);
      need_le(c, rs, k, "relative_change", 0.2);
    }
    for (const char* k : {"mean_value_harmonic_n2", "mean_value_harmonic_n3", "mean_value_neg_log_n2",
                          "mean_value_newton_n3"})
      need_status(c, rs, std::string("slopes/") + k, Status::Pass);
    print(12, "slope sets, slope stability under refinement, mean-value monotonicity", c);
  }
  {
    Criterion c;
    for (int n : {1, 2, 3}) {
      const std::string k = "movingplane/paraboloid_n" + std::to_string(n);
      need_status(c, rs, k, Status::Pass);
      need_status(c, rs, k + "_classification", Status::Pass);
      const CheckReport* r = rs.get(k);
      if (r && r->grid)
        for (double lb : r->metrics["lambda_bars"].get<Vec>())
          c.need(lb <= 2 * r->grid->h, k + " lambda_bar above 2h");
    }
    need_status(c, rs, "movingplane/example4_1d_classification", Status::Pass);
    need_status(c, rs, "movingplane/example5_sin_monotonicity", Status::Fail);
    need_status(c, rs, "movingplane/pucci_radial_monotonicity", Status::Fail);
    need_status(c, rs, "movingplane/pucci_radial_classification", Status::Pass);
    const CheckReport* p = rs.get("movingplane/pucci_radial");
    c.need(p && metric(p, "shell_spread") <= p->tolerances.at("shell_spread"), "pucci shells not symmetric");
    print(13, "moving plane: paraboloid, example4_1d, example5_sin, pucci_radial", c);
  }
  {
    Criterion c;
    std::string detail;
    if (!cli.empty()) {
      const fs::path tmp = fs::temp_directory_path() / ("degenlab_acceptance_" + std::to_string(::getpid()));
      const CliRun q1 = run_cli(cli, "all --quick --deterministic", tmp / "q1");
      const CliRun q2 = run_cli(cli, "all --quick --deterministic", tmp / "q2");
      const CliRun full = run_cli(cli, "all --deterministic", tmp / "full");
      c.need(q1.code == 0 && q2.code == 0, "quick battery exit codes " + std::to_string(q1.code) + ", " +
                                               std::to_string(q2.code));
      c.need(full.code == 0, "full battery exit code " + std::to_string(full.code));
      c.need(q1.seconds < 60.0 && q2.seconds < 60.0, "quick battery over 60 s");
      c.need(full.seconds < 600.0, "full battery over 10 min");
      c.need(!q1.output.empty() && q1.output == q2.output, "quick reports differ between runs");
      detail = "quick " + fmt(q1.seconds) + " s / " + fmt(q2.seconds) + " s, full " + fmt(full.seconds) +
               " s, identical " + (q1.output == q2.output ? "yes" : "no");
      std::error_code ec;
      fs::remove_all(tmp, ec);
    } else {
      c.need(false, "CLI not available; pass --cli");
      detail = "in-process full battery " + fmt(battery_s) + " s";
    }
    print(14, "CLI battery timing and determinism", c, detail);
  }

  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << "\n";
  return failures == 0 ? 0 : 1;
}
