#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "degenlab/fields.hpp"
#include "degenlab/manifold.hpp"
#include "degenlab/operators.hpp"
#include "degenlab/report.hpp"

namespace degenlab {

/// Ball B_r(center) with a singular set E removed.
struct PuncturedDomain {
  double r_bar = 1.0;
  Vec center;
  ManifoldSpec singular;
  double exclusion = 0.0;  // 0 selects 3h

  PuncturedDomain(ManifoldSpec e, double r_bar, Vec center = {});
  static PuncturedDomain punctured_ball(int n, double r_bar);

  int dim() const { return singular.n; }
  // Throws unless E lies strictly inside the ball.
  void validate() const;
  double exclusion_radius(double h) const { return exclusion > 0.0 ? exclusion : 3.0 * h; }
  // Ball grid; E is not masked (checkers apply their own exclusion).
  Grid grid(double h) const;
  bool contains(const Vec& x) const;
};

struct SuperaffineOptions {
  double h = 1.0 / 128.0;
  double v_max = 2.0;
  std::vector<Vec> v_list;  // tested besides V = 0 and the random draws
  int sphere_samples = 10000;
  double tol_scale = 1.0;
};

// Grid infimum of u + V.x over B_r \ {0} against the sphere minimum, for
// V = 0, the listed V and random V, at radii r_bar j / r_samples.
CheckReport check_condition_superaffine(const ScalarField& u, double r_bar, int v_samples, int r_samples,
                                        std::uint64_t seed, const SuperaffineOptions& opt = {});

struct GridCheckOptions {
  Derivatives derivatives = Derivatives::FiniteDifference;
  double tol_scale = 1.0;
  // Smooth fields run the Hessian tier, nonsmooth ones the touching tier;
  // `both_tiers` runs both regardless.
  bool both_tiers = false;
};

// Hessian used by the grid checks: analytic when asked for and available,
// otherwise Richardson-extrapolated central differences with step
// min(default, 1e-3 dist(x, E)).
SymMat check_hessian(const ScalarField& u, const Vec& x, Derivatives d);
// Relative 1e-5 for difference quotients, 1e-10 for analytic Hessians.
double check_tolerance(const SymMat& h, bool analytic, double tol_scale);

// lambda_1 + ... + lambda_k <= tol at interior nodes, plus the touching
// quadratic tier (a necessary-condition checker) for nonsmooth fields.
CheckReport check_k_superaffine_grid(const ScalarField& u, int k, const PuncturedDomain& domain, const Grid& grid,
                                     const GridCheckOptions& opt = {});

// lambda_1 + ... + lambda_{k+1} + a lambda_{k+2} <= tol at interior nodes.
CheckReport check_Ak1a(const ScalarField& u, int k, double a, const PuncturedDomain& domain, const Grid& grid,
                       const GridCheckOptions& opt = {Derivatives::Analytic});

// h_eps(r) = 1 - log(r/r_bar) / log(eps/r_bar) on [eps, r_bar].
double barrier_h_eps(double r, double eps, double r_bar);
double barrier_h_eps_d1(double r, double eps, double r_bar);
double barrier_h_eps_d2(double r, double eps, double r_bar);
ScalarField barrier_h_field(int n, double eps, double r_bar);

enum class BarrierVariant {
  K0,   // g(s) = -ln s
  KPos  // g(s) = -ln s + ln(-ln s)
};

double barrier_g(double s, BarrierVariant v);
double barrier_g_d1(double s, BarrierVariant v);
double barrier_g_d2(double s, BarrierVariant v);
// g(d(x)/r_bar).
double barrier_g_hat(const Vec& x, const ManifoldSpec& e, double r_bar, BarrierVariant v);
ScalarField barrier_g_field(const ManifoldSpec& e, double r_bar, BarrierVariant v);

struct BarrierOptions {
  double d_tilde_max = 0.05;
  int shell_samples = 64;
  std::uint64_t seed = 1;
};

// Sum of the k+2 smallest eigenvalues of -Hess g_hat at grid nodes with
// d/r_bar below d_tilde_max, plus a shell ratio test against the
// d^-2 (ln d~)^-2 growth. The k = 0 case also reports the h_eps identity.
CheckReport barrier_AAB2_check(const ManifoldSpec& e, int k, double r_bar, const Grid& grid,
                               const BarrierOptions& opt = {});

struct MinimumPrincipleOptions {
  double slack = -1.0;  // < 0 selects 10 h
  double tol_scale = 1.0;
  Derivatives derivatives = Derivatives::FiniteDifference;
  std::uint64_t seed = 1;
};

// Hypothesis sum_{i<=k+2} lambda_i <= tol and bounded below, then interior
// minimum against the boundary shell minimum.
CheckReport minimum_principle_check(const ScalarField& u, const PuncturedDomain& domain, int k, const Grid& grid,
                                    const MinimumPrincipleOptions& opt = {});

// Heuristic: minima of u on shells dist = r 2^-j approach -infinity without
// geometric decay of the drops.
bool bounded_below_near(const ScalarField& u, const ManifoldSpec& e, double scale, std::uint64_t seed,
                        Json* trace = nullptr);

/// Modulus omega(r) for the o(|x|) term.
struct Modulus {
  std::string name;
  std::function<double(double)> f;
  double operator()(double r) const { return f(r); }
  static Modulus power(double c, double exponent);
};

struct SlopeSet {
  std::vector<Vec> slopes;
  std::vector<Vec> rejected;
  Vec radii;
  std::string omega;
  // Per candidate: min over radii of (min_{|x|=r}(u - p.x) + r omega(r)) / r.
  Vec margins;
  int hull_dimension = -1;  // -1 when empty
};

// p is kept iff min_{|x|=r}(u(x) - p.x) >= -r omega(r) at every radius.
SlopeSet support_slope_set(const ScalarField& u, const std::vector<Vec>& candidates, const Vec& radii,
                           const Modulus& omega = Modulus::power(1.0, 0.5), int sphere_samples = 4000);
int affine_hull_dimension(const std::vector<Vec>& pts, double tol = 1e-9);
CheckReport slope_set_report(const SlopeSet& s, int n);

// u in the k-tier and sum_{i<=k} lambda_i(Hess v) >= -tol imply u - v in the
// 1-tier.
CheckReport difference_tier_check(const ScalarField& u, const ScalarField& v, int k, const PuncturedDomain& domain,
                           const Grid& grid);

}  // namespace degenlab
