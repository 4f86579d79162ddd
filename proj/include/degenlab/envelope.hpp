#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "degenlab/fields.hpp"
#include "degenlab/report.hpp"
#include "degenlab/superaffine.hpp"

namespace degenlab {

/// Node values on a grid. Inactive nodes are ignored.
struct SampledFunction {
  Grid grid;
  Vec values;

  // Throws Input on a size mismatch or a non-finite value at an active node.
  void validate() const;
  static SampledFunction sample(const ScalarField& f, const Grid& g);
};

struct EnvelopeOptions {
  double contact_tol = -1.0;  // < 0 selects 1e-11 (1 + max|f|)
  bool slopes = true;         // minimal-norm slopes and K at contact nodes
};

struct EnvelopeResult {
  Grid grid;
  Vec gamma;  // NaN at inactive nodes
  std::vector<char> contact_mask;
  std::vector<Vec> slopes;  // empty except at contact nodes
  double K_estimate = 0.0;
  double slope_lipschitz = 0.0;  // max |p - q| / h over adjacent contact nodes
  double contact_tol = 0.0;
  // Nodes of gamma not dominated by a lattice midpoint; their constraints
  // imply all others.
  std::vector<std::size_t> vertices;
  long lp_pivots = 0;

  std::size_t contact_count() const;
};

// Largest convex function below the samples, at every active node. Exact:
// monotone chain in 1D, one small LP per node otherwise.
EnvelopeResult convex_envelope(const SampledFunction& f, const EnvelopeOptions& opt = {});

// Nodes with f - gamma <= tol.
std::vector<char> contact_set(const SampledFunction& f, const EnvelopeResult& env, double tol);

// Minimal-norm p with gamma(x) + p.(z - x) <= gamma(z) at every node z.
Vec supporting_slope(const EnvelopeResult& env, std::size_t node);

// Minimal-norm point of {p : a_j . p <= c_j}; nullopt when empty.
std::optional<Vec> min_norm_point(const std::vector<Vec>& a, const Vec& c, double tol);

// Central second differences, one-sided where a neighbour is inactive.
SymMat grid_hessian(const Grid& g, const Vec& values, std::size_t node);

struct AbpOptions {
  double slack = 0.1;
  double delta2 = -1.0;  // boundary collar; < 0 selects r_bar / 4
};

// w_eps = min(u - v - eps, 0) on the domain, 0 on the rest of B_{2d}, its
// envelope, contact set, and eps^n <= (1 + slack) * sum of det Hess gamma
// over contact nodes.
CheckReport abp_check(const ScalarField& u, const ScalarField& v, double eps, const PuncturedDomain& domain, double h,
                      const AbpOptions& opt = {});

struct SlopePair {
  Vec x, p, y, q;
};

// Minimal-norm p with u(z) >= u(x) + p.(z - x) - |z - x| omega(|z - x|) at
// the grid nodes of the domain.
Vec discrete_support_slope(const ScalarField& u, const Vec& x, const Modulus& omega, const PuncturedDomain& domain,
                           double h);

// Hypotheses (Laplacian <= C, support inequalities on the grid), then the
// ratio |p - q| / (omega(2|x - y|) + |x - y|).
CheckReport slope_stability_check(const ScalarField& u, double C, const std::vector<SlopePair>& pairs,
                                  const Modulus& omega, const PuncturedDomain& domain, double h);

// Slopes from discrete_support_slope at h and h/2; passes when the largest
// ratio changes by less than 20%.
CheckReport slope_stability_refinement(const ScalarField& u, double C, const std::vector<std::pair<Vec, Vec>>& points,
                                       const Modulus& omega, const PuncturedDomain& domain, double h);

struct MeanValueOptions {
  // Coefficient of |y|^2 subtracted from u, as a multiple of C; < 0 selects
  // 1/(2n).
  double shift_factor = -1.0;
  double max_radius = 0.0;  // > 0 bounds the radii besides dist(x, E)
  int quadrature = 64;
};

// Sphere and ball averages of u(y) - s C |y|^2 must not increase with r;
// also estimates u*(x).
CheckReport mean_value_monotonicity_check(const ScalarField& u, double C, const Vec& x, const Vec& radii,
                                          const MeanValueOptions& opt = {});

// x1..xn,f,gamma,contact,p1..pn; inactive nodes skipped.
void write_envelope_csv(std::ostream& os, const SampledFunction& f, const EnvelopeResult& env);
Json envelope_summary(const EnvelopeResult& env);

}  // namespace degenlab
