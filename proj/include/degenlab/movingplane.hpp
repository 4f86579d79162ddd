#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "degenlab/fields.hpp"
#include "degenlab/report.hpp"

namespace degenlab {

/// Values of u on the cube [-1,1]^n; the tested region is the unit ball.
struct SolutionSample {
  std::string name;
  Grid grid;  // inactive: the puncture and nodes where u could not be evaluated
  Vec values;
  std::vector<char> in_ball;
  Vec hess_scale;  // largest |second difference| / h^2 at each node
  double puncture = 0.0;

  int dim() const { return grid.dim(); }
  double h() const { return grid.h(); }
  // Nodes within `puncture` (default 3h) of the origin are masked.
  static SolutionSample from_field(const ScalarField& u, double h, double puncture = -1.0);
  double boundary_max_abs() const;
  double interior_min() const;
};

struct Reflection {
  Vec direction;
  double lambda = 0.0;
  std::vector<std::size_t> nodes;  // nodes of Sigma_lambda kept
  Vec w;                           // u(x_lambda) - u(x)
  Vec tol;                         // 5 h^2 (local Hessian scale)
  std::size_t masked = 0;          // reflections landing in the puncture
};

// w_lambda = u(x_lambda) - u(x) on {|x| < 1, x.e > lambda}, where x_lambda is the
// mirror image of x in the plane x.e = lambda; reflected values by multilinear
// interpolation.
Reflection reflect_and_diff(const SolutionSample& u, double lambda, const Vec& direction);

struct PlaneScan {
  Vec direction;
  Vec lambdas;
  Vec min_w;       // per lambda
  Vec min_margin;  // per lambda: min of w + tol
  double lambda_bar = 0.0;
};

// lambda_bar: smallest mu with min(w_lambda + tol) >= 0 for every grid lambda > mu.
PlaneScan lambda_bar_scan(const SolutionSample& u, const Vec& direction, const Vec& lambdas = {});
Vec default_lambdas(double h);

// Directional derivative along e (central differences) at ball nodes with
// x.e > 2h; positive values beyond tolerance are violations.
CheckReport monotonicity_check(const SolutionSample& u, const Vec& direction);

// 1D: +-e1; 2D: 16 angles; 3D: the 26 lattice directions plus `random_dirs`
// seeded ones and their negatives.
std::vector<Vec> scan_directions(int n, int random_dirs = 50, std::uint64_t seed = 1);

// SYMMETRIC+MONOTONE, SYMMETRIC+NONMONOTONE or ASYMMETRIC.
CheckReport radial_symmetry_report(const SolutionSample& u, const std::vector<Vec>& directions,
                                   const Vec& lambdas = {});

void write_scan_csv(std::ostream& os, const PlaneScan& s);

}  // namespace degenlab
