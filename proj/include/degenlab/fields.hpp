#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "degenlab/manifold.hpp"
#include "degenlab/report.hpp"
#include "degenlab/symmat.hpp"

namespace degenlab {

/// Point-to-value map with optional analytic derivatives.
struct ScalarField {
  std::string name;
  int dim = 1;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;       // optional
  std::function<SymMat(const Vec&)> hess;    // optional
  std::optional<ManifoldSpec> singular;
  // Nonsmooth fields skip the Hessian tier of the grid checks.
  bool smooth = true;
  Json params = Json::object();

  double operator()(const Vec& x) const { return eval(x); }
  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hess() const { return static_cast<bool>(hess); }
  double dist_to_singular(const Vec& x) const;
};

double default_fd_step1(const Vec& x);
double default_fd_step2(const Vec& x);

Vec fd_gradient(const ScalarField& f, const Vec& x, double h);
SymMat fd_hessian(const ScalarField& f, const Vec& x, double h);
Vec fd_gradient(const ScalarField& f, const Vec& x);
SymMat fd_hessian(const ScalarField& f, const Vec& x);
// Analytic when available, FD otherwise.
Vec gradient(const ScalarField& f, const Vec& x);
SymMat hessian(const ScalarField& f, const Vec& x);

/// Piecewise radial profile u(r) with derivatives.
struct RadialProfile {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  std::vector<double> breakpoints;
  double root = 0.0;  // first positive zero when the profile has one
};

struct RadialEigs {
  Vec values;  // ascending
  bool at_breakpoint = false;
};

RadialEigs radial_hessian_eigs(const RadialProfile& p, double r, int n);

// u(x) = p(|x|) with analytic derivatives; singular at the origin.
ScalarField radial_field(const RadialProfile& p, int n);

RadialProfile power_profile(double alpha);
// Two-branch profile: r^a - (a/2) r^2 on (0,1], the matching r > 1 branch.
RadialProfile pucci_profile(int n, double alpha);
double pucci_root(int n, double alpha);

/// Builtin fields by name; `params` keys depend on the builtin.
///   pow_alpha {n, alpha}          |x|^alpha
///   pucci_radial {n, alpha}       two-branch radial profile
///   step_e1 {}                    4 on x < 0, 1 on x >= 0
///   example4_1d {}                1+x on [-1,0], 1/2 - x/2 on (0,1]
///   example5_sin {n}              sin(pi |x|)
///   appD_pow {n, a}               |x|^(1-a)
///   appD_split {n, k, a, eps}     |x'|^(1-a-eps) + eps^2 |x''|^2, x'' the last k coordinates
///   max_coords {n, k}             max{0, x_1, ..., x_k}
///   neg_log {n}                   -log|x|
///   fundamental {n}               -|x|^(2-n)
///   quadratic {n, c, b}           c |x|^2 + b . x
///   paraboloid {n}                1 - |x|^2
///   harmonic_poly {n}             x_1^2 - x_2^2 + x_1 x_2 + x_1
///   trig {n}                      sin(x_1) cos(x_2)
///   newton {n}                    |x|^(2-n), n >= 3
///   ring_potential {R}            R * integral of 1/|x - y| over the circle |y| = R in the x_1x_2-plane
std::vector<std::string> builtin_names();
ScalarField builtin(const std::string& name, const Json& params = Json::object());

ScalarField add_linear(const ScalarField& f, const Vec& v, double c = 0.0);
ScalarField scaled_argument(const ScalarField& f, double s);  // x -> f(s x)
ScalarField difference(const ScalarField& u, const ScalarField& v);

/// Uniform lattice with spacing h and a node mask.
class Grid {
 public:
  Grid() = default;
  Grid(const Vec& lower, const Vec& upper, double h);
  // Cube [-R,R]^n with nodes outside the closed ball masked out.
  static Grid ball(int n, double radius, double h, const Vec& center = {});

  int dim() const { return static_cast<int>(lower_.size()); }
  double h() const { return h_; }
  const Vec& lower() const { return lower_; }
  Vec upper() const;
  const std::vector<int>& counts() const { return counts_; }
  std::size_t size() const { return mask_.size(); }

  Vec point(std::size_t idx) const;
  std::vector<int> multi_index(std::size_t idx) const;
  std::size_t flat_index(const std::vector<int>& mi) const;
  std::optional<std::size_t> neighbor(std::size_t idx, int axis, int step) const;
  bool on_box_boundary(std::size_t idx) const;

  bool active(std::size_t idx) const { return mask_[idx] != 0; }
  void set_active(std::size_t idx, bool a) { mask_[idx] = a ? 1 : 0; }
  std::size_t active_count() const;

  void restrict_to_ball(const Vec& center, double radius);
  // Masks nodes within `radius` of E.
  void exclude(const ManifoldSpec& e, double radius);

  GridInfo info() const;

 private:
  Vec lower_;
  double h_ = 0.0;
  std::vector<int> counts_;
  std::vector<std::size_t> strides_;
  std::vector<char> mask_;
};

// Unit directions covering S^(n-1): both signs for n = 1, equal angles for
// n = 2, a Fibonacci lattice for n = 3, seeded Gaussian draws beyond.
std::vector<Vec> sphere_lattice(int n, int count);

struct SphereMin {
  double value = 0.0;
  Vec at;
};

// Minimum of f over the sphere |x - center| = r: lattice scan followed by a
// tangential pattern search from the best few lattice points.
SphereMin sphere_minimum(const std::function<double(const Vec&)>& f, const Vec& center, double r,
                         const std::vector<Vec>& lattice, int refine = 3);

// Header x1..xn,value[,g1..gn][,hij...]; masked nodes are skipped.
void write_field_csv(std::ostream& os, const ScalarField& f, const Grid& g, bool with_grad = false,
                     bool with_hess = false);

}  // namespace degenlab
