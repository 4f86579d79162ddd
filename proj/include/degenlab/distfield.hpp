#pragma once

#include <functional>
#include <string>
#include <vector>

#include "degenlab/fields.hpp"
#include "degenlab/manifold.hpp"
#include "degenlab/report.hpp"

namespace degenlab {

/// One-variable profile G(t) with G' and G''.
struct Profile1D {
  std::string name;
  std::function<double(double)> g, g1, g2;
};

Profile1D profile_identity();         // t
Profile1D profile_square();           // t^2
Profile1D profile_neglog(double r_bar);  // -ln(t / r_bar)
Profile1D profile_by_name(const std::string& name, double r_bar = 1.0);

// x -> G(dist(x, E)).
ScalarField distance_profile_field(const ManifoldSpec& e, const Profile1D& g);

// Points at distance exactly d from E, spread over E and the normal circle
// (both sides for hypersurfaces).
std::vector<Vec> tube_points(const ManifoldSpec& e, double d, int count, std::uint64_t seed);

struct ClusterMatch {
  Vec expected;   // ascending
  Vec computed;   // ascending
  double max_deviation = 0.0;
  double scale = 0.0;  // d |G''| + |G'|
  bool ambiguous = false;
};

// Expected spectrum of the Hessian of G(d): k zeros, G''(d), and G'(d)/d
// with multiplicity n-k-1.
Vec expansion_spectrum(int n, int k, const Profile1D& g, double d);
ClusterMatch match_clusters(const Vec& expected, const Vec& computed);

// FD Hessian of G(d(x)) at each point against the expansion. Pass when every
// deviation is within tol_factor * (d|G''| + |G'|); ambiguous matches make
// the report inconclusive.
CheckReport hessian_expansion_check(const ManifoldSpec& e, const Profile1D& g, const std::vector<Vec>& points,
                                    double tol_factor);

// Runs the expansion check on tube shells d0, d0/2, ... and requires the
// empirical tol_factor to be nonincreasing.
CheckReport hessian_expansion_stability(const ManifoldSpec& e, const Profile1D& g, double d0, int levels,
                                        int samples, double tol_factor, std::uint64_t seed);

// Normal coordinates phi_alpha for specs that have them explicitly.
Vec normal_coordinates(const ManifoldSpec& e, const Vec& x);
CheckReport local_coordinates_check(const ManifoldSpec& e, const Vec& x);

// Fits the smallest C making the sandwich bounds hold on the points, with
// x' the first n-k coordinates and x'' the last k. `alpha` <= 0 selects the
// linear form, otherwise the d^(1+alpha) form.
struct SandwichFit {
  double c = 0.0;
  bool finite = true;
  bool chain_ok = true;  // the middle links need C |x'| <= 1/4
};
SandwichFit sandwich_fit(const ManifoldSpec& e, const std::vector<Vec>& points, double alpha);

// Fits C on tubes |x| <= r, r/2, r/4 and requires a finite, nonincreasing C.
CheckReport sandwich_check(const ManifoldSpec& e, double tube_radius, int samples, double alpha,
                           std::uint64_t seed);

// Circle of radius R through the origin with tangent e_3, in span{e_1, e_3}.
ManifoldSpec tangent_circle(double radius);

}  // namespace degenlab
