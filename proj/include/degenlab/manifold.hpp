#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "degenlab/symmat.hpp"

namespace degenlab {

/// A compact singular set: finite point set, round sphere, circle in R^3,
/// bounded affine patch, or a sampled closed curve.
struct ManifoldSpec {
  enum class Kind { PointSet, Sphere, Circle, AffineSlice, Curve };

  Kind kind = Kind::PointSet;
  int n = 2;  // ambient dimension
  int k = 0;  // intrinsic dimension

  std::vector<Vec> points;  // PointSet
  Vec center;               // Sphere, Circle, AffineSlice origin
  double radius = 0.0;      // Sphere, Circle; patch radius for AffineSlice
  std::vector<Vec> basis;   // Circle: two orthonormal plane vectors; AffineSlice: k tangent vectors
  std::function<Vec(double)> curve;  // Curve: t in [0,1)
  bool closed = true;

  static ManifoldSpec point(const Vec& p);
  static ManifoldSpec origin(int n) { return point(Vec(n, 0.0)); }
  static ManifoldSpec point_set(const std::vector<Vec>& pts);
  static ManifoldSpec sphere(const Vec& center, double r);
  static ManifoldSpec circle(const Vec& center, double r, const Vec& u, const Vec& v);
  static ManifoldSpec circle_xy(double r) { return circle({0, 0, 0}, r, {1, 0, 0}, {0, 1, 0}); }
  // Patch radius defaults to unbounded.
  static ManifoldSpec affine(const Vec& origin, const std::vector<Vec>& tangent, double patch = 0.0);
  static ManifoldSpec parametric(int n, std::function<Vec(double)> c, bool closed = true);

  std::string name() const;
};

struct FootPoint {
  double distance = 0.0;
  std::optional<Vec> nearest;  // empty when the foot point is not unique
};

double dist(const ManifoldSpec& e, const Vec& x);
FootPoint nearest_point(const ManifoldSpec& e, const Vec& x);

}  // namespace degenlab
