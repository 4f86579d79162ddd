#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the library algorithms being checked.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

// Number of eigenvalues of A strictly below t, from the inertia of A - tI
// (Sylvester's law) via symmetric elimination without pivoting.
inline int count_below(const Mat& a, double t) {
  const int n = static_cast<int>(a.size());
  Mat m = a;
  for (int i = 0; i < n; ++i) m[i][i] -= t;
  int neg = 0;
  for (int p = 0; p < n; ++p) {
    double piv = m[p][p];
    if (piv == 0.0) piv = 1e-300;
    if (piv < 0) ++neg;
    for (int i = p + 1; i < n; ++i) {
      const double f = m[i][p] / piv;
      for (int j = p + 1; j < n; ++j) m[i][j] -= f * m[p][j];
    }
  }
  return neg;
}

// All eigenvalues ascending by bisection on the inertia count.
inline std::vector<double> eigenvalues_bisection(const Mat& a) {
  const int n = static_cast<int>(a.size());
  double bound = 0.0;
  for (int i = 0; i < n; ++i) {
    double r = 0.0;
    for (int j = 0; j < n; ++j) r += std::abs(a[i][j]);
    bound = std::max(bound, r);
  }
  bound += 1.0;
  std::vector<double> ev(n);
  for (int k = 0; k < n; ++k) {
    double lo = -bound, hi = bound;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(a, mid) > k) hi = mid; else lo = mid;
    }
    ev[k] = 0.5 * (lo + hi);
  }
  return ev;
}

// Elementary symmetric polynomial by subset enumeration.
inline double sigma_subsets(const std::vector<double>& l, int k) {
  const int n = static_cast<int>(l.size());
  double s = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double p = 1.0;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) p *= l[i];
    s += p;
  }
  return s;
}

// Lower convex envelope of 1D samples at x_i: for each node the best chord
// value over all pairs (i <= node <= j) that stays below every sample.
inline std::vector<double> envelope_1d_pairs(const std::vector<double>& x, const std::vector<double>& f) {
  const int m = static_cast<int>(x.size());
  std::vector<double> g(m, -std::numeric_limits<double>::infinity());
  if (m == 1) return f;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double s = (f[j] - f[i]) / (x[j] - x[i]);
      bool below = true;
      for (int q = 0; q < m && below; ++q)
        if (f[i] + s * (x[q] - x[i]) > f[q] + 1e-13) below = false;
      if (!below) continue;
      for (int q = 0; q < m; ++q) g[q] = std::max(g[q], f[i] + s * (x[q] - x[i]));
    }
  }
  return g;
}

// Lower convex envelope of 2D scattered samples: maximum over all planes
// through three samples that lie below every sample.
inline std::vector<double> envelope_2d_planes(const std::vector<std::array<double, 2>>& p,
                                              const std::vector<double>& f) {
  const int m = static_cast<int>(p.size());
  std::vector<double> g(f);
  for (double& v : g) v = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = b + 1; c < m; ++c) {
        const double x1 = p[b][0] - p[a][0], y1 = p[b][1] - p[a][1];
        const double x2 = p[c][0] - p[a][0], y2 = p[c][1] - p[a][1];
        const double det = x1 * y2 - x2 * y1;
        if (std::abs(det) < 1e-12) continue;
        const double df1 = f[b] - f[a], df2 = f[c] - f[a];
        const double sx = (df1 * y2 - df2 * y1) / det;
        const double sy = (x1 * df2 - x2 * df1) / det;
        auto plane = [&](int q) { return f[a] + sx * (p[q][0] - p[a][0]) + sy * (p[q][1] - p[a][1]); };
        bool below = true;
        for (int q = 0; q < m && below; ++q)
          if (plane(q) > f[q] + 1e-12) below = false;
        if (!below) continue;
        for (int q = 0; q < m; ++q) g[q] = std::max(g[q], plane(q));
      }
  return g;
}

}  // namespace oracle
