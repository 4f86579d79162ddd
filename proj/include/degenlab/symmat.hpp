#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "degenlab/report.hpp"

namespace degenlab {

using Vec = std::vector<double>;

inline constexpr int kMaxDim = 8;

/// Dense real symmetric matrix in packed lower-triangular storage.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(int n, double fill = 0.0);

  static SymMat identity(int n, double scale = 1.0);
  static SymMat diag(const Vec& d);
  // Symmetrizes by averaging when `rows` is not exactly symmetric.
  static SymMat from_rows(const std::vector<Vec>& rows);
  // V diag(lambda) V^T where the columns of V are frame[j].
  static SymMat from_eigen(const Vec& lambda, const std::vector<Vec>& frame);
  static SymMat outer(const Vec& a);

  int n() const { return n_; }
  double operator()(int i, int j) const { return a_[index(i, j)]; }
  double& operator()(int i, int j) { return a_[index(i, j)]; }

  const Vec& packed() const { return a_; }
  double trace() const;
  double frobenius() const;
  bool finite() const;
  double quad(const Vec& v) const;  // v^T M v
  Vec apply(const Vec& v) const;
  std::vector<Vec> rows() const;

  SymMat& operator+=(const SymMat& o);
  SymMat& operator-=(const SymMat& o);
  SymMat& operator*=(double s);

 private:
  static int index(int i, int j) { return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i; }

  int n_ = 0;
  Vec a_;
};

SymMat operator+(SymMat a, const SymMat& b);
SymMat operator-(SymMat a, const SymMat& b);
SymMat operator*(double s, SymMat a);

struct EigenDecomp {
  Vec values;               // ascending
  std::vector<Vec> frame;   // frame[j] is the unit eigenvector of values[j]
};

EigenDecomp eigh(const SymMat& m);
Vec eigenvalues(const SymMat& m);

double partial_sum(const SymMat& m, int k);
// lambda_1 + ... + lambda_k + a * lambda_{k+1}
double weighted_partial_sum(const SymMat& m, int k, double a);

struct KyFanResult {
  double min_value = 0.0;
  double eigenframe_value = 0.0;
  double sampled_min = 0.0;  // best of the random frames alone
  double exact = 0.0;        // partial_sum(M, k)
  double gap() const { return sampled_min - exact; }
};

KyFanResult kyfan_sampled(const SymMat& m, int k, std::uint64_t trials, std::uint64_t seed);
double kyfan_sampled_min(const SymMat& m, int k, std::uint64_t trials, std::uint64_t seed);

// Perturbation inequality with D = diag(1 x (n-k), -delta_1, ..., -delta_k).
// Throws Hypothesis when a delta is outside (0, (l-k)/k].
CheckReport perturbation_inequality_check(const SymMat& m, const Vec& deltas, int l);

double sigma_k(const Vec& lambda, int k);
bool gamma_k_member(const SymMat& m, int k);
bool gamma_k_closure_member(const SymMat& m, int k, double tol = 1e-10);

double pucci_plus(const SymMat& m, double alpha);

// Is M + eps N in U_l, where N has eigenvalue -delta_bar on frame[0..k)
// and 1 on the remaining frame vectors?
bool property_pk_probe(int k, int l, const SymMat& m, double eps, double delta_bar,
                       const std::vector<Vec>& frame);

using Rng = std::mt19937_64;

SymMat random_symmat(int n, Rng& rng, double scale = 1.0);
// k orthonormal vectors in R^n, Gram-Schmidt on Gaussian samples.
std::vector<Vec> random_orthonormal_frame(int n, int k, Rng& rng);
std::vector<Vec> standard_frame(int n);
bool is_orthonormal(const std::vector<Vec>& frame, double tol = 1e-10);

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);

}  // namespace degenlab
