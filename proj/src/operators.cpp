#include "degenlab/operators.hpp"

#include <cmath>

#include "degenlab/error.hpp"

namespace degenlab {

namespace {

// The residual fields are homogeneous about the origin, so the FD step
// scales with |x| all the way in; the default floor would dominate the
// truncation error for |x| < 0.1.
double scaled_step(const Vec& x, double rel, double floor) { return std::max(floor, rel * norm(x)); }

SymMat residual_hess(const ScalarField& f, const Vec& x, Derivatives d) {
  if (d == Derivatives::Analytic && f.has_hess()) return f.hess(x);
  return fd_hessian(f, x, scaled_step(x, 1e-3, 1e-6));
}

Vec residual_grad(const ScalarField& f, const Vec& x, Derivatives d) {
  if (d == Derivatives::Analytic && f.has_grad()) return f.grad(x);
  return fd_gradient(f, x, scaled_step(x, 1e-4, 1e-7));
}

SymMat hess_of(const ScalarField& f, const Vec& x, Derivatives d) {
  return d == Derivatives::Analytic && f.has_hess() ? f.hess(x) : fd_hessian(f, x);
}

Vec grad_of(const ScalarField& f, const Vec& x, Derivatives d) {
  return d == Derivatives::Analytic && f.has_grad() ? f.grad(x) : fd_gradient(f, x);
}

double frob_inner(const SymMat& a, const SymMat& b) {
  double s = 0.0;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) s += a(i, j) * b(i, j);
  return s;
}

void require_nonzero(const Vec& x, const char* what) {
  if (norm(x) == 0.0) fail(ErrorKind::Singularity, std::string(what) + " at the origin");
}

}  // namespace

double eval_k_sum(const ScalarField& f, const Vec& x, int k, Derivatives d) {
  return partial_sum(hess_of(f, x, d), k);
}

double eval_weighted_sum(const ScalarField& f, const Vec& x, int k, double a, Derivatives d) {
  return weighted_partial_sum(hess_of(f, x, d), k, a);
}

double example1_alpha(int l) {
  require(l >= 2, ErrorKind::Input, "example 1 needs l >= 2");
  return (2.0 * l - 2.0) / (2.0 * l - 1.0);
}

double example1_residual(const Vec& x, int l, Derivatives d) {
  require_nonzero(x, "example 1 residual");
  const int n = static_cast<int>(x.size());
  const double alpha = example1_alpha(l);
  const ScalarField u = builtin("pow_alpha", {{"n", n}, {"alpha", alpha}});
  const double lap = residual_hess(u, x, d).trace();
  const Vec g = residual_grad(u, x, d);
  const double coef = (n + alpha - 2.0) * std::pow(alpha, 1.0 / (alpha - 1.0));
  return -lap + coef * std::pow(dot(g, g), l);
}

SymMat example2_coeffs(const Vec& x, double eps) {
  require(x.size() == 2, ErrorKind::Input, "example 2 is two-dimensional");
  require_nonzero(x, "example 2 coefficients");
  const double r = norm(x);
  const Vec b{-(1.0 - eps) * x[1] / r, (1.0 - eps) * x[0] / r};
  return SymMat::identity(2) - SymMat::outer(b);
}

double example2_eps(double alpha) { return 1.0 - std::sqrt(alpha); }

double example2_residual(const Vec& x, double alpha, double eps, Derivatives d) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Input, "example 2 needs alpha in (0,1)");
  if (eps < 0.0) eps = example2_eps(alpha);
  const ScalarField u = builtin("pow_alpha", {{"n", 2}, {"alpha", alpha}});
  return -frob_inner(example2_coeffs(x, eps), residual_hess(u, x, d));
}

SymMat householder_to_e1(const Vec& x) {
  require_nonzero(x, "Householder frame");
  const int n = static_cast<int>(x.size());
  const double r = norm(x);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = x[i] / r;
  v[0] -= 1.0;
  const double vv = dot(v, v);
  if (vv < 1e-28) return SymMat::identity(n);
  SymMat h = SymMat::identity(n);
  h -= (2.0 / vv) * SymMat::outer(v);
  return h;
}

SymMat example3_coeffs(const Vec& x, double alpha) {
  const int n = static_cast<int>(x.size());
  require(n >= 2, ErrorKind::Input, "example 3 needs n >= 2");
  const double eps = (1.0 - alpha) / (n - 1.0);
  const SymMat o = householder_to_e1(x);
  Vec ahat(n, eps);
  ahat[0] = 1.0;
  // O is a symmetric reflection, so O^T diag O has eigenvectors the columns of O.
  std::vector<Vec> cols(n, Vec(n));
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < n; ++i) cols[q][i] = o(i, q);
  return SymMat::from_eigen(ahat, cols);
}

double example3_residual(const Vec& x, double alpha, Derivatives d) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Input, "example 3 needs alpha in (0,1)");
  const int n = static_cast<int>(x.size());
  const ScalarField u = builtin("pow_alpha", {{"n", n}, {"alpha", alpha}});
  return -frob_inner(example3_coeffs(x, alpha), residual_hess(u, x, d));
}

double pucci_example_constant(int n, double alpha) {
  return (n - 1.0) * alpha * (2.0 - alpha) / (1.0 - alpha);
}

double pucci_example_residual(int n, double alpha, double r) {
  const RadialProfile p = pucci_profile(n, alpha);
  require(r > 0.0 && r < p.root, ErrorKind::Input, "pucci residual needs 0 < r < root");
  const ScalarField u = radial_field(p, n);
  Vec x(n, 0.0);
  x[0] = r;
  return pucci_plus(u.hess(x), alpha) + pucci_example_constant(n, alpha);
}

SymMat conformal_hessian(const ScalarField& f, const Vec& x, ConformalForm form, Derivatives d) {
  const int n = f.dim;
  const SymMat h = hess_of(f, x, d);
  const Vec g = grad_of(f, x, d);
  const double g2 = dot(g, g);
  const double w = f(x);
  if (form == ConformalForm::Aw) {
    SymMat a = w * h;
    a -= SymMat::identity(n, 0.5 * g2);
    return a;
  }
  require(n >= 3, ErrorKind::Input, "A^u needs n >= 3");
  if (!(w > 0.0)) fail(ErrorKind::Domain, "A^u needs a positive function");
  const double m = n - 2.0;
  SymMat a = (-2.0 / m * std::pow(w, -(n + 2.0) / m)) * h;
  const double p = std::pow(w, -2.0 * n / m);
  a += (2.0 * n / (m * m) * p) * SymMat::outer(g);
  a -= SymMat::identity(n, 2.0 / (m * m) * p * g2);
  return a;
}

ScalarField conformal_w(const ScalarField& u) {
  const int n = u.dim;
  require(n >= 3, ErrorKind::Input, "conformal_w needs n >= 3");
  const double q = -2.0 / (n - 2.0);
  ScalarField w;
  w.name = "conformal_w(" + u.name + ")";
  w.dim = n;
  w.singular = u.singular;
  w.eval = [u, q](const Vec& x) {
    const double v = u(x);
    if (!(v > 0.0)) fail(ErrorKind::Domain, "conformal_w needs u > 0");
    return std::pow(v, q);
  };
  if (u.has_grad() && u.has_hess()) {
    w.grad = [u, q](const Vec& x) {
      Vec g = u.grad(x);
      const double s = q * std::pow(u(x), q - 1.0);
      for (double& t : g) t *= s;
      return g;
    };
    w.hess = [u, q](const Vec& x) {
      const double v = u(x);
      const Vec g = u.grad(x);
      SymMat h = (q * std::pow(v, q - 1.0)) * u.hess(x);
      h += (q * (q - 1.0) * std::pow(v, q - 2.0)) * SymMat::outer(g);
      return h;
    };
  }
  return w;
}

}  // namespace degenlab
