#pragma once

#include "degenlab/fields.hpp"

namespace degenlab {

enum class Derivatives { Analytic, FiniteDifference };

double eval_k_sum(const ScalarField& f, const Vec& x, int k, Derivatives d = Derivatives::Analytic);
// lambda_1 + ... + lambda_k + a lambda_{k+1}
double eval_weighted_sum(const ScalarField& f, const Vec& x, int k, double a,
                         Derivatives d = Derivatives::Analytic);

double example1_alpha(int l);
// -Lap u + (n + alpha - 2) alpha^(1/(alpha-1)) |grad u|^(2l) for u = |x|^alpha.
double example1_residual(const Vec& x, int l, Derivatives d = Derivatives::Analytic);

// Coefficients a_ij = delta_ij - b_i b_j, b = (1-eps)(-x2, x1)/|x|.
SymMat example2_coeffs(const Vec& x, double eps);
double example2_eps(double alpha);
// -a_ij d_ij |x|^alpha; `eps` < 0 selects 1 - sqrt(alpha).
double example2_residual(const Vec& x, double alpha, double eps = -1.0,
                         Derivatives d = Derivatives::Analytic);

// Householder reflection sending x/|x| to e_1.
SymMat householder_to_e1(const Vec& x);
SymMat example3_coeffs(const Vec& x, double alpha);
double example3_residual(const Vec& x, double alpha, Derivatives d = Derivatives::Analytic);

double pucci_example_constant(int n, double alpha);
// M^+(D^2 u(r e_1)) + (n-1) alpha (2-alpha)/(1-alpha) for the two-branch profile.
double pucci_example_residual(int n, double alpha, double r);

enum class ConformalForm { Au, Aw };
SymMat conformal_hessian(const ScalarField& f, const Vec& x, ConformalForm form,
                         Derivatives d = Derivatives::Analytic);
// w = u^(-2/(n-2)) with derivatives built from those of u.
ScalarField conformal_w(const ScalarField& u);

}  // namespace degenlab
