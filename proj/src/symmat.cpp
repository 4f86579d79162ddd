#include "degenlab/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "degenlab/error.hpp"

namespace degenlab {

SymMat::SymMat(int n, double fill) : n_(n), a_(static_cast<std::size_t>(n * (n + 1) / 2), fill) {
  require(n >= 1 && n <= kMaxDim, ErrorKind::Input, "SymMat dimension must be in 1..8");
}

SymMat SymMat::identity(int n, double scale) {
  SymMat m(n);
  for (int i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

SymMat SymMat::diag(const Vec& d) {
  SymMat m(static_cast<int>(d.size()));
  for (int i = 0; i < m.n(); ++i) m(i, i) = d[i];
  return m;
}

SymMat SymMat::from_rows(const std::vector<Vec>& rows) {
  const int n = static_cast<int>(rows.size());
  SymMat m(n);
  for (int i = 0; i < n; ++i) {
    require(static_cast<int>(rows[i].size()) == n, ErrorKind::Input, "matrix rows must be square");
    for (int j = 0; j <= i; ++j) m(i, j) = 0.5 * (rows[i][j] + rows[j][i]);
  }
  return m;
}

SymMat SymMat::from_eigen(const Vec& lambda, const std::vector<Vec>& frame) {
  const int n = static_cast<int>(lambda.size());
  SymMat m(n);
  for (int q = 0; q < n; ++q)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) m(i, j) += lambda[q] * frame[q][i] * frame[q][j];
  return m;
}

SymMat SymMat::outer(const Vec& a) {
  SymMat m(static_cast<int>(a.size()));
  for (int i = 0; i < m.n(); ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = a[i] * a[j];
  return m;
}

double SymMat::trace() const {
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += (*this)(i, i);
  return t;
}

double SymMat::frobenius() const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

bool SymMat::finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double v) { return std::isfinite(v); });
}

double SymMat::quad(const Vec& v) const { return dot(v, apply(v)); }

Vec SymMat::apply(const Vec& v) const {
  Vec out(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
  return out;
}

std::vector<Vec> SymMat::rows() const {
  std::vector<Vec> r(n_, Vec(n_));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) r[i][j] = (*this)(i, j);
  return r;
}

SymMat& SymMat::operator+=(const SymMat& o) {
  require(o.n_ == n_, ErrorKind::Input, "dimension mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
  require(o.n_ == n_, ErrorKind::Input, "dimension mismatch");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

SymMat& SymMat::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
SymMat operator*(double s, SymMat a) { return a *= s; }

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

EigenDecomp eigh(const SymMat& m) {
  require(m.finite(), ErrorKind::Input, "eigh: non-finite matrix entry");
  const int n = m.n();
  double a[kMaxDim][kMaxDim];
  double v[kMaxDim][kMaxDim];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a[i][j] = m(i, j);
      v[i][j] = i == j ? 1.0 : 0.0;
    }
  const double scale = std::max(m.frobenius(), 1e-300);

  // Cyclic Jacobi sweeps.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (std::sqrt(off) <= 1e-14 * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p][q];
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < n; ++r) {
          const double arp = a[r][p], arq = a[r][q];
          a[r][p] = c * arp - s * arq;
          a[r][q] = s * arp + c * arq;
        }
        for (int r = 0; r < n; ++r) {
          const double apr = a[p][r], aqr = a[q][r];
          a[p][r] = c * apr - s * aqr;
          a[q][r] = s * apr + c * aqr;
        }
        for (int r = 0; r < n; ++r) {
          const double vrp = v[r][p], vrq = v[r][q];
          v[r][p] = c * vrp - s * vrq;
          v[r][q] = s * vrp + c * vrq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] < a[y][y]; });
  EigenDecomp out;
  out.values.resize(n);
  out.frame.assign(n, Vec(n));
  for (int j = 0; j < n; ++j) {
    out.values[j] = a[order[j]][order[j]];
    for (int r = 0; r < n; ++r) out.frame[j][r] = v[r][order[j]];
  }
  return out;
}

Vec eigenvalues(const SymMat& m) { return eigh(m).values; }

double partial_sum(const SymMat& m, int k) {
  require(k >= 1 && k <= m.n(), ErrorKind::Input, "partial_sum: k out of range");
  const Vec ev = eigenvalues(m);
  return std::accumulate(ev.begin(), ev.begin() + k, 0.0);
}

double weighted_partial_sum(const SymMat& m, int k, double a) {
  require(k >= 0 && k < m.n(), ErrorKind::Input, "weighted_partial_sum: k out of range");
  const Vec ev = eigenvalues(m);
  return std::accumulate(ev.begin(), ev.begin() + k, 0.0) + a * ev[k];
}

std::vector<Vec> random_orthonormal_frame(int n, int k, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec> frame;
  while (static_cast<int>(frame.size()) < k) {
    Vec v(n);
    for (double& x : v) x = g(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& f : frame) {
        const double c = dot(v, f);
        for (int i = 0; i < n; ++i) v[i] -= c * f[i];
      }
    const double nv = norm(v);
    if (nv < 1e-8) continue;
    for (double& x : v) x /= nv;
    frame.push_back(std::move(v));
  }
  return frame;
}

std::vector<Vec> standard_frame(int n) {
  std::vector<Vec> f(n, Vec(n, 0.0));
  for (int i = 0; i < n; ++i) f[i][i] = 1.0;
  return f;
}

bool is_orthonormal(const std::vector<Vec>& frame, double tol) {
  for (std::size_t i = 0; i < frame.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      if (std::abs(dot(frame[i], frame[j]) - expect) > tol) return false;
    }
  return true;
}

SymMat random_symmat(int n, Rng& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  SymMat m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = g(rng);
  return m;
}

KyFanResult kyfan_sampled(const SymMat& m, int k, std::uint64_t trials, std::uint64_t seed) {
  require(k >= 1 && k <= m.n(), ErrorKind::Input, "kyfan: k out of range");
  require(trials >= 1, ErrorKind::Input, "kyfan: trials must be positive");
  const EigenDecomp ed = eigh(m);
  KyFanResult r;
  r.exact = std::accumulate(ed.values.begin(), ed.values.begin() + k, 0.0);
  r.eigenframe_value = 0.0;
  for (int i = 0; i < k; ++i) r.eigenframe_value += m.quad(ed.frame[i]);
  Rng rng(seed);
  r.sampled_min = std::numeric_limits<double>::infinity();
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto frame = random_orthonormal_frame(m.n(), k, rng);
    double s = 0.0;
    for (const Vec& e : frame) s += m.quad(e);
    r.sampled_min = std::min(r.sampled_min, s);
  }
  r.min_value = std::min(r.sampled_min, r.eigenframe_value);
  return r;
}

double kyfan_sampled_min(const SymMat& m, int k, std::uint64_t trials, std::uint64_t seed) {
  return kyfan_sampled(m, k, trials, seed).min_value;
}

CheckReport perturbation_inequality_check(const SymMat& m, const Vec& deltas, int l) {
  const int n = m.n();
  const int k = static_cast<int>(deltas.size());
  require(k >= 1, ErrorKind::Input, "perturbation check: need at least one delta");
  require(l > k && l <= n, ErrorKind::Hypothesis, "perturbation check: need k < l <= n");
  const double cap = static_cast<double>(l - k) / k;
  for (double d : deltas) {
    require(d > 0.0 && d <= cap * (1.0 + 1e-15), ErrorKind::Hypothesis,
            "perturbation check: delta outside (0, (l-k)/k]");
  }
  Vec dd(n, 1.0);
  for (int i = 0; i < k; ++i) dd[n - k + i] = -deltas[i];
  const double lhs = partial_sum(m - SymMat::diag(dd), l);
  const double rhs = partial_sum(m, l);

  CheckReport rep;
  rep.check = "perturbation_inequality";
  rep.params = {{"n", n}, {"l", l}, {"deltas", deltas}};
  rep.tolerances["abs"] = 1e-9;
  rep.metrics = {{"lhs", lhs}, {"rhs", rhs}};
  rep.observe(lhs - rhs - 1e-9, {});
  rep.status = lhs <= rhs + 1e-9 ? Status::Pass : Status::Fail;
  return rep;
}

double sigma_k(const Vec& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  require(k >= 0 && k <= n, ErrorKind::Input, "sigma_k: k out of range");
  Vec e(k + 1, 0.0);
  e[0] = 1.0;
  for (double x : lambda)
    for (int j = k; j >= 1; --j) e[j] += x * e[j - 1];
  return e[k];
}

bool gamma_k_member(const SymMat& m, int k) {
  require(k >= 1 && k <= m.n(), ErrorKind::Input, "gamma_k_member: k out of range");
  const Vec ev = eigenvalues(m);
  for (int j = 1; j <= k; ++j)
    if (!(sigma_k(ev, j) > 1e-12)) return false;
  return true;
}

bool gamma_k_closure_member(const SymMat& m, int k, double tol) {
  const Vec ev = eigenvalues(m);
  for (int j = 1; j <= k; ++j)
    if (sigma_k(ev, j) < -tol) return false;
  return true;
}

double pucci_plus(const SymMat& m, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Input, "pucci_plus: alpha must lie in (0,1)");
  const double neg = (m.n() - 1) / (1.0 - alpha);
  double s = 0.0;
  for (double l : eigenvalues(m)) s += (l < 0.0 ? neg : 1.0) * l;
  return s;
}

bool property_pk_probe(int k, int l, const SymMat& m, double eps, double delta_bar,
                       const std::vector<Vec>& frame) {
  const int n = m.n();
  require(k >= 0 && k <= n && l >= 1 && l <= n, ErrorKind::Input, "property_pk_probe: k or l out of range");
  require(eps > 0.0 && delta_bar > 0.0, ErrorKind::Input, "property_pk_probe: eps and delta_bar must be positive");
  require(static_cast<int>(frame.size()) == n && is_orthonormal(frame), ErrorKind::Input,
          "property_pk_probe: frame is not an orthonormal basis");
  require(gamma_k_closure_member(m, l), ErrorKind::Hypothesis, "property_pk_probe: M not in the closure of U_l");
  Vec lam(n, 1.0);
  for (int i = 0; i < k; ++i) lam[i] = -delta_bar;
  const SymMat nm = SymMat::from_eigen(lam, frame);
  return gamma_k_member(m + eps * nm, l);
}

}  // namespace degenlab
