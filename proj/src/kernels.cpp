#include "softguide/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "softguide/quadrature.hpp"

namespace softguide::kernels {

namespace {

inline void apply_column(const fd::DiscreteOperator& op, const double* x, double* y, int i) {
  const int n1 = op.grid.n1;
  const int n2 = op.grid.n2;
  const double ih2 = 1.0 / (op.grid.h * op.grid.h);
  const double* xc = x + static_cast<std::size_t>(i) * n2;
  const double* xl = i > 0 ? xc - n2 : nullptr;
  const double* xr = i + 1 < n1 ? xc + n2 : nullptr;
  double* yc = y + static_cast<std::size_t>(i) * n2;
  const double* p = op.column_potential.data();
  for (int j = 0; j < n2; ++j) {
    double nb = 0.0;
    if (xl) nb += xl[j];
    if (xr) nb += xr[j];
    if (j > 0) nb += xc[j - 1];
    if (j + 1 < n2) nb += xc[j + 1];
    yc[j] = (4.0 * xc[j] - nb) * ih2 + p[j] * xc[j];
  }
}

inline void apply_perturbation(const fd::PerturbedColumn& pc, int n2, const double* x, double* y) {
  const std::size_t base = static_cast<std::size_t>(pc.i) * n2;
  for (std::size_t r = 0; r < pc.rows.size(); ++r) y[base + pc.rows[r]] -= pc.u[r] * x[base + pc.rows[r]];
}

inline long sweep_mode(const double* a, int n2, int steps, double c, double pivmin, double* store,
                       double* last, int k) {
  long neg = 0;
  double s = 0.0;
  for (int t = 0; t < steps; ++t) {
    s = t == 0 ? a[k] : a[k] - c / s;
    if (std::abs(s) < pivmin) s = -pivmin;
    if (s < 0.0) ++neg;
    if (store) store[static_cast<std::size_t>(t) * n2 + k] = s;
  }
  if (last) last[k] = s;
  return neg;
}

// Green's function of h^-2 tridiag(-1, 2 cosh theta, -1), size n, 0-based i, ip.
inline double chain_green(double theta, int n, int i, int ip, double h) {
  const int m = std::min(i, ip) + 1;
  const int M = std::max(i, ip) + 1;
  const double num = std::exp(-theta * (M - m)) * (-std::expm1(-2.0 * theta * m)) *
                     (-std::expm1(-2.0 * theta * (n + 1 - M)));
  const double den = 2.0 * std::sinh(theta) * (-std::expm1(-2.0 * theta * (n + 1)));
  return h * h * num / den;
}

inline void block_pair(const std::vector<ColumnGroup>& groups, const Eigen::MatrixXd& Q, const Eigen::VectorXd& theta,
                       int n1, double h, std::size_t a, std::size_t b, Eigen::MatrixXd& out) {
  const auto& ga = groups[a];
  const auto& gb = groups[b];
  const int n2 = static_cast<int>(Q.rows());
  Eigen::VectorXd g(n2);
  for (int k = 0; k < n2; ++k) g[k] = chain_green(theta[k], n1, ga.i, gb.i, h);
  for (std::size_t p = 0; p < ga.rows.size(); ++p) {
    const auto qa = Q.row(ga.rows[p]);
    for (std::size_t q = 0; q < gb.rows.size(); ++q) {
      const auto qb = Q.row(gb.rows[q]);
      double acc = 0.0;
      for (int k = 0; k < n2; ++k) acc += qa[k] * g[k] * qb[k];
      out(ga.pos[p], gb.pos[q]) = acc;
      out(gb.pos[q], ga.pos[p]) = acc;
    }
  }
}

}  // namespace

void apply_operator_serial(const fd::DiscreteOperator& op, const double* x, double* y) {
  for (int i = 0; i < op.grid.n1; ++i) apply_column(op, x, y, i);
  for (const auto& pc : op.perturbation) apply_perturbation(pc, op.grid.n2, x, y);
}

void apply_operator_omp(const fd::DiscreteOperator& op, const double* x, double* y) {
  const int n1 = op.grid.n1;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n1; ++i) apply_column(op, x, y, i);
  const int np = static_cast<int>(op.perturbation.size());
#pragma omp parallel for schedule(static)
  for (int c = 0; c < np; ++c) apply_perturbation(op.perturbation[c], op.grid.n2, x, y);
}

long exterior_sweep_serial(const double* a, int n2, int steps, double c, double pivmin, double* store,
                           double* last) {
  long neg = 0;
  for (int k = 0; k < n2; ++k) neg += sweep_mode(a, n2, steps, c, pivmin, store, last, k);
  return neg;
}

long exterior_sweep_omp(const double* a, int n2, int steps, double c, double pivmin, double* store,
                        double* last) {
  long neg = 0;
#pragma omp parallel for reduction(+ : neg) schedule(static)
  for (int k = 0; k < n2; ++k) neg += sweep_mode(a, n2, steps, c, pivmin, store, last, k);
  return neg;
}

void resolvent_block_serial(const std::vector<ColumnGroup>& groups, const Eigen::MatrixXd& Q,
                            const Eigen::VectorXd& theta, int n1, double h, Eigen::MatrixXd& out) {
  for (std::size_t a = 0; a < groups.size(); ++a)
    for (std::size_t b = a; b < groups.size(); ++b) block_pair(groups, Q, theta, n1, h, a, b, out);
}

void resolvent_block_omp(const std::vector<ColumnGroup>& groups, const Eigen::MatrixXd& Q,
                         const Eigen::VectorXd& theta, int n1, double h, Eigen::MatrixXd& out) {
  const long ng = static_cast<long>(groups.size());
  const long npairs = ng * (ng + 1) / 2;
#pragma omp parallel for schedule(dynamic, 4)
  for (long t = 0; t < npairs; ++t) {
    // unrank t into (a, b) with a <= b
    long a = 0, rem = t;
    while (rem >= ng - a) {
      rem -= ng - a;
      ++a;
    }
    block_pair(groups, Q, theta, n1, h, static_cast<std::size_t>(a), static_cast<std::size_t>(a + rem), out);
  }
}

double cell_fraction(const fd::Grid2D& g, const profiles::Profile& f, double eps, int i, int j) {
  const double h = g.h;
  const double lo = g.d + (j - g.j_top - 0.5) * h;
  const double hi = lo + h;
  const double bottom = std::max(lo, 0.0);
  auto covered = [&](double x1) {
    const double top = std::min(hi, g.d + eps * f(x1));
    return std::clamp(top - bottom, 0.0, h);
  };
  const double xa = g.x1(i) - 0.5 * h;
  const double xb = xa + h;
  const auto s = f.support();
  if (eps == 0.0 || xb <= s.a || xa >= s.b) return covered(xa) / h;
  return quad::integrate(covered, xa, xb, f.breakpoints(), 1e-12).value / (h * h);
}

void cell_fractions_serial(const fd::Grid2D& g, const profiles::Profile& f, double eps,
                           const std::vector<std::pair<int, int>>& cells, std::vector<double>& out) {
  out.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) out[c] = cell_fraction(g, f, eps, cells[c].first, cells[c].second);
}

void cell_fractions_omp(const fd::Grid2D& g, const profiles::Profile& f, double eps,
                        const std::vector<std::pair<int, int>>& cells, std::vector<double>& out) {
  out.resize(cells.size());
  const long n = static_cast<long>(cells.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long c = 0; c < n; ++c) out[c] = cell_fraction(g, f, eps, cells[c].first, cells[c].second);
}

}  // namespace softguide::kernels
