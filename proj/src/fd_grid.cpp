#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "softguide/asymptotics.hpp"
#include "softguide/errors.hpp"
#include "softguide/fd_oracle.hpp"
#include "softguide/kernels.hpp"

namespace softguide::fd {

namespace {

long steps_of(double extent, double h, const char* what) {
  const double r = extent / h;
  const double n = std::round(r);
  if (!(extent > 0.0) || std::abs(r - n) > 1e-10 * std::max(1.0, r) || n < 1)
    throw InvalidInput(std::string("grid: step h must divide ") + what);
  return static_cast<long>(n);
}

}  // namespace

// ---------------------------------------------------------------- 1D

long Tridiagonal::count_below(double E) const {
  const double b2 = off * off;
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, b2);
  long neg = 0;
  double q = 1.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    q = (diag[i] - E) - (i > 0 ? b2 / q : 0.0);
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++neg;
  }
  return neg;
}

double Tridiagonal::gershgorin_lower() const {
  return diag.minCoeff() - 2.0 * std::abs(off);
}

double Tridiagonal::eigenvalue(long k, double lo, double hi, double abs_tol) const {
  // invariant: count(lo) < k <= count(hi)
  for (int it = 0; it < 200 && hi - lo > abs_tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(mid) >= k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Tridiagonal well_tridiagonal(const WellParams& p, double lo, double hi, double h) {
  p.validate();
  const long m_lo = steps_of(lo, h, "the lower clearance");
  const long m_d = steps_of(p.d, h, "d");
  const long m_hi = steps_of(hi, h, "the upper clearance");
  const long n = m_lo + m_d + m_hi - 1;
  Tridiagonal t;
  t.diag.resize(n);
  t.off = -1.0 / (h * h);
  const long j0 = m_lo - 1;
  const long jd = m_lo + m_d - 1;
  for (long j = 0; j < n; ++j) {
    double w = 0.0;
    if (j > j0 && j < jd) w = 1.0;
    if (j == j0 || j == jd) w = 0.5;
    t.diag[j] = 2.0 / (h * h) - p.alpha * w;
  }
  return t;
}

Spectrum1D solve_1d(const WellParams& p, double L, double h, double abs_tol) {
  p.validate();
  Spectrum1D out;
  out.h = h;
  const double Lr = std::ceil(L / h - 1e-9) * h;
  out.L = Lr;
  auto negative_eigs = [&](double step) {
    const auto t = well_tridiagonal(p, Lr, Lr, step);
    const long n = t.count_below(0.0);
    const double lo = std::min(t.gershgorin_lower(), -p.alpha) - 1.0;
    std::vector<double> e;
    for (long k = 1; k <= n; ++k) e.push_back(t.eigenvalue(k, lo, 0.0, abs_tol));
    return e;
  };
  out.eigs_h = negative_eigs(h);
  out.eigs_half = negative_eigs(0.5 * h);
  out.count = static_cast<long>(out.eigs_half.size());
  const std::size_t n = std::min(out.eigs_h.size(), out.eigs_half.size());
  for (std::size_t k = 0; k < n; ++k) out.richardson.push_back((4.0 * out.eigs_half[k] - out.eigs_h[k]) / 3.0);
  return out;
}

// ---------------------------------------------------------------- grid

Grid2D Grid2D::make(double d, double h, double L, double H_lo, double H_hi) {
  if (!(h > 0.0)) throw InvalidInput("grid: h must be positive");
  Grid2D g;
  const long md = steps_of(d, h, "d");
  const long mL = steps_of(L, h, "L");
  const long mlo = steps_of(H_lo, h, "H_lo");
  const long mhi = steps_of(H_hi, h, "H_hi");
  g.d = d;
  g.h = h;
  g.L = mL * h;
  g.H_lo = mlo * h;
  g.H_hi = mhi * h;
  const long n1 = 2 * mL - 1;
  const long n2 = mlo + md + mhi - 1;
  if (n1 > std::numeric_limits<int>::max() || n2 > std::numeric_limits<int>::max())
    throw InvalidInput("grid: too many nodes");
  g.n1 = static_cast<int>(n1);
  g.n2 = static_cast<int>(n2);
  g.j_zero = static_cast<int>(mlo - 1);
  g.j_top = static_cast<int>(mlo + md - 1);
  return g;
}

Grid2D Grid2D::fitted(double d, double h, double L_min, double H_lo_min, double H_hi_min) {
  auto up = [h](double x) { return std::max(1.0, std::ceil(x / h - 1e-9)) * h; };
  return make(d, h, up(L_min), up(H_lo_min), up(H_hi_min));
}

// ---------------------------------------------------------------- operator

std::string DiscreteOperator::description() const {
  std::ostringstream os;
  os << (is_background() ? "H_{alpha,0}" : "H_{alpha,eps}") << " alpha=" << alpha << " eps=" << epsilon
     << " h=" << grid.h << " L=" << grid.L << " n1=" << grid.n1 << " n2=" << grid.n2;
  return os.str();
}

double DiscreteOperator::potential(int i, int j) const {
  double v = column_potential[j];
  for (const auto& pc : perturbation) {
    if (pc.i != i) continue;
    for (std::size_t r = 0; r < pc.rows.size(); ++r)
      if (pc.rows[r] == j) v -= pc.u[r];
  }
  return v;
}

std::size_t DiscreteOperator::perturbed_cells() const {
  std::size_t n = 0;
  for (const auto& pc : perturbation) n += pc.rows.size();
  return n;
}

DiscreteOperator DiscreteOperator::background() const {
  DiscreteOperator b = *this;
  b.perturbation.clear();
  b.epsilon = 0.0;
  b.profile = profiles::zero_profile();
  return b;
}

Eigen::SparseMatrix<double> DiscreteOperator::to_sparse() const {
  const int n1 = grid.n1, n2 = grid.n2;
  const double ih2 = 1.0 / (grid.h * grid.h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(grid.size() * 5);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const auto p = static_cast<int>(grid.index(i, j));
      trip.emplace_back(p, p, 4.0 * ih2 + column_potential[j]);
      if (i > 0) trip.emplace_back(p, p - n2, -ih2);
      if (i + 1 < n1) trip.emplace_back(p, p + n2, -ih2);
      if (j > 0) trip.emplace_back(p, p - 1, -ih2);
      if (j + 1 < n2) trip.emplace_back(p, p + 1, -ih2);
    }
  for (const auto& pc : perturbation)
    for (std::size_t r = 0; r < pc.rows.size(); ++r) {
      const auto p = static_cast<int>(grid.index(pc.i, pc.rows[r]));
      trip.emplace_back(p, p, -pc.u[r]);
    }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.size()));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Tridiagonal DiscreteOperator::transverse() const {
  return well_tridiagonal({alpha, grid.d}, grid.H_lo, grid.H_hi, grid.h);
}

void check_grid_admissible(const Grid2D& g, const WellParams& p, const Profile& f, double epsilon) {
  p.validate();
  profiles::check_admissible(f, p.d, epsilon);
  if (std::abs(g.d - p.d) > 1e-12 * p.d) throw InvalidInput("grid: strip width differs from the well width");
  const auto well = well1d::solve_well(p);
  const double need = 8.0 / std::sqrt(-well.mu1());
  const double lower = p.d + epsilon * std::min(0.0, f.min_value()) + g.H_lo;
  const double upper = g.H_hi - epsilon * std::max(0.0, f.max_value());
  if (lower < need || upper < need)
    throw InvalidInput("grid: transverse clearance below 8/sqrt(-mu1)");
  const auto s = f.support();
  if (!f.is_zero() && (s.a <= -g.L || s.b >= g.L)) throw InvalidInput("grid: support of f not inside the box");
}

DiscreteOperator build_h2d(const WellParams& p, const Profile& f, double epsilon, const Grid2D& grid) {
  check_grid_admissible(grid, p, f, epsilon);
  DiscreteOperator op;
  op.grid = grid;
  op.alpha = p.alpha;
  op.epsilon = epsilon;
  op.profile = f;
  const auto t = op.transverse();
  const double d2 = 2.0 / (grid.h * grid.h);
  op.column_potential = t.diag.array() - d2;
  if (epsilon == 0.0 || f.is_zero()) return op;

  const auto sup = f.support();
  const double h = grid.h;
  const double top_lo = p.d + epsilon * std::min(0.0, f.min_value());
  const double top_hi = p.d + epsilon * std::max(0.0, f.max_value());
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < grid.n1; ++i) {
    const double xa = grid.x1(i) - 0.5 * h;
    if (xa + h <= sup.a || xa >= sup.b) continue;
    for (int j = 0; j < grid.n2; ++j) {
      const double lo = p.d + (j - grid.j_top - 0.5) * h;
      if (lo + h <= top_lo || lo >= top_hi) continue;
      cells.emplace_back(i, j);
    }
  }
  std::vector<double> frac;
  kernels::cell_fractions_omp(grid, f, epsilon, cells, frac);
  const double drop = 1e-13;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto [i, j] = cells[c];
    const double f0 = -op.column_potential[j] / p.alpha;
    const double du = frac[c] - f0;
    if (std::abs(du) <= drop) continue;
    if (op.perturbation.empty() || op.perturbation.back().i != i) op.perturbation.push_back({i, {}, {}});
    op.perturbation.back().rows.push_back(j);
    op.perturbation.back().u.push_back(p.alpha * du);
  }
  return op;
}

Grid2D default_grid(const well1d::WellSpectrum& well, const Profile& f, double epsilon, double h) {
  const double d = well.params.d;
  const double kappa = std::sqrt(-well.mu1());
  const auto m = profiles::moments(f);
  double L = 40.0 * d;
  const double v2 = well.v1_d() * well.v1_d();
  const double scale = std::abs(epsilon * well.params.alpha * v2 * m.I1 / 2.0);
  const double tol = 1e-9 * std::sqrt(m.I2) * std::sqrt(std::max(f.support().length(), 1e-300));
  if (std::abs(m.I1) > tol) {
    L = std::max(L, 10.0 / scale);
  } else if (m.D2 && m.I2 > 0.0) {
    // critical profile: binding scale eps^2 |q| / 2 from the optimal trial coefficient
    const double q = asymptotics::quadratic_coeff(well, f, kappa);
    if (q < 0.0) L = std::max(L, 10.0 / (0.5 * epsilon * epsilon * -q));
  }
  const auto s = f.support();
  L = std::max(L, 2.0 * std::max(std::abs(s.a), std::abs(s.b)));
  const double H = 10.0 / kappa;
  return Grid2D::fitted(d, h, L, H, H + epsilon * std::max(0.0, f.max_value()));
}

// ---------------------------------------------------------------- fields

Eigen::VectorXd apply(const DiscreteOperator& op, const Eigen::VectorXd& v) {
  Eigen::VectorXd y(v.size());
  kernels::apply_operator_omp(op, v.data(), y.data());
  return y;
}

double overlap(const Grid2D& g, const Eigen::VectorXd& psi, const Field& field) {
  double ip = 0.0, nu = 0.0;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const double u = field(g.x1(i), g.x2(j));
      ip += psi[static_cast<Eigen::Index>(g.index(i, j))] * u;
      nu += u * u;
    }
  const double np = psi.norm();
  if (np == 0.0 || nu == 0.0) return 0.0;
  return std::min(1.0, std::abs(ip) / (np * std::sqrt(nu)));
}

double overlap(const SpectralResult& r, const Field& field, std::size_t which) {
  if (which >= r.eigenvectors.size()) throw InvalidInput("overlap: eigenvector not present");
  return overlap(r.grid, r.eigenvectors[which], field);
}

double overlap_separable(const Grid2D& g, const Eigen::VectorXd& psi, const std::function<double(double)>& g1,
                         const std::function<double(double)>& v2) {
  Eigen::VectorXd a(g.n1), b(g.n2);
  for (int i = 0; i < g.n1; ++i) a[i] = g1(g.x1(i));
  for (int j = 0; j < g.n2; ++j) b[j] = v2(g.x2(j));
  const Eigen::Map<const Eigen::MatrixXd> P(psi.data(), g.n2, g.n1);
  const double ip = b.dot(P * a);
  const double nu = a.norm() * b.norm();
  const double np = psi.norm();
  if (np == 0.0 || nu == 0.0) return 0.0;
  return std::min(1.0, std::abs(ip) / (np * nu));
}

void write_eigenvector_csv(const std::string& path, const Grid2D& g, const Eigen::VectorXd& v, int stride) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  stride = std::max(1, stride);
  out << "x1,x2,value\n" << std::setprecision(17);
  for (int i = 0; i < g.n1; i += stride)
    for (int j = 0; j < g.n2; j += stride)
      out << g.x1(i) << ',' << g.x2(j) << ',' << v[static_cast<Eigen::Index>(g.index(i, j))] << '\n';
}

}  // namespace softguide::fd
