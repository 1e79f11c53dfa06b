#include "softguide/bs_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "softguide/asymptotics.hpp"
#include "softguide/errors.hpp"
#include "softguide/quadrature.hpp"

namespace softguide::bs {

using well1d::eval_mode;
using well1d::eval_transverse_integral;

DeformationPotential::DeformationPotential(const WellSpectrum& well, const Profile& f, double epsilon)
    : well_(well), f_(f), eps_(epsilon) {
  if (!(epsilon >= 0.0)) throw InvalidInput("deformation potential: epsilon must be non-negative");
  profiles::check_admissible(f, well.params.d, epsilon);
}

double DeformationPotential::U(double x1, double x2) const {
  const double d = well_.params.d;
  const double top = d + eps_ * f_(x1);
  if (top > d && x2 > d && x2 < top) return alpha();
  if (top < d && x2 > top && x2 < d) return -alpha();
  return 0.0;
}

double DeformationPotential::V(double x1, double x2) const {
  const double u = U(x1, x2);
  return u == 0.0 ? 0.0 : std::copysign(std::sqrt(std::abs(u)), u);
}

DeformationPotential::Box DeformationPotential::support_box() const {
  const auto s = f_.support();
  const double d = well_.params.d;
  return {s.a, s.b, d + eps_ * std::min(0.0, f_.min_value()), d + eps_ * std::max(0.0, f_.max_value())};
}

double DeformationPotential::l1_norm() const { return alpha() * eps_ * profiles::moments(f_).abs_I1; }

double DeformationPotential::l1_norm_quadrature() const {
  const auto s = f_.support();
  const double d = well_.params.d;
  auto thick = [&](double x) { return std::abs(d + eps_ * f_(x) - d); };
  return alpha() * quad::integrate(thick, s.a, s.b, f_.breakpoints()).value;
}

double DeformationPotential::abs_layer(double x1) const {
  return std::abs(eval_transverse_integral(well_.ground(), well_.params.d + eps_ * f_(x1)));
}

double DeformationPotential::weighted_integral() const {
  const auto s = f_.support();
  auto w = [&](double x) { return eval_transverse_integral(well_.ground(), well_.params.d + eps_ * f_(x)); };
  return alpha() * quad::integrate(w, s.a, s.b, f_.breakpoints()).value;
}

double DeformationPotential::abs_weighted_integral() const {
  const auto s = f_.support();
  return alpha() * quad::integrate([&](double x) { return abs_layer(x); }, s.a, s.b, f_.breakpoints()).value;
}

double kernel_m(double delta, double x1, double x1p) {
  if (!(delta > 0.0)) throw InvalidInput("kernel_m: delta must be positive");
  const double r = std::abs(x1 - x1p);
  const double x = delta * r;
  if (x < 1e-6) return 0.5 * r * (-1.0 + x / 2.0 - x * x / 6.0 + x * x * x / 24.0);
  return std::expm1(-x) / (2.0 * delta);
}

double rank_one_eigenvalue(const DeformationPotential& pot, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("rank_one_eigenvalue: delta must be positive");
  return pot.weighted_integral() / (2.0 * delta);
}

HsBound hs_bound_M(const DeformationPotential& pot, double delta) {
  if (!(delta > 0.0)) throw InvalidInput("hs_bound_M: delta must be positive");
  HsBound r;
  const auto& f = pot.profile();
  if (f.is_zero() || pot.epsilon() == 0.0) return r;
  const auto s = f.support();
  const double M = 0.5 * s.length();
  const double vinf = well1d::mode_sup_norm(pot.well().ground());
  r.bound = M * pot.l1_norm() * vinf * vinf;
  const auto brk = f.breakpoints();
  double err = 0.0;
  auto outer = [&](double x) {
    auto b2 = brk;
    b2.push_back(x);
    auto inner = [&](double y) {
      const double m = kernel_m(delta, x, y);
      return m * m * pot.abs_layer(y);
    };
    const auto q = quad::integrate(inner, s.a, s.b, b2, 1e-10);
    err += q.error * pot.abs_layer(x);
    return q.value * pot.abs_layer(x);
  };
  const auto q = quad::integrate(outer, s.a, s.b, brk, 1e-9);
  const double a2 = pot.alpha() * pot.alpha();
  r.hs_norm = std::sqrt(a2 * q.value);
  r.hs_error = a2 * (q.error + err) / std::max(2.0 * r.hs_norm, std::numeric_limits<double>::min());
  return r;
}

double DiscreteBS::norm() const {
  return B.operatorNorm();
}

namespace {

struct Layer {
  std::vector<std::size_t> S;
  Eigen::VectorXd u;
};

Layer layer_cells(const DeformationPotential& pot, const fd::DiscreteOperator& op0, bool allow_empty = false) {
  if (!op0.is_background()) throw InvalidInput("expected the unperturbed operator H_{alpha,0}");
  if (std::abs(op0.alpha - pot.alpha()) > 1e-14 * pot.alpha()) throw InvalidInput("alpha mismatch with the grid operator");
  const auto op = fd::build_h2d(pot.well().params, pot.profile(), pot.epsilon(), op0.grid);
  Layer L;
  for (const auto& col : op.perturbation)
    for (std::size_t r = 0; r < col.rows.size(); ++r) {
      L.S.push_back(op0.grid.index(col.i, col.rows[r]));
    }
  L.u.resize(static_cast<Eigen::Index>(L.S.size()));
  std::size_t p = 0;
  for (const auto& col : op.perturbation)
    for (double v : col.u) L.u[static_cast<Eigen::Index>(p++)] = v;
  if (L.S.empty() && !allow_empty) throw RegimeError("zero deformation: no grid cell is perturbed");
  return L;
}

double power_norm(const Eigen::MatrixXd& N) {
  if (N.size() == 0) return 0.0;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(N.cols()) / std::sqrt(static_cast<double>(N.cols()));
  double s = 0.0;
  for (int it = 0; it < 500; ++it) {
    Eigen::VectorXd y = N.transpose() * (N * x);
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    const double s_new = std::sqrt(ny);
    x = y / ny;
    if (std::abs(s_new - s) <= 1e-9 * s_new) return s_new;
    s = s_new;
  }
  return s;
}

}  // namespace

DiscreteBS discrete_bs_matrix(const DeformationPotential& pot, double kappa, const fd::DiscreteOperator& op0) {
  if (!(kappa > 0.0)) throw InvalidInput("discrete_bs_matrix: kappa must be positive");
  const auto L = layer_cells(pot, op0);
  const auto basis = fd::modal_basis(op0);
  if (!(basis.lambda[0] + kappa * kappa > 0.0))
    throw RegimeError("discrete_bs_matrix: indefinite shift (kappa <= sqrt(-mu1 on the grid))");
  const Eigen::MatrixXd R = fd::resolvent_block(op0, basis, kappa, L.S);
  DiscreteBS out;
  out.S = L.S;
  out.u = L.u;
  const Eigen::VectorXd sq = L.u.cwiseAbs().cwiseSqrt();
  Eigen::VectorXd sg = L.u.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
  out.B = sg.cwiseProduct(sq).asDiagonal() * R * sq.asDiagonal();
  out.symmetric = (L.u.array() >= 0.0).all();
  if (out.symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.B, Eigen::EigenvaluesOnly);
    out.eigenvalues = es.eigenvalues().reverse();
  } else {
    Eigen::EigenSolver<Eigen::MatrixXd> es(out.B, false);
    Eigen::VectorXd ev = es.eigenvalues().real();
    std::sort(ev.data(), ev.data() + ev.size(), std::greater<double>());
    out.eigenvalues = ev;
  }
  return out;
}

DiscreteSecular::DiscreteSecular(const DeformationPotential& pot, const fd::DiscreteOperator& op0) : op0_(&op0) {
  const auto L = layer_cells(pot, op0, true);
  S_ = L.S;
  sqrt_u_ = L.u.cwiseAbs().cwiseSqrt();
  sign_u_ = L.u.unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
  v1_.resize(sqrt_u_.size());
  const auto& g = op0.grid;
  for (std::size_t p = 0; p < S_.size(); ++p)
    v1_[static_cast<Eigen::Index>(p)] = eval_mode(pot.well().ground(), g.x2(static_cast<int>(S_[p] % g.n2)));
  h_ = g.h;
  basis_ = fd::modal_basis(op0);
  mu1_fd_ = basis_.lambda[0];
}

SecularValue DiscreteSecular::operator()(double delta) const {
  if (!(delta > 0.0)) throw InvalidInput("secular function: delta must be positive");
  SecularValue r;
  r.delta = delta;
  r.kappa = std::sqrt(-mu1_fd_ + delta * delta);
  if (S_.empty()) return r;
  const Eigen::MatrixXd R = fd::resolvent_block(*op0_, basis_, r.kappa, S_);
  const Eigen::VectorXd a = sign_u_.cwiseProduct(sqrt_u_).cwiseProduct(v1_);
  const Eigen::VectorXd b = sqrt_u_.cwiseProduct(v1_);
  const double c = h_ * h_ / (2.0 * delta);
  Eigen::MatrixXd N = sign_u_.cwiseProduct(sqrt_u_).asDiagonal() * R * sqrt_u_.asDiagonal();
  N.noalias() -= c * a * b.transpose();
  r.N_norm = power_norm(N);
  if (r.N_norm >= 1.0) throw RegimeError("Neumann regime violated: eps too large for this delta");
  Eigen::MatrixXd I_N = -N;
  I_N.diagonal().array() += 1.0;
  const Eigen::VectorXd y = I_N.partialPivLu().solve(a);
  r.F = c * b.dot(y);
  return r;
}

SecularValue secular_function_discrete(const DeformationPotential& pot, double delta, const fd::DiscreteOperator& op0) {
  if (pot.profile().is_zero() || pot.epsilon() == 0.0) return {delta, std::sqrt(-fd::modal_basis(op0).lambda[0] + delta * delta), 0.0, 0.0};
  return DiscreteSecular(pot, op0)(delta);
}

std::string to_string(SecularMode m) { return m == SecularMode::Leading ? "leading" : "discrete-full"; }

SecularSolve solve_secular(const DeformationPotential& pot, const fd::DiscreteOperator* op0, SecularMode mode) {
  SecularSolve out;
  out.epsilon = pot.epsilon();
  out.method = mode;
  const auto& well = pot.well();
  const auto m = profiles::moments(pot.profile());
  const double v2 = well.v1_d() * well.v1_d();
  double dhat = std::abs(pot.epsilon() * pot.alpha() * v2 * m.I1 / 2.0);
  if (dhat == 0.0 && m.D2 && m.I2 > 0.0) {
    const double q = asymptotics::quadratic_coeff(well, pot.profile(), std::sqrt(-well.mu1()));
    dhat = 0.5 * pot.epsilon() * pot.epsilon() * std::abs(q);
  }
  if (!(dhat > 0.0)) throw RegimeError("no root found: zero deformation");
  out.bracket_lo = dhat / 4.0;
  out.bracket_hi = 4.0 * dhat;

  if (mode == SecularMode::Leading) {
    const double delta = 0.5 * pot.weighted_integral();
    out.evaluations = 1;
    if (!(delta > 0.0)) throw RegimeError("no root found: rank-one balance has no positive root");
    out.delta_root = delta;
    out.residual = std::abs(rank_one_eigenvalue(pot, delta) - 1.0);
    out.threshold = well.mu1();
    out.lambda1 = well.mu1() - delta * delta;
    return out;
  }

  if (!op0) throw InvalidInput("discrete-full secular solve needs the grid operator");
  const DiscreteSecular F(pot, *op0);
  auto G = [&](double delta) {
    ++out.evaluations;
    return F(delta).F - 1.0;
  };
  double lo = out.bracket_lo, hi = out.bracket_hi;
  // a finite box caps how small delta may go before the lattice resolvent
  // leaves the Neumann regime; creep toward dhat until it is back inside
  double glo = 0.0;
  for (int k = 0;; ++k) {
    try {
      glo = G(lo);
      break;
    } catch (const RegimeError&) {
      if (k == 6) throw;
      lo = std::sqrt(lo * dhat);
    }
  }
  double ghi = G(hi);
  for (int k = 0; k < 4 && !(glo > 0.0 && ghi < 0.0); ++k) {
    if (glo <= 0.0) {
      lo /= 2.0;
      glo = G(lo);
    }
    if (ghi >= 0.0) {
      hi *= 2.0;
      ghi = G(hi);
    }
  }
  if (!(glo > 0.0 && ghi < 0.0)) throw RegimeError("no root found: F - 1 has no sign change in the bracket");
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  boost::math::tools::eps_tolerance<double> tol(28);
  const auto r = boost::math::tools::bisect(G, lo, hi, tol);
  out.delta_root = 0.5 * (r.first + r.second);
  out.residual = std::abs(F(out.delta_root).F - 1.0);
  out.threshold = F.threshold();
  out.lambda1 = out.threshold - out.delta_root * out.delta_root;
  return out;
}

}  // namespace softguide::bs
