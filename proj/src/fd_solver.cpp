#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include <lapacke.h>

#include "softguide/errors.hpp"
#include "softguide/fd_oracle.hpp"
#include "softguide/kernels.hpp"

namespace softguide::fd {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Inverts a symmetric matrix in place and returns its number of negative
// eigenvalues. Cholesky first, Bunch-Kaufman when that fails.
long invert_with_inertia(MatrixXd& D, bool& indefinite) {
  const lapack_int n = static_cast<lapack_int>(D.rows());
  MatrixXd W = D;
  indefinite = false;
  if (LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, W.data(), n) == 0) {
    if (LAPACKE_dpotri(LAPACK_COL_MAJOR, 'L', n, W.data(), n) != 0)
      throw NumericalError("block inverse failed after Cholesky");
    W.triangularView<Eigen::StrictlyUpper>() = W.transpose();
    D.swap(W);
    return 0;
  }
  indefinite = true;
  W = D;
  std::vector<lapack_int> ipiv(n);
  const lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n, W.data(), n, ipiv.data());
  if (info > 0) throw NumericalError("singular diagonal block at the requested shift");
  if (info < 0) throw NumericalError("dsytrf argument error");
  long neg = 0;
  for (lapack_int k = 0; k < n;) {
    if (ipiv[k] > 0) {
      if (W(k, k) < 0.0) ++neg;
      ++k;
    } else {
      const double a = W(k, k), b = W(k + 1, k), c = W(k + 1, k + 1);
      const double det = a * c - b * b;
      if (det < 0.0)
        ++neg;
      else if (a < 0.0)
        neg += 2;
      k += 2;
    }
  }
  if (LAPACKE_dsytri2(LAPACK_COL_MAJOR, 'L', n, W.data(), n, ipiv.data()) != 0)
    throw NumericalError("block inverse failed after Bunch-Kaufman");
  W.triangularView<Eigen::StrictlyUpper>() = W.transpose();
  D.swap(W);
  return neg;
}

// Block LDL^T of (H - E) in the transverse modal basis. Exterior columns
// reduce to scalar chains per mode; the perturbed range uses dense blocks.
class BlockLDL {
 public:
  BlockLDL(const DiscreteOperator& op, const ModalBasis& basis, double E, bool store)
      : op_(op), basis_(basis), E_(E), store_(store) {
    const int n1 = op.grid.n1;
    const int n2 = op.grid.n2;
    const double h = op.grid.h;
    ih2_ = 1.0 / (h * h);
    c_ = ih2_ * ih2_;
    a_ = basis.lambda.array() + 2.0 * ih2_ - E;
    const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, c_);
    if (op.perturbation.empty()) {
      i0_ = i1_ = -1;
      nleft_ = n1;
      nright_ = 0;
    } else {
      i0_ = op.perturbation.front().i;
      i1_ = op.perturbation.back().i;
      nleft_ = i0_;
      nright_ = n1 - 1 - i1_;
    }
    lastL_.setZero(n2);
    lastR_.setZero(n2);
    if (store) {
      sL_.resize(n2, nleft_);
      sR_.resize(n2, nright_);
    }
    if (nleft_ > 0)
      negatives_ += kernels::exterior_sweep_omp(a_.data(), n2, nleft_, c_, pivmin, store ? sL_.data() : nullptr,
                                                lastL_.data());
    if (nright_ > 0)
      negatives_ += kernels::exterior_sweep_omp(a_.data(), n2, nright_, c_, pivmin, store ? sR_.data() : nullptr,
                                                lastR_.data());
    if (i0_ < 0) return;

    std::size_t pc = 0;
    MatrixXd prev;
    for (int i = i0_; i <= i1_; ++i) {
      MatrixXd D = a_.asDiagonal();
      if (pc < op.perturbation.size() && op.perturbation[pc].i == i) {
        const auto& col = op.perturbation[pc];
        MatrixXd QJ(col.rows.size(), n2);
        VectorXd u(col.rows.size());
        for (std::size_t r = 0; r < col.rows.size(); ++r) {
          QJ.row(r) = basis.Q.row(col.rows[r]);
          u[r] = col.u[r];
        }
        D.noalias() -= QJ.transpose() * u.asDiagonal() * QJ;
        ++pc;
      }
      if (i == i0_ && nleft_ > 0) D.diagonal().array() -= c_ / lastL_.array();
      if (i > i0_) D.noalias() -= c_ * prev;
      if (i == i1_ && nright_ > 0) D.diagonal().array() -= c_ / lastR_.array();
      bool indefinite = false;
      negatives_ += invert_with_inertia(D, indefinite);
      if (indefinite) ++indefinite_blocks_;
      if (store) {
        Dinv_.push_back(D);
        prev = Dinv_.back();
      } else {
        prev.swap(D);
      }
    }
  }

  long negatives() const { return negatives_; }
  int indefinite_blocks() const { return indefinite_blocks_; }

  // X (n2 x n1, modal coordinates) <- (H - E)^{-1} X
  void solve(MatrixXd& X) const {
    if (!store_) throw NumericalError("factorization was built without storage");
    const int n1 = op_.grid.n1;
    auto sl = [&](int i) { return sL_.col(i).array(); };
    auto sr = [&](int i) { return sR_.col(n1 - 1 - i).array(); };  // stored by sweep step
    // forward
    for (int i = 1; i < nleft_; ++i) X.col(i).array() += ih2_ * X.col(i - 1).array() / sl(i - 1);
    for (int i = n1 - 2; i >= n1 - nright_; --i) X.col(i).array() += ih2_ * X.col(i + 1).array() / sr(i + 1);
    VectorXd tmp;
    if (i0_ >= 0) {
      if (nleft_ > 0) X.col(i0_).array() += ih2_ * X.col(i0_ - 1).array() / sl(i0_ - 1);
      for (int i = i0_ + 1; i <= i1_; ++i) {
        tmp.noalias() = Dinv_[i - 1 - i0_] * X.col(i - 1);
        X.col(i) += ih2_ * tmp;
      }
      if (nright_ > 0) X.col(i1_).array() += ih2_ * X.col(i1_ + 1).array() / sr(i1_ + 1);
    }
    // diagonal
    for (int i = 0; i < nleft_; ++i) X.col(i).array() /= sl(i);
    for (int i = n1 - nright_; i < n1; ++i) X.col(i).array() /= sr(i);
    for (int i = i0_; i >= 0 && i <= i1_; ++i) {
      tmp.noalias() = Dinv_[i - i0_] * X.col(i);
      X.col(i) = tmp;
    }
    // backward
    if (i0_ >= 0) {
      for (int i = i1_ - 1; i >= i0_; --i) {
        tmp.noalias() = Dinv_[i - i0_] * X.col(i + 1);
        X.col(i) += ih2_ * tmp;
      }
      for (int i = i1_ + 1; i < n1; ++i) X.col(i).array() += ih2_ * X.col(i - 1).array() / sr(i);
      for (int i = i0_ - 1; i >= 0; --i) X.col(i).array() += ih2_ * X.col(i + 1).array() / sl(i);
    } else {
      for (int i = n1 - 2; i >= 0; --i) X.col(i).array() += ih2_ * X.col(i + 1).array() / sl(i);
    }
  }

 private:
  const DiscreteOperator& op_;
  const ModalBasis& basis_;
  double E_ = 0.0;
  bool store_ = false;
  double ih2_ = 0.0, c_ = 0.0;
  VectorXd a_;
  int i0_ = -1, i1_ = -1, nleft_ = 0, nright_ = 0;
  MatrixXd sL_, sR_;
  VectorXd lastL_, lastR_;
  std::vector<MatrixXd> Dinv_;
  long negatives_ = 0;
  int indefinite_blocks_ = 0;
};

// H X in modal coordinates.
MatrixXd apply_modal(const DiscreteOperator& op, const ModalBasis& B, const MatrixXd& X) {
  const int n1 = op.grid.n1;
  const int n2 = op.grid.n2;
  const double ih2 = 1.0 / (op.grid.h * op.grid.h);
  const VectorXd a = B.lambda.array() + 2.0 * ih2;
  MatrixXd Y(n2, n1);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n1; ++i) {
    Y.col(i) = a.cwiseProduct(X.col(i));
    if (i > 0) Y.col(i) -= ih2 * X.col(i - 1);
    if (i + 1 < n1) Y.col(i) -= ih2 * X.col(i + 1);
  }
  for (const auto& col : op.perturbation) {
    for (std::size_t r = 0; r < col.rows.size(); ++r) {
      const auto q = B.Q.row(col.rows[r]);
      const double t = col.u[r] * q.dot(X.col(col.i));
      Y.col(col.i) -= t * q.transpose();
    }
  }
  return Y;
}

double lower_bound(const DiscreteOperator& op) {
  // H >= K1 (x) I + I (x) (T2 - diag(max_i u_ij^+))
  auto t = op.transverse();
  VectorXd umax = VectorXd::Zero(op.grid.n2);
  for (const auto& col : op.perturbation)
    for (std::size_t r = 0; r < col.rows.size(); ++r) umax[col.rows[r]] = std::max(umax[col.rows[r]], col.u[r]);
  t.diag -= umax;
  const double g = t.gershgorin_lower();
  const double top = t.diag.maxCoeff() + 2.0 * std::abs(t.off);
  const double e2 = t.eigenvalue(1, g - 1.0, top + 1.0, 1e-14 * std::max(1.0, std::abs(g)));
  const double h = op.grid.h;
  const double s = std::sin(std::numbers::pi / (2.0 * (op.grid.n1 + 1)));
  const double e1 = 4.0 / (h * h) * s * s;
  const double lb = e1 + e2;
  return lb - 1e-10 * std::max(1.0, std::abs(lb));
}

}  // namespace

ModalBasis modal_basis(const DiscreteOperator& op) {
  const auto t = op.transverse();
  const lapack_int n = static_cast<lapack_int>(t.diag.size());
  ModalBasis B;
  B.lambda = t.diag;
  VectorXd e = VectorXd::Constant(std::max<lapack_int>(n - 1, 1), t.off);
  B.Q.resize(n, n);
  if (LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, B.lambda.data(), e.data(), B.Q.data(), n) != 0)
    throw NumericalError("transverse eigen-decomposition failed");
  return B;
}

long count_below(const DiscreteOperator& op, double E) {
  const auto B = modal_basis(op);
  return BlockLDL(op, B, E, false).negatives();
}

SpectralResult lowest_eigs(const DiscreteOperator& op, double threshold, int k_max, const SolveOptions& opt) {
  if (k_max < 1) throw InvalidInput("lowest_eigs: k_max must be >= 1");
  const auto B = modal_basis(op);
  SpectralResult res;
  res.grid = op.grid;
  auto& dg = res.diagnostics;
  dg.threshold = threshold;
  dg.transverse_threshold = B.lambda[0];
  dg.lower_bound = lower_bound(op);

  std::map<double, long> known;
  auto count = [&](double E) {
    auto it = known.find(E);
    if (it != known.end()) return it->second;
    BlockLDL F(op, B, E, false);
    ++dg.factorizations;
    dg.indefinite_blocks += F.indefinite_blocks();
    known[E] = F.negatives();
    return F.negatives();
  };
  const long nT = count(threshold);
  dg.count_below_threshold = nT;
  if (nT == 0 || dg.lower_bound >= threshold) return res;
  known[dg.lower_bound] = 0;
  const long n = std::min<long>(nT, k_max);
  if (opt.guess && *opt.guess < threshold && *opt.guess > dg.lower_bound) {
    const double b0 = threshold - *opt.guess;
    for (double s : {0.7, 1.4}) {
      const double E = threshold - s * b0;
      if (E > dg.lower_bound) count(E);
    }
  }

  // greatest known point with count <= c, smallest with count >= c
  auto below = [&](long c) {
    double e = -std::numeric_limits<double>::infinity();
    for (const auto& [E, v] : known)
      if (v <= c) e = std::max(e, E);
    return e;
  };
  auto above = [&](long c) {
    double e = std::numeric_limits<double>::infinity();
    for (const auto& [E, v] : known)
      if (v >= c) e = std::min(e, E);
    return e;
  };

  std::mt19937_64 rng(12345);
  std::normal_distribution<double> nd(0.0, 1.0);
  const int n1 = op.grid.n1, n2 = op.grid.n2;

  for (long m = 1; m <= n; ++m) {
    double a = below(m - 1), b = above(m);
    for (int it = 0; it < opt.max_bisection; ++it) {
      const double gap_up = below(m) - b;
      const double gap_dn = m > 1 ? a - above(m - 1) : std::numeric_limits<double>::infinity();
      const bool isolated = known[a] == m - 1 && known[b] == m;
      const double w = b - a;
      if (isolated && w <= opt.isolation * std::min(gap_up, gap_dn)) break;
      const double c = 0.5 * (a + b);
      if (c <= a || c >= b) {
        dg.count_below_threshold = nT;
        throw NumericalError("lowest_eigs: eigenvalue cluster cannot be separated by bisection");
      }
      count(c);
      a = below(m - 1);
      b = above(m);
    }
    if (!(known[a] == m - 1 && known[b] == m))
      throw NumericalError("lowest_eigs: bisection did not isolate the eigenvalue");

    BlockLDL F(op, B, a, true);
    ++dg.factorizations;
    MatrixXd X(n2, n1);
    for (Eigen::Index t = 0; t < X.size(); ++t) X.data()[t] = nd(rng);
    X /= X.norm();
    double rho = a;
    double rnorm = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opt.max_inverse_iterations; ++it) {
      F.solve(X);
      X /= X.norm();
      ++dg.inverse_iterations;
      const MatrixXd Y = apply_modal(op, B, X);
      rho = (X.array() * Y.array()).sum();
      rnorm = (Y - rho * X).norm();
      if (rnorm <= opt.residual_tol * std::max(1.0, std::abs(rho))) break;
    }
    if (rho < a || rho > b + 1e-9 * std::max(1.0, std::abs(b)))
      throw NumericalError("lowest_eigs: inverse iteration left the isolating bracket");

    MatrixXd V = B.Q * X;
    VectorXd v = Eigen::Map<VectorXd>(V.data(), V.size());
    if (v.sum() < 0.0) v = -v;
    const VectorXd Av = apply(op, v);
    const double resid = (Av - rho * v).norm() / v.norm();
    if (resid > 1e-8) throw NumericalError("lowest_eigs: eigenpair residual above 1e-8");
    v /= v.norm() * op.grid.h;
    res.eigenvalues.push_back(rho);
    if (opt.want_vectors) res.eigenvectors.push_back(std::move(v));
    res.residuals.push_back(resid);
  }

  if (opt.truncation_estimate)
    res.truncation_estimate =
        truncation_estimate(op, res.eigenvalues.empty() ? std::nullopt : std::optional<double>(res.eigenvalues[0]))
            .tau;
  return res;
}

TruncationEstimate truncation_estimate(const DiscreteOperator& op, std::optional<double> lambda1) {
  TruncationEstimate t;
  const auto& g = op.grid;
  const WellParams p{op.alpha, g.d};
  const auto t1 = well_tridiagonal(p, g.H_lo, g.H_hi, g.h);
  const auto t2 = well_tridiagonal(p, 2.0 * g.H_lo, 2.0 * g.H_hi, g.h);
  const double lo = t1.gershgorin_lower() - 1.0;
  const double mu_a = t1.eigenvalue(1, lo, 0.0, 1e-15);
  const double mu_b = t2.eigenvalue(1, lo, 0.0, 1e-15);
  t.transverse = std::abs(mu_a - mu_b);
  const auto g2 = Grid2D::make(g.d, g.h, 2.0 * g.L, g.H_lo, g.H_hi);
  const auto op2 = build_h2d(p, op.profile, op.epsilon, g2);
  const double thr = mu_a;
  if (lambda1) {
    SolveOptions o;
    o.want_vectors = false;
    o.guess = *lambda1;
    const auto r2 = lowest_eigs(op2, thr, 1, o);
    t.count_doubled = r2.diagnostics.count_below_threshold;
    if (r2.eigenvalues.empty()) throw NumericalError("truncation estimate: eigenvalue lost on the doubled box");
    t.longitudinal = std::abs(*lambda1 - r2.eigenvalues[0]);
  } else {
    t.count_doubled = count_below(op2, thr);
  }
  t.tau = t.longitudinal + t.transverse;
  return t;
}

Eigen::VectorXd resolvent_solve(const DiscreteOperator& op, double kappa, const Eigen::VectorXd& rhs) {
  const auto& g = op.grid;
  if (rhs.size() != static_cast<Eigen::Index>(g.size())) throw InvalidInput("resolvent_solve: rhs size mismatch");
  const auto B = modal_basis(op);
  BlockLDL F(op, B, -kappa * kappa, true);
  if (F.negatives() > 0) throw RegimeError("resolvent_solve: indefinite shift (kappa too small)");
  const Eigen::Map<const MatrixXd> R(rhs.data(), g.n2, g.n1);
  MatrixXd X = B.Q.transpose() * R;
  F.solve(X);
  MatrixXd V = B.Q * X;
  VectorXd x = Eigen::Map<VectorXd>(V.data(), V.size());
  const VectorXd r = apply(op, x) + kappa * kappa * x - rhs;
  const double rel = r.norm() / std::max(rhs.norm(), std::numeric_limits<double>::min());
  if (rel > 1e-10) throw NumericalError("resolvent_solve: relative residual above 1e-10");
  return x;
}

Eigen::MatrixXd resolvent_block(const DiscreteOperator& op0, double kappa, const std::vector<std::size_t>& S) {
  return resolvent_block(op0, modal_basis(op0), kappa, S);
}

Eigen::MatrixXd resolvent_block(const DiscreteOperator& op0, const ModalBasis& B, double kappa,
                                const std::vector<std::size_t>& S) {
  if (!op0.is_background()) throw InvalidInput("resolvent_block: operator must be the unperturbed one");
  const auto& g = op0.grid;
  const double k2 = kappa * kappa;
  if (!(B.lambda[0] + k2 > 0.0)) throw RegimeError("resolvent_block: indefinite shift (kappa too small)");
  std::map<int, kernels::ColumnGroup> by_col;
  for (std::size_t p = 0; p < S.size(); ++p) {
    const int i = static_cast<int>(S[p] / g.n2);
    const int j = static_cast<int>(S[p] % g.n2);
    auto& grp = by_col[i];
    grp.i = i;
    grp.rows.push_back(j);
    grp.pos.push_back(p);
  }
  std::vector<kernels::ColumnGroup> groups;
  for (auto& [i, grp] : by_col) groups.push_back(std::move(grp));
  VectorXd theta(g.n2);
  for (int k = 0; k < g.n2; ++k) {
    const double x = 0.5 * (B.lambda[k] + k2) * g.h * g.h;
    theta[k] = std::log1p(x + std::sqrt(x * (2.0 + x)));
  }
  MatrixXd out(S.size(), S.size());
  kernels::resolvent_block_omp(groups, B.Q, theta, g.n1, g.h, out);
  return out;
}

}  // namespace softguide::fd
