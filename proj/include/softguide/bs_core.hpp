#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "softguide/fd_oracle.hpp"
#include "softguide/profiles.hpp"
#include "softguide/well1d.hpp"

namespace softguide::bs {

using profiles::Profile;
using well1d::WellSpectrum;

// U = alpha (chi_{Omega_eps} - chi_{Omega_0}), V = sign(U) |U|^(1/2).
class DeformationPotential {
 public:
  DeformationPotential(const WellSpectrum& well, const Profile& f, double epsilon);

  double U(double x1, double x2) const;
  double V(double x1, double x2) const;

  struct Box {
    double x1a, x1b, x2a, x2b;
  };
  Box support_box() const;

  double l1_norm() const;             // alpha eps int |f|
  double l1_norm_quadrature() const;  // same, integrated from the layer geometry
  double weighted_integral() const;   // int U v1^2 = alpha int W(d + eps f)
  // alpha int |W(d + eps f)|, i.e. int |U| v1^2
  double abs_weighted_integral() const;
  double abs_layer(double x1) const;  // |W(d + eps f(x1))|

  const WellSpectrum& well() const { return well_; }
  const Profile& profile() const { return f_; }
  double epsilon() const { return eps_; }
  double alpha() const { return well_.params.alpha; }
  double d() const { return well_.params.d; }

 private:
  WellSpectrum well_;
  Profile f_;
  double eps_ = 0.0;
};

// (exp(-delta |x1 - x1p|) - 1) / (2 delta)
double kernel_m(double delta, double x1, double x1p);

// (1 / 2 delta) int U v1^2
double rank_one_eigenvalue(const DeformationPotential& pot, double delta);

struct HsBound {
  double bound = 0.0;    // M ||U||_1 ||v1||_inf^2
  double hs_norm = 0.0;  // Hilbert-Schmidt norm of the m_delta part
  double hs_error = 0.0;
};

HsBound hs_bound_M(const DeformationPotential& pot, double delta);

struct DiscreteBS {
  std::vector<std::size_t> S;  // node indices with U != 0
  Eigen::VectorXd u;           // U on S
  Eigen::MatrixXd B;
  Eigen::VectorXd eigenvalues;  // descending (real parts)
  bool symmetric = false;

  double top() const { return eigenvalues[0]; }
  double norm() const;
};

// The grid of op0 defines S and the resolvent; op0 must be unperturbed.
DiscreteBS discrete_bs_matrix(const DeformationPotential& pot, double kappa, const fd::DiscreteOperator& op0);

struct SecularValue {
  double delta = 0.0;
  double kappa = 0.0;
  double F = 0.0;
  double N_norm = 0.0;
};

// Reusable evaluator of the discrete secular function on a fixed grid.
class DiscreteSecular {
 public:
  DiscreteSecular(const DeformationPotential& pot, const fd::DiscreteOperator& op0);
  SecularValue operator()(double delta) const;
  double threshold() const { return mu1_fd_; }
  std::size_t size() const { return S_.size(); }

 private:
  const fd::DiscreteOperator* op0_;
  std::vector<std::size_t> S_;
  Eigen::VectorXd sqrt_u_, sign_u_, v1_;
  fd::ModalBasis basis_;
  double mu1_fd_ = 0.0;
  double h_ = 0.0;
};

SecularValue secular_function_discrete(const DeformationPotential& pot, double delta, const fd::DiscreteOperator& op0);

enum class SecularMode { Leading, DiscreteFull };
std::string to_string(SecularMode m);

struct SecularSolve {
  double epsilon = 0.0;
  double delta_root = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  SecularMode method = SecularMode::Leading;
  double residual = 0.0;  // |F - 1| at the root
  double lambda1 = 0.0;   // threshold - delta^2
  double threshold = 0.0;  // mu1 (leading) or the grid threshold (discrete)
  int evaluations = 0;
};

// Throws RegimeError("no root found") when F - 1 does not change sign.
SecularSolve solve_secular(const DeformationPotential& pot, const fd::DiscreteOperator* op0, SecularMode mode);

}  // namespace softguide::bs
