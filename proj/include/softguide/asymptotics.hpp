#pragma once

#include <optional>
#include <string>
#include <vector>

#include "softguide/profiles.hpp"
#include "softguide/well1d.hpp"

namespace softguide::asymptotics {

using profiles::Profile;
using well1d::WellSpectrum;

enum class Classification { Trivial, UniqueBoundState, NoBoundState, Critical };
std::string to_string(Classification c);

struct Lambda1Prediction {
  double lambda1 = 0.0;
  double mu1 = 0.0;
  double eps2_coeff = 0.0;  // (alpha^2 v1(d)^4 / 4) I1^2
  Classification classification = Classification::Trivial;
};

Lambda1Prediction predict_lambda1(const WellSpectrum& well, const Profile& f, double epsilon);

// eps * alpha * v1(d)^2 * I1 / 2; RegimeError unless I1 > 0.
double predict_delta(const WellSpectrum& well, const Profile& f, double epsilon);

struct Prediction {
  double mu1 = 0.0;
  double v1_d = 0.0;
  double lambda1_eps2_coeff = 0.0;
  double delta_hat_slope = 0.0;
  std::optional<double> u_norm_leading;
  double dirichlet_const = 0.0;
  double dirichlet_eps2_coeff = 0.0;
  std::optional<double> critical_ratio;
  double critical_threshold = 0.0;
  Classification classification = Classification::Trivial;

  double lambda1_at(double epsilon) const { return mu1 - epsilon * epsilon * lambda1_eps2_coeff; }
};

Prediction make_prediction(const WellSpectrum& well, const Profile& f);

// u_eps(x1, x2) = v1(x2) g(x1) / sqrt(eps) with
// g(x1) = sqrt(alpha) * int exp(-dhat |x1 - s|) W(d + eps f(s)) ds.
class LeadingEigenfunction {
 public:
  LeadingEigenfunction(const WellSpectrum& well, const Profile& f, double epsilon);

  double operator()(double x1, double x2) const;
  double longitudinal(double x1) const;  // g(x1)
  double transverse(double x2) const;    // v1(x2)
  double delta_hat() const { return dhat_; }
  double epsilon() const { return eps_; }

  // L2 norm over the plane by quadrature of g^2 (closed-form tails).
  double norm() const;
  // sqrt(2) v1(d) I1^(1/2)
  double leading_norm() const { return leading_norm_; }

 private:
  well1d::WellMode mode_;
  Profile f_;
  double eps_ = 0.0;
  double alpha_ = 0.0;
  double d_ = 0.0;
  double dhat_ = 0.0;
  double a_ = 0.0, b_ = 0.0;
  double amp_right_ = 0.0;  // g(x) = amp_right * exp(-dhat x) for x >= b
  double amp_left_ = 0.0;   // g(x) = amp_left * exp(dhat x) for x <= a
  double leading_norm_ = 0.0;
  std::vector<double> breaks_;
};

double leading_eigenfunction(const WellSpectrum& well, const Profile& f, double epsilon, double x1, double x2);

// (pi/d)^2 - eps^2 (pi/d)^4 (I1/d)^2
double dirichlet_compare(double d, const Profile& f, double epsilon);

struct CoefficientRow {
  double alpha = 0.0;
  double soft_coeff = 0.0;
  double dirichlet_coeff = 0.0;
  double ratio = 0.0;
  double mu1_plus_alpha = 0.0;
  double pi2_over_d2 = 0.0;
  double threshold_gap = 0.0;  // (mu1 + alpha) - (pi/d)^2
};

std::vector<CoefficientRow> coefficient_limit_check(const std::vector<double>& alphas, double d,
                                                    const Profile& f);

struct CriticalCheck {
  double ratio = 0.0;      // D2 / I2
  double threshold = 0.0;  // alpha v1(d)^2 / sqrt(-mu1)
  bool satisfied = false;
  std::string verdict;  // "bound state guaranteed" or "inconclusive"
};

CriticalCheck critical_check(const WellSpectrum& well, const Profile& f);

struct TrialEnergy {
  double lambda = 0.0;
  double epsilon = 0.0;
  double cutoff_scale = 0.0;
  double J_exact = 0.0;
  double J_quadratic_coeff = 0.0;
  double cutoff_term = 0.0;
  double gradient_term = 0.0;
  double deformation_term = 0.0;
  double quad_error = 0.0;
};

// cutoff_scale s multiplies the cutoff argument, chi(s x1); default eps^3.
TrialEnergy trial_energy(const WellSpectrum& well, const Profile& f, double lambda, double epsilon,
                         std::optional<double> cutoff_scale = std::nullopt);

double optimal_lambda(const WellSpectrum& well);

// lambda^2 D2 - alpha v1(d)^2 (2 lambda - sqrt(-mu1)) I2
double quadratic_coeff(const WellSpectrum& well, const Profile& f, double lambda);

// Smooth cutoff: 1 on [-1, 1], 0 outside (-2, 2).
double cutoff(double x);
double cutoff_derivative(double x);
double cutoff_energy();  // integral of chi'^2, cached

}  // namespace softguide::asymptotics
