#include "softguide/asymptotics.hpp"

#include <cmath>
#include <numbers>

#include "softguide/errors.hpp"
#include "softguide/quadrature.hpp"

namespace softguide::asymptotics {

using well1d::eval_mode;
using well1d::eval_transverse_integral;

namespace {

constexpr double kPi = std::numbers::pi;

double phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double phi_prime(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// C-infinity step from 0 (t <= 0) to 1 (t >= 1).
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double p = phi(t), q = phi(1.0 - t);
  return p / (p + q);
}

double smooth_step_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double p = phi(t), q = phi(1.0 - t);
  const double s = p + q;
  return (phi_prime(t) * q + p * phi_prime(1.0 - t)) / (s * s);
}

Classification classify(double I1, double I2) {
  if (I2 == 0.0) return Classification::Trivial;
  if (I1 > 0.0) return Classification::UniqueBoundState;
  if (I1 < 0.0) return Classification::NoBoundState;
  return Classification::Critical;
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::Trivial: return "trivial";
    case Classification::UniqueBoundState: return "unique bound state predicted";
    case Classification::NoBoundState: return "no bound state predicted";
    case Classification::Critical: return "critical - see critical_check";
  }
  return "unknown";
}

Lambda1Prediction predict_lambda1(const WellSpectrum& well, const Profile& f, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidInput("predict_lambda1: epsilon must be positive");
  profiles::check_admissible(f, well.params.d, epsilon);
  const auto m = profiles::moments(f);
  const double a = well.params.alpha;
  const double v2 = well.v1_d() * well.v1_d();
  Lambda1Prediction p;
  p.mu1 = well.mu1();
  p.eps2_coeff = 0.25 * a * a * v2 * v2 * m.I1 * m.I1;
  p.lambda1 = p.mu1 - epsilon * epsilon * p.eps2_coeff;
  p.classification = classify(m.I1, m.I2);
  return p;
}

double predict_delta(const WellSpectrum& well, const Profile& f, double epsilon) {
  const auto m = profiles::moments(f);
  if (!(m.I1 > 0.0)) throw RegimeError("not in the attractive non-critical regime (I1 <= 0)");
  return epsilon * well.params.alpha * well.v1_d() * well.v1_d() * m.I1 / 2.0;
}

Prediction make_prediction(const WellSpectrum& well, const Profile& f) {
  const auto m = profiles::moments(f);
  const double a = well.params.alpha;
  const double d = well.params.d;
  const double v = well.v1_d();
  Prediction p;
  p.mu1 = well.mu1();
  p.v1_d = v;
  p.lambda1_eps2_coeff = 0.25 * a * a * std::pow(v, 4) * m.I1 * m.I1;
  p.delta_hat_slope = a * v * v * m.I1 / 2.0;
  if (m.I1 > 0.0) p.u_norm_leading = std::sqrt(2.0) * v * std::sqrt(m.I1);
  p.dirichlet_const = (kPi / d) * (kPi / d);
  p.dirichlet_eps2_coeff = std::pow(kPi / d, 4) * (m.I1 / d) * (m.I1 / d);
  if (m.D2 && m.I2 > 0.0) p.critical_ratio = *m.D2 / m.I2;
  p.critical_threshold = a * v * v / std::sqrt(-p.mu1);
  p.classification = classify(m.I1, m.I2);
  return p;
}

LeadingEigenfunction::LeadingEigenfunction(const WellSpectrum& well, const Profile& f, double epsilon)
    : mode_(well.ground()), f_(f), eps_(epsilon), alpha_(well.params.alpha), d_(well.params.d) {
  if (!(epsilon > 0.0)) throw InvalidInput("leading eigenfunction: epsilon must be positive");
  profiles::check_admissible(f, d_, epsilon);
  const auto m = profiles::moments(f);
  if (!(m.I1 > 0.0)) throw RegimeError("leading eigenfunction requires I1 > 0");
  dhat_ = predict_delta(well, f, epsilon);
  const auto s = f.support();
  a_ = s.a;
  b_ = s.b;
  breaks_ = f.breakpoints();
  leading_norm_ = std::sqrt(2.0) * well.v1_d() * std::sqrt(m.I1);
  const double sa = std::sqrt(alpha_);
  auto w = [this](double x) { return eval_transverse_integral(mode_, d_ + eps_ * f_(x)); };
  amp_right_ = sa * quad::integrate([&](double x) { return std::exp(dhat_ * x) * w(x); }, a_, b_, breaks_).value;
  amp_left_ = sa * quad::integrate([&](double x) { return std::exp(-dhat_ * x) * w(x); }, a_, b_, breaks_).value;
}

double LeadingEigenfunction::longitudinal(double x1) const {
  if (x1 >= b_) return amp_right_ * std::exp(-dhat_ * x1);
  if (x1 <= a_) return amp_left_ * std::exp(dhat_ * x1);
  auto brk = breaks_;
  brk.push_back(x1);
  auto integrand = [&](double s) {
    return std::exp(-dhat_ * std::abs(x1 - s)) * eval_transverse_integral(mode_, d_ + eps_ * f_(s));
  };
  return std::sqrt(alpha_) * quad::integrate(integrand, a_, b_, brk).value;
}

double LeadingEigenfunction::transverse(double x2) const { return eval_mode(mode_, x2); }

double LeadingEigenfunction::operator()(double x1, double x2) const {
  return transverse(x2) * longitudinal(x1) / std::sqrt(eps_);
}

double LeadingEigenfunction::norm() const {
  auto g2 = [this](double x) {
    const double g = longitudinal(x);
    return g * g;
  };
  const double inner = quad::integrate(g2, a_, b_, breaks_, 1e-11).value;
  const double tails = (amp_right_ * amp_right_ * std::exp(-2.0 * dhat_ * b_) +
                        amp_left_ * amp_left_ * std::exp(2.0 * dhat_ * a_)) /
                       (2.0 * dhat_);
  return std::sqrt((inner + tails) / eps_);
}

double leading_eigenfunction(const WellSpectrum& well, const Profile& f, double epsilon, double x1, double x2) {
  return LeadingEigenfunction(well, f, epsilon)(x1, x2);
}

double dirichlet_compare(double d, const Profile& f, double epsilon) {
  if (!(d > 0.0)) throw InvalidInput("dirichlet_compare: d must be positive");
  const auto m = profiles::moments(f);
  const double k2 = (kPi / d) * (kPi / d);
  return k2 - epsilon * epsilon * k2 * k2 * (m.I1 / d) * (m.I1 / d);
}

std::vector<CoefficientRow> coefficient_limit_check(const std::vector<double>& alphas, double d,
                                                    const Profile& f) {
  for (std::size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1])) throw InvalidInput("coefficient_limit_check: alphas must ascend");
  const auto m = profiles::moments(f);
  const double k2 = (kPi / d) * (kPi / d);
  std::vector<CoefficientRow> rows;
  for (double a : alphas) {
    const auto well = well1d::solve_well({a, d});
    CoefficientRow r;
    r.alpha = a;
    const double v2 = well.v1_d() * well.v1_d();
    r.soft_coeff = 0.25 * a * a * v2 * v2 * m.I1 * m.I1;
    r.dirichlet_coeff = k2 * k2 * (m.I1 / d) * (m.I1 / d);
    r.ratio = r.dirichlet_coeff != 0.0 ? r.soft_coeff / r.dirichlet_coeff : std::nan("");
    r.mu1_plus_alpha = well.mu1() + a;
    r.pi2_over_d2 = k2;
    r.threshold_gap = r.mu1_plus_alpha - k2;
    rows.push_back(r);
  }
  return rows;
}

CriticalCheck critical_check(const WellSpectrum& well, const Profile& f) {
  const auto m = profiles::moments(f);
  if (!m.D2) throw RegimeError("critical_check: derivative unavailable for this profile");
  if (!(m.I2 > 0.0)) throw RegimeError("critical_check: degenerate profile (I2 = 0)");
  const double tol = 1e-9 * std::sqrt(m.I2) * std::sqrt(f.support().length());
  if (std::abs(m.I1) > tol) throw RegimeError("critical_check: profile is not critical (I1 != 0)");
  CriticalCheck c;
  c.ratio = *m.D2 / m.I2;
  const double v = well.v1_d();
  c.threshold = well.params.alpha * v * v / std::sqrt(-well.mu1());
  c.satisfied = c.ratio < c.threshold;
  c.verdict = c.satisfied ? "bound state guaranteed" : "inconclusive";
  return c;
}

double optimal_lambda(const WellSpectrum& well) { return std::sqrt(-well.mu1()); }

double quadratic_coeff(const WellSpectrum& well, const Profile& f, double lambda) {
  const auto m = profiles::moments(f);
  if (!m.D2) throw RegimeError("derivative unavailable for this profile");
  const double v = well.v1_d();
  return lambda * lambda * *m.D2 - well.params.alpha * v * v * (2.0 * lambda - std::sqrt(-well.mu1())) * m.I2;
}

double cutoff(double x) {
  const double ax = std::abs(x);
  if (ax <= 1.0) return 1.0;
  if (ax >= 2.0) return 0.0;
  return smooth_step(2.0 - ax);
}

double cutoff_derivative(double x) {
  const double ax = std::abs(x);
  if (ax <= 1.0 || ax >= 2.0) return 0.0;
  return (x > 0.0 ? -1.0 : 1.0) * smooth_step_prime(2.0 - ax);
}

double cutoff_energy() {
  static const double value = [] {
    auto g = [](double x) {
      const double c = cutoff_derivative(x);
      return c * c;
    };
    return 2.0 * quad::integrate(g, 1.0, 2.0, {1.5}, 1e-13).value;
  }();
  return value;
}

TrialEnergy trial_energy(const WellSpectrum& well, const Profile& f, double lambda, double epsilon,
                         std::optional<double> cutoff_scale) {
  if (!(epsilon > 0.0)) throw InvalidInput("trial_energy: epsilon must be positive");
  if (!(lambda > 0.0)) throw InvalidInput("trial_energy: lambda must be positive");
  if (!f.has_derivative()) throw RegimeError("trial_energy: derivative unavailable for this profile");
  profiles::check_admissible(f, well.params.d, epsilon);
  const double s = cutoff_scale.value_or(epsilon * epsilon * epsilon);
  if (!(s > 0.0)) throw InvalidInput("trial_energy: cutoff scale must be positive");
  const auto sup = f.support();
  if (std::max(std::abs(sup.a), std::abs(sup.b)) * s > 1.0)
    throw RegimeError("trial_energy: support of f not inside the cutoff plateau");

  const auto m = profiles::moments(f);
  const auto& mode = well.ground();
  const double d = well.params.d;
  TrialEnergy t;
  t.lambda = lambda;
  t.epsilon = epsilon;
  t.cutoff_scale = s;
  t.cutoff_term = s * cutoff_energy();
  t.gradient_term = lambda * lambda * epsilon * epsilon * *m.D2;
  auto integrand = [&](double x) {
    const double fx = f(x);
    const double amp = 1.0 + lambda * epsilon * fx;
    return amp * amp * eval_transverse_integral(mode, d + epsilon * fx);
  };
  const auto r = quad::integrate(integrand, sup.a, sup.b, f.breakpoints(), 1e-13);
  t.deformation_term = -well.params.alpha * r.value;
  t.quad_error = well.params.alpha * r.error;
  t.J_exact = t.cutoff_term + t.gradient_term + t.deformation_term;
  t.J_quadratic_coeff = quadratic_coeff(well, f, lambda);
  return t;
}

}  // namespace softguide::asymptotics
