#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "softguide/asymptotics.hpp"
#include "softguide/errors.hpp"

using namespace softguide;
using namespace softguide::asymptotics;

namespace {

constexpr double kPi = 3.14159265358979323846;
const auto& well4() {
  static const auto w = well1d::solve_well({4.0, 1.0});
  return w;
}

}  // namespace

TEST_CASE("eigenvalue expansion and delta hat") {
  const auto& w = well4();
  const auto t = profiles::triangle(1.0, 1.0);
  const auto p = predict_lambda1(w, t, 0.1);
  CHECK(p.classification == Classification::UniqueBoundState);
  const double v = w.v1_d();
  CHECK(p.eps2_coeff == doctest::Approx(16.0 * std::pow(v, 4) / 4.0).epsilon(1e-14));
  const double dh = predict_delta(w, t, 0.1);
  CHECK(dh == doctest::Approx(0.2 * v * v).epsilon(1e-14));
  CHECK(p.lambda1 == doctest::Approx(w.mu1() - dh * dh).epsilon(1e-15));
  CHECK(predict_delta(w, t, 0.2) == doctest::Approx(2.0 * dh).epsilon(1e-15));

  const auto p2 = predict_lambda1(w, profiles::triangle(2.0, 1.0), 0.1);
  CHECK(w.mu1() - p2.lambda1 == doctest::Approx(4.0 * (w.mu1() - p.lambda1)).epsilon(1e-13));

  const auto z = predict_lambda1(w, profiles::zero_profile(), 0.1);
  CHECK(z.lambda1 == w.mu1());
  CHECK(z.classification == Classification::Trivial);
  CHECK(predict_lambda1(w, profiles::negate(t), 0.1).classification == Classification::NoBoundState);
  CHECK(predict_lambda1(w, profiles::sine_lobe_pair(1.0, 1.0), 0.1).classification == Classification::Critical);
  CHECK_THROWS_AS(predict_delta(w, profiles::negate(t), 0.1), RegimeError);
  CHECK_THROWS_AS(predict_lambda1(w, profiles::negate(t), 1.5), InvalidInput);
}

TEST_CASE("arithmetic substitution into the expansion") {
  // mu1 = -1, alpha = 4, v1(d) = 0.5, I1 = 2, eps = 0.1
  const double coeff = 16.0 * std::pow(0.5, 4) / 4.0 * 4.0;
  CHECK(-1.0 - 0.01 * coeff == doctest::Approx(-1.01));
}

TEST_CASE("Dirichlet comparison") {
  const auto t = profiles::triangle(1.0, 1.0);
  CHECK(dirichlet_compare(1.0, t, 0.1) == doctest::Approx(kPi * kPi - 0.01 * std::pow(kPi, 4)).epsilon(1e-14));
  const auto rows = coefficient_limit_check({1e2, 1e3, 1e4}, 1.0, t);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ratio < rows[1].ratio);
  CHECK(rows[1].ratio < rows[2].ratio);
  CHECK(rows[2].ratio < 1.0);
  CHECK(std::abs(rows[2].threshold_gap) < std::abs(rows[1].threshold_gap));
  CHECK(std::abs(rows[1].threshold_gap) < std::abs(rows[0].threshold_gap));
  CHECK(coefficient_limit_check({50.0}, 1.0, t).size() == 1);
  // leading large-alpha substitution reproduces the Dirichlet coefficient exactly
  for (double a : {1e2, 1e4}) {
    const double vd = std::sqrt(2.0) * kPi / std::sqrt(a);
    CHECK(a * a / 4.0 * std::pow(vd, 4) == doctest::Approx(std::pow(kPi, 4)).epsilon(1e-13));
  }
}

TEST_CASE("leading eigenfunction") {
  const auto& w = well4();
  const auto t = profiles::triangle(1.0, 1.0);
  const LeadingEigenfunction u(w, t, 0.1);
  CHECK(u.leading_norm() == doctest::Approx(std::sqrt(2.0) * w.v1_d()).epsilon(1e-14));
  const double dh = u.delta_hat();
  // far field factorizes
  CHECK(u.longitudinal(5.0) / u.longitudinal(3.0) == doctest::Approx(std::exp(-2.0 * dh)).epsilon(1e-12));
  CHECK(u.longitudinal(-4.0) == doctest::Approx(u.longitudinal(4.0)).epsilon(1e-12));
  // continuity across the support edge
  CHECK(u.longitudinal(1.0 - 1e-9) == doctest::Approx(u.longitudinal(1.0 + 1e-9)).epsilon(1e-8));
  CHECK(u(0.3, 0.5) == doctest::Approx(u.transverse(0.5) * u.longitudinal(0.3) / std::sqrt(0.1)).epsilon(1e-14));
  // norm of the leading term approaches sqrt(2) v1(d) I1^(1/2)
  const double e05 = std::abs(LeadingEigenfunction(w, t, 0.05).norm() - u.leading_norm());
  const double e20 = std::abs(LeadingEigenfunction(w, t, 0.2).norm() - u.leading_norm());
  CHECK(e05 < e20);
  CHECK_THROWS_AS(LeadingEigenfunction(w, profiles::negate(t), 0.1), RegimeError);
}

TEST_CASE("critical check") {
  const auto& w = well4();
  const auto s = profiles::sine_lobe_pair(1.0, 1.0);
  const auto c = critical_check(w, s);
  CHECK(c.ratio == doctest::Approx(kPi * kPi).epsilon(1e-13));
  CHECK(c.threshold == doctest::Approx(4.0 * w.v1_d() * w.v1_d() / std::sqrt(-w.mu1())).epsilon(1e-14));
  CHECK_FALSE(c.satisfied);
  CHECK(c.verdict == "inconclusive");
  const auto c2 = critical_check(w, profiles::dilate(s, 0.2));
  CHECK(c2.ratio == doctest::Approx(0.04 * kPi * kPi).epsilon(1e-13));
  CHECK(c2.satisfied);
  CHECK_THROWS(critical_check(w, profiles::zero_profile()));
  CHECK_THROWS(critical_check(w, profiles::triangle(1.0, 1.0)));
  CHECK_THROWS(critical_check(w, s.continuous_only()));
}

TEST_CASE("trial energy") {
  const auto& w = well4();
  const auto s = profiles::dilate(profiles::sine_lobe_pair(1.0, 1.0), 0.2);
  const auto m = profiles::moments(s);
  const double lam = optimal_lambda(w);
  CHECK(lam == doctest::Approx(std::sqrt(-w.mu1())).epsilon(1e-15));
  const double q = quadratic_coeff(w, s, lam);
  CHECK(q == doctest::Approx(-w.mu1() * *m.D2 - 4.0 * w.v1_d() * w.v1_d() * lam * m.I2).epsilon(1e-13));
  // upward parabola; its vertex sits at alpha v^2 I2 / D2
  const double vertex = w.params.alpha * w.v1_d() * w.v1_d() * m.I2 / *m.D2;
  const double qv = quadratic_coeff(w, s, vertex);
  const double hstep = 1e-3;
  CHECK(quadratic_coeff(w, s, vertex + hstep) > qv);
  CHECK(quadratic_coeff(w, s, vertex - hstep) > qv);
  const double slope = (quadratic_coeff(w, s, vertex + hstep) - quadratic_coeff(w, s, vertex - hstep)) / (2 * hstep);
  CHECK(std::abs(slope) < 1e-8 * std::abs(qv));
  // the sign at sqrt(-mu1) agrees with the sign of the minimum, for both regimes
  CHECK((q < 0) == (qv < 0));
  const auto wide = profiles::dilate(profiles::sine_lobe_pair(1.0, 1.0), 3.0);
  CHECK((quadratic_coeff(w, wide, lam) < 0) ==
        (quadratic_coeff(w, wide, w.params.alpha * w.v1_d() * w.v1_d() * profiles::moments(wide).I2 /
                                      *profiles::moments(wide).D2) < 0));
  CHECK(quadratic_coeff(w, wide, lam) > 0);

  for (double e : {0.02, 0.05}) CHECK(trial_energy(w, s, lam, e).J_exact < 0.0);

  // zero profile: only the cutoff cost
  const auto z = trial_energy(w, profiles::zero_profile(), 1.0, 0.1);
  CHECK(z.J_exact == doctest::Approx(1e-3 * cutoff_energy()).epsilon(1e-12));
  CHECK(z.J_exact > 0.0);

  // remainder J - eps^2 q is O(eps^3)
  std::vector<double> r;
  for (double e : {0.02, 0.04, 0.08}) {
    const auto te = trial_energy(w, s, lam, e);
    r.push_back(std::abs(te.J_exact - e * e * te.J_quadratic_coeff) / (e * e * e));
  }
  CHECK(r[1] < 3.0 * r[0] + 1e-12);
  CHECK(r[2] < 3.0 * r[1] + 1e-12);
  CHECK_THROWS(trial_energy(w, s.continuous_only(), lam, 0.05));
}

TEST_CASE("smooth cutoff") {
  CHECK(cutoff(0.0) == 1.0);
  CHECK(cutoff(1.0) == 1.0);
  CHECK(cutoff(-1.0) == 1.0);
  CHECK(cutoff(2.0) == 0.0);
  CHECK(cutoff(-2.5) == 0.0);
  CHECK(cutoff(1.5) == doctest::Approx(0.5));
  for (double x : {1.1, 1.4, 1.8})
    CHECK(cutoff_derivative(x) == doctest::Approx((cutoff(x + 1e-6) - cutoff(x - 1e-6)) / 2e-6).epsilon(1e-6));
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double e = 2.0 * GK::integrate([](double x) { return cutoff_derivative(x) * cutoff_derivative(x); }, 1.0,
                                       2.0, 15, 1e-12);
  CHECK(cutoff_energy() == doctest::Approx(e).epsilon(1e-9));
}

TEST_CASE("prediction bundle") {
  const auto& w = well4();
  const auto p = make_prediction(w, profiles::triangle(1.0, 1.0));
  CHECK(p.lambda1_at(0.1) == doctest::Approx(predict_lambda1(w, profiles::triangle(1.0, 1.0), 0.1).lambda1));
  CHECK(p.delta_hat_slope > 0.0);
  CHECK(p.u_norm_leading.has_value());
  const auto n = make_prediction(w, profiles::negate(profiles::triangle(1.0, 1.0)));
  CHECK(n.delta_hat_slope < 0.0);
  CHECK_FALSE(n.u_norm_leading.has_value());
}
