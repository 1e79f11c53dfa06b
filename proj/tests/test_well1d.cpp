#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "softguide/errors.hpp"
#include "softguide/well1d.hpp"

using namespace softguide;
using namespace softguide::well1d;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent quadrature of v^2 over [a, b].
double gk(const WellMode& m, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto v2 = [&](double x) { return eval_mode(m, x) * eval_mode(m, x); };
  double s = 0.0;
  const int n = 64;
  for (int k = 0; k < n; ++k) s += GK::integrate(v2, a + (b - a) * k / n, a + (b - a) * (k + 1) / n, 0);
  return s;
}

// Dense eigenvalues of the standard 3-point discretization, Eigen's tridiagonal QR.
long dense_negative_count(double alpha, double d, double lo, double hi, double h) {
  const int n = static_cast<int>(std::lround((lo + d + hi) / h)) - 1;
  Eigen::VectorXd diag(n), sub = Eigen::VectorXd::Constant(n - 1, -1.0 / (h * h));
  for (int i = 0; i < n; ++i) {
    const double x = -lo + (i + 1) * h;
    double w = (x > 1e-12 && x < d - 1e-12) ? 1.0 : 0.0;
    if (std::abs(x) < 1e-12 || std::abs(x - d) < 1e-12) w = 0.5;
    diag[i] = 2.0 / (h * h) - alpha * w;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return (es.eigenvalues().array() < 0.0).count();
}

}  // namespace

TEST_CASE("alpha 4, d 1 has exactly one even bound state") {
  const auto w = solve_well({4.0, 1.0});
  REQUIRE(w.count() == 1);
  CHECK(w.ground().parity == Parity::Even);
  CHECK(w.mu1() > -4.0);
  CHECK(w.mu1() < 0.0);
  CHECK(dense_negative_count(4.0, 1.0, 10.0, 10.0, 2e-3) == 1);
}

TEST_CASE("secular equations and mode invariants") {
  for (auto p : {WellParams{4.0, 1.0}, WellParams{50.0, 2.0}, WellParams{0.6, 0.4}, WellParams{200.0, 1.0}}) {
    const auto w = solve_well(p);
    double prev = -p.alpha;
    for (const auto& m : w.modes) {
      CHECK(m.mu > prev);
      prev = m.mu;
      CHECK(std::abs(m.k_in * m.k_in + m.kappa * m.kappa - p.alpha) <= 1e-12 * p.alpha);
      const double t = m.k_in * p.d / 2.0;
      const double res = m.parity == Parity::Even ? m.k_in * std::tan(t) - m.kappa : m.k_in / std::tan(t) + m.kappa;
      CHECK(std::abs(res) <= 1e-10 * std::max(1.0, m.kappa));
      CHECK(eval_mode_derivative(m, p.d) == doctest::Approx(-m.kappa * eval_mode(m, p.d)).epsilon(1e-11));
      // closed-form normalization against independent quadrature with exact tails
      const double e0 = eval_mode(m, 0.0), ed = eval_mode(m, p.d);
      const double total = gk(m, 0.0, p.d) + (e0 * e0 + ed * ed) / (2.0 * m.kappa);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("ground state is positive, symmetric and decays") {
  const auto w = solve_well({4.0, 1.0});
  const auto& m = w.ground();
  for (int k = -400; k <= 400; ++k) {
    const double x = 0.5 + 0.05 * k;
    CHECK(eval_mode(m, x) > 0.0);
  }
  for (double t : {0.1, 0.37, 0.5, 2.0, 7.5})
    CHECK(eval_mode(m, 0.5 - t) == doctest::Approx(eval_mode(m, 0.5 + t)).epsilon(1e-13));
  double prev = eval_mode(m, 1.0);
  for (double x = 1.5; x < 30.0; x += 0.5) {
    CHECK(eval_mode(m, x) < prev);
    prev = eval_mode(m, x);
  }
}

TEST_CASE("ODE residual at interior points") {
  const WellParams p{30.0, 1.3};
  const auto w = solve_well(p);
  for (const auto& m : w.modes)
    for (double x : {-2.0, -0.3, 0.1, 0.65, 1.2, 1.9, 4.0}) {
      const double V = (x > 0.0 && x < p.d) ? -p.alpha : 0.0;
      const double r = -eval_mode_derivative(m, x, 2) + V * eval_mode(m, x) - m.mu * eval_mode(m, x);
      CHECK(std::abs(r) <= 1e-9 * p.alpha);
    }
}

TEST_CASE("transverse integral W against quadrature") {
  const auto w = solve_well({4.0, 1.0});
  const auto& m = w.ground();
  CHECK(eval_transverse_integral(m, 1.0) == 0.0);
  CHECK(eval_transverse_integral(m, 0.7) == doctest::Approx(-gk(m, 0.7, 1.0)).epsilon(1e-10));
  CHECK(eval_transverse_integral(m, 1.5) == doctest::Approx(gk(m, 1.0, 1.5)).epsilon(1e-10));
  CHECK(eval_transverse_integral(m, 6.0) == doctest::Approx(gk(m, 1.0, 6.0)).epsilon(1e-10));
  CHECK(eval_transverse_integral(m, -1.0) == doctest::Approx(-gk(m, -1.0, 1.0)).epsilon(1e-10));
  // W(d + h) = v(d)^2 h - kappa v(d)^2 h^2 + O(h^3)
  const double v2 = w.v1_d() * w.v1_d();
  for (double h : {1e-2, 5e-3, 2.5e-3}) {
    const double rem = eval_transverse_integral(m, 1.0 + h) - (v2 * h - m.kappa * v2 * h * h);
    CHECK(std::abs(rem) < 2.0 * m.kappa * m.kappa * v2 * h * h * h);
  }
}

TEST_CASE("large alpha reference") {
  const auto r = large_alpha_reference({1e4, 1.0});
  CHECK(r.mu1_approx == doctest::Approx(-1e4 + kPi * kPi).epsilon(1e-15));
  CHECK(r.v1d_approx == doctest::Approx(std::sqrt(2.0) * kPi * 1e-2).epsilon(1e-15));
  const auto a = large_alpha_reference({100.0, 1.0}), b = large_alpha_reference({100.0, 2.0});
  CHECK(b.v1d_approx / a.v1d_approx == doctest::Approx(std::pow(2.0, -1.5)).epsilon(1e-14));
  const double e2 = solve_well({1e2, 1.0}).mu1() + 1e2 - kPi * kPi;
  const double e4 = solve_well({1e4, 1.0}).mu1() + 1e4 - kPi * kPi;
  CHECK(std::abs(e4) < std::abs(e2));
}

TEST_CASE("mu1 decreases in alpha and in d") {
  double prev = 0.0;
  for (double a : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double mu = solve_well({a, 1.0}).mu1();
    CHECK(mu < prev);
    prev = mu;
  }
  prev = 0.0;
  for (double d : {0.3, 0.6, 1.0, 1.7, 3.0}) {
    const double mu = solve_well({4.0, d}).mu1();
    CHECK(mu < prev);
    prev = mu;
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(solve_well({0.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(solve_well({1.0, -1.0}), InvalidInput);
  CHECK_THROWS_AS(solve_well({1.0, 1.0}, 1e-3), InvalidInput);
  CHECK_THROWS_AS(solve_well({1.0, 1.0}, 0.0), InvalidInput);
}

TEST_CASE("random parameters: counts agree with the dense oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ua(0.5, 50.0), ud(0.3, 3.0);
  for (int t = 0; t < 5; ++t) {
    const double a = ua(rng), d = ud(rng);
    const auto w = solve_well({a, d});
    const double tail = 12.0 / w.modes.back().kappa;
    const double h = d / std::ceil(d / 0.01);
    CHECK(dense_negative_count(a, d, std::ceil(tail / h) * h, std::ceil(tail / h) * h, h) ==
          static_cast<long>(w.count()));
  }
}
