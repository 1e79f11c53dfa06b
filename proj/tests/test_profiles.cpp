#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "softguide/errors.hpp"
#include "softguide/profiles.hpp"

using namespace softguide;
using namespace softguide::profiles;

namespace {

constexpr double kPi = 3.14159265358979323846;

double gk(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double s = 0.0;
  for (int k = 0; k < panels; ++k) s += GK::integrate(f, a + (b - a) * k / panels, a + (b - a) * (k + 1) / panels, 0);
  return s;
}

}  // namespace

TEST_CASE("closed-form moments of the builtin families") {
  const auto t = moments(triangle(1.0, 1.0));
  CHECK(t.I1 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t.I2 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(*t.D2 == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(t.half_diameter == 1.0);
  const auto tri = triangle(1.0, 1.0);
  CHECK(tri.support().a == -1.0);
  CHECK(tri.support().b == 1.0);

  const auto s = moments(sine_lobe_pair(1.0, 1.0));
  CHECK(std::abs(s.I1) < 1e-15);
  CHECK(s.I2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*s.D2 == doctest::Approx(kPi * kPi).epsilon(1e-14));
  CHECK(s.abs_I1 == doctest::Approx(4.0 / kPi).epsilon(1e-14));

  const auto z = moments(zero_profile());
  CHECK(z.I1 == 0.0);
  CHECK(z.I2 == 0.0);
  CHECK(*z.D2 == 0.0);
}

TEST_CASE("smooth bump moments: quadrature oracle") {
  const auto b = smooth_bump(1.3, 0.8);
  const auto m = moments(b);
  auto f = [&](double x) { return b(x); };
  auto f2 = [&](double x) { return b(x) * b(x); };
  auto d2 = [&](double x) { return b.derivative(x) * b.derivative(x); };
  CHECK(m.I1 == doctest::Approx(gk(f, -0.8, 0.8)).epsilon(1e-10));
  CHECK(m.I2 == doctest::Approx(gk(f2, -0.8, 0.8)).epsilon(1e-10));
  CHECK(*m.D2 == doctest::Approx(gk(d2, -0.8, 0.8, 256)).epsilon(1e-9));
  CHECK(m.quad_error <= 1e-10);
  CHECK(b(0.0) == doctest::Approx(1.3));
  CHECK(b(0.8) == 0.0);
}

TEST_CASE("negation and dilation laws") {
  const auto nt = moments(negate(triangle(1.0, 1.0)));
  CHECK(nt.I1 == doctest::Approx(-1.0));
  CHECK(nt.I2 == doctest::Approx(2.0 / 3.0));
  CHECK(nt.min_f == -1.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ug(0.1, 5.0);
  const std::vector<Profile> family{triangle(0.7, 1.4), smooth_bump(1.0, 1.0), sine_lobe_pair(0.5, 2.0),
                                    table({-1.0, -0.2, 0.5, 1.5}, {0.0, 0.8, -0.3, 0.0})};
  for (const auto& p : family) {
    const auto m = moments(p);
    for (int k = 0; k < 5; ++k) {
      const double g = ug(rng);
      const auto q = dilate(p, g);
      const auto mq = moments(q);
      CHECK(mq.I1 == doctest::Approx(m.I1 / g).epsilon(1e-9).scale(m.I2));
      CHECK(mq.I2 == doctest::Approx(m.I2 / g).epsilon(1e-9));
      CHECK(*mq.D2 == doctest::Approx(g * *m.D2).epsilon(1e-9));
      CHECK(q.support().a == doctest::Approx(p.support().a / g));
      CHECK(q.support().b == doctest::Approx(p.support().b / g));
      const auto mn = moments(negate(p));
      CHECK(mn.I1 == doctest::Approx(-m.I1).scale(m.I2));
      CHECK(mn.I2 == doctest::Approx(m.I2));
      CHECK(*mn.D2 == doctest::Approx(*m.D2));
    }
  }
  const auto s = moments(dilate(sine_lobe_pair(1.0, 1.0), 0.2));
  CHECK(*s.D2 / s.I2 == doctest::Approx(0.04 * kPi * kPi).epsilon(1e-13));
  const auto id = dilate(triangle(1.0, 1.0), 1.0);
  CHECK(id(0.3) == triangle(1.0, 1.0)(0.3));
}

TEST_CASE("table profiles") {
  const auto p = table({-1.0, 0.0, 2.0}, {0.0, 2.0, 0.0});
  CHECK(p(-0.5) == doctest::Approx(1.0));
  CHECK(p(1.0) == doctest::Approx(1.0));
  CHECK(p(3.0) == 0.0);
  const auto m = moments(p);
  CHECK(m.I1 == doctest::Approx(3.0));
  CHECK(m.I2 == doctest::Approx(4.0));  // (4/3)(1 + 2)
  CHECK(*m.D2 == doctest::Approx(4.0 + 2.0));
  CHECK(m.half_diameter == doctest::Approx(1.5));
  CHECK_THROWS_AS(table({0.0, 1.0}, {0.0}), InvalidInput);
  CHECK_THROWS_AS(table({0.0, 1.0, 0.5}, {0.0, 1.0, 0.0}), InvalidInput);
  CHECK_THROWS_AS(table({0.0, 1.0, 2.0}, {0.0, 1.0, 1.0}), InvalidInput);
  CHECK_THROWS_AS(table({0.0, 1.0, 2.0}, {0.0, NAN, 0.0}), InvalidInput);

  const std::string path = "profile_table_test.csv";
  {
    std::ofstream out(path);
    out << "# comment\nx,f\n-1,0\n0,2\n2,0\n";
  }
  const auto q = load_table_csv(path);
  CHECK(q(1.0) == doctest::Approx(1.0));
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_table_csv("does_not_exist.csv"), InvalidInput);
}

TEST_CASE("derivatives and regularity") {
  const auto t = triangle(2.0, 0.5);
  CHECK(t.derivative(-0.25) == doctest::Approx(4.0));
  CHECK(t.derivative(0.25) == doctest::Approx(-4.0));
  CHECK(t.derivative(0.7) == 0.0);
  const auto b = smooth_bump(1.0, 1.0);
  for (double x : {-0.9, -0.3, 0.2, 0.85}) {
    const double fd = (b(x + 1e-6) - b(x - 1e-6)) / 2e-6;
    CHECK(b.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }
  const auto c = t.continuous_only();
  CHECK_FALSE(c.has_derivative());
  CHECK_THROWS(c.derivative(0.1));
  CHECK_THROWS_AS(dirichlet_energy(c), RegimeError);
  CHECK_FALSE(moments(c).D2.has_value());
}

TEST_CASE("parameter validation and admissibility") {
  CHECK_THROWS_AS(triangle(1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(smooth_bump(1.0, -1.0), InvalidInput);
  CHECK_THROWS_AS(dilate(triangle(1.0, 1.0), 0.0), InvalidInput);
  CHECK_THROWS_AS(parse_kind("square"), InvalidInput);
  CHECK(parse_kind("sine") == ProfileKind::SineLobePair);
  const auto n = negate(triangle(1.0, 1.0));
  CHECK(max_admissible_epsilon(n, 1.0) == doctest::Approx(1.0));
  CHECK(std::isinf(max_admissible_epsilon(triangle(1.0, 1.0), 1.0)));
  CHECK_NOTHROW(check_admissible(n, 1.0, 0.5));
  CHECK_THROWS_AS(check_admissible(n, 1.0, 1.0), InvalidInput);
}
