#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "softguide/bs_core.hpp"
#include "softguide/fd_oracle.hpp"
#include "softguide/records.hpp"
#include "softguide/well1d.hpp"

using namespace softguide;
namespace fs = std::filesystem;

namespace {

const well1d::WellSpectrum& well4() {
  static const auto w = well1d::solve_well({4.0, 1.0});
  return w;
}

std::vector<profiles::Profile> families() {
  return {profiles::triangle(1.0, 1.0), profiles::smooth_bump(0.7, 1.3), profiles::sine_lobe_pair(1.0, 0.8)};
}

double ground_1d(double h, double H) {
  const auto T = fd::well_tridiagonal({4.0, 1.0}, H, H, h);
  return T.eigenvalue(1, T.gershgorin_lower(), 0.0, 1e-14);
}

double ground_2d(const profiles::Profile& f, double eps, double h, double L) {
  const auto op = fd::build_h2d({4.0, 1.0}, f, eps, fd::Grid2D::make(1.0, h, L, 6.0, 7.0));
  fd::SolveOptions o;
  o.want_vectors = false;
  // box ground state, bound or not
  const auto r = fd::lowest_eigs(op, fd::modal_basis(op).lambda[0] + 0.5, 1, o);
  REQUIRE(!r.eigenvalues.empty());
  return r.eigenvalues[0];
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("moment laws under dilation and negation") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> g(0.1, 5.0);
  for (const auto& f : families()) {
    const auto m = profiles::moments(f);
    for (int k = 0; k < 8; ++k) {
      const double gamma = g(rng);
      const auto md = profiles::moments(profiles::dilate(f, gamma));
      CHECK(md.I1 == doctest::Approx(m.I1 / gamma).epsilon(1e-12).scale(m.I2));
      CHECK(md.I2 == doctest::Approx(m.I2 / gamma).epsilon(1e-12));
      REQUIRE(md.D2);
      CHECK(*md.D2 == doctest::Approx(*m.D2 * gamma).epsilon(1e-12));
    }
    const auto mn = profiles::moments(profiles::negate(f));
    CHECK(mn.I1 == doctest::Approx(-m.I1).epsilon(1e-14).scale(m.I2));
    CHECK(mn.I2 == doctest::Approx(m.I2).epsilon(1e-14));
    CHECK(*mn.D2 == doctest::Approx(*m.D2).epsilon(1e-14));
  }
}

TEST_CASE("m_delta limits and the bound M") {
  using bs::kernel_m;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> x(-1.0, 1.0), dl(1e-4, 5.0);
  for (int k = 0; k < 200; ++k) {
    const double a = x(rng), b = x(rng), delta = dl(rng);
    CHECK(kernel_m(delta, a, a) == 0.0);
    CHECK(kernel_m(delta, a, b) <= 0.0);
    CHECK(std::abs(kernel_m(delta, a, b)) <= 1.0);  // half the diameter of [-1, 1]
    CHECK(kernel_m(1e-10, a, b) == doctest::Approx(-std::abs(a - b) / 2.0).epsilon(1e-8));
  }
  // seamless switch between series and exact evaluation
  for (double delta : {1e-2, 1.0, 10.0}) {
    const double dx = 1e-6 / delta;
    const double lo = kernel_m(delta, 0.0, dx * (1 - 1e-10)), hi = kernel_m(delta, 0.0, dx * (1 + 1e-10));
    CHECK(lo == doctest::Approx(hi).epsilon(1e-9));
  }
}

TEST_CASE("Hilbert-Schmidt chain") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> e(0.02, 0.3), dl(0.01, 2.0);
  for (const auto& f : families()) {
    for (int k = 0; k < 4; ++k) {
      const bs::DeformationPotential pot(well4(), f, e(rng));
      const auto hs = bs::hs_bound_M(pot, dl(rng));
      CHECK(hs.hs_norm > 0.0);
      CHECK(hs.hs_norm <= hs.bound);
    }
    const double a = bs::hs_bound_M(bs::DeformationPotential(well4(), f, 0.1), 0.5).hs_norm;
    const double b = bs::hs_bound_M(bs::DeformationPotential(well4(), f, 0.05), 0.5).hs_norm;
    CHECK(b <= 0.55 * a);
  }
}

TEST_CASE("finite differences: monotonicity") {
  const auto t = profiles::triangle(1.0, 1.0);
  // a larger box never raises the bottom eigenvalue
  const double l4 = ground_2d(t, 0.2, 0.1, 4.0), l8 = ground_2d(t, 0.2, 0.1, 8.0), l16 = ground_2d(t, 0.2, 0.1, 16.0);
  CHECK(l8 <= l4);
  CHECK(l16 <= l8);
  CHECK(l8 - l16 < l4 - l8);
  // pointwise larger deformation lowers it
  double prev = 0.0;
  for (double eps : {0.0, 0.1, 0.2, 0.4}) {
    const double l = ground_2d(eps == 0.0 ? profiles::zero_profile() : t, eps, 0.1, 8.0);
    if (eps > 0.0) CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("finite differences: second-order convergence") {
  const double a = ground_1d(0.02, 6.0), b = ground_1d(0.01, 6.0), c = ground_1d(0.005, 6.0);
  const double r1 = (a - b) / (b - c);
  CHECK(r1 >= 3.0);
  CHECK(r1 <= 5.0);
  for (const auto& f : families()) {
    const double x = ground_2d(f, 0.2, 0.2, 8.0), y = ground_2d(f, 0.2, 0.1, 8.0), z = ground_2d(f, 0.2, 0.05, 8.0);
    const double r = (x - y) / (y - z);
    CHECK(r >= 3.0);
    CHECK(r <= 5.0);
  }
}

TEST_CASE("uniqueness below the threshold") {
  const auto t = profiles::triangle(1.0, 1.0);
  for (double eps : {0.05, 0.1, 0.2}) {
    const auto op = fd::build_h2d({4.0, 1.0}, t, eps, fd::Grid2D::make(1.0, 0.1, 60.0, 6.0, 7.0));
    const double mu = fd::modal_basis(op).lambda[0];
    CHECK(fd::count_below(op, mu) == 1);
  }
  // one BS eigenvalue >= 1 once -kappa^2 lies just above the bound state
  const auto op0 = fd::build_h2d({4.0, 1.0}, profiles::zero_profile(), 0.0, fd::Grid2D::make(1.0, 0.1, 30.0, 6.0, 7.0));
  const double eps = 0.15;
  const auto op = fd::build_h2d({4.0, 1.0}, t, eps, op0.grid);
  const auto r = fd::lowest_eigs(op, fd::modal_basis(op).lambda[0], 2);
  REQUIRE(r.eigenvalues.size() == 1);
  const bs::DeformationPotential pot(well4(), t, eps);
  const auto B = bs::discrete_bs_matrix(pot, std::sqrt(-r.eigenvalues[0]) * (1.0 - 1e-4), op0);
  CHECK((B.eigenvalues.array() >= 1.0).count() == 1);
}

TEST_CASE("secular remainder scales with eps; F decreases in delta") {
  const auto t = profiles::triangle(1.0, 1.0);
  const auto op0 =
      fd::build_h2d({4.0, 1.0}, profiles::zero_profile(), 0.0, fd::Grid2D::make(1.0, 0.1, 200.0, 6.0, 6.5));
  const double e0 = 0.05;
  const double dhat = e0 * 4.0 * well4().v1_d() * well4().v1_d() / 2.0;
  const bs::DiscreteSecular F(bs::DeformationPotential(well4(), t, e0), op0);
  const bs::DiscreteSecular G(bs::DeformationPotential(well4(), t, e0 / 2), op0);
  for (double delta : {dhat / 2, dhat, 2 * dhat}) {
    const double ratio = F(delta).N_norm / G(delta).N_norm;
    CHECK(ratio >= 2.0 / 1.2);
    CHECK(ratio <= 2.0 * 1.2);
  }
  double prev = F(dhat / 4).F;
  for (double delta = dhat / 3; delta < 4 * dhat; delta *= 1.3) {
    const double v = F(delta).F;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("command line reruns are idempotent") {
  const auto dir = fs::temp_directory_path() / "softguide_property_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "well.alpha = 4\nwell.d = 1\nprofile.kind = triangle\n"
                                 << "sweep.epsilons = 0.1, 0.2\nsweep.modes = predict, fd, bs-leading\n"
                                 << "grid.h = 0.2\nfd.overlap = false\n";
  auto run = [&](const std::string& out) {
    const std::string cmd = std::string(SOFTGUIDE_CLI) + " sweep --config " + (dir / "run.cfg").string() +
                            " --set output.dir=" + (dir / out).string() + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  REQUIRE(run("a") == 0);
  const auto first = slurp(dir / "a" / "results.csv");
  const auto first_json = slurp(dir / "a" / "results.json");
  REQUIRE(run("a") == 0);
  CHECK(slurp(dir / "a" / "results.csv") == first);
  CHECK(slurp(dir / "a" / "results.json") == first_json);
  REQUIRE(run("b") == 0);
  const auto x = harness::read_records_csv((dir / "a" / "results.csv").string());
  const auto y = harness::read_records_csv((dir / "b" / "results.csv").string());
  REQUIRE(x.size() == 2);
  REQUIRE(y.size() == 2);
  for (int k = 0; k < 2; ++k) CHECK(harness::same_payload(x[k], y[k], false));
}
