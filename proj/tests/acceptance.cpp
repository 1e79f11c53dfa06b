// One line per acceptance criterion; exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "softguide/asymptotics.hpp"
#include "softguide/bs_core.hpp"
#include "softguide/fd_oracle.hpp"
#include "softguide/harness.hpp"
#include "softguide/well1d.hpp"

using namespace softguide;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const well1d::WellSpectrum& well4() {
  static const auto w = well1d::solve_well({4.0, 1.0});
  return w;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome ac1() {
  std::mt19937_64 rng(20241014);
  std::uniform_real_distribution<double> ua(0.5, 50.0), ud(0.3, 3.0);
  std::vector<std::pair<double, double>> cases{{4.0, 1.0}};
  for (int k = 0; k < 20; ++k) cases.emplace_back(ua(rng), ud(rng));
  double worst = 0.0;
  int count_mismatch = 0;
  for (auto [a, d] : cases) {
    const auto w = well1d::solve_well({a, d});
    const double h = d / std::ceil(d / 2e-3);
    const auto s = fd::solve_1d({a, d}, 12.0 / w.ground().kappa, h);
    worst = std::max(worst, std::abs(s.richardson.at(0) / w.mu1() - 1.0));
    // counting box wide enough for the most weakly bound state
    const double hc = d / std::ceil(d / 0.01);
    const double tail = std::ceil(12.0 / w.modes.back().kappa / hc) * hc;
    if (fd::solve_1d({a, d}, tail, hc).count != static_cast<long>(w.count())) ++count_mismatch;
  }
  return {worst <= 1e-6 && count_mismatch == 0,
          "pairs=21 worst_rel=" + fmt("%.2e", worst) + " count_mismatches=" + std::to_string(count_mismatch)};
}

Outcome ac2() {
  constexpr double pi = 3.14159265358979323846;
  std::vector<double> e;
  double vdev = 0.0;
  for (double a : {1e2, 1e3, 1e4}) {
    const auto w = well1d::solve_well({a, 1.0});
    e.push_back(std::abs(w.mu1() + a - pi * pi));
    vdev = std::abs(w.v1_d() * std::sqrt(a) / (std::sqrt(2.0) * pi) - 1.0);
  }
  const bool dec = e[0] > e[1] && e[1] > e[2];
  const double ratio = e[0] / e[2];
  return {dec && ratio >= 5.0 && vdev <= 0.05,
          "e=" + fmt("%.4g", e[0]) + "," + fmt("%.4g", e[1]) + "," + fmt("%.4g", e[2]) + " ratio=" +
              fmt("%.1f", ratio) + " v1(d) dev=" + fmt("%.3f", vdev)};
}

Outcome ac3() {
  const auto& w = well4();
  const auto f = profiles::triangle(1.0, 1.0);
  const auto pred = asymptotics::make_prediction(w, f);
  harness::FdRunOptions o;
  o.refine = true;
  o.levels = 3;
  o.tol = 0.02;
  o.truncation = false;
  o.want_vector = false;
  std::vector<double> eps, c;
  bool converged = true;
  for (double e : {0.05, 0.10, 0.15, 0.20}) {
    o.binding_guess = pred.mu1 - pred.lambda1_at(e);
    const auto r = harness::run_fd(w, f, e, 0.1, o);
    if (!r.lambda1_fd) return {false, "no FD eigenvalue at eps=" + fmt("%g", e)};
    converged = converged && r.converged;
    eps.push_back(e);
    c.push_back((r.mu1_fd - *r.lambda1_fd) / (e * e));
  }
  const auto fit = harness::fit_line(eps, c, pred.lambda1_eps2_coeff);
  return {converged && std::abs(fit.deviation) <= 0.10,
          "c0=" + fmt("%.5f", fit.c0) + "+-" + fmt("%.5f", fit.c0_stderr) + " target=" + fmt("%.5f", fit.target) +
              " dev=" + fmt("%+.2f%%", 100.0 * fit.deviation) + (converged ? " richardson<2%" : " NOT converged")};
}

Outcome ac4() {
  const auto& w = well4();
  const auto f = profiles::negate(profiles::triangle(1.0, 1.0));
  std::string detail;
  bool pass = true;
  for (double e : {0.05, 0.1}) {
    const auto op = fd::build_h2d(w.params, f, e, fd::default_grid(w, f, e, 0.1));
    const double mu = fd::modal_basis(op).lambda[0];
    const double tau = fd::truncation_estimate(op, std::nullopt).tau;
    const long n = fd::count_below(op, mu - tau);
    pass = pass && n == 0 && tau < 1e-6 * std::abs(w.mu1());
    detail += "eps=" + fmt("%g", e) + ": count=" + std::to_string(n) + " tau=" + fmt("%.1e", tau) + "  ";
  }
  return {pass, detail};
}

Outcome ac5() {
  const auto& w = well4();
  const auto f = profiles::triangle(1.0, 1.0);
  const double e = 0.1;
  const auto g = fd::default_grid(w, f, e, 0.1);
  const auto op = fd::build_h2d(w.params, f, e, g);
  const auto op0 = op.background();
  fd::SolveOptions so;
  so.want_vectors = false;
  const auto r = fd::lowest_eigs(op, fd::modal_basis(op).lambda[0], 1, so);
  if (r.eigenvalues.empty()) return {false, "no FD eigenvalue"};
  const auto B = bs::discrete_bs_matrix(bs::DeformationPotential(w, f, e), std::sqrt(-r.eigenvalues[0]), op0);
  const double top = B.top(), low = B.eigenvalues.minCoeff();
  return {std::abs(top - 1.0) <= 1e-2 && low >= -1e-8 * B.norm(),
          "|S|=" + std::to_string(B.S.size()) + " top-1=" + fmt("%.2e", top - 1.0) + " min/|B|=" +
              fmt("%.2e", low / B.norm())};
}

Outcome ac6() {
  const auto& w = well4();
  const auto f = profiles::triangle(1.0, 1.0);
  std::vector<double> lead, full;
  for (double e : {0.05, 0.1, 0.2}) {
    const bs::DeformationPotential pot(w, f, e);
    const double dhat = asymptotics::predict_delta(w, f, e);
    lead.push_back(std::abs(bs::solve_secular(pot, nullptr, bs::SecularMode::Leading).delta_root - dhat) / (e * e));
    const auto op0 = fd::build_h2d(w.params, profiles::zero_profile(), 0.0, fd::default_grid(w, f, e, 0.025));
    full.push_back(std::abs(bs::solve_secular(pot, &op0, bs::SecularMode::DiscreteFull).delta_root - dhat) / (e * e));
  }
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  const double sl = spread(lead), sf = spread(full);
  std::string d = "leading=";
  for (double v : lead) d += fmt("%.3f ", v);
  d += "(x" + fmt("%.2f", sl) + ") full=";
  for (double v : full) d += fmt("%.3f ", v);
  d += "(x" + fmt("%.2f", sf) + ")";
  return {sl <= 2.0 && sf <= 2.0, d};
}

Outcome ac7() {
  const auto& w = well4();
  const auto f = profiles::triangle(1.0, 1.0);
  const auto pred = asymptotics::make_prediction(w, f);
  harness::FdRunOptions o;
  o.truncation = false;
  std::vector<double> ov;
  const std::vector<double> eps{0.1, 0.075, 0.05};
  for (double e : eps) {
    o.binding_guess = pred.mu1 - pred.lambda1_at(e);
    const auto r = harness::run_fd(w, f, e, 0.1, o);
    if (r.finest.eigenvectors.empty()) return {false, "no FD eigenvector at eps=" + fmt("%g", e)};
    const asymptotics::LeadingEigenfunction u(w, f, e);
    ov.push_back(fd::overlap_separable(
        r.finest.grid, r.finest.eigenvectors[0], [&](double x) { return u.longitudinal(x); },
        [&](double x) { return u.transverse(x); }));
  }
  auto dev = [&](double e) {
    const asymptotics::LeadingEigenfunction u(w, f, e);
    return std::abs(u.norm() / u.leading_norm() - 1.0);
  };
  const double d05 = dev(0.05), d20 = dev(0.2);
  const bool pass = ov[0] >= 0.9 && ov[1] >= ov[0] && ov[2] >= ov[1] && d05 < d20;
  return {pass, "overlap(0.1,0.075,0.05)=" + fmt("%.5f", ov[0]) + "," + fmt("%.5f", ov[1]) + "," +
                    fmt("%.5f", ov[2]) + " norm dev(0.05)=" + fmt("%.4f", d05) + " dev(0.2)=" + fmt("%.4f", d20)};
}

Outcome ac8() {
  const auto& w = well4();
  // widest member of the family for which the sign condition holds
  double gamma = 0.0;
  for (double g : {1.0, 0.5, 0.3, 0.2, 0.1}) {
    if (asymptotics::critical_check(w, profiles::dilate(profiles::sine_lobe_pair(1.0, 1.0), g)).satisfied) {
      gamma = g;
      break;
    }
  }
  if (gamma == 0.0) return {false, "no dilation satisfies the critical condition"};
  const auto f = profiles::dilate(profiles::sine_lobe_pair(1.0, 1.0), gamma);
  const auto cc = asymptotics::critical_check(w, f);
  const double lam = asymptotics::optimal_lambda(w);
  std::string d = "gamma=" + fmt("%g", gamma) + " ratio=" + fmt("%.4f", cc.ratio) + "<" + fmt("%.4f", cc.threshold);
  bool pass = cc.satisfied;
  harness::FdRunOptions o;
  o.truncation = true;
  o.want_vector = false;
  for (double e : {0.02, 0.05}) {
    const double J = asymptotics::trial_energy(w, f, lam, e).J_exact;
    const auto r = harness::run_fd(w, f, e, 0.1, o);
    const auto op = fd::build_h2d(w.params, f, e, r.finest.grid);
    const long n = fd::count_below(op, r.mu1_fd - r.truncation);
    pass = pass && J < 0.0 && n == 1;
    d += " | eps=" + fmt("%g", e) + " J=" + fmt("%.3e", J) + " count=" + std::to_string(n) + " binding=" +
         fmt("%.2e", r.lambda1_fd ? r.mu1_fd - *r.lambda1_fd : 0.0) + " tau=" + fmt("%.1e", r.truncation);
  }
  return {pass, d};
}

Outcome ac9() {
  const std::string cmd = std::string(PROPERTY_SUITE) + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return {rc == 0, rc == 0 ? "property suite passed" : "property suite exit status " + std::to_string(rc)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{{"AC1", 5, ac1},   {"AC2", 1, ac2},   {"AC3", 600, ac3},
                                   {"AC4", 300, ac4}, {"AC5", 300, ac5}, {"AC6", 600, ac6},
                                   {"AC7", 600, ac7}, {"AC8", 600, ac8}, {"AC9", 300, ac9}};
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = t <= c.budget_s;
    const bool ok = o.pass && in_time;
    failures += !ok;
    std::printf("%s %s  %s  [%.1f s of %.0f s%s]\n", c.name, ok ? "PASS" : "FAIL", o.detail.c_str(), t, c.budget_s,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
