#include "softguide/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "softguide/bs_core.hpp"
#include "softguide/errors.hpp"
#include "softguide/svg.hpp"

namespace softguide::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void note(SweepRecord& r, const std::string& what) {
  if (!r.message.empty()) r.message += "; ";
  r.message += what;
}

std::string eps_tag(double e) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", e);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------- fitting

FitResult fit_line(const std::vector<double>& eps, const std::vector<double>& c, double target) {
  if (eps.size() != c.size()) throw InvalidInput("fit_line: size mismatch");
  const int n = static_cast<int>(eps.size());
  if (n < 3) throw InvalidInput("fit_coefficient: need at least 3 points, have " + std::to_string(n));
  double mx = 0, my = 0;
  for (int k = 0; k < n; ++k) mx += eps[k], my += c[k];
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (int k = 0; k < n; ++k) {
    sxx += (eps[k] - mx) * (eps[k] - mx);
    sxy += (eps[k] - mx) * (c[k] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit_coefficient: epsilons must not all coincide");
  FitResult r;
  r.n = n;
  r.c1 = sxy / sxx;
  r.c0 = my - r.c1 * mx;
  double ssr = 0;
  for (int k = 0; k < n; ++k) {
    const double e = c[k] - r.c0 - r.c1 * eps[k];
    ssr += e * e;
  }
  double sq = 0;
  for (double x : eps) sq += x * x;
  r.c0_stderr = n > 2 ? std::sqrt(ssr / (n - 2) * sq / (n * sxx)) : 0.0;
  r.target = target;
  r.deviation = target != 0.0 ? r.c0 / target - 1.0 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

FitResult fit_coefficient(const std::vector<SweepRecord>& rows, double target) {
  std::vector<double> e, c;
  for (const auto& r : rows)
    if (r.has_fd()) {
      e.push_back(r.epsilon);
      c.push_back((r.mu1_fd - r.lambda1_fd) / (r.epsilon * r.epsilon));
    }
  return fit_line(e, c, target);
}

// ---------------------------------------------------------------- fd

namespace {

bool zero_mean(const profiles::Profile& f) {
  const auto m = profiles::moments(f);
  return !f.is_zero() && std::abs(m.I1) <= 1e-9 * std::sqrt(m.I2 * f.support().length());
}

}  // namespace

double fit_box_length(const well1d::WellSpectrum& well, const profiles::Profile& f, double epsilon, double h) {
  const fd::Grid2D cap = fd::default_grid(well, f, epsilon, h);
  if (!zero_mean(f)) return cap.L;
  const auto s = f.support();
  double L = std::max(40.0 * well.params.d, 2.0 * std::max(std::abs(s.a), std::abs(s.b)));
  fd::SolveOptions so;
  so.want_vectors = false;
  while (L < cap.L) {
    const auto g = fd::Grid2D::fitted(well.params.d, h, L, cap.H_lo, cap.H_hi);
    const auto op = fd::build_h2d(well.params, f, epsilon, g);
    const double mu = fd::modal_basis(op).lambda[0];
    const auto r = fd::lowest_eigs(op, mu, 1, so);
    if (r.eigenvalues.empty()) {
      L *= 4.0;
      continue;
    }
    // a box that is too short underestimates the binding, so this only grows
    const double need = 10.0 / std::sqrt(mu - r.eigenvalues[0]);
    if (need <= g.L) return g.L;
    L = std::max(2.0 * g.L, 1.25 * need);
  }
  return cap.L;
}

FdRun run_fd(const well1d::WellSpectrum& well, const profiles::Profile& f, double epsilon, double h,
             const FdRunOptions& opt) {
  const double d = well.params.d;
  fd::Grid2D base = fd::default_grid(well, f, epsilon, h);
  const double L = opt.L ? *opt.L : fit_box_length(well, f, epsilon, h);
  const double Hlo = opt.H.value_or(base.H_lo);
  const double Hhi = opt.H ? *opt.H + epsilon * std::max(0.0, f.max_value()) : base.H_hi;
  // the coarsest grid fixes the box; finer levels share it
  const fd::Grid2D g0 = fd::Grid2D::fitted(d, h, L, Hlo, Hhi);

  FdRun run;
  run.L = g0.L;
  const int levels = opt.refine ? std::max(2, opt.levels) : 1;
  double prev_lam = 0, prev_mu = 0, prev_R = 0;
  for (int k = 0; k < levels; ++k) {
    const double hk = h / std::pow(2.0, k);
    const fd::Grid2D g = fd::Grid2D::make(d, hk, g0.L, g0.H_lo, g0.H_hi);
    const auto op = fd::build_h2d(well.params, f, epsilon, g);
    const double mu = fd::modal_basis(op).lambda[0];
    fd::SolveOptions so;
    so.want_vectors = opt.want_vector;
    const std::optional<double> binding = k == 0 ? opt.binding_guess
                                          : std::isfinite(prev_lam) ? std::optional<double>(prev_mu - prev_lam)
                                                                    : std::nullopt;
    if (binding && *binding > 0.0) so.guess = mu - *binding;
    auto res = fd::lowest_eigs(op, mu, 2, so);
    run.hs.push_back(hk);
    run.threshold.push_back(mu);
    run.count_below = res.diagnostics.count_below_threshold;
    const double lam = res.eigenvalues.empty() ? std::numeric_limits<double>::quiet_NaN() : res.eigenvalues[0];
    run.lambda.push_back(lam);
    if (k == 0 && opt.truncation)
      run.truncation = fd::truncation_estimate(op, res.eigenvalues.empty() ? std::nullopt
                                                                           : std::optional<double>(lam)).tau;
    run.mu1_fd = mu;
    run.lambda1_fd = res.eigenvalues.empty() ? std::nullopt : std::optional<double>(lam);
    if (k > 0 && std::isfinite(lam) && std::isfinite(prev_lam)) {
      const double lamR = (4.0 * lam - prev_lam) / 3.0, muR = (4.0 * mu - prev_mu) / 3.0;
      const double R = muR - lamR;
      run.extrapolated_binding.push_back(R);
      run.mu1_fd = muR;
      run.lambda1_fd = lamR;
      if (k > 1 && std::abs(R - prev_R) < opt.tol * std::abs(R)) {
        run.converged = true;
        run.finest = std::move(res);
        break;
      }
      prev_R = R;
    }
    prev_lam = lam;
    prev_mu = mu;
    run.finest = std::move(res);
  }
  if (!opt.refine) run.converged = true;
  return run;
}

// ---------------------------------------------------------------- per epsilon

RunContext make_context(const RunConfig& c) {
  RunContext ctx{well1d::solve_well(c.well), c.make_profile(), {}, c.hash(), {}};
  ctx.prediction = asymptotics::make_prediction(ctx.well, ctx.profile);
  return ctx;
}

double estimate_memory_mb(const RunConfig& c, const RunContext& ctx, double epsilon) {
  if (!c.modes.count(Mode::Fd) && !c.modes.count(Mode::BsFull)) return 1.0;
  const double h = c.base_h() / (c.grid_refine ? std::pow(2.0, c.grid_levels - 1) : 1.0);
  const auto g = fd::default_grid(ctx.well, ctx.profile, epsilon, c.base_h());
  const double L = c.grid_L ? *c.grid_L : fit_box_length(ctx.well, ctx.profile, epsilon, c.base_h());
  const double H = c.grid_H.value_or(g.H_lo);
  const double n1 = 2.0 * L / h, n2 = (c.well.d + 2.0 * H) / h;
  const auto s = ctx.profile.support();
  const double cols = s.length() / h + 4.0;
  // dense modal column blocks, exterior scalar chains, a few nodal vectors; doubling for tau
  const double bytes = 8.0 * (n2 * n2 * (cols + 4.0) + 8.0 * n1 * n2) * (c.truncation ? 2.0 : 1.0);
  return bytes / (1024.0 * 1024.0);
}

SweepRecord run_epsilon(const RunConfig& c, const RunContext& ctx, double epsilon) {
  const auto t_start = Clock::now();
  SweepRecord r;
  r.config_hash = ctx.hash;
  r.epsilon = epsilon;
  r.h = c.base_h();
  r.mu1 = ctx.well.mu1();
  const auto& f = ctx.profile;
  const auto m = profiles::moments(f);
  const bool positive = ctx.prediction.classification == asymptotics::Classification::UniqueBoundState;
  bool hard_failure = false;

  auto guarded = [&](const char* what, auto&& body) {
    try {
      body();
    } catch (const RegimeError& e) {
      note(r, std::string(what) + ": " + e.what());
    } catch (const std::exception& e) {
      note(r, std::string(what) + ": " + e.what());
      hard_failure = true;
    }
  };

  {
    const auto t0 = Clock::now();
    guarded("predict", [&] {
      const auto p = asymptotics::predict_lambda1(ctx.well, f, epsilon);
      if (positive) {
        r.lambda1_pred = p.lambda1;
        r.delta_hat = asymptotics::predict_delta(ctx.well, f, epsilon);
      }
    });
    if (c.modes.count(Mode::Critical)) {
      guarded("critical", [&] {
        const double lam = c.trial_lambda.value_or(asymptotics::optimal_lambda(ctx.well));
        const auto te = asymptotics::trial_energy(ctx.well, f, lam, epsilon, c.trial_cutoff_scale);
        r.trial_J = te.J_exact;
        if (m.D2) r.trial_q = asymptotics::quadratic_coeff(ctx.well, f, lam);
      });
    }
    r.t_predict = seconds_since(t0);
  }

  if (c.modes.count(Mode::Fd)) {
    const auto t0 = Clock::now();
    guarded("fd", [&] {
      FdRunOptions o;
      o.refine = c.grid_refine;
      o.levels = c.grid_levels;
      o.tol = c.grid_tol;
      o.truncation = c.truncation;
      o.want_vector = c.overlap || !ctx.dump_eigenvector.empty();
      o.L = c.grid_L;
      o.H = c.grid_H;
      if (positive) o.binding_guess = ctx.prediction.lambda1_eps2_coeff * epsilon * epsilon;
      const auto run = run_fd(ctx.well, f, epsilon, c.base_h(), o);
      r.h_final = run.hs.back();
      r.L = run.L;
      r.mu1_fd = run.mu1_fd;
      r.count_below = run.count_below;
      if (c.truncation) r.truncation = run.truncation;
      if (run.lambda1_fd) {
        if (!(*run.lambda1_fd < run.mu1_fd)) throw NumericalError("fd eigenvalue not below the threshold");
        r.lambda1_fd = *run.lambda1_fd;
      }
      if (c.grid_refine && !run.converged) note(r, "fd: refinement did not reach grid.tol");
      if (!run.finest.eigenvectors.empty()) {
        if (c.overlap && positive) {
          const asymptotics::LeadingEigenfunction u(ctx.well, f, epsilon);
          r.overlap = fd::overlap_separable(run.finest.grid, run.finest.eigenvectors[0],
                                            [&](double x) { return u.longitudinal(x); },
                                            [&](double y) { return u.transverse(y); });
          r.u_norm = u.norm();
        }
        if (!ctx.dump_eigenvector.empty())
          fd::write_eigenvector_csv(ctx.dump_eigenvector + "_eps" + eps_tag(epsilon) + ".csv", run.finest.grid,
                                    run.finest.eigenvectors[0], 1);
      }
    });
    r.t_fd = seconds_since(t0);
  }

  if (c.modes.count(Mode::BsLeading) || c.modes.count(Mode::BsFull)) {
    const auto t0 = Clock::now();
    const bs::DeformationPotential pot(ctx.well, f, epsilon);
    if (c.modes.count(Mode::BsLeading))
      guarded("bs-leading", [&] {
        r.delta_bs_leading = bs::solve_secular(pot, nullptr, bs::SecularMode::Leading).delta_root;
      });
    if (c.modes.count(Mode::BsFull))
      guarded("bs-full", [&] {
        // same box as fd, finest step of the refinement ladder
        const double hb = c.base_h() / (c.grid_refine ? std::pow(2.0, std::max(1, c.grid_levels) - 1) : 1.0);
        const auto g = fd::default_grid(ctx.well, f, epsilon, c.base_h());
        const double Lb = c.grid_L ? *c.grid_L
                          : r.L > 0.0 ? r.L
                                               : fit_box_length(ctx.well, f, epsilon, c.base_h());
        const auto grid = fd::Grid2D::fitted(c.well.d, hb, Lb,
                                             c.grid_H.value_or(g.H_lo), c.grid_H.value_or(g.H_lo));
        const auto op0 = fd::build_h2d(c.well, profiles::zero_profile(), 0.0, grid);
        const auto s = bs::solve_secular(pot, &op0, bs::SecularMode::DiscreteFull);
        r.delta_bs_full = s.delta_root;
        r.lambda1_bs_full = s.lambda1;
      });
    r.t_bs = seconds_since(t0);
  }

  if (hard_failure) r.status = "failed";
  r.t_total = seconds_since(t_start);
  return r;
}

// ---------------------------------------------------------------- sweep

namespace {

void write_fit(const RunConfig& c, const RunContext& ctx, const std::vector<SweepRecord>& rows, SweepResult& out,
               std::ostream* log) {
  const double target = ctx.prediction.lambda1_eps2_coeff;
  std::vector<SweepRecord> fdrows;
  for (const auto& r : rows)
    if (r.has_fd()) fdrows.push_back(r);
  if (fdrows.size() >= 3) {
    out.fit = fit_coefficient(fdrows, target);
    nlohmann::json j{{"config_hash", ctx.hash}, {"c0", out.fit->c0},           {"c0_stderr", out.fit->c0_stderr},
                     {"c1", out.fit->c1},       {"target", out.fit->target}, {"deviation", out.fit->deviation},
                     {"n", out.fit->n}};
    std::ofstream(std::filesystem::path(c.out_dir) / "fit.json") << j.dump(1) << "\n";
    if (log)
      *log << "fit: c0 = " << out.fit->c0 << " +- " << out.fit->c0_stderr << ", target " << target
           << ", deviation " << 100.0 * out.fit->deviation << "%\n";
  }
  if (!c.formats.count("svg") || fdrows.empty()) return;
  svg::Chart ch;
  ch.title = "binding coefficient";
  ch.xlabel = "epsilon";
  ch.ylabel = "(mu1 - lambda1) / eps^2";
  svg::Series s{"fd", {}, {}, true, "#1f77b4"};
  for (const auto& r : fdrows) {
    s.x.push_back(r.epsilon);
    s.y.push_back((r.mu1_fd - r.lambda1_fd) / (r.epsilon * r.epsilon));
  }
  ch.series.push_back(s);
  if (out.fit) {
    svg::Series line{"c0 + c1 eps", {0.0, s.x.back()}, {out.fit->c0, out.fit->c0 + out.fit->c1 * s.x.back()},
                     false, "#2ca02c"};
    ch.series.push_back(line);
  }
  if (ctx.prediction.classification == asymptotics::Classification::UniqueBoundState) {
    ch.hline = target;
    ch.hline_label = "alpha^2 v1(d)^4 I1^2 / 4";
  }
  svg::write((std::filesystem::path(c.out_dir) / "plots" / "coeff.svg").string(), ch);
}

}  // namespace

SweepResult sweep(const RunConfig& c, std::ostream* log, const std::string& dump_eigenvector) {
  if (c.epsilons.empty()) throw ConfigError("empty epsilon list", "sweep.epsilons");
  RunContext ctx = make_context(c);
  ctx.dump_eigenvector = dump_eigenvector;
  const bool csv = c.formats.count("csv") > 0, json = c.formats.count("json") > 0;
  const auto csv_path = (std::filesystem::path(c.out_dir) / "results.csv").string();

  // resume: keep finished rows of this config, rows of other configs untouched
  std::vector<SweepRecord> others;
  std::map<double, SweepRecord> done;
  for (auto& r : read_records_csv(csv_path)) {
    if (r.config_hash == ctx.hash && r.ok() && r.h == c.base_h() &&
        std::find(c.epsilons.begin(), c.epsilons.end(), r.epsilon) != c.epsilons.end())
      done[r.epsilon] = r;
    else if (r.config_hash != ctx.hash)
      others.push_back(r);
  }

  SweepResult out;
  std::mutex mu;
  std::condition_variable cv;
  std::map<double, SweepRecord> results = done;
  auto flush = [&] {
    std::vector<SweepRecord> all = others;
    for (const auto& [e, r] : results) all.push_back(r);
    if (csv || json) write_records(c.out_dir, all, csv, json);
  };

  std::vector<double> todo;
  for (double e : c.epsilons)
    if (!done.count(e)) todo.push_back(e);
    else ++out.skipped;
  if (log && out.skipped) *log << "resume: " << out.skipped << " epsilon(s) already done\n";

  double in_use = 0.0;
  int running = 0;
  std::vector<std::future<void>> jobs;
  for (double e : todo) {
    const double need = estimate_memory_mb(c, ctx, e);
    {
      std::unique_lock lk(mu);
      cv.wait(lk, [&] { return running == 0 || (running < c.jobs && in_use + need <= c.memory_mb); });
      in_use += need;
      ++running;
    }
    auto work = [&, e, need] {
      SweepRecord r;
      if (need > c.memory_mb) {
        r.config_hash = ctx.hash;
        r.epsilon = e;
        r.h = c.base_h();
        r.mu1 = ctx.well.mu1();
        r.status = "failed";
        r.message = "estimated memory " + std::to_string(static_cast<long>(need)) + " MB exceeds sweep.memory_mb";
      } else {
        r = run_epsilon(c, ctx, e);
      }
      std::lock_guard lk(mu);
      results[e] = r;
      ++out.ran;
      if (!r.ok()) ++out.failed;
      if (log)
        *log << "eps = " << e << ": " << r.status << (r.message.empty() ? "" : " (" + r.message + ")") << " ["
             << r.t_total << " s]\n";
      flush();
      in_use -= need;
      --running;
      cv.notify_all();
    };
    if (c.jobs <= 1) work();
    else jobs.push_back(std::async(std::launch::async, work));
  }
  for (auto& j : jobs) j.get();
  if (todo.empty()) flush();

  for (const auto& [e, r] : results) out.rows.push_back(r);
  write_fit(c, ctx, out.rows, out, log);
  out.exit_code = (out.ran > 0 && out.failed == out.ran) ? 3 : 0;
  return out;
}

// ---------------------------------------------------------------- dirichlet limit

std::vector<asymptotics::CoefficientRow> compare_dirichlet(const RunConfig& c, std::ostream* log) {
  std::vector<double> alphas = c.alphas.empty() ? std::vector<double>{c.well.alpha} : c.alphas;
  const auto rows = asymptotics::coefficient_limit_check(alphas, c.well.d, c.make_profile());
  std::filesystem::create_directories(c.out_dir);
  if (c.formats.count("csv")) {
    std::ofstream out(std::filesystem::path(c.out_dir) / "dirichlet.csv");
    out << "alpha,soft_coeff,dirichlet_coeff,ratio,mu1_plus_alpha,pi2_over_d2,threshold_gap\n";
    out.precision(17);
    for (const auto& r : rows)
      out << r.alpha << "," << r.soft_coeff << "," << r.dirichlet_coeff << "," << r.ratio << ","
          << r.mu1_plus_alpha << "," << r.pi2_over_d2 << "," << r.threshold_gap << "\n";
  }
  if (log) {
    *log << "alpha  soft_coeff  dirichlet_coeff  ratio  mu1+alpha  (pi/d)^2  gap\n";
    for (const auto& r : rows)
      *log << r.alpha << "  " << r.soft_coeff << "  " << r.dirichlet_coeff << "  " << r.ratio << "  "
           << r.mu1_plus_alpha << "  " << r.pi2_over_d2 << "  " << r.threshold_gap << "\n";
  }
  if (c.formats.count("svg")) {
    svg::Chart ch;
    ch.title = "soft vs Dirichlet eps^2 coefficient";
    ch.xlabel = "alpha";
    ch.ylabel = "ratio";
    ch.log_x = true;
    svg::Series s{"soft / Dirichlet", {}, {}, true, "#1f77b4"};
    for (const auto& r : rows) s.x.push_back(r.alpha), s.y.push_back(r.ratio);
    ch.series.push_back(s);
    ch.hline = 1.0;
    ch.hline_label = "1";
    svg::write((std::filesystem::path(c.out_dir) / "plots" / "dirichlet.svg").string(), ch);
  }
  return rows;
}

}  // namespace softguide::harness
