#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "softguide/asymptotics.hpp"
#include "softguide/config.hpp"
#include "softguide/fd_oracle.hpp"
#include "softguide/records.hpp"

namespace softguide::harness {

struct FitResult {
  double c0 = 0.0;
  double c0_stderr = 0.0;
  double c1 = 0.0;
  double target = 0.0;
  double deviation = 0.0;  // c0 / target - 1, signed
  int n = 0;
};

// Least-squares c(eps) = c0 + c1 eps.
FitResult fit_line(const std::vector<double>& eps, const std::vector<double>& c, double target);
// c = (mu1_fd - lambda1_fd) / eps^2 over rows with an FD eigenvalue.
FitResult fit_coefficient(const std::vector<SweepRecord>& rows, double target);

// Finite-difference ground state, optionally refined in h with Richardson extrapolation.
struct FdRun {
  std::vector<double> hs;
  std::vector<double> lambda;      // per level, NaN when none below threshold
  std::vector<double> threshold;   // per level
  std::vector<double> extrapolated_binding;  // from level 1 on
  double mu1_fd = 0.0;
  std::optional<double> lambda1_fd;
  long count_below = 0;
  double truncation = 0.0;
  double L = 0.0;
  bool converged = false;
  fd::SpectralResult finest;
};

struct FdRunOptions {
  bool refine = false;
  int levels = 3;
  double tol = 0.02;
  bool truncation = true;
  bool want_vector = true;
  std::optional<double> L, H;
  std::optional<double> binding_guess;  // rough mu1 - lambda1
};

// Box half-length: the a priori default, except for zero-mean profiles where
// the binding scale is measured on growing boxes until L >= 10 / delta.
double fit_box_length(const well1d::WellSpectrum& well, const profiles::Profile& f, double epsilon, double h);

FdRun run_fd(const well1d::WellSpectrum& well, const profiles::Profile& f, double epsilon, double h,
             const FdRunOptions& opt);

struct RunContext {
  well1d::WellSpectrum well;
  profiles::Profile profile;
  asymptotics::Prediction prediction;
  std::string hash;
  std::string dump_eigenvector;  // path prefix, empty for none
};

RunContext make_context(const RunConfig& c);

SweepRecord run_epsilon(const RunConfig& c, const RunContext& ctx, double epsilon);

// Rough peak memory of one fd job in MB.
double estimate_memory_mb(const RunConfig& c, const RunContext& ctx, double epsilon);

struct SweepResult {
  std::vector<SweepRecord> rows;  // this config, ascending epsilon
  std::optional<FitResult> fit;
  int ran = 0;
  int skipped = 0;
  int failed = 0;
  int exit_code = 0;
};

SweepResult sweep(const RunConfig& c, std::ostream* log = nullptr, const std::string& dump_eigenvector = {});

std::vector<asymptotics::CoefficientRow> compare_dirichlet(const RunConfig& c, std::ostream* log = nullptr);

}  // namespace softguide::harness
