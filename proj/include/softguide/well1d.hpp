#pragma once

#include <cstddef>
#include <vector>

namespace softguide::well1d {

struct WellParams {
  double alpha = 0.0;
  double d = 0.0;

  // Throws InvalidInput unless alpha > 0 and d > 0.
  void validate() const;
};

enum class Parity { Even, Odd };

// One bound state of -psi'' - alpha*chi_[0,d] psi, parity taken about d/2.
struct WellMode {
  int index = 0;  // 1-based, ascending in mu
  double mu = 0.0;
  double k_in = 0.0;
  double kappa = 0.0;
  Parity parity = Parity::Even;
  double norm_const = 0.0;  // amplitude A
  double alpha = 0.0;
  double d = 0.0;

  // v(d); v(0) equals this for even modes and its negative for odd ones.
  double edge_value() const;
};

struct WellSpectrum {
  WellParams params;
  std::vector<WellMode> modes;

  std::size_t count() const { return modes.size(); }
  const WellMode& ground() const { return modes.front(); }
  double mu1() const { return modes.front().mu; }
  double v1_d() const { return modes.front().edge_value(); }
};

WellSpectrum solve_well(const WellParams& params, double tol = 1e-14);

double eval_mode(const WellMode& mode, double x);

// order 1 or 2; the second derivative is taken piecewise (one-sided at 0 and d).
double eval_mode_derivative(const WellMode& mode, double x, int order = 1);

// Signed integral of v^2 from d to t.
double eval_transverse_integral(const WellMode& mode, double t);

// sup |v| over the line.
double mode_sup_norm(const WellMode& mode);

struct LargeAlphaReference {
  double mu1_approx = 0.0;
  double v1d_approx = 0.0;
};

LargeAlphaReference large_alpha_reference(const WellParams& params);

}  // namespace softguide::well1d
