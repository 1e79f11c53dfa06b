#include "softguide/well1d.hpp"

#include <cmath>
#include <numbers>

#include "softguide/errors.hpp"

namespace softguide::well1d {

namespace {

constexpr double kPi = std::numbers::pi;

// Secular residual on one branch, increasing in eta. Even: eta tan eta - s,
// odd: -eta cot eta - s, with s = sqrt(R^2 - eta^2).
double branch_residual(Parity p, double eta, double R) {
  const double s = std::sqrt(std::max(0.0, (R - eta) * (R + eta)));
  if (p == Parity::Even) return eta * std::tan(eta) - s;
  return -eta / std::tan(eta) - s;
}

double bisect(Parity p, double lo, double hi, double R, double tol) {
  // residual is -inf/negative at lo, positive at hi on each branch
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (branch_residual(p, mid, R) < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= tol * hi) break;
  }
  return 0.5 * (lo + hi);
}

WellMode make_mode(const WellParams& w, Parity p, double eta) {
  WellMode m;
  m.alpha = w.alpha;
  m.d = w.d;
  m.parity = p;
  const double R = 0.5 * std::sqrt(w.alpha) * w.d;
  m.k_in = 2.0 * eta / w.d;
  m.kappa = 2.0 * std::sqrt((R - eta) * (R + eta)) / w.d;
  m.mu = -m.kappa * m.kappa;
  const double c = p == Parity::Even ? std::cos(eta) : std::sin(eta);
  const double sgn = p == Parity::Even ? 1.0 : -1.0;
  const double inner = 0.5 * w.d + sgn * std::sin(m.k_in * w.d) / (2.0 * m.k_in);
  m.norm_const = 1.0 / std::sqrt(inner + c * c / m.kappa);
  return m;
}

double edge_cos(const WellMode& m) {
  const double eta = 0.5 * m.k_in * m.d;
  return m.parity == Parity::Even ? std::cos(eta) : std::sin(eta);
}

}  // namespace

void WellParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw InvalidInput("well: alpha must be positive and finite");
  if (!(d > 0.0) || !std::isfinite(d))
    throw InvalidInput("well: d must be positive and finite");
}

double WellMode::edge_value() const { return norm_const * edge_cos(*this); }

WellSpectrum solve_well(const WellParams& params, double tol) {
  params.validate();
  if (!(tol > 0.0) || tol > 1e-6) throw InvalidInput("solve_well: tol must lie in (0, 1e-6]");

  WellSpectrum out;
  out.params = params;
  const double R = 0.5 * std::sqrt(params.alpha) * params.d;
  const double guard = 1e-10;

  // Branches alternate even/odd on intervals of length pi/2 starting at 0.
  for (int b = 0;; ++b) {
    const double lo = 0.5 * kPi * b;
    if (lo >= R) break;
    const double hi_pole = 0.5 * kPi * (b + 1);
    const Parity p = (b % 2 == 0) ? Parity::Even : Parity::Odd;
    const double hi = std::min(hi_pole, R);
    // The residual rises from its pole value; a root exists iff it is
    // non-negative at the right end of the admissible window.
    double r_hi;
    if (hi < hi_pole) {
      r_hi = branch_residual(p, hi, R);
    } else {
      r_hi = 1.0;  // pole to +inf
    }
    if (r_hi < 0.0) continue;
    const double eta = bisect(p, lo, hi, R, tol);
    if (R - eta <= guard) continue;
    out.modes.push_back(make_mode(params, p, eta));
  }
  // Branches are visited with eta ascending, i.e. mu ascending.
  for (std::size_t i = 0; i < out.modes.size(); ++i) out.modes[i].index = static_cast<int>(i + 1);
  if (out.modes.empty()) throw NumericalError("solve_well: no bound state found");
  return out;
}

double eval_mode(const WellMode& m, double x) {
  const double A = m.norm_const;
  const double c = edge_cos(m);
  if (x > m.d) return A * c * std::exp(-m.kappa * (x - m.d));
  if (x < 0.0) {
    const double s = m.parity == Parity::Even ? 1.0 : -1.0;
    return s * A * c * std::exp(m.kappa * x);
  }
  const double y = m.k_in * (x - 0.5 * m.d);
  return m.parity == Parity::Even ? A * std::cos(y) : A * std::sin(y);
}

double eval_mode_derivative(const WellMode& m, double x, int order) {
  if (order != 1 && order != 2) throw InvalidInput("eval_mode_derivative: order must be 1 or 2");
  const double v = eval_mode(m, x);
  if (x > m.d) return order == 1 ? -m.kappa * v : m.kappa * m.kappa * v;
  if (x < 0.0) return order == 1 ? m.kappa * v : m.kappa * m.kappa * v;
  const double A = m.norm_const;
  const double k = m.k_in;
  const double y = k * (x - 0.5 * m.d);
  if (order == 2) return -k * k * v;
  return m.parity == Parity::Even ? -A * k * std::sin(y) : A * k * std::cos(y);
}

double eval_transverse_integral(const WellMode& m, double t) {
  const double A2 = m.norm_const * m.norm_const;
  const double c = edge_cos(m);
  const double k = m.k_in;
  const double d = m.d;
  const double sgn = m.parity == Parity::Even ? 1.0 : -1.0;
  if (t >= d) return A2 * c * c * (-std::expm1(-2.0 * m.kappa * (t - d))) / (2.0 * m.kappa);
  if (t >= 0.0) {
    const double s = d - t;
    return -A2 * (0.5 * s + sgn * std::cos(k * (d - s)) * std::sin(k * s) / (2.0 * k));
  }
  const double inner = A2 * (0.5 * d + sgn * std::sin(k * d) / (2.0 * k));
  const double tail = A2 * c * c * (-std::expm1(2.0 * m.kappa * t)) / (2.0 * m.kappa);
  return -(inner + tail);
}

double mode_sup_norm(const WellMode& m) {
  // Even modes peak at d/2; odd modes have half phase above pi/2, so the
  // sine reaches +-1 inside the well. Tails never exceed the edge value.
  return std::abs(m.norm_const);
}

LargeAlphaReference large_alpha_reference(const WellParams& p) {
  p.validate();
  LargeAlphaReference r;
  r.mu1_approx = -p.alpha + (kPi / p.d) * (kPi / p.d);
  r.v1d_approx = std::sqrt(2.0 / p.d) * kPi / (p.d * std::sqrt(p.alpha));
  return r;
}

}  // namespace softguide::well1d
