#include "softguide/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "softguide/errors.hpp"
#include "softguide/quadrature.hpp"

namespace softguide::profiles {

namespace {

constexpr double kPi = std::numbers::pi;

double bump_core(double u) {
  const double q = 1.0 - u * u;
  if (q <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / q);
}

struct BaseMoments {
  double B1 = 0.0, B2 = 0.0, BD2 = 0.0, Babs = 0.0, err = 0.0;
};

}  // namespace

std::string to_string(ProfileKind kind) {
  switch (kind) {
    case ProfileKind::Zero: return "zero";
    case ProfileKind::Triangle: return "triangle";
    case ProfileKind::SmoothBump: return "bump";
    case ProfileKind::SineLobePair: return "sine";
    case ProfileKind::Table: return "table";
  }
  return "unknown";
}

ProfileKind parse_kind(const std::string& name) {
  if (name == "zero") return ProfileKind::Zero;
  if (name == "triangle") return ProfileKind::Triangle;
  if (name == "bump" || name == "smooth_bump") return ProfileKind::SmoothBump;
  if (name == "sine" || name == "sine_pair" || name == "sine_lobe_pair") return ProfileKind::SineLobePair;
  if (name == "table") return ProfileKind::Table;
  throw InvalidInput("unknown profile kind '" + name + "'");
}

Profile::Profile() = default;

double Profile::base(double y) const {
  switch (kind_) {
    case ProfileKind::Zero: return 0.0;
    case ProfileKind::Triangle: {
      const double t = 1.0 - std::abs(y / w_);
      return t > 0.0 ? h_ * t : 0.0;
    }
    case ProfileKind::SmoothBump: return h_ * bump_core(y / w_);
    case ProfileKind::SineLobePair:
      return std::abs(y) <= w_ ? h_ * std::sin(kPi * y / w_) : 0.0;
    case ProfileKind::Table: {
      const auto& xs = *xs_;
      const auto& fs = *fs_;
      if (y <= xs.front() || y >= xs.back()) return 0.0;
      const auto it = std::upper_bound(xs.begin(), xs.end(), y);
      const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
      const double t = (y - xs[k]) / (xs[k + 1] - xs[k]);
      return fs[k] + t * (fs[k + 1] - fs[k]);
    }
  }
  return 0.0;
}

double Profile::base_derivative(double y) const {
  switch (kind_) {
    case ProfileKind::Zero: return 0.0;
    case ProfileKind::Triangle:
      if (std::abs(y) >= w_ || y == 0.0) return 0.0;
      return y > 0.0 ? -h_ / w_ : h_ / w_;
    case ProfileKind::SmoothBump: {
      const double u = y / w_;
      const double q = 1.0 - u * u;
      if (q <= 0.0) return 0.0;
      return h_ * bump_core(u) * (-2.0 * u / (q * q)) / w_;
    }
    case ProfileKind::SineLobePair:
      return std::abs(y) < w_ ? h_ * (kPi / w_) * std::cos(kPi * y / w_) : 0.0;
    case ProfileKind::Table: {
      const auto& xs = *xs_;
      const auto& fs = *fs_;
      if (y <= xs.front() || y >= xs.back()) return 0.0;
      const auto it = std::upper_bound(xs.begin(), xs.end(), y);
      const std::size_t k = static_cast<std::size_t>(it - xs.begin()) - 1;
      return (fs[k + 1] - fs[k]) / (xs[k + 1] - xs[k]);
    }
  }
  return 0.0;
}

double Profile::operator()(double x) const { return sign_ * base(gamma_ * x); }

double Profile::derivative(double x) const {
  if (!has_derivative_) throw RegimeError("derivative unavailable for this profile");
  return sign_ * gamma_ * base_derivative(gamma_ * x);
}

Interval Profile::support() const {
  Interval s;
  switch (kind_) {
    case ProfileKind::Zero: return s;
    case ProfileKind::Triangle:
    case ProfileKind::SmoothBump:
    case ProfileKind::SineLobePair:
      s = {-w_, w_};
      break;
    case ProfileKind::Table:
      s = {xs_->front(), xs_->back()};
      break;
  }
  return {s.a / gamma_, s.b / gamma_};
}

bool Profile::is_zero() const { return kind_ == ProfileKind::Zero || h_ == 0.0; }

double Profile::min_value() const {
  double lo = 0.0, hi = 0.0;
  switch (kind_) {
    case ProfileKind::Zero: break;
    case ProfileKind::Triangle:
    case ProfileKind::SmoothBump:
      lo = std::min(0.0, h_);
      hi = std::max(0.0, h_);
      break;
    case ProfileKind::SineLobePair:
      lo = -std::abs(h_);
      hi = std::abs(h_);
      break;
    case ProfileKind::Table:
      lo = std::min(0.0, *std::min_element(fs_->begin(), fs_->end()));
      hi = std::max(0.0, *std::max_element(fs_->begin(), fs_->end()));
      break;
  }
  return sign_ > 0 ? lo : -hi;
}

double Profile::max_value() const { return -negated().min_value(); }

std::vector<double> Profile::breakpoints() const {
  std::vector<double> b;
  switch (kind_) {
    case ProfileKind::Zero: return b;
    case ProfileKind::Triangle:
    case ProfileKind::SineLobePair:
      b = {-w_, 0.0, w_};
      break;
    case ProfileKind::SmoothBump:
      b = {-w_, w_};
      break;
    case ProfileKind::Table:
      b = *xs_;
      break;
  }
  for (double& x : b) x /= gamma_;
  return b;
}

Profile Profile::negated() const {
  Profile p = *this;
  p.sign_ = -sign_;
  return p;
}

Profile Profile::dilated(double gamma) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("dilate: gamma must be positive");
  Profile p = *this;
  p.gamma_ = gamma_ * gamma;
  return p;
}

Profile Profile::continuous_only() const {
  Profile p = *this;
  p.has_derivative_ = false;
  return p;
}

Profile make_profile(const ProfileSpec& spec) {
  Profile p;
  p.kind_ = spec.kind;
  if (spec.kind == ProfileKind::Table) {
    const auto& xs = spec.xs;
    const auto& fs = spec.fs;
    if (xs.size() != fs.size() || xs.size() < 2) throw InvalidInput("table profile: need >= 2 matching knots");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(fs[i])) throw InvalidInput("table profile: non-finite knot");
      if (i > 0 && !(xs[i] > xs[i - 1])) throw InvalidInput("table profile: x must be strictly increasing");
    }
    if (fs.front() != 0.0 || fs.back() != 0.0)
      throw InvalidInput("table profile: end values must be 0 (continuous, compactly supported)");
    p.xs_ = std::make_shared<const std::vector<double>>(xs);
    p.fs_ = std::make_shared<const std::vector<double>>(fs);
    p.h_ = 1.0;
    p.w_ = 1.0;
  } else if (spec.kind != ProfileKind::Zero) {
    if (!(spec.w > 0.0) || !std::isfinite(spec.w)) throw InvalidInput("profile: width w must be positive");
    if (!std::isfinite(spec.h)) throw InvalidInput("profile: height h must be finite");
    p.h_ = spec.h;
    p.w_ = spec.w;
  }
  if (spec.gamma != 1.0) p = p.dilated(spec.gamma);
  if (spec.negate) p = p.negated();
  return p;
}

namespace {
Profile family(ProfileKind kind, double h, double w) {
  ProfileSpec s;
  s.kind = kind;
  s.h = h;
  s.w = w;
  return make_profile(s);
}
}  // namespace

Profile zero_profile() { return family(ProfileKind::Zero, 0.0, 1.0); }
Profile triangle(double h, double w) { return family(ProfileKind::Triangle, h, w); }
Profile smooth_bump(double h, double w) { return family(ProfileKind::SmoothBump, h, w); }
Profile sine_lobe_pair(double h, double w) { return family(ProfileKind::SineLobePair, h, w); }

Profile table(std::vector<double> xs, std::vector<double> fs) {
  ProfileSpec s;
  s.kind = ProfileKind::Table;
  s.xs = std::move(xs);
  s.fs = std::move(fs);
  return make_profile(s);
}

Profile load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("table profile: cannot open '" + path + "'");
  std::vector<double> xs, fs;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a)) continue;
    if (!(ss >> b) || (ss >> extra))
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected two columns x,f");
    char* e1 = nullptr;
    char* e2 = nullptr;
    const double x = std::strtod(a.c_str(), &e1);
    const double f = std::strtod(b.c_str(), &e2);
    if (*e1 != '\0' || *e2 != '\0') {
      if (xs.empty() && !header_seen) {
        header_seen = true;
        continue;
      }
      throw InvalidInput(path + ":" + std::to_string(lineno) + ": non-numeric entry");
    }
    xs.push_back(x);
    fs.push_back(f);
  }
  return table(std::move(xs), std::move(fs));
}

Profile dilate(const Profile& p, double gamma) { return p.dilated(gamma); }
Profile negate(const Profile& p) { return p.negated(); }

ProfileMoments moments(const Profile& p) {
  ProfileMoments m;
  m.min_f = p.min_value();
  m.max_f = p.max_value();
  m.half_diameter = 0.5 * p.support().length();
  if (p.is_zero()) {
    if (p.has_derivative()) m.D2 = 0.0;
    return m;
  }
  // Base moments of the undilated, unsigned family.
  BaseMoments b;
  const double h = p.height();
  const double w = p.width();
  switch (p.kind()) {
    case ProfileKind::Zero: break;
    case ProfileKind::Triangle:
      b.B1 = h * w;
      b.B2 = 2.0 * h * h * w / 3.0;
      b.BD2 = 2.0 * h * h / w;
      b.Babs = std::abs(h) * w;
      break;
    case ProfileKind::SineLobePair:
      b.B1 = 0.0;
      b.B2 = h * h * w;
      b.BD2 = h * h * kPi * kPi / w;
      b.Babs = 4.0 * std::abs(h) * w / kPi;
      break;
    case ProfileKind::SmoothBump: {
      // Unit bump on (-1, 1), then scale.
      auto f = [](double u) { return bump_core(u); };
      auto f2 = [](double u) { const double v = bump_core(u); return v * v; };
      auto fp2 = [](double u) {
        const double q = 1.0 - u * u;
        if (q <= 0.0) return 0.0;
        const double g = bump_core(u) * 2.0 * u / (q * q);
        return g * g;
      };
      const auto r1 = quad::integrate(f, -1.0, 1.0, {0.0});
      const auto r2 = quad::integrate(f2, -1.0, 1.0, {0.0});
      const auto r3 = quad::integrate(fp2, -1.0, 1.0, {0.0});
      b.B1 = h * w * r1.value;
      b.B2 = h * h * w * r2.value;
      b.BD2 = h * h / w * r3.value;
      b.Babs = std::abs(b.B1);
      b.err = std::abs(h * w) * r1.error + h * h * w * r2.error + h * h / w * r3.error;
      break;
    }
    case ProfileKind::Table: {
      const auto& xs = *p.xs_;
      const auto& fs = *p.fs_;
      for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
        const double dx = xs[k + 1] - xs[k];
        const double fa = fs[k];
        const double fb = fs[k + 1];
        b.B1 += 0.5 * dx * (fa + fb);
        b.B2 += dx * (fa * fa + fa * fb + fb * fb) / 3.0;
        b.BD2 += (fb - fa) * (fb - fa) / dx;
        if (fa * fb >= 0.0)
          b.Babs += 0.5 * dx * (std::abs(fa) + std::abs(fb));
        else
          b.Babs += 0.5 * dx * (fa * fa + fb * fb) / (std::abs(fa) + std::abs(fb));
      }
      break;
    }
  }
  const double g = p.gamma();
  m.I1 = p.sign() * b.B1 / g;
  m.I2 = b.B2 / g;
  m.abs_I1 = b.Babs / g;
  if (p.has_derivative()) m.D2 = g * b.BD2;
  m.quad_error = b.err / g;
  return m;
}

double dirichlet_energy(const Profile& p) {
  const auto m = moments(p);
  if (!m.D2) throw RegimeError("derivative unavailable for this profile");
  return *m.D2;
}

double max_admissible_epsilon(const Profile& p, double d) {
  const double mn = p.min_value();
  if (mn >= 0.0) return std::numeric_limits<double>::infinity();
  return d / (-mn);
}

void check_admissible(const Profile& p, double d, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be non-negative and finite");
  if (!(d + epsilon * p.min_value() > 0.0))
    throw InvalidInput("inadmissible geometry: d + eps*min f must be positive");
}

}  // namespace softguide::profiles
