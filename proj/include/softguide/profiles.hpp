#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace softguide::profiles {

enum class ProfileKind { Zero, Triangle, SmoothBump, SineLobePair, Table };

std::string to_string(ProfileKind kind);
ProfileKind parse_kind(const std::string& name);

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
};

struct ProfileSpec {
  ProfileKind kind = ProfileKind::Triangle;
  double h = 1.0;
  double w = 1.0;
  double gamma = 1.0;
  bool negate = false;
  std::vector<double> xs;  // Table knots
  std::vector<double> fs;
};

struct ProfileMoments;

// f(x) = sign * base(gamma * x). Immutable once built.
class Profile {
 public:
  Profile();  // zero profile

  double operator()(double x) const;
  double derivative(double x) const;

  ProfileKind kind() const { return kind_; }
  Interval support() const;
  bool has_derivative() const { return has_derivative_; }
  bool is_zero() const;
  double min_value() const;
  double max_value() const;
  double gamma() const { return gamma_; }
  double sign() const { return sign_; }
  double height() const { return h_; }
  double width() const { return w_; }

  // Points where f or f' may be non-smooth, including the support ends.
  std::vector<double> breakpoints() const;

  Profile negated() const;
  Profile dilated(double gamma) const;
  // Same values without a usable derivative representation.
  Profile continuous_only() const;

  friend Profile make_profile(const ProfileSpec& spec);
  friend ProfileMoments moments(const Profile& p);

 private:
  double base(double y) const;
  double base_derivative(double y) const;

  ProfileKind kind_ = ProfileKind::Zero;
  double h_ = 0.0;
  double w_ = 1.0;
  double sign_ = 1.0;
  double gamma_ = 1.0;
  bool has_derivative_ = true;
  std::shared_ptr<const std::vector<double>> xs_;
  std::shared_ptr<const std::vector<double>> fs_;
};

Profile make_profile(const ProfileSpec& spec);
Profile zero_profile();
Profile triangle(double h, double w);
Profile smooth_bump(double h, double w);
Profile sine_lobe_pair(double h, double w);
Profile table(std::vector<double> xs, std::vector<double> fs);

// Two-column x,f CSV; '#' comments and one optional non-numeric header line.
Profile load_table_csv(const std::string& path);

Profile dilate(const Profile& p, double gamma);
Profile negate(const Profile& p);

struct ProfileMoments {
  double I1 = 0.0;
  double I2 = 0.0;
  std::optional<double> D2;
  double abs_I1 = 0.0;  // integral of |f|
  double min_f = 0.0;
  double max_f = 0.0;
  double half_diameter = 0.0;
  double quad_error = 0.0;  // zero for closed forms
};

ProfileMoments moments(const Profile& p);

// Throws RegimeError("derivative unavailable") for profiles without f'.
double dirichlet_energy(const Profile& p);

// Largest eps with d + eps*min_f > 0 (infinity when min_f >= 0).
double max_admissible_epsilon(const Profile& p, double d);
void check_admissible(const Profile& p, double d, double epsilon);

}  // namespace softguide::profiles
