#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "softguide/errors.hpp"
#include "softguide/profiles.hpp"
#include "softguide/well1d.hpp"

namespace softguide::harness {

class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& msg, std::string key = {}, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_ = 0;
};

// Flat "key = value" text with dotted sections; '#' starts a comment.
class KeyValues {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for --set overrides
  };

  static KeyValues parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValues load(const std::string& path);
  void set(const std::string& assignment);  // "key=value"
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  const Entry* find(const std::string& key) const;
  const std::map<std::string, Entry>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }
  std::string base_dir() const;

 private:
  std::map<std::string, Entry> entries_;
  std::string origin_;
};

enum class Mode { Predict, Fd, BsLeading, BsFull, Critical };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct RunConfig {
  well1d::WellParams well{4.0, 1.0};
  profiles::ProfileSpec profile;
  std::string profile_table;  // resolved path when kind = table
  std::vector<double> epsilons;
  std::set<Mode> modes{Mode::Predict};
  std::vector<double> alphas;

  std::optional<double> grid_h;
  std::optional<double> grid_L;
  std::optional<double> grid_H;
  bool grid_refine = false;
  int grid_levels = 3;
  double grid_tol = 0.02;

  bool truncation = true;
  bool overlap = true;
  std::optional<double> trial_lambda;
  std::optional<double> trial_cutoff_scale;

  int jobs = 1;
  double memory_mb = 3072.0;

  std::string out_dir = "results";
  std::set<std::string> formats{"csv", "json", "svg"};

  profiles::Profile make_profile() const;
  double base_h() const;  // grid.h or the default d / 20
  // Canonical text of every setting that affects numeric results per epsilon.
  std::string canonical() const;
  std::string hash() const;  // 16 hex digits
};

RunConfig load_config(const KeyValues& kv);

std::uint64_t fnv1a(const std::string& s);

}  // namespace softguide::harness
