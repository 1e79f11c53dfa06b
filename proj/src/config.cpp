#include "softguide/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace softguide::harness {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k{
      "well.alpha",     "well.d",         "profile.kind",      "profile.h",          "profile.w",
      "profile.gamma",  "profile.negate", "profile.table",     "sweep.epsilons",     "sweep.eps_min",
      "sweep.eps_max",  "sweep.eps_count", "sweep.modes",      "sweep.alphas",       "sweep.jobs",
      "sweep.memory_mb", "grid.h",        "grid.L",            "grid.H",             "grid.refine",
      "grid.levels",    "grid.tol",       "fd.truncation",     "fd.overlap",         "trial.lambda",
      "trial.cutoff_scale", "output.dir", "output.formats"};
  return k;
}

std::string where(const KeyValues& kv, const std::string& key) {
  const auto* e = kv.find(key);
  if (!e || e->line == 0) return "field '" + key + "'";
  return kv.origin() + ":" + std::to_string(e->line) + ": field '" + key + "'";
}

[[noreturn]] void fail(const KeyValues& kv, const std::string& key, const std::string& msg) {
  const auto* e = kv.find(key);
  throw ConfigError(where(kv, key) + ": " + msg, key, e ? e->line : 0);
}

double to_double(const KeyValues& kv, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || !std::isfinite(v)) fail(kv, key, "expected a finite number, got '" + t + "'");
  return v;
}

std::optional<double> get_double(const KeyValues& kv, const std::string& key) {
  const auto* e = kv.find(key);
  if (!e) return std::nullopt;
  return to_double(kv, key, e->value);
}

std::optional<bool> get_bool(const KeyValues& kv, const std::string& key) {
  const auto* e = kv.find(key);
  if (!e) return std::nullopt;
  std::string v = trim(e->value);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(kv, key, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::vector<double> get_list(const KeyValues& kv, const std::string& key) {
  const auto* e = kv.find(key);
  std::vector<double> out;
  if (!e) return out;
  for (const auto& w : split_list(e->value)) out.push_back(to_double(kv, key, w));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, std::string key, int line)
    : InvalidInput(msg), key_(std::move(key)), line_(line) {}

KeyValues KeyValues::parse(const std::string& text, const std::string& origin) {
  KeyValues kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(n) + ": expected 'key = value'", {}, n);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(n) + ": empty key", {}, n);
    if (!known_keys().count(key))
      throw ConfigError(origin + ":" + std::to_string(n) + ": unknown field '" + key + "'", key, n);
    if (kv.entries_.count(key))
      throw ConfigError(origin + ":" + std::to_string(n) + ": duplicate field '" + key + "'", key, n);
    kv.entries_[key] = {value, n};
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void KeyValues::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void KeyValues::set(const std::string& key, const std::string& value) {
  if (!known_keys().count(key)) throw ConfigError("--set: unknown field '" + key + "'", key);
  entries_[key] = {value, 0};
}

const KeyValues::Entry* KeyValues::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string KeyValues::base_dir() const {
  if (origin_.empty() || origin_.front() == '<') return ".";
  const auto p = std::filesystem::path(origin_).parent_path();
  return p.empty() ? "." : p.string();
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Predict: return "predict";
    case Mode::Fd: return "fd";
    case Mode::BsLeading: return "bs-leading";
    case Mode::BsFull: return "bs-full";
    case Mode::Critical: return "critical";
  }
  return "?";
}

Mode parse_mode(const std::string& s) {
  if (s == "predict") return Mode::Predict;
  if (s == "fd") return Mode::Fd;
  if (s == "bs-leading") return Mode::BsLeading;
  if (s == "bs-full") return Mode::BsFull;
  if (s == "critical") return Mode::Critical;
  throw ConfigError("unknown sweep mode '" + s + "'", "sweep.modes");
}

profiles::Profile RunConfig::make_profile() const {
  if (profile.kind == profiles::ProfileKind::Table) {
    auto p = profiles::load_table_csv(profile_table);
    if (profile.gamma != 1.0) p = p.dilated(profile.gamma);
    if (profile.negate) p = p.negated();
    return p;
  }
  return profiles::make_profile(profile);
}

double RunConfig::base_h() const { return grid_h.value_or(well.d / 20.0); }

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os << "well.alpha=" << fmt(well.alpha) << "\nwell.d=" << fmt(well.d) << "\nprofile.kind="
     << profiles::to_string(profile.kind) << "\nprofile.h=" << fmt(profile.h) << "\nprofile.w=" << fmt(profile.w)
     << "\nprofile.gamma=" << fmt(profile.gamma) << "\nprofile.negate=" << profile.negate << "\n";
  if (profile.kind == profiles::ProfileKind::Table) {
    std::ifstream in(profile_table);
    std::ostringstream body;
    body << in.rdbuf();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(body.str())));
    os << "profile.table=" << buf << "\n";
  }
  os << "sweep.modes=";
  for (auto m : modes) os << to_string(m) << ",";
  os << "\ngrid.h=" << fmt(base_h()) << "\ngrid.L=" << (grid_L ? fmt(*grid_L) : "auto")
     << "\ngrid.H=" << (grid_H ? fmt(*grid_H) : "auto") << "\ngrid.refine=" << grid_refine
     << "\ngrid.levels=" << grid_levels << "\ngrid.tol=" << fmt(grid_tol) << "\nfd.truncation=" << truncation
     << "\nfd.overlap=" << overlap << "\ntrial.lambda=" << (trial_lambda ? fmt(*trial_lambda) : "auto")
     << "\ntrial.cutoff_scale=" << (trial_cutoff_scale ? fmt(*trial_cutoff_scale) : "auto") << "\n";
  return os.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical())));
  return buf;
}

RunConfig load_config(const KeyValues& kv) {
  RunConfig c;
  if (!kv.has("well.alpha")) throw ConfigError("missing required field 'well.alpha'", "well.alpha");
  if (!kv.has("well.d")) throw ConfigError("missing required field 'well.d'", "well.d");
  c.well.alpha = *get_double(kv, "well.alpha");
  c.well.d = *get_double(kv, "well.d");
  if (!(c.well.alpha > 0.0)) fail(kv, "well.alpha", "must be positive");
  if (!(c.well.d > 0.0)) fail(kv, "well.d", "must be positive");

  if (const auto* e = kv.find("profile.kind")) {
    try {
      c.profile.kind = profiles::parse_kind(trim(e->value));
    } catch (const InvalidInput& ex) {
      fail(kv, "profile.kind", ex.what());
    }
  }
  if (auto v = get_double(kv, "profile.h")) c.profile.h = *v;
  if (auto v = get_double(kv, "profile.w")) c.profile.w = *v;
  if (auto v = get_double(kv, "profile.gamma")) c.profile.gamma = *v;
  if (auto v = get_bool(kv, "profile.negate")) c.profile.negate = *v;
  if (!(c.profile.gamma > 0.0)) fail(kv, "profile.gamma", "must be positive");
  if (c.profile.kind != profiles::ProfileKind::Table && c.profile.kind != profiles::ProfileKind::Zero &&
      !(c.profile.w > 0.0))
    fail(kv, "profile.w", "must be positive");
  if (c.profile.kind == profiles::ProfileKind::Table) {
    const auto* e = kv.find("profile.table");
    if (!e) throw ConfigError("profile.kind = table needs 'profile.table'", "profile.table");
    std::filesystem::path p(trim(e->value));
    if (p.is_relative()) p = std::filesystem::path(kv.base_dir()) / p;
    c.profile_table = p.string();
  }
  profiles::Profile prof;
  try {
    prof = c.make_profile();
  } catch (const InvalidInput& ex) {
    throw ConfigError(std::string("profile: ") + ex.what(), "profile.kind");
  }

  if (kv.has("sweep.epsilons") && (kv.has("sweep.eps_min") || kv.has("sweep.eps_max") || kv.has("sweep.eps_count")))
    fail(kv, "sweep.epsilons", "give either a list or a geometric range, not both");
  if (kv.has("sweep.epsilons")) {
    c.epsilons = get_list(kv, "sweep.epsilons");
    if (c.epsilons.empty()) fail(kv, "sweep.epsilons", "empty epsilon list");
  } else if (kv.has("sweep.eps_min") || kv.has("sweep.eps_max") || kv.has("sweep.eps_count")) {
    for (const char* k : {"sweep.eps_min", "sweep.eps_max", "sweep.eps_count"})
      if (!kv.has(k)) throw ConfigError(std::string("geometric epsilon range needs '") + k + "'", k);
    const double a = *get_double(kv, "sweep.eps_min"), b = *get_double(kv, "sweep.eps_max");
    const double nd = *get_double(kv, "sweep.eps_count");
    const int n = static_cast<int>(nd);
    if (n < 1 || n != nd) fail(kv, "sweep.eps_count", "must be a positive integer");
    if (!(a > 0.0) || !(b >= a)) fail(kv, "sweep.eps_min", "need 0 < eps_min <= eps_max");
    for (int k = 0; k < n; ++k) c.epsilons.push_back(n == 1 ? a : a * std::pow(b / a, double(k) / (n - 1)));
  }
  for (std::size_t k = 0; k < c.epsilons.size(); ++k) {
    if (!(c.epsilons[k] > 0.0)) fail(kv, "sweep.epsilons", "epsilons must be strictly positive");
    if (k > 0 && !(c.epsilons[k] > c.epsilons[k - 1])) fail(kv, "sweep.epsilons", "epsilons must be strictly ascending");
  }
  const double emax = profiles::max_admissible_epsilon(prof, c.well.d);
  for (double e : c.epsilons)
    if (!(e < emax)) fail(kv, "sweep.epsilons", "epsilon inadmissible for this profile (d + eps*min f <= 0)");

  if (const auto* e = kv.find("sweep.modes")) {
    c.modes.clear();
    for (const auto& w : split_list(e->value)) {
      try {
        c.modes.insert(parse_mode(w));
      } catch (const ConfigError& ex) {
        fail(kv, "sweep.modes", ex.what());
      }
    }
    if (c.modes.empty()) fail(kv, "sweep.modes", "no modes given");
  }
  c.alphas = get_list(kv, "sweep.alphas");
  for (std::size_t k = 0; k < c.alphas.size(); ++k) {
    if (!(c.alphas[k] > 0.0)) fail(kv, "sweep.alphas", "alphas must be positive");
    if (k > 0 && !(c.alphas[k] > c.alphas[k - 1])) fail(kv, "sweep.alphas", "alphas must be ascending");
  }
  if (auto v = get_double(kv, "sweep.jobs")) {
    if (*v < 1 || *v != std::floor(*v)) fail(kv, "sweep.jobs", "must be a positive integer");
    c.jobs = static_cast<int>(*v);
  }
  if (auto v = get_double(kv, "sweep.memory_mb")) {
    if (!(*v > 0.0)) fail(kv, "sweep.memory_mb", "must be positive");
    c.memory_mb = *v;
  }
  c.grid_h = get_double(kv, "grid.h");
  c.grid_L = get_double(kv, "grid.L");
  c.grid_H = get_double(kv, "grid.H");
  if (c.grid_h) {
    if (!(*c.grid_h > 0.0)) fail(kv, "grid.h", "must be positive");
    const double r = c.well.d / *c.grid_h;
    if (std::abs(r - std::round(r)) > 1e-10 * r) fail(kv, "grid.h", "must divide well.d");
  }
  if (c.grid_L && !(*c.grid_L > 0.0)) fail(kv, "grid.L", "must be positive");
  if (c.grid_H && !(*c.grid_H > 0.0)) fail(kv, "grid.H", "must be positive");
  if (auto v = get_bool(kv, "grid.refine")) c.grid_refine = *v;
  if (auto v = get_double(kv, "grid.levels")) {
    if (*v < 1 || *v != std::floor(*v)) fail(kv, "grid.levels", "must be a positive integer");
    c.grid_levels = static_cast<int>(*v);
  }
  if (auto v = get_double(kv, "grid.tol")) {
    if (!(*v > 0.0)) fail(kv, "grid.tol", "must be positive");
    c.grid_tol = *v;
  }
  if (auto v = get_bool(kv, "fd.truncation")) c.truncation = *v;
  if (auto v = get_bool(kv, "fd.overlap")) c.overlap = *v;
  c.trial_lambda = get_double(kv, "trial.lambda");
  c.trial_cutoff_scale = get_double(kv, "trial.cutoff_scale");
  if (c.trial_lambda && !(*c.trial_lambda > 0.0)) fail(kv, "trial.lambda", "must be positive");
  if (c.trial_cutoff_scale && !(*c.trial_cutoff_scale > 0.0)) fail(kv, "trial.cutoff_scale", "must be positive");
  if (const auto* e = kv.find("output.dir")) {
    c.out_dir = trim(e->value);
    if (c.out_dir.empty()) fail(kv, "output.dir", "must not be empty");
  }
  if (const auto* e = kv.find("output.formats")) {
    c.formats.clear();
    for (const auto& w : split_list(e->value)) {
      if (w != "csv" && w != "json" && w != "svg") fail(kv, "output.formats", "unknown format '" + w + "'");
      c.formats.insert(w);
    }
  }
  return c;
}

}  // namespace softguide::harness
