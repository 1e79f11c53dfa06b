#include "softguide/records.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "softguide/errors.hpp"

namespace softguide::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct NumField {
  const char* name;
  double SweepRecord::*ptr;
};

const std::vector<NumField>& num_fields() {
  static const std::vector<NumField> f{
      {"epsilon", &SweepRecord::epsilon},
      {"h", &SweepRecord::h},
      {"h_final", &SweepRecord::h_final},
      {"L", &SweepRecord::L},
      {"mu1", &SweepRecord::mu1},
      {"lambda1_pred", &SweepRecord::lambda1_pred},
      {"delta_hat", &SweepRecord::delta_hat},
      {"delta_bs_leading", &SweepRecord::delta_bs_leading},
      {"delta_bs_full", &SweepRecord::delta_bs_full},
      {"lambda1_bs_full", &SweepRecord::lambda1_bs_full},
      {"mu1_fd", &SweepRecord::mu1_fd},
      {"lambda1_fd", &SweepRecord::lambda1_fd},
      {"truncation", &SweepRecord::truncation},
      {"overlap", &SweepRecord::overlap},
      {"u_norm", &SweepRecord::u_norm},
      {"trial_J", &SweepRecord::trial_J},
      {"trial_q", &SweepRecord::trial_q},
      {"t_predict", &SweepRecord::t_predict},
      {"t_fd", &SweepRecord::t_fd},
      {"t_bs", &SweepRecord::t_bs},
      {"t_total", &SweepRecord::t_total},
  };
  return f;
}

bool is_timing(const std::string& n) { return n.rfind("t_", 0) == 0; }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(const std::string& s) {
  if (s == "nan" || s.empty()) return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (*end != '\0') throw InvalidInput("results.csv: bad number '" + s + "'");
  return v;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

SweepRecord::SweepRecord() {
  for (const auto& f : num_fields()) this->*f.ptr = kNaN;
  t_predict = t_fd = t_bs = t_total = 0.0;
}

bool SweepRecord::has_fd() const { return ok() && std::isfinite(lambda1_fd) && std::isfinite(mu1_fd); }

std::vector<std::string> csv_columns() {
  std::vector<std::string> c{"config_hash", "status", "message", "count_below"};
  for (const auto& f : num_fields()) c.emplace_back(f.name);
  return c;
}

std::string to_csv(const std::vector<SweepRecord>& rows) {
  std::ostringstream os;
  os << "#schema=" << kSchemaVersion << "\n";
  const auto cols = csv_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) os << (k ? "," : "") << cols[k];
  os << "\n";
  for (const auto& r : rows) {
    os << r.config_hash << "," << r.status << "," << quote(r.message) << "," << r.count_below;
    for (const auto& f : num_fields()) os << "," << num(r.*f.ptr);
    os << "\n";
  }
  return os.str();
}

std::vector<SweepRecord> from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "#schema=" + std::to_string(kSchemaVersion))
    throw InvalidInput("results.csv: missing or unsupported schema line");
  if (!std::getline(in, line)) throw InvalidInput("results.csv: missing header");
  const auto header = split_csv_line(line);
  if (header != csv_columns()) throw InvalidInput("results.csv: header does not match schema 1");
  std::vector<SweepRecord> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw InvalidInput("results.csv: wrong number of cells");
    SweepRecord r;
    r.config_hash = cells[0];
    r.status = cells[1];
    r.message = cells[2];
    r.count_below = std::stol(cells[3]);
    for (std::size_t k = 0; k < num_fields().size(); ++k) r.*num_fields()[k].ptr = parse_num(cells[4 + k]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string to_json(const std::vector<SweepRecord>& rows) {
  nlohmann::json doc;
  doc["schema"] = kSchemaVersion;
  doc["records"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["config_hash"] = r.config_hash;
    j["status"] = r.status;
    j["message"] = r.message;
    j["count_below"] = r.count_below < 0 ? nlohmann::json(nullptr) : nlohmann::json(r.count_below);
    for (const auto& f : num_fields()) {
      const double v = r.*f.ptr;
      j[f.name] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    }
    doc["records"].push_back(std::move(j));
  }
  return doc.dump(1) + "\n";
}

std::vector<SweepRecord> from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("schema", 0) != kSchemaVersion) throw InvalidInput("results.json: unsupported schema");
  std::vector<SweepRecord> rows;
  for (const auto& j : doc.at("records")) {
    SweepRecord r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.message = j.at("message").get<std::string>();
    r.count_below = j.at("count_below").is_null() ? -1 : j.at("count_below").get<long>();
    for (const auto& f : num_fields()) {
      const auto& v = j.at(f.name);
      r.*f.ptr = v.is_null() ? kNaN : v.get<double>();
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_records(const std::string& dir, const std::vector<SweepRecord>& rows, bool csv, bool json) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& body) {
    const auto path = std::filesystem::path(dir) / name;
    const auto tmp = std::filesystem::path(dir) / (name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw NumericalError("cannot write " + tmp.string());
      out << body;
    }
    std::filesystem::rename(tmp, path);
  };
  if (csv) write("results.csv", to_csv(rows));
  if (json) write("results.json", to_json(rows));
}

std::vector<SweepRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

bool same_payload(const SweepRecord& a, const SweepRecord& b, bool include_timings) {
  if (a.config_hash != b.config_hash || a.status != b.status || a.message != b.message ||
      a.count_below != b.count_below)
    return false;
  for (const auto& f : num_fields()) {
    if (!include_timings && is_timing(f.name)) continue;
    const double x = a.*f.ptr, y = b.*f.ptr;
    if (std::isnan(x) && std::isnan(y)) continue;
    if (x != y) return false;
  }
  return true;
}

}  // namespace softguide::harness
