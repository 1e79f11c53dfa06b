#pragma once

#include <string>
#include <vector>

namespace softguide::harness {

// One row of results.csv. Missing numbers are NaN, a missing count is -1.
struct SweepRecord {
  std::string config_hash;
  double epsilon = 0.0;
  double h = 0.0;        // base step
  double h_final = 0.0;  // finest step used by fd
  double L = 0.0;
  std::string status = "ok";  // ok | failed
  std::string message;

  double mu1 = 0.0;
  double lambda1_pred = 0.0;
  double delta_hat = 0.0;
  double delta_bs_leading = 0.0;
  double delta_bs_full = 0.0;
  double lambda1_bs_full = 0.0;
  double mu1_fd = 0.0;
  double lambda1_fd = 0.0;
  double truncation = 0.0;
  long count_below = -1;
  double overlap = 0.0;
  double u_norm = 0.0;
  double trial_J = 0.0;
  double trial_q = 0.0;

  double t_predict = 0.0;
  double t_fd = 0.0;
  double t_bs = 0.0;
  double t_total = 0.0;

  SweepRecord();
  bool ok() const { return status == "ok"; }
  bool has_fd() const;
};

inline constexpr int kSchemaVersion = 1;

std::vector<std::string> csv_columns();

std::string to_csv(const std::vector<SweepRecord>& rows);
std::vector<SweepRecord> from_csv(const std::string& text);
std::string to_json(const std::vector<SweepRecord>& rows);
std::vector<SweepRecord> from_json(const std::string& text);

void write_records(const std::string& dir, const std::vector<SweepRecord>& rows, bool csv, bool json);
std::vector<SweepRecord> read_records_csv(const std::string& path);  // empty when missing

// Same numbers bit for bit, NaN matching NaN. Timings are ignored when requested.
bool same_payload(const SweepRecord& a, const SweepRecord& b, bool include_timings = true);

}  // namespace softguide::harness
