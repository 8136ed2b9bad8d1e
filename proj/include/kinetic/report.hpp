#pragma once

#include "kinetic/solver.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kinetic {

/// One pass/fail record. `pass` is `value comparison bound`.
struct CheckRecord {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  std::string comparison;  // "<=", "<", ">=", ">"
  bool pass = false;
  std::string detail;
};

CheckRecord make_check(std::string name, double value, const std::string& comparison, double bound,
                       std::string detail = {});
/// A failed record for a run that stopped early.
CheckRecord failed_check(std::string name, double value, std::string detail);

/// Plot-ready table; written as <name>.csv.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

struct FitRecord {
  std::string name;
  DecayFit fit;
  double nu0 = 0.0;
};

struct Report {
  int schema_version = 1;
  std::string experiment;
  std::string version;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::vector<CheckRecord> checks;
  std::vector<Series> series;
  std::vector<FitRecord> fits;
  std::vector<std::string> notices;

  bool all_pass() const;
  const CheckRecord* first_failure() const;
  const CheckRecord* find(const std::string& name) const;
  nlohmann::json to_json() const;
};

struct Timing {
  double wall_clock_seconds = 0.0;
  int threads = 1;
  std::string started_at;
};

/// 17 significant digits; nan and inf spelled out.
std::string format_double(double x);

/// Writes report.json, one CSV per series and timing.json into `dir`.
void write_report(const Report& report, const Timing& timing, const std::string& dir);

/// Human-readable one-line summary of a record.
std::string describe(const CheckRecord& c);

}  // namespace kinetic
