#include "kinetic/report.hpp"

#include "kinetic/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace kinetic {

using nlohmann::json;

CheckRecord make_check(std::string name, double value, const std::string& comparison, double bound,
                       std::string detail) {
  CheckRecord c{std::move(name), value, bound, comparison, false, std::move(detail)};
  if (comparison == "<=") {
    c.pass = value <= bound;
  } else if (comparison == "<") {
    c.pass = value < bound;
  } else if (comparison == ">=") {
    c.pass = value >= bound;
  } else if (comparison == ">") {
    c.pass = value > bound;
  } else {
    throw Error("unknown comparison " + comparison);
  }
  return c;
}

CheckRecord failed_check(std::string name, double value, std::string detail) {
  return CheckRecord{std::move(name), value, std::numeric_limits<double>::quiet_NaN(), "", false,
                     std::move(detail)};
}

void Series::add(std::vector<double> row) {
  if (row.size() != columns.size()) throw Error("series " + name + ": row width mismatch");
  rows.push_back(std::move(row));
}

bool Report::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const CheckRecord* Report::first_failure() const {
  for (const auto& c : checks)
    if (!c.pass) return &c;
  return nullptr;
}

const CheckRecord* Report::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

}  // namespace

json Report::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["experiment"] = experiment;
  j["config"] = config;
  j["environment"] = {{"seed", seed}, {"version", version}};
  j["all_pass"] = all_pass();
  j["checks"] = json::array();
  for (const auto& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"value", number(c.value)},
                           {"bound", number(c.bound)},
                           {"comparison", c.comparison},
                           {"pass", c.pass},
                           {"detail", c.detail}});
  }
  j["series"] = json::array();
  for (const auto& s : series)
    j["series"].push_back({{"name", s.name}, {"file", s.name + ".csv"}, {"columns", s.columns},
                           {"rows", s.rows.size()}});
  j["fits"] = json::array();
  for (const auto& f : fits) {
    j["fits"].push_back({{"name", f.name},
                         {"C_hat", number(f.fit.C_hat)},
                         {"lambda_hat", number(f.fit.lambda_hat)},
                         {"residual", number(f.fit.residual)},
                         {"n_points", f.fit.n_points},
                         {"truncated", f.fit.truncated},
                         {"nu0", number(f.nu0)}});
  }
  j["notices"] = notices;
  return j;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string describe(const CheckRecord& c) {
  std::ostringstream os;
  os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << format_double(c.value);
  if (!c.comparison.empty()) os << " " << c.comparison << " " << format_double(c.bound);
  if (!c.detail.empty()) os << " (" << c.detail << ")";
  return os.str();
}

void write_report(const Report& report, const Timing& timing, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());

  {
    std::ofstream out(fs::path(dir) / "report.json");
    if (!out) throw Error("cannot write report.json in " + dir);
    out << report.to_json().dump(2) << "\n";
  }
  for (const auto& s : report.series) {
    std::ofstream out(fs::path(dir) / (s.name + ".csv"));
    if (!out) throw Error("cannot write " + s.name + ".csv");
    out << "# schema_version: " << report.schema_version << "\n";
    for (std::size_t i = 0; i < s.columns.size(); ++i) out << (i ? "," : "") << s.columns[i];
    out << "\n";
    for (const auto& row : s.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
      out << "\n";
    }
  }
  {
    std::ofstream out(fs::path(dir) / "timing.json");
    json t = {{"schema_version", report.schema_version},
              {"wall_clock_seconds", timing.wall_clock_seconds},
              {"threads", timing.threads},
              {"started_at", timing.started_at}};
    out << t.dump(2) << "\n";
  }
}

}  // namespace kinetic
