#include "khess/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "khess/error.hpp"
#include "khess/field_io.hpp"

namespace khess::harness {

bool Report::all_pass() const {
  if (!failure.empty()) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(long long v) { return std::to_string(v); }

std::string fmt(bool v) { return v ? "1" : "0"; }

Json to_json(const Report& report) {
  Json j;
  j["experiment"] = report.experiment;
  j["inputs"] = report.inputs;
  j["metrics"] = report.metrics;
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json cj;
    cj["id"] = c.id.empty() ? Json(nullptr) : Json(c.id);
    cj["name"] = c.name;
    cj["anchor"] = c.anchor;
    cj["pass"] = c.pass;
    cj["metrics"] = c.metrics;
    if (!c.detail.empty()) cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  j["warnings"] = report.warnings;
  if (!report.failure.empty()) j["failure"] = report.failure;
  j["pass"] = report.all_pass();
  return j;
}

std::string summary_line(const Check& check) {
  std::string line = (check.id.empty() ? std::string("--") : check.id) + (check.pass ? " PASS " : " FAIL ") +
                     check.name;
  if (!check.detail.empty()) line += ": " + check.detail;
  return line;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

}  // namespace

std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  const auto summary = dir / "summary.json";
  write_text(summary, to_json(report).dump(2) + "\n");
  written.push_back(summary);

  for (const auto& t : report.tables) {
    std::string text;
    for (std::size_t c = 0; c < t.columns.size(); ++c) text += (c ? "," : "") + t.columns[c];
    text += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + row[c];
      text += "\n";
    }
    const auto path = dir / (t.name + ".csv");
    write_text(path, text);
    written.push_back(path);
  }
  for (const auto& f : report.fields) {
    const auto path = dir / (f.name + ".khtf");
    write_field(path, f.field, f.metadata_json);
    written.push_back(path);
    written.push_back(std::filesystem::path(path.string() + ".json"));
  }
  return written;
}

}  // namespace khess::harness
