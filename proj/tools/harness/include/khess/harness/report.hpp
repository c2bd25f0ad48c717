#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "khess/torus.hpp"

namespace khess::harness {

using Json = nlohmann::ordered_json;

/// One pass/fail line. Acceptance checks carry their id ("AC3"); property
/// checks that no acceptance criterion covers carry an empty id.
struct Check {
  std::string id;
  std::string name;
  /// name of the result the check exercises
  std::string anchor;
  bool pass = false;
  Json metrics = Json::object();
  std::string detail;
};

/// CSV table; cells are already formatted.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct NamedField {
  std::string name;
  GridFunction field;
  std::string metadata_json;
};

struct Report {
  std::string experiment;
  Json inputs = Json::object();
  Json metrics = Json::object();
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<NamedField> fields;
  std::vector<std::string> warnings;
  /// set when a solver failure stopped the experiment early
  std::string failure;

  bool all_pass() const;
};

/// %.17g, "inf" / "-inf" / "nan" for non-finite values.
std::string fmt(double v);
std::string fmt(long long v);
std::string fmt(bool v);

Json to_json(const Report& report);
/// One line, e.g. "AC3 PASS penalized envelope rate: ...".
std::string summary_line(const Check& check);

/// Writes summary.json, one CSV per table and the fields in the binary
/// format; returns the paths written. IoError on failure.
std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace khess::harness
