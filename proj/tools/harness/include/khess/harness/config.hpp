#pragma once

// Experiment configuration: a small INI dialect.
//
//   # comment            (also ';')
//   [section]
//   key = value          lists are comma separated
//
// Every key must be known for its section; see README.md for the table.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "khess/error.hpp"

namespace khess::harness {

enum class ExperimentKind { Solve, Envelope, Radial, Stability, Oscillation, Verify };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& text);

/// Thrown for malformed text; line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& what)
      : Error(Errc::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Thrown for well-formed text with a bad or unknown key.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& key, const std::string& what)
      : Error(Errc::ValidationError, key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct ProblemConfig {
  int n = 3;
  int k = 2;
  int N = 8;
  /// axis names such as "x1"; empty means every axis
  std::vector<std::string> axes;
  std::string mode = "constant";
  double s = 1.0;
  double tol = 1e-8;
  int max_iter = 200;
  int j_max = 10;
  double p = 2.0;
  std::string density = "const";
  double density_value = 1.0;
  double density_amplitude = 0.5;
  double singularity_power = 2.5;
  double singularity_cap = 1e4;
  std::string omega = "const";
  double omega_scale = 1.0;
  double omega_amplitude = 0.5;
};

struct StabilityConfig {
  std::vector<double> amplitudes{0.2, 0.1, 0.05, 0.025};
  std::string perturbation = "sine";
};

struct OscillationConfig {
  std::vector<double> caps{10.0, 100.0, 1000.0, 10000.0};
  double ratio_limit = 1.5;
};

struct EnvelopeConfig {
  double obstacle_amplitude = 0.1;
  std::vector<int> schedule{2, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
  int rate_j_max = 512;
  double agreement = 5e-3;
  double tol = 1e-9;
};

struct RadialConfig {
  /// negative means a = k
  double a = -1.0;
  std::vector<double> b_values{0.5, 1.0, 1.5, 1.75, 2.25, 2.5, 2.75, 3.0, 3.5, 4.0};
  double delta = 0.1;
  std::vector<double> exponents{1.0, 2.0};
  int points = 4096;
};

struct VerifyConfig {
  /// empty means AC1..AC10
  std::vector<std::string> criteria;
  int samples = 10000;
  int pairs = 20;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Solve;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  int threads = 1;
  ProblemConfig problem;
  StabilityConfig stability;
  OscillationConfig oscillation;
  EnvelopeConfig envelope;
  RadialConfig radial;
  VerifyConfig verify;
  /// set when p <= n / k, the exponent range without the oscillation bound
  bool exponent_warning = false;
  std::vector<std::string> warnings;
};

ExperimentConfig parse_config(const std::string& text);
/// IoError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ValidationError; also fills the warning flags.
void validate(ExperimentConfig& config);

}  // namespace khess::harness
