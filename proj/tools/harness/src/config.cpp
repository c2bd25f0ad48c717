#include "khess/harness/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace khess::harness {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  int column = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

std::map<std::string, Section> tokenize(const std::string& text) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#' || raw[first] == ';') continue;
    const int col = static_cast<int>(first) + 1;
    if (raw[first] == '[') {
      const auto close = raw.find(']', first);
      if (close == std::string::npos) throw ParseError(line, col, "unterminated section header");
      const std::string rest = trim(raw.substr(close + 1));
      if (!rest.empty() && rest[0] != '#' && rest[0] != ';') {
        throw ParseError(line, static_cast<int>(close) + 2, "text after section header");
      }
      current = trim(raw.substr(first + 1, close - first - 1));
      if (!valid_name(current)) throw ParseError(line, col + 1, "bad section name '" + current + "'");
      if (out.count(current)) throw ParseError(line, col, "duplicate section [" + current + "]");
      out[current];
      continue;
    }
    const auto eq = raw.find('=', first);
    if (eq == std::string::npos) throw ParseError(line, col, "expected 'key = value'");
    if (current.empty()) throw ParseError(line, col, "key outside of any [section]");
    const std::string key = trim(raw.substr(first, eq - first));
    if (!valid_name(key)) throw ParseError(line, col, "bad key name '" + key + "'");
    std::string value = raw.substr(eq + 1);
    // trailing comments need a space before the marker
    for (const char* mark : {" #", " ;", "\t#", "\t;"}) {
      const auto c = value.find(mark);
      if (c != std::string::npos) value.erase(c);
    }
    value = trim(value);
    const auto vcol = static_cast<int>(raw.find_first_not_of(" \t", eq + 1)) + 1;
    if (value.empty()) throw ParseError(line, vcol > 0 ? vcol : static_cast<int>(eq) + 2, "empty value for '" + key + "'");
    auto& sec = out[current];
    if (sec.count(key)) throw ParseError(line, col, "duplicate key '" + key + "'");
    sec[key] = Entry{value, line, vcol};
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& name, const Entry& e, const std::string& what) {
  throw ValidationError(name, what + " (line " + std::to_string(e.line) + ", got '" + e.value + "')");
}

double to_double(const std::string& name, const Entry& e, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(name, e, "expected a number");
  return v;
}

long long to_integer(const std::string& name, const Entry& e, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(name, e, "expected an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

/// Binds the keys of one section to setters; unknown keys are rejected.
class Binder {
 public:
  Binder(std::string section, const Section* entries) : section_(std::move(section)), entries_(entries) {}

  Binder& real(const std::string& key, double& dst) {
    return bind(key, [&dst, this, key](const Entry& e) { dst = to_double(name(key), e, e.value); });
  }
  Binder& integer(const std::string& key, int& dst) {
    return bind(key, [&dst, this, key](const Entry& e) {
      const auto v = to_integer(name(key), e, e.value);
      if (v < -2147483647LL || v > 2147483647LL) bad_value(name(key), e, "integer out of range");
      dst = static_cast<int>(v);
    });
  }
  Binder& text(const std::string& key, std::string& dst) {
    return bind(key, [&dst](const Entry& e) { dst = e.value; });
  }
  Binder& reals(const std::string& key, std::vector<double>& dst) {
    return bind(key, [&dst, this, key](const Entry& e) {
      dst.clear();
      for (const auto& item : split_list(e.value)) dst.push_back(to_double(name(key), e, item));
    });
  }
  Binder& integers(const std::string& key, std::vector<int>& dst) {
    return bind(key, [&dst, this, key](const Entry& e) {
      dst.clear();
      for (const auto& item : split_list(e.value)) dst.push_back(static_cast<int>(to_integer(name(key), e, item)));
    });
  }
  Binder& words(const std::string& key, std::vector<std::string>& dst) {
    return bind(key, [&dst](const Entry& e) { dst = split_list(e.value); });
  }
  Binder& custom(const std::string& key, std::function<void(const Entry&)> f) { return bind(key, std::move(f)); }

  void finish() const {
    if (!entries_) return;
    for (const auto& [key, e] : *entries_) {
      if (!known_.count(key)) {
        throw ValidationError(name(key), "unknown key (line " + std::to_string(e.line) + ")");
      }
    }
  }

  std::string name(const std::string& key) const { return section_ + "." + key; }

 private:
  Binder& bind(const std::string& key, const std::function<void(const Entry&)>& f) {
    known_.insert(key);
    if (entries_) {
      auto it = entries_->find(key);
      if (it != entries_->end()) f(it->second);
    }
    return *this;
  }

  std::string section_;
  const Section* entries_;
  std::set<std::string> known_;
};

const Section* find(const std::map<std::string, Section>& all, const std::string& name) {
  auto it = all.find(name);
  return it == all.end() ? nullptr : &it->second;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ValidationError(key, what);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Solve: return "solve";
    case ExperimentKind::Envelope: return "envelope";
    case ExperimentKind::Radial: return "radial";
    case ExperimentKind::Stability: return "stability";
    case ExperimentKind::Oscillation: return "oscillation";
    case ExperimentKind::Verify: return "verify";
  }
  return "?";
}

ExperimentKind parse_kind(const std::string& text) {
  for (auto k : {ExperimentKind::Solve, ExperimentKind::Envelope, ExperimentKind::Radial, ExperimentKind::Stability,
                 ExperimentKind::Oscillation, ExperimentKind::Verify}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("experiment.kind", "unknown experiment '" + text + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  const auto all = tokenize(text);
  static const std::set<std::string> sections{"experiment", "problem", "stability", "oscillation",
                                              "envelope",   "radial",  "verify"};
  for (const auto& [name, entries] : all) {
    if (!sections.count(name)) throw ValidationError(name, "unknown section");
  }

  ExperimentConfig c;
  bool have_kind = false;
  std::string out;
  Binder(std::string("experiment"), find(all, "experiment"))
      .custom("kind",
              [&](const Entry& e) {
                c.kind = parse_kind(e.value);
                have_kind = true;
              })
      .custom("seed",
              [&](const Entry& e) {
                const auto v = to_integer("experiment.seed", e, e.value);
                if (v < 0) bad_value("experiment.seed", e, "seed must be >= 0");
                c.seed = static_cast<std::uint64_t>(v);
              })
      .text("out", out)
      .integer("threads", c.threads)
      .finish();
  if (!have_kind) throw ValidationError("experiment.kind", "missing");
  if (!out.empty()) c.out = out;

  auto& p = c.problem;
  Binder("problem", find(all, "problem"))
      .integer("n", p.n)
      .integer("k", p.k)
      .integer("N", p.N)
      .words("axes", p.axes)
      .text("mode", p.mode)
      .real("s", p.s)
      .real("tol", p.tol)
      .integer("max_iter", p.max_iter)
      .integer("j_max", p.j_max)
      .custom("p",
              [&](const Entry& e) {
                p.p = (e.value == "inf" || e.value == "infinity") ? INFINITY : to_double("problem.p", e, e.value);
              })
      .text("density", p.density)
      .real("density_value", p.density_value)
      .real("density_amplitude", p.density_amplitude)
      .real("singularity_power", p.singularity_power)
      .real("singularity_cap", p.singularity_cap)
      .text("omega", p.omega)
      .real("omega_scale", p.omega_scale)
      .real("omega_amplitude", p.omega_amplitude)
      .finish();

  Binder("stability", find(all, "stability"))
      .reals("amplitudes", c.stability.amplitudes)
      .text("perturbation", c.stability.perturbation)
      .finish();
  Binder("oscillation", find(all, "oscillation"))
      .reals("caps", c.oscillation.caps)
      .real("ratio_limit", c.oscillation.ratio_limit)
      .finish();
  Binder("envelope", find(all, "envelope"))
      .real("obstacle_amplitude", c.envelope.obstacle_amplitude)
      .integers("schedule", c.envelope.schedule)
      .integer("rate_j_max", c.envelope.rate_j_max)
      .real("agreement", c.envelope.agreement)
      .real("tol", c.envelope.tol)
      .finish();
  Binder("radial", find(all, "radial"))
      .real("a", c.radial.a)
      .reals("b_values", c.radial.b_values)
      .real("delta", c.radial.delta)
      .reals("exponents", c.radial.exponents)
      .integer("points", c.radial.points)
      .finish();
  Binder("verify", find(all, "verify"))
      .words("criteria", c.verify.criteria)
      .integer("samples", c.verify.samples)
      .integer("pairs", c.verify.pairs)
      .finish();

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void validate(ExperimentConfig& c) {
  const auto& p = c.problem;
  require(c.threads >= 1 && c.threads <= 256, "experiment.threads", "must lie in [1, 256]");
  require(p.n >= 2 && p.n <= 4, "problem.n", "must lie in [2, 4]");
  require(p.k >= 1 && p.k <= p.n, "problem.k", "must lie in [1, n]");
  require(p.N >= 4 && p.N % 2 == 0, "problem.N", "must be even and >= 4");
  for (const auto& a : p.axes) {
    const bool ok = a.size() == 2 && (a[0] == 'x' || a[0] == 'y') && a[1] >= '1' && a[1] < '1' + p.n;
    require(ok, "problem.axes", "unknown axis '" + a + "'");
  }
  require(p.mode == "constant" || p.mode == "exponential", "problem.mode", "must be constant or exponential");
  require(p.s > 0.0, "problem.s", "must be > 0");
  require(p.tol > 0.0, "problem.tol", "must be > 0");
  require(p.max_iter >= 1, "problem.max_iter", "must be >= 1");
  require(p.j_max >= 0 && p.j_max <= 40, "problem.j_max", "must lie in [0, 40]");
  require(p.p >= 1.0, "problem.p", "must be >= 1");
  static const std::set<std::string> densities{"const", "sine", "slice-degenerate", "truncated-singularity"};
  require(densities.count(p.density) > 0, "problem.density", "unknown preset '" + p.density + "'");
  require(p.density != "const" || p.density_value > 0.0, "problem.density_value", "must be > 0");
  require(p.density != "sine" || std::abs(p.density_amplitude) < 1.0, "problem.density_amplitude",
          "must lie in (-1, 1)");
  require(p.singularity_power > 0.0, "problem.singularity_power", "must be > 0");
  require(p.singularity_cap > 0.0, "problem.singularity_cap", "must be > 0");
  static const std::set<std::string> omegas{"const", "sine", "slice-degenerate"};
  require(omegas.count(p.omega) > 0, "problem.omega", "unknown preset '" + p.omega + "'");
  require(p.omega_scale > 0.0, "problem.omega_scale", "must be > 0");
  require(p.omega != "sine" || std::abs(p.omega_amplitude) < 1.0, "problem.omega_amplitude", "must lie in (-1, 1)");

  require(!c.stability.amplitudes.empty(), "stability.amplitudes", "must not be empty");
  for (double t : c.stability.amplitudes) require(t >= 0.0 && t < 1.0, "stability.amplitudes", "must lie in [0, 1)");
  require(c.stability.perturbation == "sine" || c.stability.perturbation == "cosine", "stability.perturbation",
          "must be sine or cosine");
  require(!c.oscillation.caps.empty(), "oscillation.caps", "must not be empty");
  for (double m : c.oscillation.caps) require(m > 0.0, "oscillation.caps", "must be > 0");
  require(c.oscillation.ratio_limit >= 1.0, "oscillation.ratio_limit", "must be >= 1");
  require(!c.envelope.schedule.empty() && std::is_sorted(c.envelope.schedule.begin(), c.envelope.schedule.end()) &&
              c.envelope.schedule.front() >= 1,
          "envelope.schedule", "must be increasing positive integers");
  require(c.envelope.agreement > 0.0, "envelope.agreement", "must be > 0");
  require(c.envelope.tol > 0.0, "envelope.tol", "must be > 0");
  require(!c.radial.b_values.empty(), "radial.b_values", "must not be empty");
  require(c.radial.delta > 0.0, "radial.delta", "must be > 0");
  for (double q : c.radial.exponents) require(q >= 1.0, "radial.exponents", "must be >= 1");
  require(c.radial.points >= 5, "radial.points", "must be >= 5");
  for (const auto& id : c.verify.criteria) {
    bool ok = id.size() >= 3 && id.rfind("AC", 0) == 0;
    if (ok) {
      const auto num = id.substr(2);
      ok = std::all_of(num.begin(), num.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) &&
           std::stoi(num) >= 1 && std::stoi(num) <= 10;
    }
    require(ok, "verify.criteria", "unknown criterion '" + id + "'");
  }
  require(c.verify.samples >= 1, "verify.samples", "must be >= 1");
  require(c.verify.pairs >= 1, "verify.pairs", "must be >= 1");

  c.warnings.clear();
  c.exponent_warning = p.p <= static_cast<double>(p.n) / p.k;
  if (c.exponent_warning) {
    c.warnings.push_back("p = " + std::to_string(p.p) + " <= n/k: no uniform oscillation bound is expected");
  }
}

}  // namespace khess::harness
