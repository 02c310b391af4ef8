#include "sarah/config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "sarah/errors.hpp"

namespace sarah {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(text.c_str(), &end);
  if (text.empty() || errno != 0 || *end != '\0' || !std::isfinite(x)) {
    throw InvalidArgument("bad number for " + what + ": '" + text + "'");
  }
  return x;
}

std::uint64_t to_u64(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || errno != 0 || *end != '\0' || text.front() == '-') {
    throw InvalidArgument("bad integer for " + what + ": '" + text + "'");
  }
  return x;
}

bool to_bool(const std::string& text, const std::string& what) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw InvalidArgument("bad boolean for " + what + ": '" + text + "'");
}

ObjectiveKind parse_objective(const std::string& text) {
  if (text == "logistic") return ObjectiveKind::LogisticL2;
  if (text == "least-squares") return ObjectiveKind::LeastSquaresL2;
  if (text == "quadratic") return ObjectiveKind::QuadraticSum;
  throw InvalidArgument("unknown objective '" + text + "'");
}

std::string objective_key(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::LogisticL2: return "logistic";
    case ObjectiveKind::LeastSquaresL2: return "least-squares";
    case ObjectiveKind::QuadraticSum: return "quadratic";
  }
  return "logistic";
}

ProblemSourceKind parse_source(const std::string& text) {
  if (text == "dataset") return ProblemSourceKind::Dataset;
  if (text == "synthetic-logistic") return ProblemSourceKind::SyntheticLogistic;
  if (text == "synthetic-quadratic") return ProblemSourceKind::SyntheticQuadratic;
  throw InvalidArgument("unknown problem source '" + text + "'");
}

bool valid_label(const std::string& label) {
  return !label.empty() &&
         std::all_of(label.begin(), label.end(), [](unsigned char c) {
           return std::isalnum(c) || c == '_' || c == '-' || c == '.' || c == '+';
         });
}

void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value) {
  auto& src = cfg.source;
  if (key == "name") cfg.name = value;
  else if (key == "problem") src.kind = parse_source(value);
  else if (key == "dataset") {
    src.kind = ProblemSourceKind::Dataset;
    src.path = value;
  } else if (key == "n") src.n = to_u64(value, key);
  else if (key == "d") src.d = to_u64(value, key);
  else if (key == "problem_seed") src.seed = to_u64(value, key);
  else if (key == "separability") src.separability = to_double(value, key);
  else if (key == "spread") src.spread = to_double(value, key);
  else if (key == "train_fraction") src.train_fraction = to_double(value, key);
  else if (key == "split_seed") src.split_seed = to_u64(value, key);
  else if (key == "normalize") src.normalize = to_bool(value, key);
  else if (key == "objective") cfg.objective = parse_objective(value);
  else if (key == "lambda") {
    if (value == "1/n") cfg.lambda.reset();
    else cfg.lambda = to_double(value, key);
  } else if (key == "records_per_pass") cfg.records_per_pass = to_double(value, key);
  else if (key == "reference_tol") cfg.reference_tol = to_double(value, key);
  else if (key == "reference_max_iter") cfg.reference_max_iter = to_u64(value, key);
  else if (key == "reference_cache") cfg.reference_cache = value;
  else if (key == "output_dir") cfg.output_dir = value;
  else if (key == "vt_span") cfg.vt_span = to_u64(value, key);
  else if (key.rfind("solver.", 0) == 0) {
    const std::string label = key.substr(7);
    for (const auto& s : cfg.solvers) {
      if (s.label == label) throw InvalidArgument("duplicate solver '" + label + "'");
    }
    cfg.solvers.push_back(parse_solver(label, value));
  } else {
    throw InvalidArgument("unknown key '" + key + "'");
  }
}

std::string format_step(const StepSpec& s) {
  return format_number(s.value) + (s.over_L ? "/L" : "");
}

}  // namespace

std::string_view to_string(ProblemSourceKind kind) {
  switch (kind) {
    case ProblemSourceKind::Dataset: return "dataset";
    case ProblemSourceKind::SyntheticLogistic: return "synthetic-logistic";
    case ProblemSourceKind::SyntheticQuadratic: return "synthetic-quadratic";
  }
  return "?";
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::size_t LoopSpec::resolve(std::size_t n) const {
  if (!times_n) return static_cast<std::size_t>(value);
  const double m = std::round(value * static_cast<double>(n));
  return m < 1.0 ? 1 : static_cast<std::size_t>(m);
}

SolverConfig SolverSpec::resolve(double L, std::size_t n) const {
  SolverConfig cfg = base;
  cfg.eta = eta.resolve(L);
  cfg.eta0 = eta0 ? eta0->resolve(L) : 0.0;
  cfg.m = m.resolve(n);
  return cfg;
}

StepSpec parse_step(const std::string& text) {
  StepSpec s;
  std::string t = trim(text);
  if (t.size() >= 2 && t.compare(t.size() - 2, 2, "/L") == 0) {
    s.over_L = true;
    t = t.substr(0, t.size() - 2);
  }
  s.value = to_double(t, "step size");
  if (!(s.value > 0.0)) throw InvalidArgument("step size must be > 0");
  return s;
}

LoopSpec parse_loop(const std::string& text) {
  LoopSpec s;
  std::string t = trim(text);
  if (!t.empty() && t.back() == 'n') {
    s.times_n = true;
    t.pop_back();
    s.value = t.empty() ? 1.0 : to_double(t, "inner loop size");
    if (!(s.value > 0.0)) throw InvalidArgument("inner loop size must be > 0");
  } else {
    s.value = static_cast<double>(to_u64(t, "inner loop size"));
    if (s.value < 1.0) throw InvalidArgument("inner loop size must be >= 1");
  }
  return s;
}

SolverSpec parse_solver(const std::string& label, const std::string& text) {
  if (!valid_label(label)) throw InvalidArgument("bad solver label '" + label + "'");
  SolverSpec spec;
  spec.label = label;
  bool has_algorithm = false;
  std::istringstream in(text);
  std::string item;
  while (in >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("expected key=value in solver line, got '" + item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "algorithm") {
      spec.base.algorithm = parse_algorithm(value);
      has_algorithm = true;
    } else if (key == "eta") spec.eta = parse_step(value);
    else if (key == "eta0") spec.eta0 = parse_step(value);
    else if (key == "m") spec.m = parse_loop(value);
    else if (key == "gamma") spec.base.gamma = to_double(value, key);
    else if (key == "snapshot") spec.base.snapshot_rule = parse_snapshot_rule(value);
    else if (key == "seed") spec.base.seed = to_u64(value, key);
    else if (key == "budget") spec.base.budget_passes = to_double(value, key);
    else if (key == "max_outer") spec.base.max_outer = to_u64(value, key);
    else if (key == "momentum") spec.base.fista_momentum = to_bool(value, key);
    else throw InvalidArgument("unknown solver key '" + key + "'");
  }
  if (!has_algorithm) throw InvalidArgument("solver '" + label + "' has no algorithm");
  return spec;
}

void ExperimentConfig::validate() const {
  if (!(records_per_pass >= 1.0)) throw InvalidArgument("records_per_pass must be >= 1");
  if (!(reference_tol > 0.0)) throw InvalidArgument("reference_tol must be > 0");
  if (reference_max_iter == 0) throw InvalidArgument("reference_max_iter must be >= 1");
  if (lambda && !(*lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  if (source.kind == ProblemSourceKind::Dataset && source.path.empty()) {
    throw InvalidArgument("dataset source needs a path");
  }
  if (source.kind != ProblemSourceKind::Dataset && (source.n < 1 || source.d < 1)) {
    throw InvalidArgument("synthetic problems need n, d >= 1");
  }
  if (source.train_fraction != 0.0 &&
      !(source.train_fraction > 0.0 && source.train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must be 0 or lie in (0, 1)");
  }
  if ((source.kind == ProblemSourceKind::SyntheticQuadratic) !=
      (objective == ObjectiveKind::QuadraticSum)) {
    throw InvalidArgument("objective 'quadratic' pairs with problem 'synthetic-quadratic'");
  }
  std::set<std::string> labels;
  for (const auto& s : solvers) {
    if (!labels.insert(s.label).second) {
      throw InvalidArgument("duplicate solver '" + s.label + "'");
    }
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      apply_key(cfg, key, value);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ParseError(line_no, e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  return parse_config(in);
}

std::string format_solver(const SolverSpec& spec) {
  const auto& b = spec.base;
  std::string out = "algorithm=" + std::string(to_string(b.algorithm));
  out += " eta=" + format_step(spec.eta);
  if (spec.eta0) out += " eta0=" + format_step(*spec.eta0);
  out += " m=" + (spec.m.times_n ? format_number(spec.m.value) + "n"
                                 : std::to_string(spec.m.resolve(0)));
  out += " gamma=" + format_number(b.gamma);
  out += " snapshot=" + std::string(to_string(b.snapshot_rule));
  out += " seed=" + std::to_string(b.seed);
  out += " budget=" + format_number(b.budget_passes);
  out += " max_outer=" + std::to_string(b.max_outer);
  out += " momentum=" + std::string(b.fista_momentum ? "1" : "0");
  return out;
}

std::string format_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& s = cfg.source;
  out << "name = " << cfg.name << '\n';
  out << "problem = " << to_string(s.kind) << '\n';
  if (s.kind == ProblemSourceKind::Dataset) out << "dataset = " << s.path << '\n';
  out << "n = " << s.n << '\n';
  out << "d = " << s.d << '\n';
  out << "problem_seed = " << s.seed << '\n';
  out << "separability = " << format_number(s.separability) << '\n';
  out << "spread = " << format_number(s.spread) << '\n';
  out << "train_fraction = " << format_number(s.train_fraction) << '\n';
  out << "split_seed = " << s.split_seed << '\n';
  out << "normalize = " << (s.normalize ? "true" : "false") << '\n';
  out << "objective = " << objective_key(cfg.objective) << '\n';
  out << "lambda = " << (cfg.lambda ? format_number(*cfg.lambda) : "1/n") << '\n';
  out << "records_per_pass = " << format_number(cfg.records_per_pass) << '\n';
  out << "reference_tol = " << format_number(cfg.reference_tol) << '\n';
  out << "reference_max_iter = " << cfg.reference_max_iter << '\n';
  if (!cfg.reference_cache.empty()) {
    out << "reference_cache = " << cfg.reference_cache << '\n';
  }
  out << "output_dir = " << cfg.output_dir << '\n';
  out << "vt_span = " << cfg.vt_span << '\n';
  for (const auto& solver : cfg.solvers) {
    out << "solver." << solver.label << " = " << format_solver(solver) << '\n';
  }
  return out.str();
}

}  // namespace sarah
