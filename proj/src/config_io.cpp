#include "rtmpc/config_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rtmpc/trace_io.hpp"

namespace rtmpc {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number '" + v + "' for " + key);
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer '" + v + "' for " + key);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean '" + v + "' for " + key);
}

VectorX<double> to_vector(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  VectorX<double> out(static_cast<Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) out(static_cast<Index>(i)) = to_double(key, parts[i]);
  return out;
}

std::string vector_text(const VectorX<double>& v) {
  if (v.size() == 0) return "zero";
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_full(v(i));
  }
  return out;
}

ReferenceSignal<double> to_reference(const std::string& key, const std::string& v) {
  std::vector<ReferenceSignal<double>::Segment> segs;
  for (const auto& item : split(v, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("config: bad reference segment '" + item + "' for " + key);
    }
    segs.push_back({to_long(key, trim(item.substr(0, colon))),
                    to_vector(key, trim(item.substr(colon + 1)))});
  }
  return ReferenceSignal<double>(std::move(segs));
}

std::string reference_text(const ReferenceSignal<double>& ref) {
  std::string out;
  for (const auto& seg : ref.segments()) {
    if (!out.empty()) out += ';';
    out += std::to_string(seg.start) + ':' + vector_text(seg.value);
  }
  return out;
}

DisturbanceSequence<double> to_disturbance(const std::string& key, const std::string& v) {
  if (v == "none") return DisturbanceSequence<double>(3);
  DisturbanceSequence<double> w(3);
  for (const auto& item : split(v, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("config: bad disturbance entry '" + item + "' for " + key);
    }
    w.set(to_long(key, trim(item.substr(0, colon))), to_vector(key, trim(item.substr(colon + 1))));
  }
  return w;
}

std::string disturbance_text(const DisturbanceSequence<double>& w) {
  std::string out;
  for (Index k = 0; k < w.length(); ++k) {
    const VectorX<double> sample = w.at(k);
    if (sample.isZero(0.0)) continue;
    if (!out.empty()) out += ';';
    out += std::to_string(k) + ':' + vector_text(sample);
  }
  return out.empty() ? "none" : out;
}

void assign(ScenarioConfig<double>& c, const std::string& key, const std::string& value) {
  if (key == "plant.tau_c") c.tau_c = to_double(key, value);
  else if (key == "plant.disturbance") c.disturbance = to_disturbance(key, value);
  else if (key == "cost.horizon") c.horizon = to_long(key, value);
  else if (key == "cost.output_weight") c.output_weight = to_double(key, value);
  else if (key == "cost.input_weight") c.input_weight = to_double(key, value);
  else if (key == "cost.floor") c.cost_floor = to_double(key, value);
  else if (key == "reference.schedule") c.reference = to_reference(key, value);
  else if (key == "constraints.input_bound") c.input_bound = to_double(key, value);
  else if (key == "solver.momentum")
    c.momentum_override = (value == "auto") ? std::nullopt
                                            : std::optional<double>(to_double(key, value));
  else if (key == "solver.lipschitz")
    c.lipschitz_override = (value == "auto") ? std::nullopt
                                             : std::optional<double>(to_double(key, value));
  else if (key == "solver.restart_threshold")
    c.restart_threshold = (value == "none") ? kNoRestart : static_cast<int>(to_long(key, value));
  else if (key == "monitor.q_init") c.q_init = static_cast<int>(to_long(key, value));
  else if (key == "monitor.delta") c.delta = static_cast<int>(to_long(key, value));
  else if (key == "monitor.q_max") c.q_max = static_cast<int>(to_long(key, value));
  else if (key == "monitor.guard") c.guard = to_double(key, value);
  else if (key == "run.duration") c.duration = to_long(key, value);
  else if (key == "run.x0") c.x0 = (value == "zero") ? VectorX<double>() : to_vector(key, value);
  else if (key == "run.p0") c.p0 = (value == "zero") ? VectorX<double>() : to_vector(key, value);
  else if (key == "run.warm_start") c.warm_start = to_bool(key, value);
  else if (key == "run.adaptive") c.adaptive = to_bool(key, value);
  else if (key == "run.q_constant") c.q_constant = static_cast<int>(to_long(key, value));
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

}  // namespace

std::string serialize_scenario(const ScenarioConfig<double>& c) {
  std::ostringstream out;
  out << "[plant]\n";
  out << "tau_c = " << format_full(c.tau_c) << '\n';
  out << "disturbance = " << disturbance_text(c.disturbance) << '\n';
  out << "\n[cost]\n";
  out << "horizon = " << c.horizon << '\n';
  out << "output_weight = " << format_full(c.output_weight) << '\n';
  out << "input_weight = " << format_full(c.input_weight) << '\n';
  out << "floor = " << format_full(c.cost_floor) << '\n';
  out << "\n[reference]\n";
  out << "schedule = " << reference_text(c.reference) << '\n';
  out << "\n[constraints]\n";
  out << "input_bound = " << format_full(c.input_bound) << '\n';
  out << "\n[solver]\n";
  out << "momentum = " << (c.momentum_override ? format_full(*c.momentum_override) : "auto") << '\n';
  out << "lipschitz = " << (c.lipschitz_override ? format_full(*c.lipschitz_override) : "auto")
      << '\n';
  out << "restart_threshold = "
      << (c.restart_threshold == kNoRestart ? "none" : std::to_string(c.restart_threshold)) << '\n';
  out << "\n[monitor]\n";
  out << "q_init = " << c.q_init << '\n';
  out << "delta = " << c.delta << '\n';
  out << "q_max = " << c.q_max << '\n';
  out << "guard = " << format_full(c.guard) << '\n';
  out << "\n[run]\n";
  out << "duration = " << c.duration << '\n';
  out << "x0 = " << vector_text(c.x0) << '\n';
  out << "p0 = " << vector_text(c.p0) << '\n';
  out << "warm_start = " << (c.warm_start ? "true" : "false") << '\n';
  out << "adaptive = " << (c.adaptive ? "true" : "false") << '\n';
  out << "q_constant = " << c.q_constant << '\n';
  return out.str();
}

ScenarioConfig<double> parse_scenario(const std::string& text) {
  ScenarioConfig<double> config;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not a key = value assignment");
    }
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section == "resolved") continue;  // meta echo extras are informational
    assign(config, section.empty() ? key : section + '.' + key, value);
  }
  return config;
}

ScenarioConfig<double> load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

void apply_override(ScenarioConfig<double>& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must look like section.key=value: " + assignment);
  }
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

}  // namespace rtmpc
