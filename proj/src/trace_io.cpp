#include "rtmpc/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rtmpc/config_io.hpp"

namespace rtmpc {

const char* const kSignalsSuffix = "_signals.csv";
const char* const kIntervalsSuffix = "_intervals.csv";
const char* const kMetaSuffix = "_meta.txt";

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Index Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<Index>(i);
  }
  return -1;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

void write_signals(const Trace<double>& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const Index n = trace.states.rows();
  const Index nu = trace.controls.rows();
  out << "t";
  for (Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  for (Index i = 0; i < nu; ++i) out << (nu == 1 ? ",u" : ",u" + std::to_string(i + 1));
  out << ",q\n";
  const Index duration = trace.duration();
  for (Index t = 0; t < trace.states.cols(); ++t) {
    out << t;
    for (Index i = 0; i < n; ++i) out << ',' << format_full(trace.states(i, t));
    for (Index i = 0; i < nu; ++i) {
      out << ',' << format_full(t < duration ? trace.controls(i, t) : 0.0);
    }
    out << ',' << (t < duration ? trace.budget[static_cast<std::size_t>(t)] : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_intervals(const Trace<double>& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "k,t,q,restarts,J,J_plus,J_hat_next,J_next,E,D,K,alpha_D,dE_dq,dK_dq,Gamma,branch,q_next\n";
  Index k = 0;
  for (const auto& rec : trace.intervals) {
    const auto& m = rec.monitor;
    out << k++ << ',' << rec.t_start << ',' << rec.q << ',' << rec.restarts << ','
        << format_full(m.J_k) << ',' << format_full(m.J_k_plus) << ','
        << format_full(m.J_hat_next) << ',' << format_full(m.J_next) << ','
        << format_full(m.E_k) << ',' << format_full(m.D_k) << ',' << format_full(m.K_k) << ','
        << format_full(m.alpha_D) << ',' << format_full(m.dE_dq) << ',' << format_full(m.dK_dq)
        << ',' << format_full(m.gamma) << ',' << static_cast<int>(m.branch) << ',' << rec.q_next
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_meta(const Trace<double>& trace, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << serialize_scenario(trace.config);
  out << "\n[resolved]\n";
  out << "version = " << kVersion << '\n';
  out << "lambda_min = " << format_full(trace.lambda_min) << '\n';
  out << "lambda_max = " << format_full(trace.lambda_max) << '\n';
  out << "lipschitz = " << format_full(trace.lipschitz) << '\n';
  out << "momentum = " << format_full(trace.momentum) << '\n';
  out << "intervals = " << trace.intervals.size() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_trace(const Trace<double>& trace, const std::filesystem::path& directory,
                 const std::string& prefix) {
  std::filesystem::create_directories(directory);
  write_signals(trace, directory / (prefix + kSignalsSuffix));
  write_intervals(trace, directory / (prefix + kIntervalsSuffix));
  write_meta(trace, directory / (prefix + kMetaSuffix));
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) return table;
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("non-numeric cell '" + cell + "' in " + path.string());
      }
    }
    if (row.size() != table.header.size()) {
      throw std::runtime_error("ragged row in " + path.string());
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace rtmpc
