#include "boomforce/serialize.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "boomforce/errors.hpp"

namespace boomforce {
namespace {

void put(std::ostream& out, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  out << buf;
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

Phase phase_from_token(std::string_view token) {
  if (token == "approach") return Phase::kApproach;
  if (token == "stabilize") return Phase::kStabilize;
  if (token == "sweep") return Phase::kSweep;
  throw Error(ErrorCode::kInvalidArgument, "unknown phase token '" + std::string(token) + "'");
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const TraceSample& s : trace) {
    put(out, s.t);
    out << ',' << to_token(s.phase);
    for (double v : {s.theta1, s.d2, s.x, s.y, s.f_n, s.f_t, s.v_n_cmd, s.v_t_cmd, s.k_eq,
                     s.k_f, s.b}) {
      out << ',';
      put(out, v);
    }
    out << '\n';
  }
}

Trace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw Error(ErrorCode::kIo, "trace csv: missing or unexpected header");
  }
  Trace trace;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 13) {
      throw Error(ErrorCode::kIo, "trace csv: row " + std::to_string(row) + " has " +
                                      std::to_string(cells.size()) + " fields");
    }
    auto num = [&](std::size_t i) { return std::strtod(cells[i].c_str(), nullptr); };
    trace.push_back({num(0), phase_from_token(cells[1]), num(2), num(3), num(4), num(5),
                     num(6), num(7), num(8), num(9), num(10), num(11), num(12)});
  }
  return trace;
}

nlohmann::json summary_to_json(const RunSummary& s) {
  nlohmann::json j;
  j["rms_force_error_after_contact"] = optional_json(s.rms_force_error_after_contact);
  j["max_overshoot"] = s.max_overshoot;
  j["settle_time"] = optional_json(s.settle_time);
  j["sweep_force_rms"] = optional_json(s.sweep_force_rms);
  j["d2_range"] = {s.d2_range.first, s.d2_range.second};
  j["phase_boundaries"] = {optional_json(s.t_contact), optional_json(s.t_sweep)};
  j["diverged"] = s.diverged;
  j["diverged_reason"] = s.diverged_reason;
  j["insufficient_contact_window"] = s.insufficient_contact_window;
  j["final_force_error"] = s.final_force_error;
  j["f_des"] = s.f_des;
  j["seed"] = s.seed;
  j["samples"] = s.samples;
  return j;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << contents;
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace boomforce
