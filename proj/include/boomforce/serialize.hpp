#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "boomforce/harness.hpp"
#include "boomforce/plant.hpp"

namespace boomforce {

inline constexpr const char* kTraceHeader =
    "t,phase,theta1,d2,x,y,f_n,f_t,v_n_cmd,v_t_cmd,k_eq,k_f,b";

/// One row per sample, floats with 9 significant digits.
void write_trace_csv(std::ostream& out, const Trace& trace);
Trace read_trace_csv(std::istream& in);

nlohmann::json summary_to_json(const RunSummary& summary);

/// Phase from its CSV token; raises kInvalidArgument on an unknown token.
Phase phase_from_token(std::string_view token);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace boomforce
