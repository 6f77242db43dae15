#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace branchsim {

inline constexpr const char* kArtifactName = "branchsim";
inline constexpr const char* kArtifactVersion = "0.1.0";

// Standard JSON envelope: artifact id, version, the resolved configuration
// (including the seed; never the worker count, which must not change any
// output byte), and the subcommand's report body. Key order is insertion
// order, so identical inputs serialize identically.
nlohmann::ordered_json report_envelope(const std::string& subcommand,
                                       const nlohmann::ordered_json& config,
                                       const nlohmann::ordered_json& body);

// Shortest-round-trip double formatting used in CSV cells.
std::string format_double(double value);

// CSV series with a '#' preamble carrying the same envelope information as
// the JSON reports. Cells must not contain commas or newlines.
std::string csv_table(const std::string& subcommand, const nlohmann::ordered_json& config,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

// Writes to the path, or to stdout when no path is given.
void write_text(const std::optional<std::string>& path, const std::string& text);

}  // namespace branchsim
