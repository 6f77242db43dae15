#include "branchsim/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>

#include "branchsim/errors.hpp"

namespace branchsim {

nlohmann::ordered_json report_envelope(const std::string& subcommand,
                                       const nlohmann::ordered_json& config,
                                       const nlohmann::ordered_json& body) {
  nlohmann::ordered_json out;
  out["artifact"] = kArtifactName;
  out["version"] = kArtifactVersion;
  out["subcommand"] = subcommand;
  out["config"] = config;
  out["report"] = body;
  return out;
}

std::string format_double(double value) {
  // 17 significant digits round-trip any double; trim nothing so the cell
  // format is position-independent.
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string csv_table(const std::string& subcommand, const nlohmann::ordered_json& config,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  out += "# ";
  out += kArtifactName;
  out += " ";
  out += kArtifactVersion;
  out += " ";
  out += subcommand;
  out += "\n# config ";
  out += config.dump();
  out += "\n";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ",";
    out += header[i];
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += row[i];
    }
    out += "\n";
  }
  return out;
}

void write_text(const std::optional<std::string>& path, const std::string& text) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) {
    fail(ErrorCode::BadConfiguration, "cannot open output file " + *path);
  }
  file << text;
  if (!file.good()) {
    fail(ErrorCode::BadConfiguration, "write to " + *path + " failed");
  }
}

}  // namespace branchsim
