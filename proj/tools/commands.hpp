#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace cgs::cli {

using nlohmann::json;

struct Artifact {
  std::filesystem::path path;
  std::string content;
};

struct RunOutput {
  std::vector<Artifact> artifacts;
  /// Values chosen during the run (estimated parameters, selected alpha).
  json resolved = json::object();
};

/// Commands that run from a config and can be replayed from a manifest.
const std::vector<std::string>& command_names();

/// Runs `command` from a fully resolved config. Nothing touches the disk
/// except reading inputs; artifacts are returned in memory.
RunOutput run(const std::string& command, const json& config);

std::filesystem::path manifest_path(const std::filesystem::path& output);

json make_manifest(const std::string& command, const json& config, const RunOutput& out);

/// Writes every artifact atomically, then the manifest next to the first one.
void write_outputs(const std::string& command, const json& config, const RunOutput& out);

}  // namespace cgs::cli
