#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "inquire/core.hpp"
#include "inquire/types.hpp"

namespace inquire {

// Records file: JSON lines. The first line is a header
//   {"format":"inquire.records","version":1}
// then, per episode, one "episode" line, one "step" line per action and one
// "end" line. See docs/records_format.md.
inline constexpr const char* kRecordsFormat = "inquire.records";
inline constexpr int kRecordsVersion = 1;

nlohmann::json to_json(const Context& ctx);
Context context_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AugmentedAction& a);
AugmentedAction action_from_json(const nlohmann::json& j, EnvKind env);

void write_records(std::ostream& out, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> read_records(std::istream& in);

void save_records(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> load_records(const std::filesystem::path& path);

void save_context(const std::filesystem::path& path, const Context& ctx);
Context load_context(const std::filesystem::path& path);

// Writes `content` to `path` atomically enough for CLI use (temp + rename).
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace inquire
