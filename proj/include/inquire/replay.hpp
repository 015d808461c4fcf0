#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "inquire/core.hpp"

namespace inquire {

// A transcript in the "Obs 1: / Act 1: / Obs 2: ..." layout.
struct Transcript {
  std::string initial_observation;
  std::vector<std::string> actions;
  std::vector<std::string> observations;  // observations[k] follows actions[k]
};

// Throws FormatError when the turns are missing, out of order or misnumbered.
Transcript parse_transcript(std::string_view text);

struct ReplayMismatch {
  std::size_t obs_number = 0;  // 1-based, as in the transcript
  std::string expected;
  std::string actual;
};

struct ReplayResult {
  EpisodeRecord record;
  std::vector<ReplayMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

// Replays the transcript's actions through the environment of `ctx`. Questions
// are answered with the transcript's own replies. Household observations must
// match byte for byte. Tabletop scenes are compared as multisets of objects
// with coordinates within `coord_tolerance`, since their sentence order is a
// rendering choice; any text outside the scene must match exactly.
ReplayResult replay_transcript(const Context& ctx, const Transcript& transcript,
                               double coord_tolerance = 1e-2, std::string episode_id = "replay",
                               std::string policy = "replay");

bool observations_match(EnvKind env, std::string_view expected, std::string_view actual,
                        double coord_tolerance);

}  // namespace inquire
