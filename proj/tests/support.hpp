#pragma once

#include <string>

#include "inquire/records.hpp"
#include "inquire/replay.hpp"

namespace support {

inline std::string fixture(const std::string& name) {
  return std::string(INQUIRE_ASSET_DIR) + "/fixtures/" + name;
}

inline inquire::Context mug_walkthrough_context() {
  return inquire::load_context(fixture("mug_walkthrough.context.json"));
}

inline inquire::Transcript mug_walkthrough_transcript() {
  return inquire::parse_transcript(inquire::read_file(fixture("mug_walkthrough.transcript.txt")));
}

inline inquire::Context red_block_walkthrough_context() {
  return inquire::load_context(fixture("red_block_walkthrough.context.json"));
}

inline inquire::Transcript red_block_walkthrough_transcript() {
  return inquire::parse_transcript(inquire::read_file(fixture("red_block_walkthrough.transcript.txt")));
}

}  // namespace support
