#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/core.hpp"
#include "inquire/types.hpp"

namespace inquire {

// What a blind household agent can reconstruct from its own transcript:
// where it is, what it holds, what it has seen, and what it has been told.
struct HouseholdBelief {
  std::vector<std::string> receptacles;  // from the initial observation, display order
  TaskSpec task;
  int task_number = 0;  // 0 for the first task, +1 per "Your next task is to:"
  std::size_t task_start = 0;  // index of the first step of the current task

  std::string at = "start";
  std::optional<std::string> holding;
  std::set<std::string> open;    // openable receptacles known to be open
  std::set<std::string> closed;  // receptacles last seen closed
  std::map<std::string, std::vector<std::string>> contents;  // last seen contents
  std::map<std::string, std::size_t> seen_at;                // step of that sighting
  std::map<std::string, ObjectStatus> status;

  struct Told {
    std::string receptacle;
    std::size_t step;
  };
  std::map<std::string, Told> told;     // answers to where-questions
  std::vector<std::string> told_order;  // instances in the order they were named

  std::map<std::string, int> where_asked;  // class -> where-questions so far
  std::map<std::string, int> empty_answers;  // class -> answers naming nothing
  std::optional<std::vector<std::string>> preferred;  // from "I mean ..." answers
  bool preference_asked = false;

  std::optional<AugmentedAction> last_action;  // latest non-think action
  std::string last_observation;               // and what it produced

  // Believed receptacle of `instance`, or nullopt when unknown or disproved.
  std::optional<std::string> location_of(const std::string& instance) const;
  // Instances of `cls` with a believed location, told order first, then sightings.
  std::vector<std::string> known_instances(const std::string& cls) const;
  bool visited(const std::string& receptacle) const { return seen_at.count(receptacle) > 0; }
};

HouseholdBelief replay_household(std::string_view initial_observation,
                                 std::span<const StepRecord> steps);

// Splits "a X, a Y, and a Z" back into names; "nothing" gives an empty list.
std::vector<std::string> parse_article_list(std::string_view list);

// Instance names ("mug 1") mentioned anywhere in `text`, in order.
std::vector<std::string> instances_in(std::string_view text);

}  // namespace inquire
