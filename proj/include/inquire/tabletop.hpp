#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/core.hpp"
#include "inquire/types.hpp"

namespace inquire::tabletop {

// Workspace geometry, in meters.
inline constexpr double kXMin = 0.25;
inline constexpr double kXMax = 0.75;
inline constexpr double kYMin = -0.5;
inline constexpr double kYMax = 0.5;
inline constexpr double kSnapRadius = 0.05;     // pick must land this close to a block
inline constexpr double kContainRadius = 0.06;  // block counts as "in" a bowl / "on" a base
inline constexpr double kSeparation = 0.08;     // min distance between sampled objects
inline constexpr double kJitter = 0.005;        // max placement drift per axis
inline constexpr double kBaseSpacing = 0.10;    // bases sit in a row along x
inline constexpr double kRankGap = 0.02;        // same-color blocks differ this much in y

inline constexpr int kMaxDistractors = 8;
inline constexpr int kMaxBases = 6;

inline constexpr std::string_view kNoFunctionCall = "No function call detected.";
inline constexpr std::string_view kBudgetSpent = "You have used up your questions.";

struct Params {
  int x = 0;  // red blocks (Task 1 and 3)
  int y = 0;  // bases (Task 2 and 3)
};

// Throws ParamOutOfRange unless 1 <= x <= 8 (Task 1/3) and 1 <= y <= 6 (Task 2/3).
void validate(TaskKind kind, Params params);

Context generate_tabletop(TaskKind kind, Params params, std::uint64_t seed);

std::string instruction_for(TaskKind kind);

TabletopState initial_state(const Context& ctx);

bool in_bounds(Pose p);
double distance(Pose a, Pose b);

std::string render_object(const TableObject& o);
// Bases first in index order, every other object in a shuffled order drawn
// from (seed, tick). Task 1 scenes have no bases, so the whole list shuffles.
std::string render_scene(const TabletopState& state, std::uint64_t seed);
std::string initial_observation(const TabletopState& state, const Context& ctx);

// Reads back the sentences produced by render_scene; trailing task text is ignored.
std::vector<TableObject> parse_scene(std::string_view text);

// "move_to(a, b, c, d)", whitespace-insensitive. Throws MalformedAction whose
// message is "No function call detected." for anything else, including
// coordinates outside the workspace.
MoveCmd parse_move(std::string_view text);

struct MoveResult {
  TabletopState state;
  std::string text;
};

// Re-poses the block nearest to `cmd.pick` (within the snap radius; ties go
// to the lower x, then lower y) at `cmd.place` plus a small seeded drift.
MoveResult apply_move(const TabletopState& state, const MoveCmd& cmd, const Context& ctx);

bool check_tabletop_success(const TabletopState& state, const Context& ctx);

// "The second red block from the left." Left means smaller y. Throws
// AmbiguousRank when two same-color blocks render to the same y.
std::string relative_position_phrase(const std::vector<TableObject>& objects,
                                     std::string_view color, std::size_t target);
std::size_t resolve_relative(const std::vector<TableObject>& objects, std::string_view color,
                             std::string_view phrase);

class TabletopEnv final : public Environment {
 public:
  EnvKind kind() const override { return EnvKind::tabletop; }
  WorldState reset(const Context& ctx) const override;
  std::string initial_observation(const WorldState& state, const Context& ctx) const override;
  PhysicalAction parse_physical(std::string_view text) const override;
  PhysicalOutcome apply(const WorldState& state, const PhysicalAction& action,
                        const Context& ctx) const override;
  bool finished(const WorldState& state, const Context& ctx) const override;
  // Task 2/3: each color question costs one unit of the y-1 budget. In Task 3
  // the question naming the red target is free, otherwise the budget could not
  // cover both sub-tasks.
  std::optional<std::string> admit_question(WorldState& state, std::string_view question,
                                            const Context& ctx) const override;
};

}  // namespace inquire::tabletop
