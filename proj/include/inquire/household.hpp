#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/core.hpp"
#include "inquire/random.hpp"
#include "inquire/types.hpp"

namespace inquire::household {

// ---------------------------------------------------------------------------
// Layouts

struct ReceptacleType {
  std::string type;
  int count = 1;
  bool openable = false;
  bool closed = false;
};

struct ObjectClassSpec {
  std::string name;
  int min_count = 1;
  int max_count = 1;
  std::vector<TaskKind> kinds;     // task kinds this class may be the subject of
  std::vector<std::string> hosts;  // receptacle types it may start in
};

struct Layout {
  std::string name;
  std::vector<ReceptacleType> receptacles;
  std::vector<ObjectClassSpec> classes;
  std::vector<std::string> destinations;

  bool has_type(std::string_view type) const;
  int receptacle_count() const;
};

struct LayoutPool {
  std::string name;
  std::vector<Layout> layouts;
};

enum class PoolId { id_dist, ood_dist };
PoolId parse_pool_id(std::string_view s);  // "id-dist" | "ood-dist"
std::string_view to_string(PoolId p);

// Parses the plain-text layout format documented in assets/layouts/id_dist.txt.
// Throws FormatError naming the offending line.
LayoutPool parse_layout_pool(std::string_view text, std::string name = "custom");
LayoutPool load_layout_pool(const std::filesystem::path& path);
const LayoutPool& default_pool(PoolId id);

// Appliance receptacle type for a task kind ("" when the kind needs none).
std::string_view appliance_for(TaskKind kind);

// ---------------------------------------------------------------------------
// Names

std::string class_of(std::string_view instance);  // "mug 3" -> "mug"
int index_of(std::string_view instance);          // "mug 3" -> 3
// Display order: by type/class name ascending, then index descending.
bool display_before(std::string_view a, std::string_view b);

// ---------------------------------------------------------------------------
// Context generation

inline constexpr double kMultiTargetProbability = 0.25;

// Samples a layout from `pool`, object counts and placements, a satisfiable
// task that is not already solved, and (ambiguous variant) the target subset.
// Deterministic in `seed`. Throws UnsatisfiableTask when the pool admits no task.
Context generate_context(std::uint64_t seed, const LayoutPool& pool, Variant variant);

// Builds a context from an explicit room description; used by fixtures and tests.
Context make_context(std::vector<ReceptacleSpec> receptacles, std::vector<Placement> placement,
                     TaskSpec task, Variant variant = Variant::standard,
                     std::vector<std::string> targets = {}, std::uint64_t seed = 0);

std::string render_instruction(const TaskSpec& task);
std::optional<TaskSpec> parse_instruction(std::string_view text);

// ---------------------------------------------------------------------------
// Dynamics

HouseholdAction parse_household_action(std::string_view text);

HouseholdState initial_state(const Context& ctx);
std::string initial_observation(const HouseholdState& state);

struct ApplyResult {
  HouseholdState state;
  std::string text;
};

// Applies a well-formed action. Actions that are well formed but impossible in
// the current state leave the state untouched and render "Nothing happens."
ApplyResult apply_household(const HouseholdState& state, const HouseholdAction& action,
                            const Context& ctx);

inline constexpr std::string_view kNothingHappens = "Nothing happens.";

// Instances that must be delivered for the active task. Standard tasks accept
// any instance of the class; the ambiguous variant restricts to its targets.
std::vector<std::string> eligible_instances(const HouseholdState& state, const Context& ctx);
bool targets_apply(const HouseholdState& state, const Context& ctx);

bool check_household_success(const HouseholdState& state, const Context& ctx);

// Samples the next multiround task in the unchanged room. The class always has
// enough instances and the task is never already satisfied.
TaskSpec next_multiround_task(const HouseholdState& state, const Context& ctx, Rng& rng);

inline constexpr std::string_view kNextTaskPrefix = "Your next task is to: ";

// Every well-formed action whose entities exist in the room; the space that
// corruption noise is drawn from.
std::vector<HouseholdAction> action_space(const HouseholdState& state);

class HouseholdEnv final : public Environment {
 public:
  EnvKind kind() const override { return EnvKind::household; }
  WorldState reset(const Context& ctx) const override;
  std::string initial_observation(const WorldState& state, const Context& ctx) const override;
  PhysicalAction parse_physical(std::string_view text) const override;
  PhysicalOutcome apply(const WorldState& state, const PhysicalAction& action,
                        const Context& ctx) const override;
  bool finished(const WorldState& state, const Context& ctx) const override;
};

}  // namespace inquire::household
