#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace inquire {

enum class EnvKind { household, tabletop };
enum class Variant { standard, ambiguous, multiround };
enum class TaskKind { pick, examine, clean, heat, cool, pick2, tabletop1, tabletop2, tabletop3 };

std::string_view to_string(EnvKind k);
std::string_view to_string(Variant v);
std::string_view to_string(TaskKind k);
EnvKind parse_env_kind(std::string_view s);
Variant parse_variant(std::string_view s);
TaskKind parse_task_kind(std::string_view s);

constexpr bool is_household(TaskKind k) noexcept {
  return k == TaskKind::pick || k == TaskKind::examine || k == TaskKind::clean ||
         k == TaskKind::heat || k == TaskKind::cool || k == TaskKind::pick2;
}

struct TaskSpec {
  TaskKind kind = TaskKind::pick;
  std::string object_class;
  std::string destination;  // receptacle type; empty for examine and tabletop tasks
  int distractors = 0;      // tabletop: number of red blocks (x)
  int bases = 0;            // tabletop: number of bases (y)
  std::string instruction;

  bool operator==(const TaskSpec&) const = default;
};

struct Pose {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Pose&) const = default;
};

struct ReceptacleSpec {
  std::string name;
  bool openable = false;
  bool open = true;

  bool operator==(const ReceptacleSpec&) const = default;
};

struct Placement {
  std::string instance;
  std::string receptacle;

  bool operator==(const Placement&) const = default;
};

enum class ObjectKind { block, bowl, base };

struct TableObject {
  ObjectKind kind = ObjectKind::block;
  std::string color;
  Pose pose;
  int index = 0;  // base number (1..y) for bases, 0 otherwise

  bool operator==(const TableObject&) const = default;
};

// The hidden parameterization c of one environment instance. Everything a
// rollout depends on besides the action sequence lives here.
struct Context {
  EnvKind env_kind = EnvKind::household;
  Variant variant = Variant::standard;
  std::string layout_name;

  // household
  std::vector<ReceptacleSpec> receptacles;
  std::vector<Placement> placement;  // order is the knowledge-paragraph order
  std::vector<std::string> destinations;                    // receptacle types tasks may target
  std::map<std::string, std::vector<TaskKind>> class_kinds;  // task kinds allowed per class

  // tabletop
  std::vector<TableObject> table;
  std::optional<std::size_t> target_block;  // index into `table`

  TaskSpec task;
  std::vector<std::string> target_instances;  // ambiguous variant only, sorted
  std::map<int, std::string> color_map;       // base index -> color
  std::uint64_t seed = 0;

  bool operator==(const Context&) const = default;
};

// ---------------------------------------------------------------------------
// World states

struct Receptacle {
  std::vector<std::string> contents;
  bool openable = false;
  bool open = true;

  bool closed() const noexcept { return openable && !open; }
  bool operator==(const Receptacle&) const = default;
};

struct ObjectStatus {
  bool heated = false;
  bool cleaned = false;
  bool cooled = false;
  bool examined = false;

  bool operator==(const ObjectStatus&) const = default;
};

struct HouseholdState {
  std::string agent_at = "start";
  std::optional<std::string> inventory;
  std::map<std::string, Receptacle> receptacles;
  std::map<std::string, ObjectStatus> status;
  TaskSpec task;  // active task; changes between rounds in the multiround variant
  int tasks_completed = 0;

  bool operator==(const HouseholdState&) const = default;
};

struct TabletopState {
  std::vector<TableObject> objects;
  std::optional<int> question_budget;  // nullopt = unlimited
  std::uint64_t tick = 0;              // physical moves so far; seeds shuffle and jitter

  bool operator==(const TabletopState&) const = default;
};

using WorldState = std::variant<HouseholdState, TabletopState>;

// ---------------------------------------------------------------------------
// Actions and observations

enum class Verb { go, take, put, open, close, heat, clean, cool, use };

struct HouseholdAction {
  Verb verb = Verb::go;
  std::string object;      // empty for go/open/close/use
  std::string receptacle;

  bool operator==(const HouseholdAction&) const = default;
};

struct MoveCmd {
  Pose pick;
  Pose place;

  bool operator==(const MoveCmd&) const = default;
};

using PhysicalAction = std::variant<HouseholdAction, MoveCmd>;

struct Physical {
  PhysicalAction action;
  bool operator==(const Physical&) const = default;
};
struct Ask {
  std::string text;
  bool operator==(const Ask&) const = default;
};
struct Think {
  std::string text;
  bool operator==(const Think&) const = default;
};

using AugmentedAction = std::variant<Physical, Ask, Think>;

enum class ActionKind { physical, ask, think };
ActionKind kind_of(const AugmentedAction& a);
std::string_view to_string(ActionKind k);

enum class ObsKind { env_text, answer, ack };
std::string_view to_string(ObsKind k);
ObsKind parse_obs_kind(std::string_view s);

inline constexpr std::string_view kAckText = "OK.";

struct Observation {
  ObsKind kind = ObsKind::env_text;
  std::string text;

  static Observation ack() { return {ObsKind::ack, std::string(kAckText)}; }
  static Observation env(std::string t) { return {ObsKind::env_text, std::move(t)}; }
  static Observation answer(std::string t) { return {ObsKind::answer, std::move(t)}; }

  bool operator==(const Observation&) const = default;
};

std::string render(const HouseholdAction& a);
std::string render(const MoveCmd& m);
std::string render(const PhysicalAction& a);
std::string render(const AugmentedAction& a);

std::string verb_name(Verb v);

}  // namespace inquire
