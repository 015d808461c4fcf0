#include "inquire/types.hpp"

#include <array>
#include <utility>

#include "inquire/errors.hpp"
#include "inquire/text.hpp"

namespace inquire {

namespace {

template <typename E, std::size_t N>
E lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s,
         std::string_view what) {
  for (const auto& [value, name] : table)
    if (name == s) return value;
  throw FormatError("unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table)
    if (value == v) return name;
  return "?";
}

constexpr std::array<std::pair<EnvKind, std::string_view>, 2> kEnvKinds{{
    {EnvKind::household, "household"},
    {EnvKind::tabletop, "tabletop"},
}};

constexpr std::array<std::pair<Variant, std::string_view>, 3> kVariants{{
    {Variant::standard, "standard"},
    {Variant::ambiguous, "ambiguous"},
    {Variant::multiround, "multiround"},
}};

constexpr std::array<std::pair<TaskKind, std::string_view>, 9> kTaskKinds{{
    {TaskKind::pick, "pick"},
    {TaskKind::examine, "examine"},
    {TaskKind::clean, "clean"},
    {TaskKind::heat, "heat"},
    {TaskKind::cool, "cool"},
    {TaskKind::pick2, "pick2"},
    {TaskKind::tabletop1, "tabletop1"},
    {TaskKind::tabletop2, "tabletop2"},
    {TaskKind::tabletop3, "tabletop3"},
}};

constexpr std::array<std::pair<ObsKind, std::string_view>, 3> kObsKinds{{
    {ObsKind::env_text, "env"},
    {ObsKind::answer, "answer"},
    {ObsKind::ack, "ack"},
}};

}  // namespace

std::string_view to_string(EnvKind k) { return name_of(kEnvKinds, k); }
std::string_view to_string(Variant v) { return name_of(kVariants, v); }
std::string_view to_string(TaskKind k) { return name_of(kTaskKinds, k); }
std::string_view to_string(ObsKind k) { return name_of(kObsKinds, k); }
EnvKind parse_env_kind(std::string_view s) { return lookup(kEnvKinds, s, "env kind"); }
Variant parse_variant(std::string_view s) { return lookup(kVariants, s, "variant"); }
TaskKind parse_task_kind(std::string_view s) { return lookup(kTaskKinds, s, "task kind"); }
ObsKind parse_obs_kind(std::string_view s) { return lookup(kObsKinds, s, "observation kind"); }

ActionKind kind_of(const AugmentedAction& a) {
  switch (a.index()) {
    case 0: return ActionKind::physical;
    case 1: return ActionKind::ask;
    default: return ActionKind::think;
  }
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::physical: return "physical";
    case ActionKind::ask: return "ask";
    case ActionKind::think: return "think";
  }
  return "?";
}

std::string verb_name(Verb v) {
  switch (v) {
    case Verb::go: return "go";
    case Verb::take: return "take";
    case Verb::put: return "put";
    case Verb::open: return "open";
    case Verb::close: return "close";
    case Verb::heat: return "heat";
    case Verb::clean: return "clean";
    case Verb::cool: return "cool";
    case Verb::use: return "use";
  }
  return "?";
}

std::string render(const HouseholdAction& a) {
  switch (a.verb) {
    case Verb::go: return "go to " + a.receptacle;
    case Verb::take: return "take " + a.object + " from " + a.receptacle;
    case Verb::put: return "put " + a.object + " in/on " + a.receptacle;
    case Verb::open: return "open " + a.receptacle;
    case Verb::close: return "close " + a.receptacle;
    case Verb::heat:
    case Verb::clean:
    case Verb::cool: return verb_name(a.verb) + " " + a.object + " with " + a.receptacle;
    case Verb::use: return "use " + a.receptacle;
  }
  return {};
}

std::string render(const MoveCmd& m) {
  return "move_to(" + text::shortest_decimal(m.pick.x) + ", " + text::shortest_decimal(m.pick.y) +
         ", " + text::shortest_decimal(m.place.x) + ", " + text::shortest_decimal(m.place.y) + ")";
}

std::string render(const PhysicalAction& a) {
  return std::visit([](const auto& v) { return render(v); }, a);
}

std::string render(const AugmentedAction& a) {
  struct Visitor {
    std::string operator()(const Physical& p) const { return render(p.action); }
    std::string operator()(const Ask& q) const { return "ask: " + q.text; }
    std::string operator()(const Think& t) const { return "think: " + t.text; }
  };
  return std::visit(Visitor{}, a);
}

}  // namespace inquire
