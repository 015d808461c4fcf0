#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/types.hpp"

namespace inquire {

// The external information source H_c: maps a question to an answer. The
// context is bound at construction, so one instance answers for one episode.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string answer(std::string_view question) = 0;
};

struct PhysicalOutcome {
  WorldState state;
  std::string text;
  double reward = 0.0;
  bool done = false;
};

// Physical dynamics p(s'|s,a,c) of one environment family. Implementations are
// immutable and may be shared between threads.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  virtual WorldState reset(const Context& ctx) const = 0;
  virtual std::string initial_observation(const WorldState& state, const Context& ctx) const = 0;
  virtual PhysicalAction parse_physical(std::string_view text) const = 0;
  virtual PhysicalOutcome apply(const WorldState& state, const PhysicalAction& action,
                                const Context& ctx) const = 0;
  // True once no further action may be taken (task solved, single-task variants).
  virtual bool finished(const WorldState& state, const Context& ctx) const = 0;

  // Charges a question against the environment's question budget. Returns the
  // refusal text when the question must not reach the oracle.
  virtual std::optional<std::string> admit_question(WorldState& /*state*/,
                                                    std::string_view /*question*/,
                                                    const Context& /*ctx*/) const {
    return std::nullopt;
  }
};

struct StepResult {
  WorldState state;
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

// One transition of the augmented MDP. Questions go to the oracle and leave the
// world untouched; thoughts are acknowledged; physical actions go to `env`.
// Throws EpisodeFinished when `state` is already terminal.
StepResult step(const WorldState& state, const AugmentedAction& action, const Context& ctx,
                Oracle& oracle, const Environment& env);

// Parses "think: ...", "ask: ..." or an environment action string.
AugmentedAction parse_augmented(std::string_view text, const Environment& env);

enum class Outcome { success, failure, timeout };
std::string_view to_string(Outcome o);
Outcome parse_outcome(std::string_view s);

struct StepRecord {
  AugmentedAction action;
  Observation observation;  // what the action produced
  bool noise = false;       // injected corruption (n_t = 1)
  double reward = 0.0;

  bool operator==(const StepRecord&) const = default;
};

struct EpisodeRecord {
  std::string episode_id;
  std::string policy;
  Context context;
  std::string initial_observation;
  std::vector<StepRecord> steps;
  int horizon = 50;
  double discount = 1.0;
  Outcome outcome = Outcome::timeout;
  int tasks_completed = 0;

  double total_reward() const;
  int physical_actions() const;
  int questions() const;
  // Observations in the transcript: the initial one plus one per action.
  int length() const { return static_cast<int>(steps.size()) + 1; }

  bool operator==(const EpisodeRecord&) const = default;
};

// Transcript rendering shared by prompts, datasets and fixtures:
//   Obs 1: <initial observation>
//   Act 1: <action>
//   Obs 2: <observation>
//   ...
// Thoughts render as "think: ...", questions as "ask: ...".
std::string concat_trajectory(std::string_view initial_observation,
                              std::span<const StepRecord> steps);

std::string act_line(std::size_t step_index, const AugmentedAction& a);   // 0-based index
std::string obs_line(std::size_t obs_number, std::string_view text);     // 1-based number

}  // namespace inquire
