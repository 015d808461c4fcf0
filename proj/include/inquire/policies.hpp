#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/harness.hpp"
#include "inquire/types.hpp"

namespace inquire {

// ---------------------------------------------------------------------------
// Full-information planner. Recomputed from the current state at every step,
// so it recovers from any detour (noise injection relies on this).

// Next physical action toward the active task, or nullopt when nothing is left
// to do. Throws UnsatisfiableTask if the task cannot be completed from `state`.
std::optional<HouseholdAction> expert_household_next(const HouseholdState& state,
                                                     const Context& ctx);
std::vector<HouseholdAction> expert_household_plan(HouseholdState state, const Context& ctx,
                                                   int max_steps = 64);

std::optional<MoveCmd> expert_tabletop_next(const TabletopState& state, const Context& ctx);

// "then put it in sidetable", "then heat it with microwave, then put it in cabinet", ...
std::string remaining_phrase(const TaskSpec& task);

class ExpertPolicy final : public Policy {
 public:
  // With `with_questions` the expert also emits the metadata turns and the
  // questions a blind agent would need (used as the teacher for ftdata).
  explicit ExpertPolicy(bool with_questions = false) : with_questions_(with_questions) {}
  std::string name() const override { return with_questions_ ? "expert-ask" : "expert"; }
  bool privileged() const override { return true; }
  std::optional<std::string> act(const PolicyInput& in) override;

  // The action this policy would submit for `in`, before rendering.
  std::optional<AugmentedAction> decide(const PolicyInput& in) const;

 private:
  bool with_questions_;
};

// Blind policy that asks before acting: where-questions on unknown objects,
// a preference question in the ambiguous variant, color questions within the
// tabletop budget. Stateless; every decision is recomputed from the transcript.
class ScriptedAbaPolicy final : public Policy {
 public:
  std::string name() const override { return "scripted-aba"; }
  std::optional<std::string> act(const PolicyInput& in) override;
};

// Blind policy that never asks: searches receptacles one by one in a seeded
// order; in the ambiguous variant and on the tabletop it guesses.
class ScriptedBaselinePolicy final : public Policy {
 public:
  std::string name() const override { return "scripted-baseline"; }
  std::optional<std::string> act(const PolicyInput& in) override;
};

// ---------------------------------------------------------------------------
// Remote text model

struct PromptBundle {
  std::string preamble;
  std::vector<std::string> examples;  // rendered augmented transcripts, K = examples.size()
  std::string version = "1";

  // preamble, the examples separated by blank lines, the current transcript,
  // then the "Act t:" cue.
  std::string render(std::string_view transcript, std::size_t next_act) const;
};

// Reads the prompt asset: a "version:" line, the preamble up to the first
// "=== example" line, then one example per "=== example" section.
PromptBundle parse_prompt_bundle(std::string_view text);
PromptBundle load_prompt_bundle(const std::string& path);
PromptBundle default_prompt_bundle(EnvKind env);

struct RemoteConfig {
  std::string url = "http://127.0.0.1:8000";  // scheme://host:port
  std::string path = "/v1/complete";
  int max_tokens = 128;
  std::vector<std::string> stop = {"\nObs", "\n"};
  int max_attempts = 3;  // transport retries per request
  std::chrono::milliseconds backoff{200};
  std::chrono::seconds timeout{30};
  // When non-empty and the endpoint returns token scores, each candidate is
  // scored and the best one is chosen with select_by_token_scores.
  std::vector<std::string> candidates;
};

// Talks to a completion endpoint: POST {prompt, max_tokens, stop,
// want_token_scores} -> {text, token_scores?}. Owns per-episode state only,
// so one instance must not be shared across episodes.
class RemotePolicy final : public Policy {
 public:
  RemotePolicy(RemoteConfig config, PromptBundle bundle);
  ~RemotePolicy() override;
  std::string name() const override { return "remote"; }
  std::optional<std::string> act(const PolicyInput& in) override;

 private:
  struct Completion {
    std::string text;
    std::vector<double> token_scores;
  };
  Completion complete(const std::string& prompt, bool want_scores);

  RemoteConfig config_;
  PromptBundle bundle_;
};

// First non-empty line of a completion, with any "Act k:" echo removed.
std::string first_action_line(std::string_view completion);

// "expert", "scripted-aba", "scripted-baseline", "remote". Throws Error on an
// unknown name.
PolicyFactory policy_factory(std::string_view name, const RemoteConfig& remote = {},
                             const std::optional<PromptBundle>& bundle = std::nullopt);

}  // namespace inquire
