#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/core.hpp"
#include "inquire/oracle.hpp"
#include "inquire/types.hpp"

namespace inquire {

// What a policy sees at step t. Blind policies read only the transcript side;
// `context` and `state` are filled in for privileged policies alone.
struct PolicyInput {
  EnvKind env = EnvKind::household;
  Variant variant = Variant::standard;  // public: the agent knows which benchmark it is in
  std::uint64_t episode_seed = 0;
  std::string_view initial_observation;
  std::span<const StepRecord> steps;
  std::string transcript;                  // concat_trajectory of the above
  std::optional<std::string> parse_error;  // set when the previous reply failed to parse
  int attempt = 0;                         // 0 on the first try at this step

  const Context* context = nullptr;
  const WorldState* state = nullptr;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // True when the policy needs the hidden context (the expert).
  virtual bool privileged() const { return false; }
  // Next action text, or nullopt to give up (the episode then fails).
  virtual std::optional<std::string> act(const PolicyInput& in) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct RunLimits {
  int horizon = 50;  // max actions per episode (T)
  int max_parse_retries = 3;
  double discount = 1.0;
  int max_tasks = 0;  // multiround: stop after this many completed tasks (0 = horizon only)
};

// Steps one episode. Owns the world state; the caller decides which action
// comes next (a policy, a person, a replay file).
class EpisodeDriver {
 public:
  EpisodeDriver(const Environment& env, Context ctx, Oracle& oracle, RunLimits limits,
                std::string episode_id, std::string policy_name);

  bool over() const noexcept { return over_; }
  const EpisodeRecord& record() const noexcept { return record_; }
  const WorldState& state() const noexcept { return state_; }
  const Context& context() const noexcept { return record_.context; }
  const Environment& env() const noexcept { return env_; }
  int steps_left() const noexcept;
  int parse_retries() const noexcept { return limits_.max_parse_retries; }

  PolicyInput input(bool privileged) const;

  // Parses and applies one action. Throws MalformedAction without touching
  // the episode when the text is not in the grammar.
  const StepRecord& submit(std::string_view text, bool noise = false);
  const StepRecord& submit(const AugmentedAction& action, bool noise = false);

  // True when an Ask would be refused by the question budget right now.
  bool question_refused(std::string_view question) const;

  void fail();  // the acting side gave up or could not produce a parsable action

 private:
  void finish(Outcome o);

  const Environment& env_;
  Oracle& oracle_;
  RunLimits limits_;
  WorldState state_;
  EpisodeRecord record_;
  bool over_ = false;
};

// Asks `policy` for actions until the episode ends, retrying unparsable
// replies up to the retry limit.
void drive(EpisodeDriver& driver, Policy& policy);

EpisodeRecord run_episode(const Environment& env, const Context& ctx, Policy& policy,
                          Oracle& oracle, const RunLimits& limits = {},
                          std::string episode_id = {});

const Environment& environment_for(EnvKind kind);

struct EpisodeSpec {
  std::string episode_id;
  Context context;
};

// Runs the episodes on up to `jobs` threads. Each episode gets its own policy
// and oracle; the result order follows `specs` regardless of scheduling.
std::vector<EpisodeRecord> run_batch(std::span<const EpisodeSpec> specs, const PolicyFactory& policy,
                                     const OracleFactory& oracle, const RunLimits& limits,
                                     int jobs = 1);

// ---------------------------------------------------------------------------
// Scoring-based selection: argmax over candidates of the product of their
// per-token probabilities, computed as a sum of logs. Ties keep the earliest
// candidate; log sums within a relative 1e-12 count as ties. No length
// normalization is applied.

struct ScoredCandidate {
  std::string action;
  std::vector<double> token_scores;  // each in (0, 1]
};

inline constexpr double kTieSlack = 1e-12;

std::size_t select_by_token_scores(std::span<const ScoredCandidate> candidates);
double log_score(const ScoredCandidate& c);

// ---------------------------------------------------------------------------
// Memory query over the transcript: where has each instance of a class been
// seen in environment observations so far.

struct Sighting {
  std::string instance;
  std::string receptacle;
  int step = 0;  // observation number (1 = initial) of the latest sighting

  bool operator==(const Sighting&) const = default;
};

struct SightingReport {
  std::string object_class;
  std::vector<Sighting> seen;  // ordered by first sighting

  bool never_seen() const noexcept { return seen.empty(); }
  // "pencil 3 is in diningtable 1, pencil 1 is in diningtable 1." or
  // "I have never seen pencil before."
  std::string render() const;
};

SightingReport query_memory(std::string_view initial_observation,
                            std::span<const StepRecord> steps, std::string_view object_class);

// Drops the metadata half of an augmented action: [Think, Ask] -> [Ask].
std::vector<AugmentedAction> strip_metadata(std::vector<AugmentedAction> actions);

}  // namespace inquire
