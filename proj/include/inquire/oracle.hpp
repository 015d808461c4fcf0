#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "inquire/core.hpp"
#include "inquire/random.hpp"
#include "inquire/types.hpp"

namespace inquire {

// Ground truth as the answerer sees it: one "X is in Y." sentence per object
// instance, in the context's placement order. Built once from the initial
// context; later moves by the agent are not reflected.
struct KnowledgeDoc {
  std::vector<std::string> sentences;

  std::string paragraph() const;
};

KnowledgeDoc build_knowledge(const Context& ctx);

enum class QueryKind { where_is, which_preferred, color_for_base, relative_target, freeform };
std::string_view to_string(QueryKind k);

struct OracleQuery {
  QueryKind kind = QueryKind::freeform;
  std::string subject;  // object class, or block color for relative_target
  int base = 0;         // color_for_base only
  std::string text;     // the original question

  bool operator==(const OracleQuery&) const = default;
};

OracleQuery classify_question(std::string_view question);

inline constexpr std::string_view kNotSure = "I am not sure.";

// Deterministic answer from ground truth.
std::string answer(const OracleQuery& query, const Context& ctx);

// The failure mode of an LLM answerer that ignores its instructions.
std::string unhelpful_answer(const OracleQuery& query);

class RuleOracle final : public Oracle {
 public:
  explicit RuleOracle(Context ctx) : ctx_(std::move(ctx)) {}
  std::string answer(std::string_view question) override;

 private:
  Context ctx_;
};

enum class NoiseMode { unhelpful, wrong_target };

// With probability q replaces the base answer. `unhelpful` asks the agent to
// repeat the information; `wrong_target` names a non-target instance for
// preference questions and is unhelpful elsewhere.
class NoisyOracle final : public Oracle {
 public:
  NoisyOracle(std::unique_ptr<Oracle> base, Context ctx, double q, std::uint64_t seed,
              NoiseMode mode = NoiseMode::unhelpful);
  std::string answer(std::string_view question) override;

  std::size_t noisy_replies() const noexcept { return noisy_; }

 private:
  std::unique_ptr<Oracle> base_;
  Context ctx_;
  double q_;
  Rng rng_;
  NoiseMode mode_;
  std::size_t noisy_ = 0;
};

// Oracle that answers from a queue of fixed replies, then "I am not sure.".
// Used when a person answers through the session service.
class ScriptedOracle final : public Oracle {
 public:
  explicit ScriptedOracle(std::vector<std::string> replies = {}) : replies_(std::move(replies)) {}
  void push(std::string reply) { replies_.push_back(std::move(reply)); }
  std::string answer(std::string_view question) override;

  const std::vector<std::string>& questions() const noexcept { return questions_; }

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::vector<std::string> questions_;
};

// Oracle probe: scenarios x questions where-is questions over household rooms.
// An answer is correct iff it names every instance of the queried class, each
// at its true receptacle, and nothing else.
bool answer_is_correct(const OracleQuery& query, std::string_view reply, const Context& ctx);

struct ProbeResult {
  std::vector<double> per_scenario;  // percent correct per scenario
  double mean = 0.0;
  double stddev = 0.0;               // population
};

using OracleFactory = std::function<std::unique_ptr<Oracle>(const Context&)>;

ProbeResult probe_accuracy(const OracleFactory& make, std::uint64_t seed, int scenarios = 8,
                           int questions_per = 5);

}  // namespace inquire
