#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "inquire/core.hpp"
#include "inquire/household.hpp"
#include "inquire/types.hpp"

namespace inquire {

struct CollectConfig {
  int episodes = 10;
  double p = 0.2;  // per-step corruption probability
  std::uint64_t seed = 0;
  Variant variant = Variant::ambiguous;
  household::PoolId pool = household::PoolId::id_dist;
  int horizon = 200;   // generous, so recovery after noise always fits
  int max_tasks = 3;   // multiround: tasks per episode
  int jobs = 1;
};

// Runs the question-asking expert with noise injection: at every step, with
// probability p, a uniformly drawn admissible physical action that differs
// from the planned one is submitted instead and flagged. The expert replans
// from whatever state results.
EpisodeRecord collect_episode(const Context& ctx, double p, std::uint64_t noise_seed, int horizon,
                              int max_tasks, std::string episode_id);
std::vector<EpisodeRecord> collect_corrupted(const CollectConfig& cfg);

struct FtPolicyRecord {
  std::string x;  // transcript prefix followed by the "Act t:" cue
  std::string y;  // the turn taken at step t
  int mask = 0;   // 1 = injected noise, excluded from the objective
  std::string episode_id;
  int step = 0;   // 0-based action index

  bool operator==(const FtPolicyRecord&) const = default;
};

struct FtQaRecord {
  std::string x;  // transcript prefix and the question
  std::string y;  // "yes" / "no" or the sighting list
  std::string object_class;
  bool augmented = false;  // extra query about a class other than the task's
  std::string episode_id;
  int step = 0;            // prefix length in actions

  bool operator==(const FtQaRecord&) const = default;
};

std::vector<FtPolicyRecord> build_policy_dataset(const std::vector<EpisodeRecord>& records);

// One seen-question per query point (every task-opening metadata turn), plus
// the where-question when the answer is yes, plus `augment` queries per
// episode about other classes in the room at random prefixes.
std::vector<FtQaRecord> build_qa_dataset(const std::vector<EpisodeRecord>& records,
                                         std::uint64_t seed, int augment = 2);

std::string seen_question(std::string_view object_class);
std::string where_question(std::string_view object_class);

struct ObjectiveTerms {
  double qa = 0.0;      // -sum of QA log-likelihoods
  double policy = 0.0;  // -sum of unmasked policy log-likelihoods
  double total() const { return qa + policy; }
};

// Negated training objective over supplied per-token log-likelihoods. Records
// with mask 1 are skipped without being read, so any change to them leaves the
// result bit-identical. Throws NonFiniteScore on a non-finite or positive value.
ObjectiveTerms masked_objective(const std::vector<std::vector<double>>& qa_scores,
                                const std::vector<std::pair<std::vector<double>, int>>& policy_scores);

inline constexpr const char* kPolicyDatasetFormat = "inquire.ftdata.policy";
inline constexpr const char* kQaDatasetFormat = "inquire.ftdata.qa";
inline constexpr int kDatasetVersion = 1;

std::string dump_policy_dataset(const std::vector<FtPolicyRecord>& records);
std::string dump_qa_dataset(const std::vector<FtQaRecord>& records);
std::vector<FtPolicyRecord> parse_policy_dataset(std::string_view text);
std::vector<FtQaRecord> parse_qa_dataset(std::string_view text);

// Collects, builds both datasets and writes policy.jsonl, qa.jsonl,
// records.jsonl and manifest.json into `dir`. Returns the manifest.
nlohmann::json write_ftdata(const CollectConfig& cfg, const std::filesystem::path& dir);

}  // namespace inquire
