#include <doctest.h>

#include <cmath>
#include <regex>
#include <set>
#include <span>
#include <sstream>

#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/household.hpp"
#include "inquire/oracle.hpp"
#include "inquire/policies.hpp"
#include "inquire/random.hpp"
#include "inquire/records.hpp"
#include "support.hpp"

using namespace inquire;

namespace {

struct CountingOracle final : Oracle {
  int calls = 0;
  std::string answer(std::string_view) override {
    ++calls;
    return "counted";
  }
};

// Replies from a fixed list; used to exercise the retry path.
struct ListPolicy final : Policy {
  std::vector<std::string> replies;
  std::size_t next = 0;
  std::vector<std::optional<std::string>> errors;
  std::string name() const override { return "list"; }
  std::optional<std::string> act(const PolicyInput& in) override {
    errors.push_back(in.parse_error);
    if (next >= replies.size()) return std::nullopt;
    return replies[next++];
  }
};

}  // namespace

TEST_CASE("asking never touches the world and acting never asks") {
  const auto ctx = support::mug_walkthrough_context();
  const auto& env = environment_for(EnvKind::household);
  CountingOracle oracle;
  WorldState s = env.reset(ctx);
  const auto before = s;
  auto r = step(s, Ask{"Where is the mug?"}, ctx, oracle, env);
  CHECK(r.state == before);
  CHECK(r.observation == Observation::answer("counted"));
  CHECK(oracle.calls == 1);
  r = step(s, Think{"hmm"}, ctx, oracle, env);
  CHECK(r.observation.text == "OK.");
  CHECK(r.state == before);
  r = step(s, parse_augmented("go to diningtable 1", env), ctx, oracle, env);
  CHECK(oracle.calls == 1);
  CHECK_FALSE(r.state == before);
}

TEST_CASE("stepping a finished episode throws") {
  const auto ctx = support::mug_walkthrough_context();
  const auto t = support::mug_walkthrough_transcript();
  const auto rec = replay_transcript(ctx, t).record;
  ScriptedOracle oracle;
  EpisodeDriver d(environment_for(EnvKind::household), ctx, oracle, {}, "x", "p");
  for (const auto& st : rec.steps) d.submit(st.action);
  CHECK(d.over());
  CHECK_THROWS_AS(d.submit(AugmentedAction{Think{"more"}}), EpisodeFinished);
}

TEST_CASE("token-score selection equals brute-force argmax") {
  Rng rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<ScoredCandidate> cands(1 + rng.index(8));
    for (std::size_t i = 0; i < cands.size(); ++i) {
      cands[i].action = "a" + std::to_string(i);
      cands[i].token_scores.resize(1 + rng.index(6));
      for (auto& s : cands[i].token_scores) s = 0.01 + 0.99 * rng.uniform();
    }
    std::size_t best = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      double p = 1.0;
      for (double s : cands[i].token_scores) p *= s;
      if (p > best_p) {
        best_p = p;
        best = i;
      }
    }
    CHECK(select_by_token_scores(cands) == best);
  }
}

TEST_CASE("ties keep the earliest candidate and bad scores are refused") {
  std::vector<ScoredCandidate> tie = {{"x", {0.5, 0.5}}, {"y", {0.25}}, {"z", {0.25, 1.0}}};
  CHECK(select_by_token_scores(tie) == 0);
  std::vector<ScoredCandidate> log_tie = {{"p", {0.125}}, {"q", {0.5, 0.5, 0.5}}};
  CHECK(select_by_token_scores(log_tie) == 0);
  CHECK_THROWS_AS(select_by_token_scores(std::vector<ScoredCandidate>{}), EmptyCandidates);
  CHECK_THROWS_AS(select_by_token_scores(std::vector<ScoredCandidate>{{"x", {0.0}}}), NonPositiveScore);
  CHECK_THROWS_AS(select_by_token_scores(std::vector<ScoredCandidate>{{"x", {1.5}}}), NonPositiveScore);
  CHECK_THROWS_AS(select_by_token_scores(std::vector<ScoredCandidate>{{"x", {}}}), NonPositiveScore);
}

TEST_CASE("memory query agrees with a regex scan of environment text") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto ctx = household::generate_context(seed, household::default_pool(household::PoolId::id_dist),
                                                 Variant::standard);
    ScriptedBaselinePolicy p;
    RuleOracle o(ctx);
    const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, {}, "m");
    std::set<std::string> classes;
    for (const auto& pl : ctx.placement) classes.insert(household::class_of(pl.instance));
    for (std::size_t t = 0; t <= r.steps.size(); t += 3) {
      const auto prefix = std::span(r.steps).first(t);
      for (const auto& c : classes) {
        const std::regex re("\\b" + c + " \\d+\\b");
        bool seen = std::regex_search(r.initial_observation, re);
        for (const auto& st : prefix)
          seen = seen || (st.observation.kind == ObsKind::env_text && std::regex_search(st.observation.text, re));
        CHECK(query_memory(r.initial_observation, prefix, c).never_seen() == !seen);
      }
    }
  }
}

TEST_CASE("sighting reports keep first-seen order and the latest place") {
  const auto t = support::mug_walkthrough_transcript();
  const auto rec = replay_transcript(support::mug_walkthrough_context(), t).record;
  const auto prefix = std::span(rec.steps).first(4);
  CHECK(query_memory(rec.initial_observation, prefix, "pencil").render() ==
        "pencil 3 is in diningtable 1, pencil 1 is in diningtable 1.");
  CHECK(query_memory(rec.initial_observation, std::span(rec.steps).first(3), "mug").never_seen());
  const auto full = query_memory(rec.initial_observation, rec.steps, "mug");
  CHECK(full.seen.front().instance == "mug 3");
  CHECK(full.render() == "mug 3 is in diningtable 1, mug 2 is in diningtable 1, mug 1 is in sidetable 1.");
}

TEST_CASE("metadata stripping keeps only the environment-facing half") {
  CHECK(strip_metadata({Think{"a"}, Ask{"b"}}) == std::vector<AugmentedAction>{Ask{"b"}});
  CHECK(strip_metadata({Think{"a"}}) == std::vector<AugmentedAction>{Think{"a"}});
  CHECK(strip_metadata({}).empty());
}

TEST_CASE("unparsable replies are retried with the error and then fail the episode") {
  const auto ctx = support::mug_walkthrough_context();
  RuleOracle o(ctx);
  ListPolicy p;
  p.replies = {"fly away", "go to bed 1", "jump", "dance", "sing", "hop"};
  const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, {}, "retry");
  CHECK(r.steps.size() == 1);
  CHECK(r.outcome == Outcome::failure);
  CHECK_FALSE(p.errors[0].has_value());
  CHECK(p.errors[1].has_value());
}

TEST_CASE("the horizon ends an episode as a timeout") {
  const auto ctx = support::mug_walkthrough_context();
  RuleOracle o(ctx);
  ListPolicy p;
  p.replies.assign(10, "think: wait");
  RunLimits limits;
  limits.horizon = 4;
  const auto r = run_episode(environment_for(EnvKind::household), ctx, p, o, limits, "t");
  CHECK(r.steps.size() == 4);
  CHECK(r.outcome == Outcome::timeout);
}

TEST_CASE("records survive a write/read round trip") {
  std::vector<EpisodeRecord> recs;
  recs.push_back(replay_transcript(support::mug_walkthrough_context(), support::mug_walkthrough_transcript()).record);
  recs.push_back(replay_transcript(support::red_block_walkthrough_context(), support::red_block_walkthrough_transcript()).record);
  recs[0].steps[3].noise = true;
  std::stringstream buf;
  write_records(buf, recs);
  CHECK(read_records(buf) == recs);
}

TEST_CASE("records with a wrong header are refused") {
  std::stringstream bad("{\"format\":\"something\",\"version\":1}\n");
  CHECK_THROWS_AS(read_records(bad), FormatError);
}

TEST_CASE("batches are identical regardless of worker count") {
  std::vector<EpisodeSpec> specs;
  for (std::uint64_t s = 0; s < 24; ++s)
    specs.push_back({"e" + std::to_string(s),
                     household::generate_context(s, household::default_pool(household::PoolId::id_dist),
                                                 Variant::ambiguous)});
  const auto pf = policy_factory("scripted-aba");
  const OracleFactory of = [](const Context& c) { return std::make_unique<RuleOracle>(c); };
  CHECK(run_batch(specs, pf, of, {}, 1) == run_batch(specs, pf, of, {}, 6));
}
