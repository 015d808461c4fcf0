#include "inquire/replay.hpp"

#include <cmath>
#include <regex>

#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/oracle.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"

namespace inquire {

Transcript parse_transcript(std::string_view text) {
  static const std::regex turn(R"(^(Obs|Act) (\d+):\s?(.*)$)");
  Transcript t;
  std::size_t expect_obs = 1, expect_act = 1;
  bool want_obs = true;
  for (const auto& raw : text::split_lines(text)) {
    const std::string line(text::trim(raw));
    if (line.empty()) continue;
    std::smatch m;
    if (!std::regex_match(line, m, turn)) throw FormatError("not a transcript turn: '" + line + "'");
    const bool is_obs = m[1] == "Obs";
    const auto n = std::stoul(m[2].str());
    if (is_obs != want_obs || n != (is_obs ? expect_obs : expect_act))
      throw FormatError("transcript turn out of order: '" + line + "'");
    if (is_obs) {
      (expect_obs == 1 ? t.initial_observation : t.observations.emplace_back()) = m[3].str();
      ++expect_obs;
    } else {
      t.actions.push_back(m[3].str());
      ++expect_act;
    }
    want_obs = !want_obs;
  }
  if (expect_obs == 1) throw FormatError("transcript has no observations");
  if (t.actions.size() != t.observations.size())
    throw FormatError("transcript ends with an action that has no observation");
  return t;
}

namespace {

// Splits "<scene> You task is: ..." into the scene objects and the remainder.
std::pair<std::vector<TableObject>, std::string> split_scene(std::string_view s) {
  static const std::regex item(R"((?:A [a-z]+ (?:block|bowl)|The # \d+ base) is in \(-?[0-9.]+, -?[0-9.]+\)\.\s*)");
  return {tabletop::parse_scene(s), std::regex_replace(std::string(s), item, "")};
}

bool same_objects(std::vector<TableObject> expected, std::vector<TableObject> actual, double tol) {
  if (expected.size() != actual.size()) return false;
  std::vector<bool> used(actual.size(), false);
  for (const auto& e : expected) {
    bool found = false;
    for (std::size_t i = 0; i < actual.size() && !found; ++i) {
      const auto& a = actual[i];
      if (used[i] || a.kind != e.kind || a.color != e.color || a.index != e.index) continue;
      if (std::abs(a.pose.x - e.pose.x) <= tol + 1e-9 && std::abs(a.pose.y - e.pose.y) <= tol + 1e-9)
        used[i] = found = true;
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

bool observations_match(EnvKind env, std::string_view expected, std::string_view actual, double tol) {
  if (expected == actual) return true;
  if (env != EnvKind::tabletop) return false;
  auto [eo, erest] = split_scene(expected);
  auto [ao, arest] = split_scene(actual);
  if (eo.empty()) return false;
  return text::trim(erest) == text::trim(arest) && same_objects(std::move(eo), std::move(ao), tol);
}

ReplayResult replay_transcript(const Context& ctx, const Transcript& t, double tol, std::string episode_id,
                               std::string policy) {
  const auto& env = environment_for(ctx.env_kind);
  std::vector<std::string> replies;
  std::vector<AugmentedAction> actions;
  for (std::size_t k = 0; k < t.actions.size(); ++k) {
    actions.push_back(parse_augmented(t.actions[k], env));
    if (std::holds_alternative<Ask>(actions.back())) replies.push_back(t.observations[k]);
  }
  ScriptedOracle oracle(std::move(replies));
  RunLimits limits;
  limits.horizon = std::max<int>(limits.horizon, static_cast<int>(actions.size()));
  EpisodeDriver driver(env, ctx, oracle, limits, std::move(episode_id), std::move(policy));

  ReplayResult out;
  if (!observations_match(ctx.env_kind, t.initial_observation, driver.record().initial_observation, tol))
    out.mismatches.push_back({1, t.initial_observation, driver.record().initial_observation});
  for (std::size_t k = 0; k < actions.size(); ++k) {
    if (driver.over()) {
      out.mismatches.push_back({k + 2, t.observations[k], "<episode already over>"});
      break;
    }
    const auto& step = driver.submit(actions[k]);
    if (!observations_match(ctx.env_kind, t.observations[k], step.observation.text, tol))
      out.mismatches.push_back({k + 2, t.observations[k], step.observation.text});
  }
  out.record = driver.record();
  return out;
}

}  // namespace inquire
