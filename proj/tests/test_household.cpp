#include <doctest.h>

#include <deque>
#include <map>
#include <set>

#include "inquire/harness.hpp"
#include "inquire/household.hpp"
#include "inquire/oracle.hpp"
#include "inquire/policies.hpp"
#include "support.hpp"

using namespace inquire;
using namespace inquire::household;

namespace {

// Breadth-first search over a pruned action set: go/open anywhere, take an
// instance of the task class, put what is held where the agent stands, and
// the task's appliance verb. Independent of the expert's cost model.
int bfs_shortest(const Context& ctx) {
  std::vector<std::string> names;
  for (const auto& r : ctx.receptacles) {
    bool useful = class_of(r.name) == ctx.task.destination || class_of(r.name) == "desklamp";
    for (const auto& p : ctx.placement)
      useful = useful || (p.receptacle == r.name && class_of(p.instance) == ctx.task.object_class);
    if (useful) names.push_back(r.name);
  }
  const auto successors = [&](const HouseholdState& s) {
    std::vector<HouseholdAction> out;
    for (const auto& n : names) {
      if (n != s.agent_at) out.push_back({Verb::go, "", n});
    }
    const auto here = s.receptacles.find(s.agent_at);
    if (here == s.receptacles.end()) return out;
    if (here->second.closed()) out.push_back({Verb::open, "", s.agent_at});
    if (!s.inventory) {
      for (const auto& o : here->second.contents)
        if (class_of(o) == s.task.object_class) out.push_back({Verb::take, o, s.agent_at});
    } else {
      out.push_back({Verb::put, *s.inventory, s.agent_at});
      for (Verb v : {Verb::heat, Verb::clean, Verb::cool}) out.push_back({v, *s.inventory, s.agent_at});
    }
    if (class_of(s.agent_at) == "desklamp") out.push_back({Verb::use, "", s.agent_at});
    return out;
  };
  const auto start = initial_state(ctx);
  std::deque<std::pair<HouseholdState, int>> frontier{{start, 0}};
  std::vector<HouseholdState> seen{start};
  while (!frontier.empty()) {
    auto [s, d] = frontier.front();
    frontier.pop_front();
    if (d > 12) break;
    for (const auto& a : successors(s)) {
      auto next = apply_household(s, a, ctx).state;
      if (check_household_success(next, ctx)) return d + 1;
      if (std::find(seen.begin(), seen.end(), next) != seen.end()) continue;
      seen.push_back(next);
      frontier.push_back({std::move(next), d + 1});
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("the mug walkthrough room renders its opening observation") {
  const auto ctx = support::mug_walkthrough_context();
  const auto s = initial_state(ctx);
  CHECK(initial_observation(s) ==
        support::mug_walkthrough_transcript().initial_observation);
  CHECK(HouseholdEnv{}.initial_observation(s, ctx) == support::mug_walkthrough_transcript().initial_observation);
}

TEST_CASE("closed receptacles hide their contents until opened") {
  const auto ctx = support::mug_walkthrough_context();
  auto s = initial_state(ctx);
  auto r = apply_household(s, {Verb::go, "", "drawer 1"}, ctx);
  CHECK(r.text == "The drawer 1 is closed.");
  CHECK(apply_household(r.state, {Verb::take, "creditcard 1", "drawer 1"}, ctx).text == kNothingHappens);
  r = apply_household(r.state, {Verb::open, "", "drawer 1"}, ctx);
  CHECK(r.text == "You open the drawer 1. The drawer 1 is open. In it, you see a creditcard 1.");
  r = apply_household(r.state, {Verb::take, "creditcard 1", "drawer 1"}, ctx);
  CHECK(r.text == "You pick up the creditcard 1 from the drawer 1.");
  CHECK(r.state.inventory == std::optional<std::string>("creditcard 1"));
}

TEST_CASE("impossible actions leave the state untouched") {
  const auto ctx = support::mug_walkthrough_context();
  const auto s = initial_state(ctx);
  for (const HouseholdAction& a : {HouseholdAction{Verb::take, "mug 1", "diningtable 1"},
                                  HouseholdAction{Verb::put, "mug 1", "sidetable 1"},
                                  HouseholdAction{Verb::go, "", "kitchen 9"},
                                  HouseholdAction{Verb::use, "", "desklamp 1"}}) {
    const auto r = apply_household(s, a, ctx);
    CHECK(r.text == kNothingHappens);
    CHECK(r.state == s);
  }
}

TEST_CASE("context generation is deterministic and never pre-solved") {
  for (auto pool : {PoolId::id_dist, PoolId::ood_dist})
    for (auto variant : {Variant::standard, Variant::ambiguous, Variant::multiround})
      for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto a = generate_context(seed, default_pool(pool), variant);
        CHECK(a == generate_context(seed, default_pool(pool), variant));
        CHECK_FALSE(check_household_success(initial_state(a), a));
        if (variant == Variant::ambiguous) {
          CHECK_FALSE(a.target_instances.empty());
          if (a.task.kind == TaskKind::pick2) CHECK(a.target_instances.size() == 2);
        }
      }
}

TEST_CASE("the two layout pools do not share layouts") {
  std::set<std::string> id;
  for (const auto& l : default_pool(PoolId::id_dist).layouts) id.insert(l.name);
  for (const auto& l : default_pool(PoolId::ood_dist).layouts) CHECK(id.count(l.name) == 0);
}

TEST_CASE("expert plans match breadth-first shortest plans on pick tasks") {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 40 && seed < 2000; ++seed) {
    const auto ctx = generate_context(seed, default_pool(PoolId::id_dist), Variant::standard);
    if (ctx.task.kind != TaskKind::pick && ctx.task.kind != TaskKind::examine) continue;
    CAPTURE(seed);
    const auto plan = expert_household_plan(initial_state(ctx), ctx);
    CHECK(static_cast<int>(plan.size()) == bfs_shortest(ctx));
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("multiround hands out a new task after each completion") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ctx = generate_context(seed, default_pool(PoolId::id_dist), Variant::multiround);
    ExpertPolicy expert;
    RuleOracle oracle(ctx);
    RunLimits limits;
    limits.horizon = 200;
    limits.max_tasks = 3;
    const auto r = run_episode(HouseholdEnv{}, ctx, expert, oracle, limits, "m");
    CHECK(r.tasks_completed == 3);
    CHECK(r.outcome == Outcome::success);
    int announcements = 0;
    for (const auto& st : r.steps)
      announcements += st.observation.text.find(kNextTaskPrefix) != std::string::npos ? 1 : 0;
    // The room rolls on to a fresh task after every completion, including the last one.
    CHECK(announcements == 3);
  }
}

TEST_CASE("action space lists only entities in the room") {
  const auto ctx = support::mug_walkthrough_context();
  const auto space = action_space(initial_state(ctx));
  CHECK_FALSE(space.empty());
  std::set<std::string> recs;
  for (const auto& r : ctx.receptacles) recs.insert(r.name);
  for (const auto& a : space) CHECK(recs.count(a.receptacle) == 1);
}
