#include <doctest.h>

#include <algorithm>

#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/oracle.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"
#include "support.hpp"

using namespace inquire;
using namespace inquire::tabletop;

namespace {

// Sort oracle: rank red blocks by rendered y, ascending.
std::size_t sorted_rank_target(const std::vector<TableObject>& objs, std::size_t rank) {
  std::vector<std::pair<double, std::size_t>> ys;
  for (std::size_t i = 0; i < objs.size(); ++i)
    if (objs[i].kind == ObjectKind::block && objs[i].color == "red") ys.push_back({objs[i].pose.y, i});
  std::sort(ys.begin(), ys.end());
  return ys.at(rank - 1).second;
}

}  // namespace

TEST_CASE("resolve_relative agrees with sorting by the second coordinate") {
  int n = 0;
  for (std::uint64_t seed = 0; n < 1000; ++seed) {
    const int x = 2 + static_cast<int>(seed % 7);
    const auto ctx = generate_tabletop(TaskKind::tabletop1, {x, 0}, seed);
    const auto target = *ctx.target_block;
    const auto phrase = relative_position_phrase(ctx.table, "red", target);
    CHECK(resolve_relative(ctx.table, "red", phrase) == target);
    for (std::size_t rank = 1; rank <= static_cast<std::size_t>(x); ++rank) {
      const auto p = "The " + text::ordinal_word(rank) + " red block from the left.";
      CHECK(resolve_relative(ctx.table, "red", p) == sorted_rank_target(ctx.table, rank));
    }
    ++n;
  }
}

TEST_CASE("generated scenes respect bounds, separation and parameters") {
  for (auto kind : {TaskKind::tabletop1, TaskKind::tabletop2, TaskKind::tabletop3})
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Params p{kind == TaskKind::tabletop2 ? 0 : 4, kind == TaskKind::tabletop1 ? 0 : 3};
      const auto ctx = generate_tabletop(kind, p, seed);
      CHECK(ctx == generate_tabletop(kind, p, seed));
      int reds = 0, bases = 0;
      for (const auto& o : ctx.table) {
        CHECK(in_bounds(o.pose));
        reds += o.kind == ObjectKind::block && o.color == "red" ? 1 : 0;
        bases += o.kind == ObjectKind::base ? 1 : 0;
      }
      CHECK(reds == p.x);
      CHECK(bases == p.y);
      CHECK_FALSE(check_tabletop_success(initial_state(ctx), ctx));
    }
}

TEST_CASE("parameters outside the supported range are rejected") {
  CHECK_THROWS_AS(generate_tabletop(TaskKind::tabletop1, {0, 0}, 1), ParamOutOfRange);
  CHECK_THROWS_AS(generate_tabletop(TaskKind::tabletop1, {9, 0}, 1), ParamOutOfRange);
  CHECK_THROWS_AS(generate_tabletop(TaskKind::tabletop2, {0, 7}, 1), ParamOutOfRange);
}

TEST_CASE("scene captions parse back to the same objects") {
  const auto ctx = generate_tabletop(TaskKind::tabletop3, {3, 3}, 11);
  const auto s = initial_state(ctx);
  const auto parsed = parse_scene(render_scene(s, ctx.seed));
  CHECK(parsed.size() == ctx.table.size());
  CHECK(observations_match(EnvKind::tabletop, render_scene(s, 1), render_scene(s, 2), 1e-2));
}

TEST_CASE("a move picks the nearest block within the snap radius") {
  const auto ctx = support::red_block_walkthrough_context();
  const auto s = initial_state(ctx);
  const auto miss = apply_move(s, {{0.3, 0.0}, {0.5, 0.0}}, ctx);
  for (std::size_t i = 0; i < s.objects.size(); ++i) CHECK(miss.state.objects[i].pose == s.objects[i].pose);
  const auto hit = apply_move(s, {{0.71, 0.22}, {0.65, 0.03}}, ctx);
  CHECK(distance(hit.state.objects[4].pose, {0.65, 0.03}) <= kJitter * 1.5);
  CHECK(check_tabletop_success(hit.state, ctx));
}

TEST_CASE("the question budget refuses the y-th color question") {
  const auto ctx = generate_tabletop(TaskKind::tabletop2, {0, 3}, 5);
  RuleOracle oracle(ctx);
  WorldState s = initial_state(ctx);
  const TabletopEnv env;
  for (int base = 1; base <= 3; ++base) {
    const auto q = "Which color should be put on the # " + std::to_string(base) + " base?";
    const auto r = step(s, Ask{q}, ctx, oracle, env);
    if (base < 3) {
      CHECK(r.observation.text.find("base") != std::string::npos);
    } else {
      CHECK(r.observation.text == kBudgetSpent);
    }
    s = r.state;
  }
}

TEST_CASE("the red block walkthrough replays within tolerance") {
  const auto r = replay_transcript(support::red_block_walkthrough_context(), support::red_block_walkthrough_transcript());
  for (const auto& m : r.mismatches) CAPTURE(m.actual);
  CHECK(r.ok());
  CHECK(r.record.outcome == Outcome::success);
  CHECK(r.record.length() == 5);
}
