#include <doctest.h>

#include "inquire/core.hpp"
#include "inquire/errors.hpp"
#include "inquire/harness.hpp"
#include "inquire/household.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"

using namespace inquire;

namespace {
const Environment& house() { return environment_for(EnvKind::household); }
const Environment& table() { return environment_for(EnvKind::tabletop); }
}  // namespace

TEST_CASE("augmented prefixes route to think and ask") {
  CHECK(parse_augmented("think: hello", house()) == AugmentedAction{Think{"hello"}});
  CHECK(parse_augmented("ask: Where is the mug?", house()) == AugmentedAction{Ask{"Where is the mug?"}});
  CHECK(parse_augmented("THINK: upper", house()) == AugmentedAction{Think{"upper"}});
  CHECK_THROWS_AS(parse_augmented("think:", house()), MalformedAction);
  CHECK_THROWS_AS(parse_augmented("ask:   ", house()), MalformedAction);
}

TEST_CASE("household actions parse and render back") {
  const char* lines[] = {"go to diningtable 1",       "take mug 1 from diningtable 1",
                         "put mug 1 in/on sidetable 1", "open drawer 2",
                         "close drawer 2",            "heat mug 2 with microwave 1",
                         "clean apple 1 with sinkbasin 1", "cool egg 3 with fridge 1",
                         "use desklamp 1"};
  for (const char* l : lines) {
    CAPTURE(l);
    const auto a = parse_augmented(l, house());
    REQUIRE(std::holds_alternative<Physical>(a));
    CHECK(render(a) == l);
  }
}

TEST_CASE("household parse errors locate the offending token") {
  try {
    household::parse_household_action("fly to bed 1");
    FAIL("expected MalformedAction");
  } catch (const MalformedAction& e) {
    CHECK(e.offset() == 0);
    CHECK(e.length() == 3);
  }
  CHECK_THROWS_AS(household::parse_household_action("take mug from table 1"), MalformedAction);
  CHECK_THROWS_AS(household::parse_household_action("go to bed 1 now"), MalformedAction);
  CHECK_THROWS_AS(household::parse_household_action(""), MalformedAction);
}

TEST_CASE("move_to parses with loose whitespace and rejects the rest") {
  const auto m = tabletop::parse_move("move_to( 0.7,0.23 , 0.65, 0.03 )");
  CHECK(m.pick == Pose{0.7, 0.23});
  CHECK(m.place == Pose{0.65, 0.03});
  CHECK(render(m) == "move_to(0.7, 0.23, 0.65, 0.03)");
  CHECK_THROWS_WITH_AS(tabletop::parse_move("move the block"), "No function call detected.", MalformedAction);
  CHECK_THROWS_AS(tabletop::parse_move("move_to(0.5, 0.1, 1.5, 0.0)"), MalformedAction);
  CHECK(std::holds_alternative<Think>(parse_augmented("think: sort first", table())));
}

TEST_CASE("coordinates render like the scene captions") {
  CHECK(text::coord(0.7) == "0.7");
  CHECK(text::coord(-0.06) == "-0.06");
  CHECK(text::coord(0.5) == "0.5");
  CHECK(text::coord(0.0) == "0.0");
  CHECK(text::ordinal_word(2) == "second");
  CHECK(text::ordinal_rank("third") == 3);
}
