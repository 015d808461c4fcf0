#include <doctest.h>

#include <algorithm>

#include "inquire/errors.hpp"
#include "inquire/metrics.hpp"
#include "inquire/random.hpp"
#include "support.hpp"

using namespace inquire;

namespace {

EpisodeRecord base_record() {
  return replay_transcript(support::mug_walkthrough_context(), support::mug_walkthrough_transcript()).record;
}

std::vector<EpisodeRecord> three_episodes() {
  std::vector<EpisodeRecord> recs(3, base_record());
  for (int i = 0; i < 3; ++i) recs[i].episode_id = "e" + std::to_string(i);
  recs[2].outcome = Outcome::timeout;
  recs[2].steps.resize(6);
  return recs;
}

}  // namespace

TEST_CASE("two successes out of three report as 66.7") {
  const auto t = compute_metrics(three_episodes(), {GroupKey::policy});
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].episodes == 3);
  CHECK(t.rows[0].successes == 2);
  CHECK(one_decimal(t.rows[0].success_rate) == "66.7");
  CHECK(t.rows[0].length_success.mean == 10.0);
  CHECK(t.rows[0].length_success.std == 0.0);
  CHECK(t.rows[0].length_all.mean == doctest::Approx(27.0 / 3));
  CHECK(t.rows[0].questions_success == 1.0);
  CHECK(emit_report(t, ReportFormat::text).find("66.7") != std::string::npos);
}

TEST_CASE("one decimal rounds halves up") {
  CHECK(one_decimal(12.25) == "12.3");
  CHECK(one_decimal(100.0) == "100.0");
  CHECK(one_decimal(0.04) == "0.0");
  CHECK(one_decimal(200.0 / 3) == "66.7");
}

TEST_CASE("population standard deviation") {
  const auto m = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
  CHECK(m.mean == 5.0);
  CHECK(m.std == 2.0);
  CHECK(mean_std({}).mean == 0.0);
}

TEST_CASE("structured reports round-trip") {
  const auto t = compute_metrics(three_episodes(), {GroupKey::policy, GroupKey::task});
  const auto text = emit_report(t, ReportFormat::structured);
  CHECK(metrics_from_json(nlohmann::json::parse(text)) == t);
}

TEST_CASE("the text report has one column per household task kind") {
  const auto t = compute_metrics(three_episodes(), {GroupKey::policy, GroupKey::task});
  const auto text = emit_report(t, ReportFormat::text);
  const auto header = text.substr(0, text.find('\n'));
  std::size_t at = 0;
  for (const char* col : {"Pick", "Examine", "Clean", "Heat", "Cool", "Pick 2", "All"}) {
    const auto p = header.find(col, at);
    REQUIRE(p != std::string::npos);
    at = p + 1;
  }
}

TEST_CASE("plot data is one row per group and metric") {
  const auto t = compute_metrics(three_episodes(), {GroupKey::policy});
  const auto csv = emit_report(t, ReportFormat::plot_data);
  CHECK(csv.rfind("group,metric,value\n", 0) == 0);
  CHECK(csv.find("replay,success_rate,66.6") != std::string::npos);
}

TEST_CASE("empty input and unknown formats are refused") {
  CHECK_THROWS_AS(compute_metrics({}, {GroupKey::policy}), EmptyGroup);
  CHECK_THROWS_AS(emit_report(MetricsTable{}, ReportFormat::text), EmptyGroup);
  CHECK_THROWS_AS(parse_report_format("xlsx"), UnsupportedFormat);
  CHECK(parse_report_format("json") == ReportFormat::structured);
  CHECK(parse_report_format("plot-data") == ReportFormat::plot_data);
}

TEST_CASE("metrics do not depend on record order") {
  auto recs = three_episodes();
  for (int i = 0; i < 7; ++i) {
    auto r = base_record();
    r.episode_id = "x" + std::to_string(i);
    r.steps.resize(1 + i);
    r.outcome = i % 2 ? Outcome::failure : Outcome::success;
    recs.push_back(r);
  }
  const auto keys = std::vector<GroupKey>{GroupKey::policy, GroupKey::variant};
  const auto ref = compute_metrics(recs, keys);
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    rng.shuffle(recs);
    CHECK(compute_metrics(recs, keys) == ref);
  }
}

TEST_CASE("physical actions never exceed episode length") {
  const auto t = compute_metrics(three_episodes(), {GroupKey::env});
  for (const auto& r : t.rows) {
    CHECK(r.actions_all.mean <= r.length_all.mean);
    CHECK(r.actions_success.mean <= r.length_success.mean);
  }
}
