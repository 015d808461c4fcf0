#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "inquire/core.hpp"

namespace inquire {

enum class GroupKey { policy, env, variant, task, layout };
std::string_view to_string(GroupKey k);
GroupKey parse_group_key(std::string_view s);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population

  bool operator==(const MeanStd&) const = default;
};

MeanStd mean_std(const std::vector<double>& xs);

struct MetricsRow {
  std::map<std::string, std::string> group;  // key name -> value
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;  // percent
  MeanStd length_success;     // observations per episode (actions + 1), successes only
  MeanStd length_all;
  MeanStd actions_success;    // physical actions, successes only
  MeanStd actions_all;
  double questions_success = 0.0;  // mean asks per successful episode
  double reward = 0.0;             // mean total reward (tasks completed in multiround)

  bool operator==(const MetricsRow&) const = default;
};

struct MetricsTable {
  std::vector<GroupKey> keys;
  std::vector<MetricsRow> rows;  // sorted by group values

  bool operator==(const MetricsTable&) const = default;
};

// Groups records by `keys` and aggregates each group. The result does not
// depend on record order. Throws EmptyGroup when `records` is empty.
MetricsTable compute_metrics(const std::vector<EpisodeRecord>& records, std::vector<GroupKey> keys);

// One decimal, halves rounded up: 66.66 -> "66.7", 12.25 -> "12.3".
std::string one_decimal(double v);

enum class ReportFormat { text, structured, plot_data };
ReportFormat parse_report_format(std::string_view s);  // "text" | "structured" | "plot-data"

// text: success-rate table with one column per household task kind plus All
// (when grouped by task), followed by the efficiency table. structured: JSON.
// plot-data: CSV rows "group,metric,value". Throws EmptyGroup for an empty table.
std::string emit_report(const MetricsTable& table, ReportFormat format);

nlohmann::json to_json(const MetricsTable& table);
MetricsTable metrics_from_json(const nlohmann::json& j);

}  // namespace inquire
