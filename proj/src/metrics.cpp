#include "inquire/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "inquire/errors.hpp"
#include "inquire/text.hpp"

namespace inquire {

using nlohmann::json;

std::string_view to_string(GroupKey k) {
  switch (k) {
    case GroupKey::policy: return "policy";
    case GroupKey::env: return "env";
    case GroupKey::variant: return "variant";
    case GroupKey::task: return "task";
    case GroupKey::layout: return "layout";
  }
  return "?";
}

GroupKey parse_group_key(std::string_view s) {
  for (GroupKey k : {GroupKey::policy, GroupKey::env, GroupKey::variant, GroupKey::task, GroupKey::layout})
    if (to_string(k) == s) return k;
  throw Error("unknown grouping key '" + std::string(s) + "'");
}

MeanStd mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(xs.size()))};
}

std::string one_decimal(double v) {
  const double r = std::floor(v * 10.0 + 0.5 + 1e-9) / 10.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", r);
  return buf;
}

namespace {

std::string key_value(const EpisodeRecord& r, GroupKey k) {
  switch (k) {
    case GroupKey::policy: return r.policy;
    case GroupKey::env: return std::string(to_string(r.context.env_kind));
    case GroupKey::variant: return std::string(to_string(r.context.variant));
    case GroupKey::task: return std::string(to_string(r.context.task.kind));
    case GroupKey::layout: return r.context.layout_name;
  }
  return {};
}

MetricsRow aggregate(const std::vector<const EpisodeRecord*>& group) {
  MetricsRow row;
  std::vector<double> len_s, len_a, act_s, act_a, rewards;
  double questions = 0.0;
  for (const auto* r : group) {
    const bool ok = r->outcome == Outcome::success;
    ++row.episodes;
    len_a.push_back(r->length());
    act_a.push_back(r->physical_actions());
    rewards.push_back(r->total_reward());
    if (ok) {
      ++row.successes;
      len_s.push_back(r->length());
      act_s.push_back(r->physical_actions());
      questions += r->questions();
    }
  }
  row.success_rate = 100.0 * row.successes / row.episodes;
  row.length_success = mean_std(len_s);
  row.length_all = mean_std(len_a);
  row.actions_success = mean_std(act_s);
  row.actions_all = mean_std(act_a);
  row.questions_success = row.successes ? questions / row.successes : 0.0;
  row.reward = mean_std(rewards).mean;
  return row;
}

}  // namespace

MetricsTable compute_metrics(const std::vector<EpisodeRecord>& records, std::vector<GroupKey> keys) {
  if (records.empty()) throw EmptyGroup("no episode records to aggregate");
  // Sort within groups by episode id so the floating-point sums do not
  // depend on the order the records arrived in.
  std::map<std::vector<std::string>, std::vector<const EpisodeRecord*>> groups;
  for (const auto& r : records) {
    std::vector<std::string> label;
    for (auto k : keys) label.push_back(key_value(r, k));
    groups[label].push_back(&r);
  }
  MetricsTable table;
  table.keys = keys;
  for (auto& [label, group] : groups) {
    std::stable_sort(group.begin(), group.end(), [](const EpisodeRecord* a, const EpisodeRecord* b) {
      return a->episode_id < b->episode_id;
    });
    auto row = aggregate(group);
    for (std::size_t i = 0; i < keys.size(); ++i) row.group[std::string(to_string(keys[i]))] = label[i];
    table.rows.push_back(std::move(row));
  }
  return table;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "text") return ReportFormat::text;
  if (s == "structured" || s == "json") return ReportFormat::structured;
  if (s == "plot-data" || s == "csv") return ReportFormat::plot_data;
  throw UnsupportedFormat("unsupported report format '" + std::string(s) +
                          "' (expected text, structured or plot-data)");
}

// ---------------------------------------------------------------------------

json to_json(const MetricsTable& table) {
  const auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
  json keys = json::array();
  for (auto k : table.keys) keys.push_back(std::string(to_string(k)));
  json rows = json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"group", r.group},
                    {"episodes", r.episodes},
                    {"successes", r.successes},
                    {"success_rate", r.success_rate},
                    {"length_success", ms(r.length_success)},
                    {"length_all", ms(r.length_all)},
                    {"actions_success", ms(r.actions_success)},
                    {"actions_all", ms(r.actions_all)},
                    {"questions_success", r.questions_success},
                    {"reward", r.reward}});
  return {{"format", "inquire.metrics"}, {"version", 1}, {"keys", keys}, {"rows", rows},
          {"std", "population"}};
}

MetricsTable metrics_from_json(const json& j) {
  if (j.value("format", "") != "inquire.metrics") throw FormatError("not a metrics document");
  const auto ms = [](const json& m) { return MeanStd{m.at("mean").get<double>(), m.at("std").get<double>()}; };
  MetricsTable t;
  for (const auto& k : j.at("keys")) t.keys.push_back(parse_group_key(k.get<std::string>()));
  for (const auto& r : j.at("rows")) {
    MetricsRow row;
    row.group = r.at("group").get<std::map<std::string, std::string>>();
    row.episodes = r.at("episodes").get<int>();
    row.successes = r.at("successes").get<int>();
    row.success_rate = r.at("success_rate").get<double>();
    row.length_success = ms(r.at("length_success"));
    row.length_all = ms(r.at("length_all"));
    row.actions_success = ms(r.at("actions_success"));
    row.actions_all = ms(r.at("actions_all"));
    row.questions_success = r.at("questions_success").get<double>();
    row.reward = r.at("reward").get<double>();
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string label_of(const MetricsRow& r, const std::vector<GroupKey>& keys, GroupKey skip) {
  std::vector<std::string> parts;
  for (auto k : keys)
    if (k != skip) parts.push_back(r.group.at(std::string(to_string(k))));
  return parts.empty() ? "all" : text::join(parts, "/");
}

std::string pm(const MeanStd& m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f", m.mean, m.std);
  return buf;
}

std::string pad(std::string s, std::size_t w) {
  // "±" is two bytes but one column.
  std::size_t cols = 0;
  for (unsigned char c : s) cols += (c & 0xC0) != 0x80 ? 1 : 0;
  if (cols < w) s.append(w - cols, ' ');
  return s;
}

const std::vector<std::pair<std::string, std::string>>& household_columns() {
  static const std::vector<std::pair<std::string, std::string>> cols = {
      {"pick", "Pick"}, {"examine", "Examine"}, {"clean", "Clean"},
      {"heat", "Heat"}, {"cool", "Cool"},       {"pick2", "Pick 2"}};
  return cols;
}

std::string text_report(const MetricsTable& t) {
  std::ostringstream out;
  const bool by_task = std::find(t.keys.begin(), t.keys.end(), GroupKey::task) != t.keys.end();

  if (by_task) {
    // Success rate (%), one column per household task kind.
    std::map<std::string, std::map<std::string, const MetricsRow*>> pivot;
    for (const auto& r : t.rows) pivot[label_of(r, t.keys, GroupKey::task)][r.group.at("task")] = &r;
    out << pad("Success rate (%)", 28);
    for (const auto& [k, title] : household_columns()) out << pad(title, 9);
    out << "All\n";
    for (const auto& [label, cells] : pivot) {
      out << pad(label, 28);
      int n = 0, s = 0;
      for (const auto& [k, title] : household_columns()) {
        const auto it = cells.find(k);
        out << pad(it == cells.end() ? "-" : one_decimal(it->second->success_rate), 9);
      }
      for (const auto& [k, r] : cells) {
        n += r->episodes;
        s += r->successes;
      }
      out << one_decimal(100.0 * s / n) << "\n";
    }
    out << "\n";
  }

  out << pad("Group", 40) << pad("N", 6) << pad("Succ %", 8) << pad("Length [Succ]", 15)
      << pad("Length [All]", 15) << pad("# Actions", 12) << pad("Questions", 11) << "Reward\n";
  for (const auto& r : t.rows) {
    char q[32], rw[32];
    std::snprintf(q, sizeof q, "%.2f", r.questions_success);
    std::snprintf(rw, sizeof rw, "%.2f", r.reward);
    out << pad(label_of(r, t.keys, GroupKey{-1}), 40) << pad(std::to_string(r.episodes), 6)
        << pad(one_decimal(r.success_rate), 8) << pad(pm(r.length_success), 15)
        << pad(pm(r.length_all), 15) << pad(pm(r.actions_all), 12) << pad(q, 11) << rw << "\n";
  }
  out << "\nmean±std uses the population standard deviation; length counts the observations of an "
         "episode (actions + 1); questions are averaged over successful episodes.\n";
  return out.str();
}

std::string plot_data(const MetricsTable& t) {
  std::ostringstream out;
  out << "group,metric,value\n";
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : t.rows) {
    const auto g = label_of(r, t.keys, GroupKey{-1});
    const auto row = [&](const char* metric, double v) { out << g << "," << metric << "," << num(v) << "\n"; };
    row("episodes", r.episodes);
    row("success_rate", r.success_rate);
    row("length_success_mean", r.length_success.mean);
    row("length_success_std", r.length_success.std);
    row("length_all_mean", r.length_all.mean);
    row("length_all_std", r.length_all.std);
    row("actions_success_mean", r.actions_success.mean);
    row("actions_all_mean", r.actions_all.mean);
    row("actions_all_std", r.actions_all.std);
    row("questions_success", r.questions_success);
    row("reward", r.reward);
  }
  return out.str();
}

}  // namespace

std::string emit_report(const MetricsTable& table, ReportFormat format) {
  if (table.rows.empty()) throw EmptyGroup("metrics table has no rows");
  switch (format) {
    case ReportFormat::text: return text_report(table);
    case ReportFormat::structured: return to_json(table).dump(2) + "\n";
    case ReportFormat::plot_data: return plot_data(table);
  }
  throw UnsupportedFormat("unsupported report format");
}

}  // namespace inquire
