#include "inquire/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "inquire/errors.hpp"
#include "inquire/household.hpp"
#include "inquire/tabletop.hpp"
#include "inquire/text.hpp"

namespace inquire {

std::string KnowledgeDoc::paragraph() const {
  return text::join(sentences, " ");
}

KnowledgeDoc build_knowledge(const Context& ctx) {
  KnowledgeDoc doc;
  for (const auto& p : ctx.placement) doc.sentences.push_back(p.instance + " is in " + p.receptacle + ".");
  return doc;
}

std::string_view to_string(QueryKind k) {
  switch (k) {
    case QueryKind::where_is: return "where-is";
    case QueryKind::which_preferred: return "which-preferred";
    case QueryKind::color_for_base: return "color-for-base";
    case QueryKind::relative_target: return "relative-target";
    case QueryKind::freeform: return "freeform";
  }
  return "?";
}

namespace {

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text::lower(s)) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '#') {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

OracleQuery classify_question(std::string_view question) {
  OracleQuery q;
  q.text = std::string(question);
  const auto lowered = text::lower(question);
  std::smatch m;

  static const std::regex relative(R"(which\s+([a-z]+)\s+block\s+should\s+i\s+(move|pick))");
  static const std::regex preferred(R"(which\s+([a-z]+)\s+do\s+you\s+prefer)");
  static const std::regex base(R"(which\s+colou?r\b.*?#\s*(\d+)\s+base)");

  if (std::regex_search(lowered, m, base)) {
    q.kind = QueryKind::color_for_base;
    q.base = std::stoi(m[1].str());
    return q;
  }
  if (std::regex_search(lowered, m, relative)) {
    q.kind = QueryKind::relative_target;
    q.subject = m[1].str();
    return q;
  }
  if (std::regex_search(lowered, m, preferred)) {
    q.kind = QueryKind::which_preferred;
    q.subject = m[1].str();
    return q;
  }

  const auto w = words_of(question);
  const auto where = std::find(w.begin(), w.end(), "where");
  if (where != w.end() && where + 1 != w.end()) {
    // The class is the noun after the last article; failing that, the last word.
    std::string subject = w.back();
    for (auto it = where + 1; it != w.end(); ++it)
      if ((*it == "the" || *it == "a" || *it == "an" || *it == "any") && it + 1 != w.end())
        subject = *(it + 1);
    q.kind = QueryKind::where_is;
    q.subject = subject;
    return q;
  }
  return q;
}

std::string answer(const OracleQuery& query, const Context& ctx) {
  switch (query.kind) {
    case QueryKind::where_is: {
      std::vector<std::string> facts;
      for (const auto& p : ctx.placement)
        if (household::class_of(p.instance) == query.subject)
          facts.push_back(p.instance + " is in " + p.receptacle);
      if (facts.empty()) return std::string(kNotSure);
      return text::join(facts, ", ") + ".";
    }
    case QueryKind::which_preferred: {
      const bool has_targets = !ctx.target_instances.empty() &&
                               household::class_of(ctx.target_instances.front()) == query.subject;
      if (!has_targets) return "I mean any " + query.subject + ".";
      return "I mean " + text::and_list(ctx.target_instances) + ".";
    }
    case QueryKind::color_for_base: {
      const auto it = ctx.color_map.find(query.base);
      if (it == ctx.color_map.end()) return std::string(kNotSure);
      return "You should put the " + it->second + " block on the # " + std::to_string(query.base) +
             " base.";
    }
    case QueryKind::relative_target: {
      if (!ctx.target_block) return std::string(kNotSure);
      const auto& target = ctx.table[*ctx.target_block];
      if (target.color != query.subject) return std::string(kNotSure);
      return tabletop::relative_position_phrase(ctx.table, target.color, *ctx.target_block);
    }
    case QueryKind::freeform:
      break;
  }
  return std::string(kNotSure);
}

std::string unhelpful_answer(const OracleQuery& query) {
  const std::string subject = query.subject.empty() ? "object" : query.subject;
  return "I am not sure. Could you remind me the information about each " + subject + "?";
}

std::string RuleOracle::answer(std::string_view question) {
  return inquire::answer(classify_question(question), ctx_);
}

NoisyOracle::NoisyOracle(std::unique_ptr<Oracle> base, Context ctx, double q, std::uint64_t seed,
                         NoiseMode mode)
    : base_(std::move(base)), ctx_(std::move(ctx)), q_(q), rng_(seed), mode_(mode) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error("noise probability must lie in [0, 1]");
}

std::string NoisyOracle::answer(std::string_view question) {
  // Draw first so the random stream does not depend on the base oracle.
  const bool noisy = rng_.bernoulli(q_);
  if (!noisy) return base_->answer(question);
  ++noisy_;
  const auto query = classify_question(question);
  if (mode_ == NoiseMode::wrong_target && query.kind == QueryKind::which_preferred) {
    std::vector<std::string> others;
    for (const auto& p : ctx_.placement)
      if (household::class_of(p.instance) == query.subject &&
          std::find(ctx_.target_instances.begin(), ctx_.target_instances.end(), p.instance) ==
              ctx_.target_instances.end())
        others.push_back(p.instance);
    if (!others.empty()) {
      std::sort(others.begin(), others.end());
      return "I mean " + rng_.pick(others) + ".";
    }
  }
  return unhelpful_answer(query);
}

std::string ScriptedOracle::answer(std::string_view question) {
  questions_.emplace_back(question);
  if (next_ < replies_.size()) return replies_[next_++];
  return std::string(kNotSure);
}

bool answer_is_correct(const OracleQuery& query, std::string_view reply, const Context& ctx) {
  if (query.kind != QueryKind::where_is) return false;
  std::set<std::pair<std::string, std::string>> truth;
  for (const auto& p : ctx.placement)
    if (household::class_of(p.instance) == query.subject) truth.emplace(p.instance, p.receptacle);
  if (truth.empty()) return false;

  static const std::regex fact(R"(([a-z]+ \d+) is in ([a-z]+ \d+))");
  std::set<std::pair<std::string, std::string>> claimed;
  const std::string s(reply);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), fact); it != std::sregex_iterator(); ++it)
    claimed.emplace((*it)[1].str(), (*it)[2].str());
  return claimed == truth;
}

ProbeResult probe_accuracy(const OracleFactory& make, std::uint64_t seed, int scenarios,
                           int questions_per) {
  ProbeResult out;
  Rng rng(derive_seed(seed, 0x70726f6265ULL));
  const auto& pool = household::default_pool(household::PoolId::id_dist);
  for (int s = 0; s < scenarios; ++s) {
    const auto ctx = household::generate_context(rng.next(), pool, Variant::standard);
    std::set<std::string> class_set;
    for (const auto& p : ctx.placement) class_set.insert(household::class_of(p.instance));
    const std::vector<std::string> classes(class_set.begin(), class_set.end());

    auto oracle = make(ctx);
    int correct = 0;
    for (int i = 0; i < questions_per; ++i) {
      const auto& cls = rng.pick(classes);
      const std::string question =
          i % 2 == 0 ? "Where is the " + cls + "?" : "Where can I find the " + cls + "?";
      if (answer_is_correct(classify_question(question), oracle->answer(question), ctx)) ++correct;
    }
    out.per_scenario.push_back(100.0 * correct / questions_per);
  }
  if (out.per_scenario.empty()) return out;
  double sum = 0.0;
  for (double v : out.per_scenario) sum += v;
  out.mean = sum / out.per_scenario.size();
  double ss = 0.0;
  for (double v : out.per_scenario) ss += (v - out.mean) * (v - out.mean);
  out.stddev = std::sqrt(ss / out.per_scenario.size());
  return out;
}

}  // namespace inquire
