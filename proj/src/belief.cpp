#include "inquire/belief.hpp"

#include <algorithm>
#include <regex>

#include "inquire/household.hpp"
#include "inquire/oracle.hpp"
#include "inquire/text.hpp"

namespace inquire {

std::vector<std::string> parse_article_list(std::string_view list) {
  std::vector<std::string> out;
  for (const auto& raw : text::split(list, ',')) {
    std::string_view v = text::trim(raw);
    if (v.substr(0, 4) == "and ") v.remove_prefix(4);
    if (v.substr(0, 2) == "a ") v.remove_prefix(2);
    else if (v.substr(0, 3) == "an ") v.remove_prefix(3);
    if (!v.empty() && v != "nothing") out.emplace_back(v);
  }
  return out;
}

std::vector<std::string> instances_in(std::string_view text) {
  static const std::regex inst(R"(\b([a-z]+ \d+)\b)");
  std::vector<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), inst); it != std::sregex_iterator(); ++it)
    out.push_back((*it)[1].str());
  return out;
}

std::optional<std::string> HouseholdBelief::location_of(const std::string& instance) const {
  if (holding == instance) return std::nullopt;
  for (const auto& [rec, items] : contents)
    if (std::find(items.begin(), items.end(), instance) != items.end()) return rec;
  const auto t = told.find(instance);
  if (t == told.end()) return std::nullopt;
  const auto seen = seen_at.find(t->second.receptacle);
  if (seen != seen_at.end() && seen->second > t->second.step) return std::nullopt;  // looked, not there
  return t->second.receptacle;
}

std::vector<std::string> HouseholdBelief::known_instances(const std::string& cls) const {
  std::vector<std::string> out;
  const auto add = [&](const std::string& inst) {
    if (household::class_of(inst) != cls) return;
    if (std::find(out.begin(), out.end(), inst) != out.end()) return;
    if (location_of(inst)) out.push_back(inst);
  };
  for (const auto& inst : told_order) add(inst);
  std::vector<std::pair<std::size_t, std::string>> sightings;
  for (const auto& [rec, items] : contents)
    for (const auto& inst : items) sightings.emplace_back(seen_at.count(rec) ? seen_at.at(rec) : 0, inst);
  std::stable_sort(sightings.begin(), sightings.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [step, inst] : sightings) add(inst);
  return out;
}

namespace {

const std::regex& on_re() {
  static const std::regex re(R"(^On the ([a-z]+ \d+), you see (.*?)\.(?: |$))");
  return re;
}

void apply_env(HouseholdBelief& b, const HouseholdAction& a, const std::string& obs,
               std::size_t step) {
  std::smatch m;
  const std::string& r = a.receptacle;
  switch (a.verb) {
    case Verb::go:
      if (std::regex_search(obs, m, on_re()) && m[1].str() == r) {
        b.at = r;
        b.contents[r] = parse_article_list(m[2].str());
        b.seen_at[r] = step;
        b.closed.erase(r);
      } else if (obs == "The " + r + " is closed.") {
        b.at = r;
        b.closed.insert(r);
        b.open.erase(r);
      }
      break;
    case Verb::open: {
      const std::string head = "You open the " + r + ". The " + r + " is open. In it, you see ";
      if (obs.compare(0, head.size(), head) == 0) {
        auto rest = obs.substr(head.size());
        const auto dot = rest.find('.');
        b.contents[r] = parse_article_list(rest.substr(0, dot));
        b.seen_at[r] = step;
        b.open.insert(r);
        b.closed.erase(r);
      }
      break;
    }
    case Verb::close:
      if (obs == "You close the " + r + ".") {
        b.open.erase(r);
        b.closed.insert(r);
      }
      break;
    case Verb::take:
      if (obs.rfind("You pick up the " + a.object + " from the " + r + ".", 0) == 0) {
        b.holding = a.object;
        auto& items = b.contents[r];
        items.erase(std::remove(items.begin(), items.end(), a.object), items.end());
      }
      break;
    case Verb::put:
      if (obs.rfind("You put the " + a.object + " in/on the " + r + ".", 0) == 0) {
        b.holding.reset();
        b.contents[r].push_back(a.object);
      }
      break;
    case Verb::heat:
    case Verb::clean:
    case Verb::cool:
      if (obs.rfind("You " + verb_name(a.verb) + " the " + a.object + " using the " + r + ".", 0) == 0) {
        auto& st = b.status[a.object];
        if (a.verb == Verb::heat) st.heated = true;
        if (a.verb == Verb::clean) st.cleaned = true;
        if (a.verb == Verb::cool) st.cooled = true;
      }
      break;
    case Verb::use:
      if (obs.rfind("You turn on the " + r + ".", 0) == 0 && b.holding) b.status[*b.holding].examined = true;
      break;
  }
}

}  // namespace

HouseholdBelief replay_household(std::string_view initial_observation,
                                 std::span<const StepRecord> steps) {
  HouseholdBelief b;
  static const std::regex intro(R"(you see (.*)\. Your task is to: (.*)$)");
  std::smatch m;
  const std::string init(initial_observation);
  if (std::regex_search(init, m, intro)) {
    b.receptacles = parse_article_list(m[1].str());
    if (auto t = household::parse_instruction(m[2].str())) b.task = *t;
  }

  static const std::regex fact(R"(([a-z]+ \d+) is in ([a-z]+ \d+))");
  const std::string next_prefix(household::kNextTaskPrefix);

  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    const std::string& obs = s.observation.text;
    const std::size_t step = i + 1;

    if (const auto* p = std::get_if<Physical>(&s.action)) {
      if (const auto* ha = std::get_if<HouseholdAction>(&p->action)) apply_env(b, *ha, obs, step);
      if (const auto pos = obs.find(next_prefix); pos != std::string::npos) {
        if (auto t = household::parse_instruction(obs.substr(pos + next_prefix.size()))) {
          b.task = *t;
          ++b.task_number;
          b.task_start = step;
        }
      }
    } else if (const auto* q = std::get_if<Ask>(&s.action)) {
      const auto query = classify_question(q->text);
      const bool answered = s.observation.kind == ObsKind::answer;
      if (query.kind == QueryKind::where_is) {
        ++b.where_asked[query.subject];
        int named = 0;
        if (answered)
          for (auto it = std::sregex_iterator(obs.begin(), obs.end(), fact); it != std::sregex_iterator(); ++it) {
            const auto inst = (*it)[1].str();
            if (household::class_of(inst) != query.subject) continue;
            if (!b.told.count(inst)) b.told_order.push_back(inst);
            b.told[inst] = {(*it)[2].str(), step};
            ++named;
          }
        if (named == 0) ++b.empty_answers[query.subject];
      } else if (query.kind == QueryKind::which_preferred) {
        b.preference_asked = true;
        if (answered && obs.rfind("I mean ", 0) == 0) {
          auto named = instances_in(obs);
          named.erase(std::remove_if(named.begin(), named.end(),
                                     [&](const std::string& n) {
                                       return household::class_of(n) != query.subject;
                                     }),
                      named.end());
          if (!named.empty()) b.preferred = std::move(named);
        }
      }
    }
    if (!std::holds_alternative<Think>(s.action)) {
      b.last_action = s.action;
      b.last_observation = obs;
    }
  }
  return b;
}

}  // namespace inquire
