// Copyright 2026 AQA Workbench contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aqa/questengine.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>

#include <json.hpp>

#include "aqa/soundbank.hpp"

using nlohmann::json;

namespace aqa::quest {

namespace {

struct OpInfo {
  Op op;
  const char* name;
  int arity;      // number of set/int inputs
  bool needs_arg;
};

constexpr std::array<OpInfo, 23> kOps = {{
    {Op::kScene, "scene", 0, false},
    {Op::kFilterInstrument, "filter_instrument", 1, true},
    {Op::kFilterNote, "filter_note", 1, true},
    {Op::kFilterBrightness, "filter_brightness", 1, true},
    {Op::kFilterLoudness, "filter_loudness", 1, true},
    {Op::kFilterGlobalPosition, "filter_global_position", 1, true},
    {Op::kRelateBefore, "relate_before", 1, false},
    {Op::kRelateAfter, "relate_after", 1, false},
    {Op::kNth, "nth", 1, true},
    {Op::kUnique, "unique", 1, false},
    {Op::kQueryInstrument, "query_instrument", 1, false},
    {Op::kQueryNote, "query_note", 1, false},
    {Op::kQueryBrightness, "query_brightness", 1, false},
    {Op::kQueryLoudness, "query_loudness", 1, false},
    {Op::kQueryAbsolutePosition, "query_absolute_position", 1, false},
    {Op::kQueryRelativePosition, "query_relative_position", 2, false},
    {Op::kQueryGlobalPosition, "query_global_position", 1, false},
    {Op::kCount, "count", 1, false},
    {Op::kCountDistinctInstruments, "count_distinct_instruments", 1, false},
    {Op::kExist, "exist", 1, false},
    {Op::kCompareEqual, "compare_equal", 2, false},
    {Op::kCompareMore, "compare_more", 2, false},
    {Op::kCompareFewer, "compare_fewer", 2, false},
}};

const OpInfo& info_for(Op op) {
  for (const auto& i : kOps) {
    if (i.op == op) return i;
  }
  throw_data("unknown op enum value");
}

bool is_query(Op op) {
  switch (op) {
    case Op::kQueryInstrument:
    case Op::kQueryNote:
    case Op::kQueryBrightness:
    case Op::kQueryLoudness:
    case Op::kQueryAbsolutePosition:
    case Op::kQueryGlobalPosition:
      return true;
    default:
      return false;
  }
}

bool is_compare(Op op) {
  return op == Op::kCompareEqual || op == Op::kCompareMore ||
         op == Op::kCompareFewer;
}

// Terminals exempt from the permutation-degeneracy filter: counting and
// existence aggregates are legitimately often order-invariant.
bool is_aggregate_terminal(Op op) {
  return op == Op::kCount || op == Op::kCountDistinctInstruments ||
         op == Op::kExist || is_compare(op);
}

// A node value during execution: an ordered event set, an integer, or a
// final answer.
struct Value {
  enum class Kind { kSet, kInt, kAnswer } kind = Kind::kSet;
  std::vector<int> set;  // indices into sc.events, onset order
  int integer = 0;
  std::string answer;
};

}  // namespace

const char* op_name(Op op) { return info_for(op).name; }

Op op_from_name(const std::string& name) {
  for (const auto& i : kOps) {
    if (name == i.name) return i.op;
  }
  throw_data("unknown op name: " + name);
}

void validate_program(const Program& prog) {
  if (prog.empty()) throw_data("empty program");
  std::vector<bool> used(prog.size(), false);
  for (std::size_t i = 0; i < prog.size(); ++i) {
    const Node& n = prog[i];
    const OpInfo& info = info_for(n.op);
    if (static_cast<int>(n.inputs.size()) != info.arity) {
      throw_data(std::string("bad arity for ") + info.name);
    }
    for (int in : n.inputs) {
      if (in < 0 || in >= static_cast<int>(i)) {
        throw_data(std::string("input out of order for ") + info.name);
      }
      used[static_cast<std::size_t>(in)] = true;
    }
    if (info.needs_arg && n.arg.empty()) {
      throw_data(std::string("missing arg for ") + info.name);
    }
  }
  for (std::size_t i = 0; i + 1 < prog.size(); ++i) {
    if (!used[i]) throw_data("program has more than one terminal node");
  }
}

const std::vector<std::string>& ordinal_labels() {
  static const std::vector<std::string> kOrdinals = {
      "first",   "second",     "third",      "fourth",     "fifth",
      "sixth",   "seventh",    "eighth",     "ninth",      "tenth",
      "eleventh", "twelfth",   "thirteenth", "fourteenth", "fifteenth"};
  return kOrdinals;
}

const std::vector<std::string>& canonical_label_set() {
  static const std::vector<std::string> kLabels = [] {
    std::vector<std::string> v;
    for (const auto& n : bank::kNotes) v.push_back(n);          // 12
    for (const auto& i : bank::kInstruments) v.push_back(i);    // 6
    v.insert(v.end(), {"bright", "dark"});                      // 2
    v.insert(v.end(), {"loud", "quiet"});                       // 2
    for (const auto& o : ordinal_labels()) v.push_back(o);      // 15
    v.insert(v.end(), {"beginning", "middle", "end"});          // 3
    for (int c = 0; c <= 14; ++c) v.push_back(std::to_string(c));  // 15
    v.insert(v.end(), {"yes", "no"});                           // 2  -> 57
    return v;
  }();
  return kLabels;
}

const std::vector<std::string> kQuestionTypes = {
    "instrument",       "note",
    "brightness",       "loudness",
    "absolute_position", "relative_position",
    "global_position",  "count",
    "count_comparison", "count_instruments",
    "exist"};

int answer_domain_size(const std::string& question_type) {
  if (question_type == "note") return 12;
  if (question_type == "instrument") return 6;
  if (question_type == "brightness" || question_type == "loudness" ||
      question_type == "exist" || question_type == "count_comparison") {
    return 2;
  }
  if (question_type == "absolute_position" ||
      question_type == "relative_position") {
    return 15;
  }
  if (question_type == "global_position") return 3;
  if (question_type == "count" || question_type == "count_instruments") return 15;
  throw_data("unknown question type: " + question_type);
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

ExecResult execute(const Program& prog, const scene::SceneSpec& sc) {
  validate_program(prog);
  const auto n_events = static_cast<int>(sc.events.size());
  std::vector<Value> values(prog.size());

  auto ill = [](const std::string& why) {
    ExecResult r;
    r.ill_posed = true;
    r.reason = why;
    return r;
  };

  for (std::size_t i = 0; i < prog.size(); ++i) {
    const Node& node = prog[i];
    Value& out = values[i];
    auto set_in = [&](int slot) -> const std::vector<int>& {
      const Value& v = values[static_cast<std::size_t>(node.inputs[static_cast<std::size_t>(slot)])];
      if (v.kind != Value::Kind::kSet) throw_data("op expects a set input");
      return v.set;
    };

    switch (node.op) {
      case Op::kScene: {
        out.kind = Value::Kind::kSet;
        out.set.resize(static_cast<std::size_t>(n_events));
        for (int e = 0; e < n_events; ++e) out.set[static_cast<std::size_t>(e)] = e;
        break;
      }
      case Op::kFilterInstrument:
      case Op::kFilterNote:
      case Op::kFilterBrightness:
      case Op::kFilterLoudness:
      case Op::kFilterGlobalPosition: {
        out.kind = Value::Kind::kSet;
        for (int e : set_in(0)) {
          const auto& ev = sc.events[static_cast<std::size_t>(e)];
          const std::string& attr =
              node.op == Op::kFilterInstrument      ? ev.instrument
              : node.op == Op::kFilterNote          ? ev.note
              : node.op == Op::kFilterBrightness    ? ev.brightness_label
              : node.op == Op::kFilterLoudness      ? ev.loudness_label
                                                    : ev.global_position;
          if (attr == node.arg) out.set.push_back(e);
        }
        break;
      }
      case Op::kRelateBefore:
      case Op::kRelateAfter: {
        const auto& anchor_set = set_in(0);
        if (anchor_set.size() != 1) return ill("relate anchor unresolved");
        const double anchor_onset =
            sc.events[static_cast<std::size_t>(anchor_set[0])].onset_s;
        out.kind = Value::Kind::kSet;
        for (int e = 0; e < n_events; ++e) {
          const double onset = sc.events[static_cast<std::size_t>(e)].onset_s;
          const bool keep = node.op == Op::kRelateBefore ? onset < anchor_onset
                                                         : onset > anchor_onset;
          if (keep) out.set.push_back(e);
        }
        break;
      }
      case Op::kNth: {
        const auto& in = set_in(0);
        const int k = std::stoi(node.arg);
        if (k < 1 || k > static_cast<int>(in.size())) {
          return ill("nth exceeds set size");
        }
        out.kind = Value::Kind::kSet;
        out.set.push_back(in[static_cast<std::size_t>(k - 1)]);
        break;
      }
      case Op::kUnique: {
        const auto& in = set_in(0);
        if (in.size() != 1) return ill("unique set is not a singleton");
        out.kind = Value::Kind::kSet;
        out.set = in;
        break;
      }
      case Op::kQueryInstrument:
      case Op::kQueryNote:
      case Op::kQueryBrightness:
      case Op::kQueryLoudness:
      case Op::kQueryAbsolutePosition:
      case Op::kQueryGlobalPosition: {
        const auto& in = set_in(0);
        if (in.size() != 1) return ill("query on a non-singleton set");
        const auto& ev = sc.events[static_cast<std::size_t>(in[0])];
        out.kind = Value::Kind::kAnswer;
        switch (node.op) {
          case Op::kQueryInstrument: out.answer = ev.instrument; break;
          case Op::kQueryNote: out.answer = ev.note; break;
          case Op::kQueryBrightness: out.answer = ev.brightness_label; break;
          case Op::kQueryLoudness: out.answer = ev.loudness_label; break;
          case Op::kQueryGlobalPosition: out.answer = ev.global_position; break;
          case Op::kQueryAbsolutePosition:
            out.answer = ordinal_labels()[static_cast<std::size_t>(ev.absolute_position - 1)];
            break;
          default: break;
        }
        break;
      }
      case Op::kQueryRelativePosition: {
        const auto& context = set_in(0);
        const auto& selection = set_in(1);
        if (selection.size() != 1) return ill("query on a non-singleton set");
        int ordinal = 0;
        bool found = false;
        for (std::size_t p = 0; p < context.size(); ++p) {
          if (context[p] == selection[0]) {
            ordinal = static_cast<int>(p) + 1;
            found = true;
            break;
          }
        }
        if (!found) return ill("relative-position event not in its context");
        out.kind = Value::Kind::kAnswer;
        out.answer = ordinal_labels()[static_cast<std::size_t>(ordinal - 1)];
        break;
      }
      case Op::kCount: {
        out.kind = Value::Kind::kInt;
        out.integer = static_cast<int>(set_in(0).size());
        break;
      }
      case Op::kCountDistinctInstruments: {
        std::set<std::string> names;
        for (int e : set_in(0)) {
          names.insert(sc.events[static_cast<std::size_t>(e)].instrument);
        }
        out.kind = Value::Kind::kInt;
        out.integer = static_cast<int>(names.size());
        break;
      }
      case Op::kExist: {
        out.kind = Value::Kind::kAnswer;
        out.answer = set_in(0).empty() ? "no" : "yes";
        break;
      }
      case Op::kCompareEqual:
      case Op::kCompareMore:
      case Op::kCompareFewer: {
        const Value& a = values[static_cast<std::size_t>(node.inputs[0])];
        const Value& b = values[static_cast<std::size_t>(node.inputs[1])];
        if (a.kind != Value::Kind::kInt || b.kind != Value::Kind::kInt) {
          throw_data("compare expects two integer inputs");
        }
        const bool truth = node.op == Op::kCompareEqual  ? a.integer == b.integer
                           : node.op == Op::kCompareMore ? a.integer > b.integer
                                                         : a.integer < b.integer;
        out.kind = Value::Kind::kAnswer;
        out.answer = truth ? "yes" : "no";
        break;
      }
    }
  }

  const Value& terminal = values.back();
  ExecResult r;
  if (terminal.kind == Value::Kind::kAnswer) {
    r.answer = terminal.answer;
  } else if (terminal.kind == Value::Kind::kInt) {
    r.answer = std::to_string(terminal.integer);
  } else {
    throw_data("program terminal must produce an answer, not a set");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

std::vector<Template> load_templates(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw_data("cannot open template file: " + path);
  json doc = json::parse(f);
  std::vector<Template> out;
  for (const auto& j : doc) {
    Template t;
    t.template_id = j.at("template_id").get<std::string>();
    t.question_type = j.at("question_type").get<std::string>();
    t.text = j.at("text").get<std::string>();
    for (const auto& n : j.at("program")) {
      TemplateNode tn;
      tn.op = n.at("op").get<std::string>();
      if (n.contains("arg")) tn.arg = n.at("arg").get<std::string>();
      if (n.contains("inputs")) tn.inputs = n.at("inputs").get<std::vector<int>>();
      t.skeleton.push_back(std::move(tn));
    }
    if (j.contains("constraints")) {
      for (const auto& c : j.at("constraints")) {
        t.constraints.push_back({c.at("kind").get<std::string>(),
                                 c.at("a").get<std::string>(),
                                 c.at("b").get<std::string>()});
      }
    }
    if (std::find(kQuestionTypes.begin(), kQuestionTypes.end(),
                  t.question_type) == kQuestionTypes.end()) {
      throw_data("template " + t.template_id + " has unknown type " +
                 t.question_type);
    }
    out.push_back(std::move(t));
  }
  if (out.empty()) throw_data("template file is empty: " + path);
  return out;
}

namespace {

bool is_placeholder(const std::string& s) {
  return s.size() >= 3 && s.front() == '<' && s.back() == '>';
}

// Placeholder kind: leading letters of the name, e.g. <GP2> -> GP.
std::string placeholder_kind(const std::string& ph) {
  std::string kind;
  for (std::size_t i = 1; i + 1 < ph.size(); ++i) {
    if (std::isalpha(static_cast<unsigned char>(ph[i]))) {
      kind.push_back(ph[i]);
    } else {
      break;
    }
  }
  return kind;
}

std::vector<std::string> placeholders_in_text(const std::string& text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = text.find('<', pos)) != std::string::npos) {
    const std::size_t close = text.find('>', pos);
    if (close == std::string::npos) break;
    out.push_back(text.substr(pos, close - pos + 1));
    pos = close + 1;
  }
  return out;
}

std::string replace_all(std::string s, const std::string& from,
                        const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// Samples a value for a placeholder. Attribute slots draw from the values
// present in the scene 75% of the time so that unique-chains resolve often
// enough, and from the full lexicon otherwise to keep "no"/zero answers
// reachable.
std::string sample_value(const std::string& kind, const scene::SceneSpec& sc,
                         Pcg32& rng) {
  auto scene_biased = [&](auto get_attr,
                          const std::vector<std::string>& lexicon) {
    if (rng.uniform() < 0.75 && !sc.events.empty()) {
      const auto& ev = sc.events[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(sc.events.size()) - 1))];
      return get_attr(ev);
    }
    return lexicon[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(lexicon.size()) - 1))];
  };

  if (kind == "I") {
    static const std::vector<std::string> lex(bank::kInstruments.begin(),
                                              bank::kInstruments.end());
    return scene_biased([](const scene::SoundEvent& e) { return e.instrument; },
                        lex);
  }
  if (kind == "N") {
    static const std::vector<std::string> lex(bank::kNotes.begin(),
                                              bank::kNotes.end());
    return scene_biased([](const scene::SoundEvent& e) { return e.note; }, lex);
  }
  if (kind == "B") {
    static const std::vector<std::string> lex = {"bright", "dark"};
    return scene_biased(
        [](const scene::SoundEvent& e) { return e.brightness_label; }, lex);
  }
  if (kind == "L") {
    static const std::vector<std::string> lex = {"loud", "quiet"};
    return scene_biased(
        [](const scene::SoundEvent& e) { return e.loudness_label; }, lex);
  }
  if (kind == "GP") {
    static const std::vector<std::string> lex = {"beginning", "middle", "end"};
    return scene_biased(
        [](const scene::SoundEvent& e) { return e.global_position; }, lex);
  }
  if (kind == "O") {
    // Small ordinals resolve much more often than large ones.
    if (rng.uniform() < 0.75) return std::to_string(rng.uniform_int(1, 3));
    return std::to_string(rng.uniform_int(1, 6));
  }
  if (kind == "REL") {
    return rng.uniform() < 0.5 ? "before" : "after";
  }
  throw_data("unknown placeholder kind: " + kind);
}

// Ordinal values are written as digits in program args and as words in text.
std::string surface_form(const std::string& kind, const std::string& value) {
  if (kind == "O") {
    return ordinal_labels()[static_cast<std::size_t>(std::stoi(value) - 1)];
  }
  return value;
}

}  // namespace

std::vector<std::string> collect_placeholders(const Template& t) {
  std::vector<std::string> names = placeholders_in_text(t.text);
  for (const auto& n : t.skeleton) {
    if (is_placeholder(n.arg)) names.push_back(n.arg);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

std::optional<QARecord> instantiate(const Template& t,
                                    const scene::SceneSpec& sc, Pcg32& rng) {
  const std::vector<std::string> names = collect_placeholders(t);

  std::map<std::string, std::string> binding;
  constexpr int kBindingAttempts = 12;
  bool ok = false;
  for (int attempt = 0; attempt < kBindingAttempts && !ok; ++attempt) {
    binding.clear();
    for (const auto& name : names) {
      binding[name] = sample_value(placeholder_kind(name), sc, rng);
    }
    ok = true;
    for (const auto& c : t.constraints) {
      if (c.kind == "neq") {
        if (binding.at(c.a) == binding.at(c.b)) ok = false;
      } else {
        throw_data("unknown constraint kind: " + c.kind);
      }
    }
  }
  if (!ok) return std::nullopt;

  // Resolve the skeleton.
  Program prog;
  bool has_relation = false;
  for (const auto& tn : t.skeleton) {
    Node n;
    std::string op = tn.op;
    std::string arg = tn.arg;
    if (is_placeholder(arg)) arg = binding.at(tn.arg);
    if (op == "relate") {
      op = arg == "before" ? "relate_before" : "relate_after";
      arg.clear();
    }
    n.op = op_from_name(op);
    if (n.op == Op::kRelateBefore || n.op == Op::kRelateAfter) {
      has_relation = true;
    }
    n.arg = arg;
    n.inputs = tn.inputs;
    prog.push_back(std::move(n));
  }

  ExecResult res = execute(prog, sc);
  if (res.ill_posed) return std::nullopt;

  // Reject answers outside the declared label set (e.g. a count of 15, which
  // only a scene whose every event passes the filter can produce).
  const auto& labels = canonical_label_set();
  if (std::find(labels.begin(), labels.end(), res.answer) == labels.end()) {
    return std::nullopt;
  }

  // Degenerate-question filter: for non-aggregate terminals, reject
  // instantiations whose answer survives five event-order shuffles.
  if (!is_aggregate_terminal(prog.back().op) && sc.events.size() > 1) {
    bool varies = false;
    for (int p = 0; p < 5 && !varies; ++p) {
      const scene::SceneSpec shuffled =
          scene::permute_events(sc, rng.next_u64());
      ExecResult alt = execute(prog, shuffled);
      if (alt.ill_posed || alt.answer != res.answer) varies = true;
    }
    if (!varies) return std::nullopt;
  }

  // Fill the text pattern.
  std::string text = t.text;
  for (const auto& [name, value] : binding) {
    text = replace_all(text, name, surface_form(placeholder_kind(name), value));
  }

  QARecord r;
  r.scene_id = sc.scene_id;
  r.question_type = t.question_type;
  r.has_temporal_relation = has_relation;
  r.text = text;
  r.program = std::move(prog);
  r.answer = res.answer;
  return r;
}

bool BalanceState::admits(const std::string& type,
                          const std::string& answer) const {
  const auto total_it = type_totals_.find(type);
  const int n = total_it == type_totals_.end() ? 0 : total_it->second;
  const int domain = answer_domain_size(type);
  const int cap = std::max(2, (3 * (n + 1) + domain - 1) / domain);
  const auto it = type_answer_.find(type + "|" + answer);
  const int have = it == type_answer_.end() ? 0 : it->second;
  return have + 1 <= cap;
}

void BalanceState::record(const std::string& type, const std::string& answer) {
  ++type_totals_[type];
  ++type_answer_[type + "|" + answer];
}

std::vector<QARecord> generate_questions(const scene::SceneSpec& sc,
                                         const std::vector<Template>& templates,
                                         int per_scene, Pcg32& rng,
                                         BalanceState* balance) {
  if (templates.empty()) throw_data("generate_questions: no templates");
  std::vector<QARecord> out;
  std::set<std::string> used_templates;
  constexpr int kMaxAttempts = 400;
  for (int attempt = 0;
       attempt < kMaxAttempts && static_cast<int>(out.size()) < per_scene;
       ++attempt) {
    const auto& t = templates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(templates.size()) - 1))];
    if (used_templates.count(t.template_id) > 0) continue;
    auto rec = instantiate(t, sc, rng);
    if (!rec) continue;
    if (balance != nullptr && !balance->admits(rec->question_type, rec->answer)) {
      continue;
    }
    if (balance != nullptr) balance->record(rec->question_type, rec->answer);
    used_templates.insert(t.template_id);
    rec->question_id =
        sc.scene_id + "_q" + std::to_string(out.size());
    out.push_back(std::move(*rec));
  }
  if (static_cast<int>(out.size()) < per_scene) {
    throw_data("generate_questions: exhausted attempts for scene " + sc.scene_id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text utilities and serialization
// ---------------------------------------------------------------------------

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char raw : text) {
    const char c = static_cast<char>(
        std::tolower(static_cast<unsigned char>(raw)));
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '#') {
      cur.push_back(c);
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

std::vector<std::string> vocabulary(const std::vector<QARecord>& records) {
  if (records.empty()) throw_data("vocabulary: no records");
  std::set<std::string> unique;
  for (const auto& r : records) {
    for (const auto& tok : tokenize(r.text)) unique.insert(tok);
  }
  std::vector<std::string> out = {"<pad>", "<unk>"};
  out.insert(out.end(), unique.begin(), unique.end());
  return out;
}

std::string record_to_json_line(const QARecord& r) {
  json prog = json::array();
  for (const auto& n : r.program) {
    json jn = {{"op", op_name(n.op)}};
    if (!n.arg.empty()) jn["arg"] = n.arg;
    if (!n.inputs.empty()) jn["inputs"] = n.inputs;
    prog.push_back(std::move(jn));
  }
  json doc = {{"question_id", r.question_id},
              {"scene_id", r.scene_id},
              {"question_type", r.question_type},
              {"has_temporal_relation", r.has_temporal_relation},
              {"text", r.text},
              {"program", prog},
              {"answer", r.answer}};
  return doc.dump();
}

QARecord record_from_json_line(const std::string& line) {
  json doc = json::parse(line);
  QARecord r;
  r.question_id = doc.at("question_id").get<std::string>();
  r.scene_id = doc.at("scene_id").get<std::string>();
  r.question_type = doc.at("question_type").get<std::string>();
  r.has_temporal_relation = doc.at("has_temporal_relation").get<bool>();
  r.text = doc.at("text").get<std::string>();
  for (const auto& jn : doc.at("program")) {
    Node n;
    n.op = op_from_name(jn.at("op").get<std::string>());
    if (jn.contains("arg")) n.arg = jn.at("arg").get<std::string>();
    if (jn.contains("inputs")) n.inputs = jn.at("inputs").get<std::vector<int>>();
    r.program.push_back(std::move(n));
  }
  r.answer = doc.at("answer").get<std::string>();
  return r;
}

}  // namespace aqa::quest
