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

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "aqa/common.hpp"
#include "aqa/questengine.hpp"
#include "aqa/scenegen.hpp"

using namespace aqa;
using quest::Node;
using quest::Op;
using quest::Program;

namespace {

std::string templates_path() {
  const char* env = std::getenv("AQA_TEMPLATES");
  return env != nullptr ? env : "data/templates.json";
}

scene::SoundEvent make_event(const std::string& id, const std::string& inst,
                             const std::string& note, const std::string& bright,
                             const std::string& loud, double onset, int pos,
                             double scene_dur) {
  scene::SoundEvent e;
  e.sound_id = id;
  e.instrument = inst;
  e.note = note;
  e.brightness_label = bright;
  e.loudness_label = loud;
  e.duration_s = 0.8;
  e.onset_s = onset;
  e.absolute_position = pos;
  e.global_position = scene::global_bucket(onset, scene_dur);
  return e;
}

// Seven events: violins at positions 1, 3, 6 with notes C, E, G.
scene::SceneSpec toy_scene() {
  scene::SceneSpec s;
  s.scene_id = "toy";
  s.split = "train";
  s.total_duration_s = 9.0;
  const double dur = s.total_duration_s;
  s.events = {
      make_event("s1", "violin", "C", "bright", "loud", 0.2, 1, dur),
      make_event("s2", "flute", "A", "dark", "quiet", 1.4, 2, dur),
      make_event("s3", "violin", "E", "dark", "loud", 2.6, 3, dur),
      make_event("s4", "bass", "C", "dark", "quiet", 3.9, 4, dur),
      make_event("s5", "trumpet", "F#", "bright", "loud", 5.2, 5, dur),
      make_event("s6", "violin", "G", "bright", "quiet", 6.6, 6, dur),
      make_event("s7", "cello", "A", "dark", "loud", 7.9, 7, dur),
  };
  s.silence_gaps_s.assign(8, 0.2);
  return s;
}

// A generated scene with realistic labels for the equivalence sweep.
scene::SceneSpec random_scene(std::uint64_t seed) {
  Pcg32 rng(derive_seed(seed, "qe-random-scene"));
  scene::SceneSpec s;
  s.scene_id = "rand";
  s.split = "train";
  const int n = static_cast<int>(rng.uniform_int(5, 15));
  static const char* instruments[] = {"bass",  "cello",   "clarinet",
                                      "flute", "trumpet", "violin"};
  static const char* notes[] = {"A", "A#", "B",  "C", "C#", "D",
                                "D#", "E",  "F", "F#", "G", "G#"};
  double cursor = 0.0;
  for (int i = 0; i < n; ++i) {
    const double gap = rng.uniform(0.1, 0.5);
    s.silence_gaps_s.push_back(gap);
    cursor += gap;
    scene::SoundEvent e;
    e.sound_id = "r" + std::to_string(i);
    e.instrument = instruments[rng.uniform_int(0, 5)];
    e.note = notes[rng.uniform_int(0, 11)];
    e.brightness_label = rng.uniform() < 0.5 ? "bright" : "dark";
    e.loudness_label = rng.uniform() < 0.5 ? "loud" : "quiet";
    e.duration_s = rng.uniform(0.69, 1.11);
    e.onset_s = cursor;
    e.absolute_position = i + 1;
    cursor += e.duration_s;
    s.events.push_back(std::move(e));
  }
  s.silence_gaps_s.push_back(0.2);
  s.total_duration_s = cursor + 0.2;
  for (auto& e : s.events) {
    e.global_position = scene::global_bucket(e.onset_s, s.total_duration_s);
  }
  return s;
}

}  // namespace

TEST_CASE("count over a seven event scene") {
  Program p = {{Op::kScene, "", {}}, {Op::kCount, "", {0}}};
  const auto r = quest::execute(p, toy_scene());
  CHECK_FALSE(r.ill_posed);
  CHECK(r.answer == "7");
}

TEST_CASE("exist on an empty filter result") {
  Program p = {{Op::kScene, "", {}},
               {Op::kFilterInstrument, "clarinet", {0}},
               {Op::kExist, "", {1}}};
  const auto r = quest::execute(p, toy_scene());
  CHECK(r.answer == "no");
}

TEST_CASE("nth violin note on the toy scene") {
  // Violins play C, E, G in onset order; the second is E.
  Program p = {{Op::kScene, "", {}},
               {Op::kFilterInstrument, "violin", {0}},
               {Op::kNth, "2", {1}},
               {Op::kQueryNote, "", {2}}};
  const auto r = quest::execute(p, toy_scene());
  CHECK_FALSE(r.ill_posed);
  CHECK(r.answer == "E");
}

TEST_CASE("relate and relative position semantics") {
  const auto sc = toy_scene();
  // Events after the trumpet (position 5): violin s6, cello s7.
  Program after = {{Op::kScene, "", {}},
                   {Op::kFilterInstrument, "trumpet", {0}},
                   {Op::kUnique, "", {1}},
                   {Op::kRelateAfter, "", {2}},
                   {Op::kCount, "", {3}}};
  CHECK(quest::execute(after, sc).answer == "2");

  // Among violins, the G is third.
  Program rel = {{Op::kScene, "", {}},
                 {Op::kFilterInstrument, "violin", {0}},
                 {Op::kFilterNote, "G", {1}},
                 {Op::kUnique, "", {2}},
                 {Op::kQueryRelativePosition, "", {1, 3}}};
  CHECK(quest::execute(rel, sc).answer == "third");

  // Distinct instruments before the bass (position 4): violin, flute.
  Program cdi = {{Op::kScene, "", {}},
                 {Op::kFilterInstrument, "bass", {0}},
                 {Op::kUnique, "", {1}},
                 {Op::kRelateBefore, "", {2}},
                 {Op::kCountDistinctInstruments, "", {3}}};
  CHECK(quest::execute(cdi, sc).answer == "2");
}

TEST_CASE("ill-posed outcomes") {
  const auto sc = toy_scene();
  Program non_unique = {{Op::kScene, "", {}},
                        {Op::kFilterInstrument, "violin", {0}},
                        {Op::kUnique, "", {1}},
                        {Op::kQueryNote, "", {2}}};
  CHECK(quest::execute(non_unique, sc).ill_posed);

  Program nth_overflow = {{Op::kScene, "", {}},
                          {Op::kFilterInstrument, "violin", {0}},
                          {Op::kNth, "4", {1}},
                          {Op::kQueryNote, "", {2}}};
  CHECK(quest::execute(nth_overflow, sc).ill_posed);

  Program bad_anchor = {{Op::kScene, "", {}},
                        {Op::kFilterNote, "A", {0}},  // two As
                        {Op::kRelateAfter, "", {1}},
                        {Op::kCount, "", {2}}};
  CHECK(quest::execute(bad_anchor, sc).ill_posed);
}

TEST_CASE("program validation rejects malformed graphs") {
  Program two_terminals = {{Op::kScene, "", {}},
                           {Op::kCount, "", {0}},
                           {Op::kScene, "", {}},
                           {Op::kCount, "", {2}}};
  CHECK_THROWS_AS(quest::validate_program(two_terminals), Error);

  Program missing_arg = {{Op::kScene, "", {}},
                         {Op::kFilterNote, "", {0}},
                         {Op::kCount, "", {1}}};
  CHECK_THROWS_AS(quest::validate_program(missing_arg), Error);

  Program bad_arity = {{Op::kScene, "", {}}, {Op::kCompareEqual, "", {0}}};
  CHECK_THROWS_AS(quest::validate_program(bad_arity), Error);
}

TEST_CASE("canonical label set has 57 entries in fixed families") {
  const auto& labels = quest::canonical_label_set();
  CHECK(labels.size() == 57);
  const std::set<std::string> unique(labels.begin(), labels.end());
  CHECK(unique.size() == 57);
  CHECK(std::count(labels.begin(), labels.end(), "yes") == 1);
  CHECK(std::count(labels.begin(), labels.end(), "fifteenth") == 1);
  CHECK(std::count(labels.begin(), labels.end(), "14") == 1);
  CHECK(std::count(labels.begin(), labels.end(), "15") == 0);
}

TEST_CASE("template inventory covers all types with both relation kinds") {
  const auto templates = quest::load_templates(templates_path());
  CHECK(templates.size() >= 66);
  std::map<std::string, int> per_type;
  std::set<std::string> ids;
  for (const auto& t : templates) {
    ++per_type[t.question_type];
    CHECK(ids.insert(t.template_id).second);
  }
  for (const auto& type : quest::kQuestionTypes) {
    CHECK(per_type[type] >= 6);
  }
}

TEST_CASE("instantiate: exist templates are total, unique failures reject") {
  const auto templates = quest::load_templates(templates_path());
  const auto sc = toy_scene();

  const auto exist_it =
      std::find_if(templates.begin(), templates.end(),
                   [](const auto& t) { return t.template_id == "exist_inst_bright_note"; });
  REQUIRE(exist_it != templates.end());
  Pcg32 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto rec = quest::instantiate(*exist_it, sc, rng);
    REQUIRE(rec.has_value());
    CHECK((rec->answer == "yes" || rec->answer == "no"));
    CHECK_FALSE(rec->has_temporal_relation);
  }

  // "What is the note played by the <I> ..." with two matching events must
  // reject: pin the binding by executing the resolved program directly.
  Program p = {{Op::kScene, "", {}},
               {Op::kFilterNote, "A", {0}},  // flute A and cello A
               {Op::kUnique, "", {1}},
               {Op::kQueryInstrument, "", {2}}};
  CHECK(quest::execute(p, sc).ill_posed);
}

TEST_CASE("table 1 exist example answers yes on a matching scene") {
  auto sc = toy_scene();
  sc.events[3].instrument = "bass";
  sc.events[3].note = "C#";
  sc.events[3].brightness_label = "bright";
  Program p = {{Op::kScene, "", {}},
               {Op::kFilterInstrument, "bass", {0}},
               {Op::kFilterBrightness, "bright", {1}},
               {Op::kFilterNote, "C#", {2}},
               {Op::kExist, "", {3}}};
  CHECK(quest::execute(p, sc).answer == "yes");
}

TEST_CASE("generate_questions yields per_scene distinct-template records") {
  const auto templates = quest::load_templates(templates_path());
  quest::BalanceState balance;
  int with_rel = 0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto sc = random_scene(seed);
    Pcg32 rng(derive_seed(1000, "gen", seed));
    const auto records = quest::generate_questions(sc, templates, 4, rng, &balance);
    CHECK(records.size() == 4);
    std::set<std::string> types;
    for (const auto& r : records) {
      // Stored program re-executes to the stored answer.
      const auto redo = quest::execute(r.program, sc);
      CHECK_FALSE(redo.ill_posed);
      CHECK(redo.answer == r.answer);
      const auto& labels = quest::canonical_label_set();
      CHECK(std::find(labels.begin(), labels.end(), r.answer) != labels.end());
      if (r.has_temporal_relation) ++with_rel;
    }
  }
  CHECK(with_rel > 0);
}

TEST_CASE("oracle equivalence on randomized programs and scenes") {
  const auto templates = quest::load_templates(templates_path());
  Pcg32 rng(424242);
  int checked = 0;
  int ill = 0;
  while (checked < 1000) {
    const auto sc = random_scene(rng.next_u64());
    const auto& t = templates[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(templates.size()) - 1))];
    // Raw instantiation (no rejection): bind placeholders uniformly so
    // ill-posed programs stay in the sample.
    std::map<std::string, std::string> binding;
    static const char* instruments[] = {"bass",  "cello",   "clarinet",
                                        "flute", "trumpet", "violin"};
    static const char* notes[] = {"A", "A#", "B",  "C", "C#", "D",
                                  "D#", "E",  "F", "F#", "G", "G#"};
    static const char* gps[] = {"beginning", "middle", "end"};
    for (const auto& name : quest::collect_placeholders(t)) {
      std::string kind;
      for (std::size_t i = 1; i + 1 < name.size() && std::isalpha(name[i]); ++i) {
        kind.push_back(name[i]);
      }
      if (kind == "I") binding[name] = instruments[rng.uniform_int(0, 5)];
      if (kind == "N") binding[name] = notes[rng.uniform_int(0, 11)];
      if (kind == "B") binding[name] = rng.uniform() < 0.5 ? "bright" : "dark";
      if (kind == "L") binding[name] = rng.uniform() < 0.5 ? "loud" : "quiet";
      if (kind == "GP") binding[name] = gps[rng.uniform_int(0, 2)];
      if (kind == "O") binding[name] = std::to_string(rng.uniform_int(1, 8));
      if (kind == "REL") binding[name] = rng.uniform() < 0.5 ? "before" : "after";
    }
    Program prog;
    for (const auto& tn : t.skeleton) {
      Node n;
      std::string op = tn.op;
      std::string arg = tn.arg;
      if (!arg.empty() && arg.front() == '<') arg = binding.at(arg);
      if (op == "relate") {
        op = arg == "before" ? "relate_before" : "relate_after";
        arg.clear();
      }
      n.op = quest::op_from_name(op);
      n.arg = arg;
      n.inputs = tn.inputs;
      prog.push_back(n);
    }
    const auto a = quest::execute(prog, sc);
    const auto b = quest::execute_naive(prog, sc);
    CHECK(a.ill_posed == b.ill_posed);
    if (!a.ill_posed) CHECK(a.answer == b.answer);
    if (a.ill_posed) ++ill;
    ++checked;
  }
  // The sweep must exercise both outcomes.
  CHECK(ill > 50);
  CHECK(ill < 950);
}

TEST_CASE("tokenizer strips punctuation and keeps note sharps") {
  const auto toks = quest::tokenize("Is there a bass playing a bright C# note?");
  CHECK(std::find(toks.begin(), toks.end(), "c#") != toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "?") == toks.end());
  CHECK(toks.front() == "is");
}

TEST_CASE("vocabulary layout and coverage") {
  quest::QARecord r1;
  r1.text = "What is the note played by the flute?";
  quest::QARecord r2;
  r2.text = "Is there a bass playing a bright C# note?";
  const auto vocab = quest::vocabulary({r1, r2});
  CHECK(vocab[0] == "<pad>");
  CHECK(vocab[1] == "<unk>");
  CHECK(std::find(vocab.begin(), vocab.end(), "c#") != vocab.end());
  CHECK(std::is_sorted(vocab.begin() + 2, vocab.end()));
}

TEST_CASE("record JSONL round trip") {
  const auto templates = quest::load_templates(templates_path());
  const auto sc = random_scene(9);
  Pcg32 rng(8);
  const auto records = quest::generate_questions(sc, templates, 4, rng, nullptr);
  for (const auto& r : records) {
    const std::string line = quest::record_to_json_line(r);
    const auto back = quest::record_from_json_line(line);
    CHECK(quest::record_to_json_line(back) == line);
    CHECK(back.answer == r.answer);
    CHECK(back.program.size() == r.program.size());
  }
}
