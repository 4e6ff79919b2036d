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

#ifndef AQA_QUESTENGINE_HPP_
#define AQA_QUESTENGINE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aqa/common.hpp"
#include "aqa/scenegen.hpp"

namespace aqa::quest {

// ---------------------------------------------------------------------------
// Functional programs
// ---------------------------------------------------------------------------

enum class Op {
  kScene,
  kFilterInstrument,
  kFilterNote,
  kFilterBrightness,
  kFilterLoudness,
  kFilterGlobalPosition,
  kRelateBefore,
  kRelateAfter,
  kNth,
  kUnique,
  kQueryInstrument,
  kQueryNote,
  kQueryBrightness,
  kQueryLoudness,
  kQueryAbsolutePosition,
  kQueryRelativePosition,
  kQueryGlobalPosition,
  kCount,
  kCountDistinctInstruments,
  kExist,
  kCompareEqual,
  kCompareMore,
  kCompareFewer,
};

const char* op_name(Op op);
Op op_from_name(const std::string& name);

struct Node {
  Op op;
  std::string arg;          // attribute value or ordinal; empty if unused
  std::vector<int> inputs;  // indices of predecessor nodes
};

using Program = std::vector<Node>;

// Structural validation: linearized DAG, single terminal, per-op arity and
// argument presence. Throws Error(kData) on violations.
void validate_program(const Program& prog);

struct ExecResult {
  bool ill_posed = false;
  std::string answer;  // set when !ill_posed
  std::string reason;  // set when ill_posed
};

// Executes a program against a scene with set semantics (see op contracts).
ExecResult execute(const Program& prog, const scene::SceneSpec& sc);

// Independent brute-force oracle; same contract as execute but implemented
// by exhaustive enumeration with no shared evaluation code.
ExecResult execute_naive(const Program& prog, const scene::SceneSpec& sc);

// ---------------------------------------------------------------------------
// Answer space
// ---------------------------------------------------------------------------

// Fixed-order 57-label set; the order defines model output indices.
const std::vector<std::string>& canonical_label_set();
// 1-based ordinal surface forms ("first" .. "fifteenth").
const std::vector<std::string>& ordinal_labels();

extern const std::vector<std::string> kQuestionTypes;  // the 11 Table-style types

// Size of a question type's possible-answer set (for balancing).
int answer_domain_size(const std::string& question_type);

// ---------------------------------------------------------------------------
// Templates and instantiation
// ---------------------------------------------------------------------------

struct TemplateNode {
  std::string op;  // op name, or "relate" with arg "<REL*>"
  std::string arg;
  std::vector<int> inputs;
};

struct Constraint {
  std::string kind;  // "neq"
  std::string a, b;  // placeholder names
};

struct Template {
  std::string template_id;
  std::string question_type;
  std::string text;  // pattern with <I> <N> <B> <L> <O> <GP> <REL> slots
  std::vector<TemplateNode> skeleton;
  std::vector<Constraint> constraints;
};

std::vector<Template> load_templates(const std::string& path);
std::vector<std::string> collect_placeholders(const Template& t);

struct QARecord {
  std::string question_id;
  std::string scene_id;
  std::string question_type;
  bool has_temporal_relation = false;
  std::string text;
  Program program;
  std::string answer;
};

// Samples placeholder values (scene-biased), resolves and executes the
// skeleton. nullopt = rejected (ill-posed, degenerate under permutation, or
// answer outside the label set).
std::optional<QARecord> instantiate(const Template& t,
                                    const scene::SceneSpec& sc, Pcg32& rng);

// Running (question_type, answer) caps: a candidate is rejected once its
// answer holds more than 3x the uniform share within its type.
class BalanceState {
 public:
  bool admits(const std::string& type, const std::string& answer) const;
  void record(const std::string& type, const std::string& answer);

 private:
  std::map<std::string, int> type_totals_;
  std::map<std::string, int> type_answer_;
};

// Rejection-samples per_scene records with distinct template ids. Throws
// Error(kData) if the scene cannot field enough questions (caller redraws).
std::vector<QARecord> generate_questions(const scene::SceneSpec& sc,
                                         const std::vector<Template>& templates,
                                         int per_scene, Pcg32& rng,
                                         BalanceState* balance = nullptr);

// ---------------------------------------------------------------------------
// Text utilities and serialization
// ---------------------------------------------------------------------------

// Lowercases and splits on non [a-z0-9#]; '?' never survives, '#' stays
// attached to note names.
std::vector<std::string> tokenize(const std::string& text);

// Sorted unique tokens over all records, prefixed by <pad> and <unk>.
std::vector<std::string> vocabulary(const std::vector<QARecord>& records);

std::string record_to_json_line(const QARecord& r);
QARecord record_from_json_line(const std::string& line);

}  // namespace aqa::quest

#endif  // AQA_QUESTENGINE_HPP_
