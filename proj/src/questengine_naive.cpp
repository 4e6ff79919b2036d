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

// Brute-force reference executor. Deliberately shares no evaluation code
// with execute(): sets are boolean masks, ordering is recomputed from onsets
// on every use, and every op is an explicit enumeration.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "aqa/questengine.hpp"

namespace aqa::quest {

namespace {

const char* kNaiveOrdinals[15] = {
    "first",   "second",     "third",      "fourth",     "fifth",
    "sixth",   "seventh",    "eighth",     "ninth",      "tenth",
    "eleventh", "twelfth",   "thirteenth", "fourteenth", "fifteenth"};

struct NaiveValue {
  bool is_mask = false;
  bool is_int = false;
  bool is_text = false;
  std::vector<char> mask;
  int number = 0;
  std::string text;
};

// Indices sorted by onset, restricted to the mask.
std::vector<std::size_t> masked_onset_order(const scene::SceneSpec& sc,
                                            const std::vector<char>& mask) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < sc.events.size(); ++i) {
    if (mask[i]) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&sc](std::size_t a, std::size_t b) {
    return sc.events[a].onset_s < sc.events[b].onset_s;
  });
  return order;
}

int mask_count(const std::vector<char>& mask) {
  int n = 0;
  for (char m : mask) n += m ? 1 : 0;
  return n;
}

}  // namespace

ExecResult execute_naive(const Program& prog, const scene::SceneSpec& sc) {
  const std::size_t n_events = sc.events.size();
  std::vector<NaiveValue> vals(prog.size());

  for (std::size_t i = 0; i < prog.size(); ++i) {
    const Node& node = prog[i];
    NaiveValue& out = vals[i];
    auto in = [&](int slot) -> const NaiveValue& {
      return vals[static_cast<std::size_t>(node.inputs[static_cast<std::size_t>(slot)])];
    };
    auto fail = [](const char* why) {
      ExecResult r;
      r.ill_posed = true;
      r.reason = why;
      return r;
    };

    switch (node.op) {
      case Op::kScene:
        out.is_mask = true;
        out.mask.assign(n_events, 1);
        break;

      case Op::kFilterInstrument:
      case Op::kFilterNote:
      case Op::kFilterBrightness:
      case Op::kFilterLoudness:
      case Op::kFilterGlobalPosition: {
        out.is_mask = true;
        out.mask.assign(n_events, 0);
        for (std::size_t e = 0; e < n_events; ++e) {
          if (!in(0).mask[e]) continue;
          const auto& ev = sc.events[e];
          std::string attr;
          if (node.op == Op::kFilterInstrument) attr = ev.instrument;
          if (node.op == Op::kFilterNote) attr = ev.note;
          if (node.op == Op::kFilterBrightness) attr = ev.brightness_label;
          if (node.op == Op::kFilterLoudness) attr = ev.loudness_label;
          if (node.op == Op::kFilterGlobalPosition) attr = ev.global_position;
          if (attr == node.arg) out.mask[e] = 1;
        }
        break;
      }

      case Op::kRelateBefore:
      case Op::kRelateAfter: {
        if (mask_count(in(0).mask) != 1) return fail("naive: anchor not unique");
        std::size_t anchor = 0;
        for (std::size_t e = 0; e < n_events; ++e) {
          if (in(0).mask[e]) anchor = e;
        }
        out.is_mask = true;
        out.mask.assign(n_events, 0);
        for (std::size_t e = 0; e < n_events; ++e) {
          if (node.op == Op::kRelateBefore &&
              sc.events[e].onset_s < sc.events[anchor].onset_s) {
            out.mask[e] = 1;
          }
          if (node.op == Op::kRelateAfter &&
              sc.events[e].onset_s > sc.events[anchor].onset_s) {
            out.mask[e] = 1;
          }
        }
        break;
      }

      case Op::kNth: {
        const int k = std::stoi(node.arg);
        const auto order = masked_onset_order(sc, in(0).mask);
        if (k < 1 || static_cast<std::size_t>(k) > order.size()) {
          return fail("naive: nth out of range");
        }
        out.is_mask = true;
        out.mask.assign(n_events, 0);
        out.mask[order[static_cast<std::size_t>(k - 1)]] = 1;
        break;
      }

      case Op::kUnique: {
        if (mask_count(in(0).mask) != 1) return fail("naive: not unique");
        out.is_mask = true;
        out.mask = in(0).mask;
        break;
      }

      case Op::kQueryInstrument:
      case Op::kQueryNote:
      case Op::kQueryBrightness:
      case Op::kQueryLoudness:
      case Op::kQueryAbsolutePosition:
      case Op::kQueryGlobalPosition: {
        if (mask_count(in(0).mask) != 1) return fail("naive: query non-singleton");
        std::size_t target = 0;
        for (std::size_t e = 0; e < n_events; ++e) {
          if (in(0).mask[e]) target = e;
        }
        const auto& ev = sc.events[target];
        out.is_text = true;
        if (node.op == Op::kQueryInstrument) out.text = ev.instrument;
        if (node.op == Op::kQueryNote) out.text = ev.note;
        if (node.op == Op::kQueryBrightness) out.text = ev.brightness_label;
        if (node.op == Op::kQueryLoudness) out.text = ev.loudness_label;
        if (node.op == Op::kQueryGlobalPosition) out.text = ev.global_position;
        if (node.op == Op::kQueryAbsolutePosition) {
          // Recomputed by counting earlier onsets rather than trusting the
          // stored index.
          int earlier = 0;
          for (std::size_t e = 0; e < n_events; ++e) {
            if (sc.events[e].onset_s < ev.onset_s) ++earlier;
          }
          out.text = kNaiveOrdinals[earlier];
        }
        break;
      }

      case Op::kQueryRelativePosition: {
        if (mask_count(in(1).mask) != 1) return fail("naive: query non-singleton");
        std::size_t target = 0;
        for (std::size_t e = 0; e < n_events; ++e) {
          if (in(1).mask[e]) target = e;
        }
        if (!in(0).mask[target]) return fail("naive: not in context");
        int earlier = 0;
        for (std::size_t e = 0; e < n_events; ++e) {
          if (in(0).mask[e] && sc.events[e].onset_s < sc.events[target].onset_s) {
            ++earlier;
          }
        }
        out.is_text = true;
        out.text = kNaiveOrdinals[earlier];
        break;
      }

      case Op::kCount:
        out.is_int = true;
        out.number = mask_count(in(0).mask);
        break;

      case Op::kCountDistinctInstruments: {
        std::set<std::string> seen;
        for (std::size_t e = 0; e < n_events; ++e) {
          if (in(0).mask[e]) seen.insert(sc.events[e].instrument);
        }
        out.is_int = true;
        out.number = static_cast<int>(seen.size());
        break;
      }

      case Op::kExist:
        out.is_text = true;
        out.text = mask_count(in(0).mask) > 0 ? "yes" : "no";
        break;

      case Op::kCompareEqual:
        out.is_text = true;
        out.text = in(0).number == in(1).number ? "yes" : "no";
        break;
      case Op::kCompareMore:
        out.is_text = true;
        out.text = in(0).number > in(1).number ? "yes" : "no";
        break;
      case Op::kCompareFewer:
        out.is_text = true;
        out.text = in(0).number < in(1).number ? "yes" : "no";
        break;
    }
  }

  ExecResult r;
  const NaiveValue& last = vals.back();
  if (last.is_text) {
    r.answer = last.text;
  } else if (last.is_int) {
    r.answer = std::to_string(last.number);
  } else {
    throw_data("naive: terminal produced a set");
  }
  return r;
}

}  // namespace aqa::quest
