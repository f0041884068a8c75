/*
 * Copyright 2026 The Influx Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Dataset data model and the JSONL wire format.
//
// One line per instance:
//   {"instance_id": "...",
//    "realizations": [{"id": "...", "readability": 65.0, "text": "..."}],
//    "questions": [{"id": "...", "text": "...", "true_class": 2}],
//    "cells": [{"r": "...", "q": "...", "probs": [0.1, 0.2, 0.3, 0.4]}]}
// Single-element records omit "questions" and key every cell with q = "_".

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "influx/error.hpp"
#include "json.hpp"

namespace influx {

inline constexpr double kProbabilitySumTolerance = 1e-6;
inline constexpr std::string_view kSingleElementQuestionId = "_";

enum class Task { kMultiElement, kSingleElement };

inline std::string_view task_name(Task task) {
  return task == Task::kMultiElement ? "multi_element" : "single_element";
}

// Probability vector over K >= 2 classes, summing to one.
class Distribution {
 public:
  Distribution() = default;

  std::span<const double> probs() const { return probs_; }
  std::size_t num_classes() const { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {}
  friend Distribution validate_distribution(std::span<const double> probs);

  std::vector<double> probs_;
};

inline std::string format_number(double value) {
  std::ostringstream os;
  os.precision(6);
  os << value;
  return os.str();
}

// Checks the simplex invariants and renormalizes to sum one. Vectors already
// summing to one within K machine epsilons are kept bit-for-bit, which makes
// repeated validation idempotent.
inline Distribution validate_distribution(std::span<const double> probs) {
  if (probs.size() < 2) {
    throw ValidationError("distribution needs at least 2 classes, got " +
                          std::to_string(probs.size()));
  }
  double sum = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p)) throw ValidationError("non-finite probability");
    if (p < 0.0) throw ValidationError("negative probability");
    if (p > 1.0 + kProbabilitySumTolerance) {
      throw ValidationError("probability " + format_number(p) +
                            " greater than 1");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError("probability sum " + format_number(sum) +
                          " outside tolerance");
  }
  std::vector<double> out(probs.begin(), probs.end());
  const double slack = static_cast<double>(probs.size()) *
                       std::numeric_limits<double>::epsilon();
  if (std::abs(sum - 1.0) > slack) {
    for (double& p : out) p = std::min(1.0, p / sum);
  }
  return Distribution(std::move(out));
}

struct Realization {
  std::string id;
  std::optional<double> readability;  // FRES points
  std::optional<std::string> text;

  friend bool operator==(const Realization&, const Realization&) = default;
};

struct Question {
  std::string id;
  std::optional<std::string> text;
  std::optional<std::size_t> true_class;

  friend bool operator==(const Question&, const Question&) = default;
};

// One semantic unit: its realizations, its questions, and a dense grid of
// output distributions stored realization-major.
struct Instance {
  std::string instance_id;
  std::vector<Realization> realizations;
  std::vector<Question> questions;  // empty for single-element tasks
  std::vector<Distribution> cells;  // cells[r * question_slots() + q]
  // Gold class for single-element tasks (multi-element tasks carry it per
  // question).
  std::optional<std::size_t> true_class;

  std::size_t question_slots() const {
    return questions.empty() ? 1 : questions.size();
  }
  const Distribution& cell(std::size_t r, std::size_t q) const {
    return cells[r * question_slots() + q];
  }
  std::optional<std::size_t> true_class_for(std::size_t q) const {
    return questions.empty() ? true_class : questions[q].true_class;
  }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Dataset {
  Task task = Task::kMultiElement;
  std::size_t num_classes = 0;
  std::vector<Instance> instances;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Checks every Dataset invariant; throws ValidationError on the first
// violation. Distributions are assumed already validated.
inline void validate_dataset(const Dataset& ds) {
  if (ds.instances.empty()) throw ValidationError("empty dataset");
  if (ds.num_classes < 2) throw ValidationError("num_classes must be >= 2");
  std::set<std::string_view> instance_ids;
  for (const Instance& inst : ds.instances) {
    const std::string where = "instance '" + inst.instance_id + "': ";
    if (!instance_ids.insert(inst.instance_id).second) {
      throw ValidationError(where + "duplicate instance_id");
    }
    if (inst.realizations.empty()) throw ValidationError(where + "no realizations");
    if (ds.task == Task::kMultiElement && inst.questions.empty()) {
      throw ValidationError(where + "multi_element task requires questions");
    }
    if (ds.task == Task::kSingleElement && !inst.questions.empty()) {
      throw ValidationError(where + "single_element task takes no questions");
    }
    std::set<std::string_view> ids;
    for (const auto& r : inst.realizations) {
      if (!ids.insert(r.id).second) {
        throw ValidationError(where + "duplicate realization id '" + r.id + "'");
      }
      if (r.readability && !std::isfinite(*r.readability)) {
        throw ValidationError(where + "non-finite readability");
      }
    }
    ids.clear();
    for (const auto& q : inst.questions) {
      if (q.id == kSingleElementQuestionId) {
        throw ValidationError(where + "question id '_' is reserved");
      }
      if (!ids.insert(q.id).second) {
        throw ValidationError(where + "duplicate question id '" + q.id + "'");
      }
      if (q.true_class && *q.true_class >= ds.num_classes) {
        throw ValidationError(where + "true_class out of range");
      }
    }
    if (inst.true_class && *inst.true_class >= ds.num_classes) {
      throw ValidationError(where + "true_class out of range");
    }
    if (inst.cells.size() != inst.realizations.size() * inst.question_slots()) {
      throw ValidationError(where + "incomplete cell grid");
    }
    for (const auto& c : inst.cells) {
      if (c.num_classes() != ds.num_classes) {
        throw ValidationError(where + "inconsistent number of classes");
      }
    }
  }
}

namespace detail {

using Json = nlohmann::json;

inline const Json& required(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

inline std::string required_string(const Json& obj, const char* key) {
  const Json& v = required(obj, key);
  if (!v.is_string()) {
    throw ValidationError(std::string("field \"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

inline std::optional<std::string> optional_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(std::string("field \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

inline std::optional<std::size_t> optional_class(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ValidationError(std::string("field \"") + key +
                          "\" must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

inline std::vector<double> number_array(const Json& v, const char* key) {
  if (!v.is_array()) {
    throw ValidationError(std::string("field \"") + key + "\" must be an array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const Json& x : v) {
    if (!x.is_number()) {
      throw ValidationError(std::string("field \"") + key +
                            "\" must contain only numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

inline Instance parse_instance(const Json& obj, std::size_t& num_classes) {
  if (!obj.is_object()) throw ValidationError("record must be a JSON object");
  Instance inst;
  inst.instance_id = required_string(obj, "instance_id");

  const Json& reals = required(obj, "realizations");
  if (!reals.is_array()) throw ValidationError("\"realizations\" must be an array");
  if (reals.empty()) throw ValidationError("no realizations");
  for (const Json& r : reals) {
    Realization real;
    real.id = required_string(r, "id");
    if (auto it = r.find("readability"); it != r.end() && !it->is_null()) {
      if (!it->is_number()) throw ValidationError("\"readability\" must be a number");
      real.readability = it->get<double>();
    }
    real.text = optional_string(r, "text");
    inst.realizations.push_back(std::move(real));
  }

  if (auto it = obj.find("questions"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("\"questions\" must be an array");
    for (const Json& q : *it) {
      Question question;
      question.id = required_string(q, "id");
      question.text = optional_string(q, "text");
      question.true_class = optional_class(q, "true_class");
      inst.questions.push_back(std::move(question));
    }
  }
  inst.true_class = optional_class(obj, "true_class");

  std::map<std::string, std::size_t, std::less<>> r_index, q_index;
  for (std::size_t i = 0; i < inst.realizations.size(); ++i) {
    r_index.emplace(inst.realizations[i].id, i);
  }
  if (inst.questions.empty()) {
    q_index.emplace(std::string(kSingleElementQuestionId), 0);
  }
  for (std::size_t i = 0; i < inst.questions.size(); ++i) {
    q_index.emplace(inst.questions[i].id, i);
  }

  const std::size_t slots = inst.question_slots();
  std::vector<std::optional<Distribution>> grid(inst.realizations.size() * slots);
  const Json& cells = required(obj, "cells");
  if (!cells.is_array()) throw ValidationError("\"cells\" must be an array");
  for (const Json& c : cells) {
    const std::string r = required_string(c, "r");
    const std::string q = required_string(c, "q");
    auto ri = r_index.find(r);
    if (ri == r_index.end()) {
      throw ValidationError("cell references unknown realization '" + r + "'");
    }
    auto qi = q_index.find(q);
    if (qi == q_index.end()) {
      throw ValidationError("cell references unknown question '" + q + "'");
    }
    auto& slot = grid[ri->second * slots + qi->second];
    if (slot) throw ValidationError("duplicate cell (" + r + "," + q + ")");
    Distribution d = validate_distribution(number_array(required(c, "probs"), "probs"));
    if (num_classes == 0) num_classes = d.num_classes();
    if (d.num_classes() != num_classes) {
      throw ValidationError("inconsistent number of classes: expected " +
                            std::to_string(num_classes) + ", got " +
                            std::to_string(d.num_classes()));
    }
    slot = std::move(d);
  }
  for (std::size_t r = 0; r < inst.realizations.size(); ++r) {
    for (std::size_t q = 0; q < slots; ++q) {
      if (!grid[r * slots + q]) {
        const std::string qid = inst.questions.empty()
                                    ? std::string(kSingleElementQuestionId)
                                    : inst.questions[q].id;
        throw ValidationError("incomplete cell grid: missing (" +
                              inst.realizations[r].id + "," + qid + ")");
      }
    }
  }
  inst.cells.reserve(grid.size());
  for (auto& slot : grid) inst.cells.push_back(std::move(*slot));
  return inst;
}

}  // namespace detail

// Parses Dataset JSONL from a stream. `source` prefixes error messages
// ("source:line: message"). When `task` is empty it is inferred from the
// first record: any questions means multi_element.
inline Dataset parse_dataset(std::istream& in, std::optional<Task> task,
                             std::string_view source = "<input>") {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) -> ValidationError {
    return ValidationError(std::string(source) + ":" + std::to_string(line_no) +
                           ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    detail::Json obj;
    try {
      obj = detail::Json::parse(line);
    } catch (const detail::Json::parse_error& e) {
      throw fail(std::string("malformed JSON: ") + e.what());
    }
    try {
      Instance inst = detail::parse_instance(obj, ds.num_classes);
      if (!task) {
        task = inst.questions.empty() ? Task::kSingleElement : Task::kMultiElement;
      }
      if (*task == Task::kMultiElement && inst.questions.empty()) {
        throw ValidationError("multi_element task requires questions");
      }
      if (*task == Task::kSingleElement && !inst.questions.empty()) {
        throw ValidationError("single_element task takes no questions");
      }
      ds.instances.push_back(std::move(inst));
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
  }
  if (ds.instances.empty()) {
    throw ValidationError(std::string(source) + ": empty dataset");
  }
  ds.task = *task;
  try {
    validate_dataset(ds);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(source) + ": " + e.what());
  }
  return ds;
}

inline Dataset load_dataset(const std::string& path,
                            std::optional<Task> task = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return parse_dataset(in, task, path);
}

// Writes one JSON line per instance. Numbers use shortest round-trip form, so
// parse_dataset(save_dataset(ds)) == ds.
inline void save_dataset(const Dataset& ds, std::ostream& out) {
  using OJson = nlohmann::ordered_json;
  for (const Instance& inst : ds.instances) {
    OJson obj;
    obj["instance_id"] = inst.instance_id;
    OJson reals = OJson::array();
    for (const auto& r : inst.realizations) {
      OJson jr;
      jr["id"] = r.id;
      if (r.readability) jr["readability"] = *r.readability;
      if (r.text) jr["text"] = *r.text;
      reals.push_back(std::move(jr));
    }
    obj["realizations"] = std::move(reals);
    if (!inst.questions.empty()) {
      OJson qs = OJson::array();
      for (const auto& q : inst.questions) {
        OJson jq;
        jq["id"] = q.id;
        if (q.text) jq["text"] = *q.text;
        if (q.true_class) jq["true_class"] = *q.true_class;
        qs.push_back(std::move(jq));
      }
      obj["questions"] = std::move(qs);
    }
    if (inst.true_class) obj["true_class"] = *inst.true_class;
    OJson cells = OJson::array();
    for (std::size_t r = 0; r < inst.realizations.size(); ++r) {
      for (std::size_t q = 0; q < inst.question_slots(); ++q) {
        OJson jc;
        jc["r"] = inst.realizations[r].id;
        jc["q"] = inst.questions.empty() ? std::string(kSingleElementQuestionId)
                                         : inst.questions[q].id;
        jc["probs"] = std::vector<double>(inst.cell(r, q).probs().begin(),
                                          inst.cell(r, q).probs().end());
        cells.push_back(std::move(jc));
      }
    }
    obj["cells"] = std::move(cells);
    out << obj.dump() << '\n';
  }
}

}  // namespace influx
